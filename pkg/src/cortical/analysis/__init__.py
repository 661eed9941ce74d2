"""PMF extraction, goodness of fit, and CSV/SVG/PNG artifacts."""

from .ks import KS_COEFFICIENTS, cauchy_cdf, ks_statistic
from .pmf import (
    Clusters,
    Pmf,
    RadialProfile,
    cluster_points,
    default_merge_tol,
    extract_pmf,
    ks_critical,
    radial_profile,
    rayleigh_amplitude,
)
from .svg import emit_svg
from .tables import (
    ArtifactError,
    SweepEntry,
    SweepResult,
    read_pmf,
    read_sweep,
    read_trace,
    write_pmf,
    write_sweep,
    write_trace,
)


def emit_csv(result, path):
    """Write a :class:`Pmf` as ``pmf.csv`` or a :class:`SweepResult` as ``sweep.csv``."""
    if isinstance(result, Pmf):
        return write_pmf(result, path)
    if isinstance(result, SweepResult):
        return write_sweep(result, path)
    return write_trace(result, path)


__all__ = [
    "ArtifactError", "Clusters", "KS_COEFFICIENTS", "Pmf", "RadialProfile", "SweepEntry",
    "SweepResult", "cauchy_cdf", "cluster_points", "default_merge_tol", "emit_csv", "emit_svg",
    "extract_pmf", "ks_critical", "ks_statistic", "radial_profile", "rayleigh_amplitude",
    "read_pmf", "read_sweep", "read_trace", "write_pmf", "write_sweep", "write_trace",
]
