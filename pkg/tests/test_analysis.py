import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from cortical.analysis import (
    ArtifactError,
    Pmf,
    SweepEntry,
    SweepResult,
    cauchy_cdf,
    cluster_points,
    default_merge_tol,
    emit_csv,
    emit_svg,
    extract_pmf,
    ks_critical,
    ks_statistic,
    radial_profile,
    rayleigh_amplitude,
    read_pmf,
    read_sweep,
    read_trace,
    write_trace,
)
from cortical.analysis import figures, svg, tables
from cortical.trainer import CapacityTrace

SVG_NS = "{http://www.w3.org/2000/svg}"


# -- extract_pmf ----------------------------------------------------------------------


def test_two_exact_atoms():
    pmf = extract_pmf(np.repeat([-1.0, 1.0], 500))
    assert np.allclose(pmf.support, [-1, 1])
    assert np.allclose(pmf.mass, [0.5, 0.5])


def test_tight_gaussian_is_one_atom():
    pmf = extract_pmf(np.random.default_rng(0).normal(0, 1e-4, 5000))
    assert pmf.n_atoms == 1
    assert abs(pmf.support[0]) < 1e-4 and pmf.mass[0] == 1


def test_light_clusters_are_dropped():
    x = np.concatenate([np.zeros(996), np.full(4, 5.0)])
    pmf = extract_pmf(x)
    assert pmf.n_atoms == 1 and pmf.mass[0] == 1


def test_scattered_strays_do_not_bridge_atoms():
    rng = np.random.default_rng(1)
    x = np.concatenate([np.full(4700, -1.0), np.full(4700, 1.0), rng.uniform(-1, 1, 600)])
    pmf = extract_pmf(x)
    assert pmf.n_atoms == 2
    assert np.allclose(pmf.support, [-1, 1], atol=0.05)


def test_extract_pmf_errors():
    with pytest.raises(ValueError):
        extract_pmf([])
    with pytest.raises(ValueError):
        extract_pmf(np.zeros(999))
    with pytest.raises(ValueError):
        extract_pmf(np.zeros(2000), merge_tol=0.0)


def test_default_merge_tol():
    assert default_merge_tol(np.array([0.0, 1.0])) == 0.05
    assert math.isclose(default_merge_tol(np.array([-10.0, 10.0])), 0.2)


def test_support_separated_by_more_than_merge_tol():
    rng = np.random.default_rng(2)
    x = np.concatenate([rng.normal(c, 0.01, 800) for c in (-2, -0.5, 0.7, 3)])
    pmf = extract_pmf(x, merge_tol=0.1)
    assert np.all(np.diff(pmf.support) > 0.1)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 100), st.integers(0, 1000))
def test_scale_equivariance(c, seed):
    rng = np.random.default_rng(seed)
    x = np.concatenate([rng.normal(-1, 0.01, 700), rng.normal(0.5, 0.01, 500), rng.normal(2, 0.01, 300)])
    a = extract_pmf(x, merge_tol=0.1)
    b = extract_pmf(c * x, merge_tol=0.1 * c)
    assert np.allclose(b.support, c * a.support, rtol=1e-9, atol=1e-12)
    assert np.allclose(b.mass, a.mass)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.05, 1.0), min_size=1, max_size=5), st.integers(0, 1000))
def test_roundtrip_from_sampled_pmf(weights, seed):
    w = np.array(weights) / np.sum(weights)
    pmf = Pmf(np.arange(len(w)) * 1.0 - 1.0, w)
    m = 20_000
    x = pmf.sample(m, np.random.default_rng(seed))
    got = extract_pmf(x, merge_tol=0.1)
    assert got.n_atoms == pmf.n_atoms
    assert np.allclose(got.support, pmf.support)
    assert np.all(np.abs(got.mass - pmf.mass) < 3 / math.sqrt(m) + 0.005)


def test_pmf_validation():
    with pytest.raises(ValueError):
        Pmf(np.array([0.0, 1.0]), np.array([0.7, 0.7]))
    with pytest.raises(ValueError):
        Pmf(np.array([1.0, 0.0]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        Pmf(np.array([0.0, 1.0]), np.array([1.0, 0.0]))


# -- KS -------------------------------------------------------------------------------


def test_ks_null_rarely_rejects():
    rng = np.random.default_rng(3)
    cdf = cauchy_cdf(1.0)
    rejects = 0
    for _ in range(200):
        stat, crit = ks_statistic(stats.cauchy.rvs(size=10_000, random_state=rng), cdf)
        rejects += stat >= crit[0.01]
    # expected 1%; allow sampling slack
    assert rejects <= 6


def test_ks_matches_scipy():
    x = np.random.default_rng(4).standard_cauchy(2000)
    stat, _ = ks_statistic(x, cauchy_cdf(1.0))
    assert math.isclose(stat, stats.kstest(x, "cauchy").statistic, rel_tol=1e-12)


def test_ks_normal_vs_cauchy_rejects():
    x = np.random.default_rng(5).normal(size=10_000)
    stat, crit = ks_statistic(x, cauchy_cdf(1.0))
    assert stat > 0.04 > crit[0.01]


def test_max_normal_cauchy_cdf_gap():
    # the gap is extremal where the densities cross
    from scipy.optimize import brentq

    t_star = brentq(lambda t: stats.norm.pdf(t) - stats.cauchy.pdf(t), 0.5, 3.0)
    analytic = abs(stats.norm.cdf(t_star) - stats.cauchy.cdf(t_star))
    t = np.linspace(-5, 5, 200_001)
    gap = np.max(np.abs(stats.norm.cdf(t) - stats.cauchy.cdf(t)))
    assert abs(gap - analytic) < 1e-6
    assert abs(gap - 0.1256) < 1e-4
    assert gap > 0.04


def test_ks_constant_samples():
    stat, _ = ks_statistic(np.full(500, 0.3), stats.norm.cdf)
    assert stat >= 0.5


def test_ks_critical_values():
    _, crit = ks_statistic(np.random.default_rng(6).normal(size=10_000), stats.norm.cdf)
    assert math.isclose(crit[0.01], 0.0163)
    assert math.isclose(ks_critical(10_000, 0.05), 0.0136)


def test_ks_errors():
    with pytest.raises(ValueError):
        ks_statistic(np.zeros(99), stats.norm.cdf)
    with pytest.raises(ValueError):
        ks_statistic(np.linspace(0, 1, 200), lambda t: 1 - t)


# -- radial profile and clusters ------------------------------------------------------


def test_unit_circle_profile():
    theta = np.random.default_rng(7).uniform(-np.pi, np.pi, 5000)
    prof = radial_profile(np.column_stack([np.cos(theta), np.sin(theta)]))
    assert prof.magnitude.n_atoms == 1
    assert abs(prof.magnitude.support[0] - 1) < 1e-9
    assert prof.phase_ks < ks_critical(5000, 0.01)


def test_radial_profile_with_matrix():
    theta = np.random.default_rng(8).uniform(-np.pi, np.pi, 3000)
    pts = np.column_stack([np.cos(theta), np.sin(theta) / 3])
    prof = radial_profile(pts, np.diag([1.0, 3.0]))
    assert prof.magnitude.n_atoms == 1


def test_radial_profile_errors():
    with pytest.raises(ValueError):
        radial_profile(np.zeros((2000, 2)))
    with pytest.raises(ValueError):
        radial_profile(np.ones((10, 2)))


def test_cluster_points_two_clusters():
    rng = np.random.default_rng(9)
    pts = np.vstack([rng.normal((1, 0), 0.01, (1000, 2)), rng.normal((-1, 0), 0.01, (1000, 2))])
    cl = cluster_points(pts)
    assert len(cl) == 2
    assert np.allclose(cl.mass, 0.5)
    assert np.allclose(np.abs(cl.centers[:, 0]), 1, atol=0.01)


def test_rayleigh_amplitude():
    assert np.allclose(rayleigh_amplitude([1.0, 0.5, 0.2]), [0.0, 1.0, 2.0])


# -- CSV --------------------------------------------------------------------------------


def _sweep():
    pmf2 = Pmf(np.array([-1.0, 1.0]), np.array([0.5, 0.5]))
    pmf3 = Pmf(np.array([-2.5, 0.1 / 3, 2.5]), np.array([0.4, 0.2, 0.4]))
    return SweepResult([
        SweepEntry(1.0, 0.33, 0.5, 0.5, pmf2),
        SweepEntry(2.5, 0.7 + 1e-13, 1.2, 1.1, pmf3),
        SweepEntry(3.0, math.nan, 1.3, 1.2, None, status="diverged@12"),
    ])


def test_empty_sweep_csv_is_header_only(tmp_path):
    path = emit_csv(SweepResult([]), tmp_path / "sweep.csv")
    assert path.read_text().strip() == ",".join(tables.SWEEP_HEADER)


def test_three_point_pmf_csv(tmp_path):
    pmf = Pmf(np.array([-2.5, 0.0, 2.5]), np.array([0.4, 0.2, 0.4]))
    path = emit_csv(pmf, tmp_path / "pmf.csv")
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "support,mass" and len(lines) == 4
    assert math.isclose(sum(float(l.split(",")[1]) for l in lines[1:]), 1.0)


def test_sweep_roundtrip_full_precision(tmp_path):
    res = _sweep()
    tables.write_sweep(res, tmp_path / "s.csv")
    tables.write_sweep_pmfs(res, tmp_path / "p.csv")
    back = read_sweep(tmp_path / "s.csv", tmp_path / "p.csv")
    for a, b in zip(res, back):
        assert a.A == b.A and a.shannon_bits == b.shannon_bits and a.mckellips_bits == b.mckellips_bits
        assert a.capacity_nats == b.capacity_nats or (math.isnan(a.capacity_nats) and math.isnan(b.capacity_nats))
        assert a.status == b.status and a.n_atoms == b.n_atoms
        if a.pmf is not None:
            assert np.array_equal(a.pmf.support, b.pmf.support)
            assert np.array_equal(a.pmf.mass, b.pmf.mass)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(1e-300, 1e300), min_size=1, max_size=8))
def test_pmf_roundtrip_property(tmp_path_factory, raw):
    support = np.sort(np.array(raw))
    mass = np.full(len(raw), 1.0 / len(raw))
    mass[-1] = 1.0 - mass[:-1].sum()
    pmf = Pmf(support, mass)
    path = tmp_path_factory.mktemp("rt") / "pmf.csv"
    back = read_pmf(emit_csv(pmf, path))
    assert np.array_equal(back.support, pmf.support)
    assert np.array_equal(back.mass, pmf.mass)


def test_trace_roundtrip(tmp_path):
    tr = CapacityTrace(alpha=1.0, window=2)
    for v in (0.1, 0.2 / 3, -0.3):
        tr.record(v, 1e-7)
    back = read_trace(write_trace(tr, tmp_path / "trace.csv"))
    assert np.array_equal(back["J"], tr.value)
    assert np.array_equal(back["capacity_nats"], tr.capacity)
    assert np.array_equal(back["step"], [0, 1, 2])


def test_unwritable_path_names_path(tmp_path):
    target = tmp_path / "missing" / "pmf.csv"
    with pytest.raises(ArtifactError, match="missing"):
        emit_csv(Pmf(np.array([0.0]), np.array([1.0])), target)


def test_sweep_rejects_unsorted_grid():
    with pytest.raises(ValueError):
        SweepResult([SweepEntry(2.0, 0, 0, 0), SweepEntry(1.0, 0, 0, 0)])


# -- SVG / PNG --------------------------------------------------------------------------


def _parse(path):
    root = ET.parse(path).getroot()
    assert root.tag == SVG_NS + "svg"
    assert root.get("viewBox") == "0 0 800 600"
    return root


def test_sweep_svg_structure(tmp_path):
    pmf = Pmf(np.array([-1.0, 1.0]), np.array([0.5, 0.5]))
    res = SweepResult([SweepEntry(a, 0.3 * a, 0.6 * a, 0.5 * a, pmf) for a in (0.5, 1, 1.5, 2, 2.5)])
    root = _parse(emit_svg(res, tmp_path / "capacity.svg"))
    assert len(root.findall(f".//{SVG_NS}circle[@class='capacity']")) == 5
    assert len(root.findall(f".//{SVG_NS}polyline[@class='bound']")) == 2
    assert len(root.findall(f".//{SVG_NS}line[@class='xtick']")) == 5
    assert len(root.findall(f".//{SVG_NS}line[@class='ytick']")) == 5


def test_pmf_svg_marker_radius_follows_mass(tmp_path):
    pmf = Pmf(np.array([-1.0, 0.0, 1.0]), np.array([0.6, 0.1, 0.3]))
    root = _parse(emit_svg(pmf, tmp_path / "pmf.svg"))
    r = [float(c.get("r")) for c in root.findall(f".//{SVG_NS}circle[@class='marker']")]
    assert len(r) == 3 and r[0] > r[2] > r[1]


def test_bifurcation_and_trace_svg(tmp_path):
    _parse(svg.bifurcation_svg(_sweep(), tmp_path / "b.svg"))
    _parse(svg.trace_svg(np.linspace(0, 1, 50), tmp_path / "t.svg", reference=0.9))
    _parse(svg.sweep_svg(SweepResult([]), tmp_path / "empty.svg"))


def test_png_figures(tmp_path):
    pmf = Pmf(np.array([-1.0, 1.0]), np.array([0.5, 0.5]))
    paths = [
        figures.pmf_figure(pmf, tmp_path / "pmf.png"),
        figures.sweep_figure(_sweep(), tmp_path / "sweep.png"),
        figures.trace_figure(np.linspace(0, 1, 20), tmp_path / "trace.png", 0.9),
        figures.samples_figure(np.random.default_rng(0).normal(size=2000), tmp_path / "s.png",
                               stats.norm.pdf),
        figures.scatter_figure(np.random.default_rng(1).normal(size=(500, 2)), tmp_path / "xy.png"),
    ]
    for p in paths:
        assert p.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
