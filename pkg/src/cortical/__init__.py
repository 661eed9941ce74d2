"""Learn capacity-achieving channel input distributions with a cooperative
generator/discriminator pair, and check them against classical baselines."""

__version__ = "0.1.0"
