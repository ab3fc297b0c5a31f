"""Monte Carlo simulator of a buyer / insurer / reinsurer cyber-insurance market."""

__version__ = "0.1.0"
