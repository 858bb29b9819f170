"""Monte Carlo laboratory for random walks in random scenery."""

__version__ = "0.1.0"
