"""Monte Carlo statistics of entanglement for Haar-random qubit states
under quenched coefficient disorder."""

__version__ = "0.1.0"
