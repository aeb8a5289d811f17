"""Classical simulation of quantum phase processing."""

__version__ = "0.1.0"
