"""Equity-network systemic risk: returns, tail risk, exposure networks and default cascades."""

__version__ = "0.1.0"
