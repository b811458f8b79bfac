"""Classical simulation of dissipative ground-state preparation along reaction paths."""
__version__ = "0.1.0"
