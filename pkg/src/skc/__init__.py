"""Secret-key capacity bounds for CSI and RSS sampling with a correlated eavesdropper."""

__version__ = "0.1.0"
