"""Wave-function collapse schemes evaluated on events in Minkowski space-time."""

__version__ = "0.1.0"
