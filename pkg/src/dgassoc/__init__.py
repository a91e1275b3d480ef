"""Disease-gene association prediction from event-annotated documents."""

__version__ = "0.1.0"
