"""Reference-free video quality scoring from object appearance and motion consistency."""
__version__ = "0.1.0"
