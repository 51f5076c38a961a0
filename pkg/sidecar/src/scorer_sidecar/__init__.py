"""Reference implementation of the token-scorer wire protocol."""

__version__ = "0.1.0"
