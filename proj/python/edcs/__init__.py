"""Entangled dual-comb spectroscopy simulator (Python bindings)."""
from ._edcs import *  # noqa: F401,F403
from ._edcs import ConfigError, InvalidArgument, IoError, NumericError  # noqa: F401

__version__ = "0.1.0"
