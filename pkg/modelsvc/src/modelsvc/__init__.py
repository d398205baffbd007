"""HTTP model service implementing the /embed, /generate, /score protocols."""

from .app import create_app
from .config import ServiceConfig

__all__ = ["create_app", "ServiceConfig"]
__version__ = "0.1.0"
