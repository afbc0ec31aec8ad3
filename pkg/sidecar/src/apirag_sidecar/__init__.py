"""Model sidecar for apirag: /embed, /summarize, /complete over HTTP."""

from .app import create_app
from .config import SidecarConfig

__all__ = ["SidecarConfig", "create_app"]
