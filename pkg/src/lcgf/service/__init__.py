"""HTTP service wrapping the core algebra and transform."""

from .app import create_app

__all__ = ["create_app"]
