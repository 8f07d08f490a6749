"""HTTP service wrapping the toolkit; the CLI is a thin client of this app."""

from .app import app, create_app

__all__ = ["app", "create_app"]
