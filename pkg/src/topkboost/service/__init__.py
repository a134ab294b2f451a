"""HTTP service exposing interactive boosting sessions and experiment jobs."""

from .app import create_app

__all__ = ["create_app"]
