"""FastAPI service exposing the diffread experiments."""

from .app import create_app

__all__ = ["create_app"]
