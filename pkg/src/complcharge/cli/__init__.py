"""Command-line front end, configuration, cache and export formats."""
from .main import main

__all__ = ["main"]
