"""Heterotic flow laboratory: homothety reductions, 3D flows and soliton residuals."""
from ._core import *  # noqa: F401,F403
from ._core import REPORT_SCHEMA_VERSION, catalog_names

__all__ = [name for name in dir() if not name.startswith("_")]
