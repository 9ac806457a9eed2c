"""
System model and built-in catalog.
"""
from .catalog import CATALOG, METRIC_OPTIONS, build_system, catalog_entries, make_system, system_spec
from .models import System, SystemSpec

__all__ = [
    "CATALOG",
    "METRIC_OPTIONS",
    "System",
    "SystemSpec",
    "build_system",
    "catalog_entries",
    "make_system",
    "system_spec",
]
