"""
Run ledger storage.
"""
from .database import DatabaseManager
from .models import Base, RunRecord

__all__ = [
    "Base",
    "DatabaseManager",
    "RunRecord",
]
