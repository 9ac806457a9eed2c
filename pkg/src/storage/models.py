"""
Database models for the run ledger.
"""
from datetime import datetime
from typing import Optional

from sqlalchemy import JSON, DateTime, Float, Index, Integer, String, Text
from sqlalchemy.orm import DeclarativeBase, Mapped, mapped_column


class Base(DeclarativeBase):
    """Base class for all database models."""
    pass


class RunRecord(Base):
    """One CLI invocation with its arguments, exit code and summary."""

    __tablename__ = "runs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True)
    run_id: Mapped[str] = mapped_column(String(36), unique=True, index=True)

    command: Mapped[str] = mapped_column(String(32))
    system: Mapped[str] = mapped_column(String(255))
    arguments: Mapped[Optional[dict]] = mapped_column(JSON, nullable=True)
    seed: Mapped[Optional[int]] = mapped_column(Integer, nullable=True)

    exit_code: Mapped[int] = mapped_column(Integer, default=0)
    summary: Mapped[Optional[dict]] = mapped_column(JSON, nullable=True)
    error_message: Mapped[Optional[str]] = mapped_column(Text, nullable=True)

    created_at: Mapped[datetime] = mapped_column(DateTime, default=datetime.utcnow, index=True)
    duration: Mapped[float] = mapped_column(Float, default=0.0)

    __table_args__ = (
        Index("ix_run_command_created", "command", "created_at"),
        Index("ix_run_system_created", "system", "created_at"),
    )

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "command": self.command,
            "system": self.system,
            "arguments": self.arguments,
            "seed": self.seed,
            "exit_code": self.exit_code,
            "summary": self.summary,
            "error_message": self.error_message,
            "created_at": self.created_at.isoformat(),
            "duration": self.duration,
        }
