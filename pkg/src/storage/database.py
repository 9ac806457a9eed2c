"""
Database manager for the run ledger.
"""
import uuid
from pathlib import Path
from typing import List, Optional

from sqlalchemy import desc, select
from sqlalchemy.engine import make_url
from sqlalchemy.ext.asyncio import AsyncSession, async_sessionmaker, create_async_engine

from ..logger import logger
from .models import Base, RunRecord


class DatabaseManager:
    """Manages database operations."""

    def __init__(self, database_url: str = "sqlite+aiosqlite:///./data/subfins.db"):
        """
        Initialize database manager.

        Args:
            database_url: SQLAlchemy database URL
        """
        self.database_url = database_url
        self.engine = create_async_engine(database_url, echo=False)
        self.session_factory = async_sessionmaker(
            self.engine, class_=AsyncSession, expire_on_commit=False
        )

    async def init_db(self):
        """Create the database file's directory and the tables."""
        url = make_url(self.database_url)
        if url.get_backend_name() == "sqlite" and url.database not in (None, "", ":memory:"):
            Path(url.database).parent.mkdir(parents=True, exist_ok=True)
        async with self.engine.begin() as conn:
            await conn.run_sync(Base.metadata.create_all)

    async def close(self):
        """Close database connections."""
        await self.engine.dispose()

    async def record_run(
        self,
        command: str,
        system: str,
        arguments: Optional[dict] = None,
        seed: Optional[int] = None,
        exit_code: int = 0,
        summary: Optional[dict] = None,
        error_message: Optional[str] = None,
        duration: float = 0.0,
    ) -> RunRecord:
        """Store one invocation."""
        record = RunRecord(
            run_id=str(uuid.uuid4()),
            command=command,
            system=system,
            arguments=arguments,
            seed=seed,
            exit_code=exit_code,
            summary=summary,
            error_message=error_message,
            duration=duration,
        )
        async with self.session_factory() as session:
            session.add(record)
            await session.commit()
            await session.refresh(record)
        logger.debug(f"Recorded run {record.run_id} ({command} on {system}, exit {exit_code})")
        return record

    async def get_run(self, run_id: str) -> Optional[RunRecord]:
        """Get run by ID."""
        async with self.session_factory() as session:
            result = await session.execute(select(RunRecord).where(RunRecord.run_id == run_id))
            return result.scalar_one_or_none()

    async def recent_runs(
        self,
        command: Optional[str] = None,
        system: Optional[str] = None,
        failed_only: bool = False,
        limit: int = 20,
    ) -> List[RunRecord]:
        """List runs, newest first, with optional filters."""
        async with self.session_factory() as session:
            query = select(RunRecord)
            if command:
                query = query.where(RunRecord.command == command)
            if system:
                query = query.where(RunRecord.system == system)
            if failed_only:
                query = query.where(RunRecord.exit_code != 0)
            query = query.order_by(desc(RunRecord.created_at), desc(RunRecord.id)).limit(limit)
            result = await session.execute(query)
            return list(result.scalars().all())
