"""
CRUD operations for the run registry
"""
from __future__ import annotations

from typing import List, Optional

from sqlalchemy import Column, DateTime, Float, ForeignKey, Integer, String, Text, func
from sqlalchemy.orm import Session, relationship

from .connection import Base, get_engine


# ==========================
# Models
# ==========================

class RunRecord(Base):
    __tablename__ = "runs"

    run_id = Column(Integer, primary_key=True, autoincrement=True)
    scenario = Column(String(64), nullable=False)
    seed = Column(String(20), nullable=False)  # up to 2**64 - 1, beyond SQLite INTEGER
    config_hash = Column(String(64), nullable=False)
    status = Column(String(32), nullable=False, default="running")  # running / ok / config_error / guard:<name>
    exit_code = Column(Integer)
    wall_time = Column(Float)
    manifest_path = Column(Text)
    created_at = Column(DateTime, server_default=func.now())

    artifacts = relationship("ArtifactRecord", back_populates="run", cascade="all, delete-orphan")


class ArtifactRecord(Base):
    __tablename__ = "artifacts"

    artifact_id = Column(Integer, primary_key=True, autoincrement=True)
    run_id = Column(Integer, ForeignKey("runs.run_id"), nullable=False)
    path = Column(Text, nullable=False)
    digest = Column(String(64), nullable=False)
    kind = Column(String(16), nullable=False)  # csv / json
    size = Column(Integer)

    run = relationship("RunRecord", back_populates="artifacts")


# ==========================
# Create tables (one-time init)
# ==========================
def init_db(output_dir: str):
    Base.metadata.create_all(bind=get_engine(output_dir))


# ==========================
# CRUD Operations
# ==========================

# --- Runs ---
def create_run(db: Session, scenario: str, seed: int, config_hash: str) -> RunRecord:
    run = RunRecord(scenario=scenario, seed=str(seed), config_hash=config_hash, status="running")
    db.add(run)
    db.commit()
    db.refresh(run)
    return run


def finish_run(db: Session, run_id: int, status: str, exit_code: int, wall_time: float,
               manifest_path: Optional[str] = None) -> Optional[RunRecord]:
    """
    Record the outcome of a run.
    :param db: SQLAlchemy session
    :param run_id: Run ID from create_run
    :param status: "ok", "config_error" or "guard:<name>"
    :param exit_code: process exit status
    :param wall_time: seconds
    :param manifest_path: path of the written manifest, if any
    :return: Updated RunRecord or None when the run is unknown
    """
    run = db.get(RunRecord, run_id)
    if run is None:
        return None
    run.status = status
    run.exit_code = exit_code
    run.wall_time = wall_time
    run.manifest_path = manifest_path
    db.commit()
    db.refresh(run)
    return run


def get_runs(db: Session, scenario: Optional[str] = None) -> List[RunRecord]:
    query = db.query(RunRecord)
    if scenario:
        query = query.filter(RunRecord.scenario == scenario)
    return query.order_by(RunRecord.run_id).all()


# --- Artifacts ---
def add_artifact(db: Session, run_id: int, path: str, digest: str, kind: str, size: int) -> ArtifactRecord:
    artifact = ArtifactRecord(run_id=run_id, path=path, digest=digest, kind=kind, size=size)
    db.add(artifact)
    db.commit()
    db.refresh(artifact)
    return artifact


def get_artifacts_for_run(db: Session, run_id: int) -> List[ArtifactRecord]:
    return db.query(ArtifactRecord).filter(ArtifactRecord.run_id == run_id).order_by(ArtifactRecord.artifact_id).all()
