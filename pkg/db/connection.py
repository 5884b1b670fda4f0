"""
Database connection module for the run registry
Uses SQLAlchemy with one SQLite file per output directory
"""
from __future__ import annotations

import os
from contextlib import contextmanager
from typing import Dict

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import declarative_base, sessionmaker

# ==========================
# Registry location
# ==========================
REGISTRY_FILENAME = "registry.sqlite"

# Base class for models
Base = declarative_base()

_engines: Dict[str, Engine] = {}


def registry_path(output_dir: str) -> str:
    return os.path.join(os.path.abspath(output_dir), REGISTRY_FILENAME)


def get_engine(output_dir: str) -> Engine:
    """
    Engine for the registry inside ``output_dir``; created once per path.
    """
    path = registry_path(output_dir)
    if path not in _engines:
        os.makedirs(os.path.dirname(path), exist_ok=True)
        _engines[path] = create_engine(f"sqlite:///{path}", echo=False, future=True)
    return _engines[path]


@contextmanager
def get_db(output_dir: str):
    """
    Yield a session bound to the registry of ``output_dir``.
    Ensures the session is closed after use.
    """
    SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=get_engine(output_dir))
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()


def dispose_engines() -> None:
    """Close pooled connections, e.g. before a test removes its temporary directory."""
    for engine in _engines.values():
        engine.dispose()
    _engines.clear()
