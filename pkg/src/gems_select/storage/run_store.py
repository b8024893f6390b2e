# gems_select/storage/run_store.py
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

from tinydb import Query, TinyDB

from gems_select.core.exceptions import GemsError


class StorageError(GemsError):
    """Base exception for storage errors."""

    pass


class RunPersistenceError(StorageError):
    """Raised when run persistence operations fail."""

    pass


class RunStore:
    """
    Persistent record of written reports using TinyDB.

    Reports live in a 'runs.json' database under storage_dir, one document per
    (kind, config_hash); saving the same configuration again replaces the document.
    """

    def __init__(self, storage_dir: Path):
        """
        Initialize run store with TinyDB backend.

        Args:
            storage_dir: Directory to store run data.

        Raises:
            PermissionError: If directory is not writable.
            ValueError: If path is invalid or parent does not exist.
        """
        if not storage_dir.parent.exists():
            raise ValueError(f"Parent directory does not exist: {storage_dir.parent}")

        self.storage_dir = storage_dir
        self.storage_dir.mkdir(parents=True, exist_ok=True)

        if not os.access(self.storage_dir, os.W_OK):
            raise PermissionError(f"Storage directory not writable: {storage_dir}")

        db_path = self.storage_dir / "runs.json"
        self.db = TinyDB(db_path, sort_keys=True, indent=2)
        self.runs = self.db.table("runs")

    def save_report(
        self, kind: str, config_hash: str, report: Dict[str, Any], header: Dict[str, Any]
    ) -> None:
        """
        Upsert a report keyed by (kind, config_hash).

        Args:
            kind: Subcommand that produced the report (run, complexity, ...).
            config_hash: Provenance hash of the configuration.
            report: JSON-serializable report body.
            header: Provenance header written alongside the report.

        Raises:
            RunPersistenceError: If saving fails for any reason.
        """
        try:
            Run = Query()
            document = {
                "kind": kind,
                "config_hash": config_hash,
                "header": header,
                "report": report,
            }
            self.runs.upsert(document, (Run.kind == kind) & (Run.config_hash == config_hash))
        except Exception as e:
            raise RunPersistenceError(
                f"Failed to save {kind} report {config_hash[:12]}: {e}"
            ) from e

    def load_report(self, kind: str, config_hash: str) -> Optional[Dict[str, Any]]:
        """
        Load a stored report document, or None if absent.

        Raises:
            RunPersistenceError: If loading fails.
        """
        try:
            Run = Query()
            document = self.runs.get((Run.kind == kind) & (Run.config_hash == config_hash))
            if not document or not isinstance(document, dict):
                return None
            return dict(document)
        except Exception as e:
            raise RunPersistenceError(
                f"Failed to load {kind} report {config_hash[:12]}: {e}"
            ) from e

    def list_reports(self, kind: Optional[str] = None) -> List[Dict[str, Any]]:
        """
        List stored report documents, optionally filtered by kind.

        Raises:
            RunPersistenceError: If listing fails.
        """
        try:
            Run = Query()
            results = self.runs.search(Run.kind == kind) if kind else self.runs.all()
            return [dict(doc) for doc in results]
        except Exception as e:
            raise RunPersistenceError(f"Failed to list reports: {e}") from e

    def delete_report(self, kind: str, config_hash: str) -> bool:
        """
        Delete a report from storage.

        Returns:
            True if deleted, False if not found.

        Raises:
            RunPersistenceError: If deletion fails.
        """
        try:
            Run = Query()
            removed = self.runs.remove((Run.kind == kind) & (Run.config_hash == config_hash))
            return len(removed) > 0
        except Exception as e:
            raise RunPersistenceError(
                f"Failed to delete {kind} report {config_hash[:12]}: {e}"
            ) from e

    def close(self) -> None:
        self.db.close()
