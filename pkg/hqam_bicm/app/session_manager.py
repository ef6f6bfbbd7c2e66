# hqam_bicm/app/session_manager.py
import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from hqam_bicm import __version__
from hqam_bicm.app.config import Config
from hqam_bicm.data.models import RunManifest
from hqam_bicm.utils.path_manager import PathManager


class ManifestManager:
    """Builds, saves and loads run manifests."""

    def __init__(self, path_manager: PathManager):
        """
        Initializes the ManifestManager.

        Args:
            path_manager: Resolves where manifests are written, next to the outputs.
        """
        self.path_manager = path_manager

    @staticmethod
    def compute_hash(command: str, config: Dict[str, Any], seed: Optional[int], outputs: List[str]) -> str:
        """
        Deterministic manifest hash over everything except wall time.

        Args:
            command: Command name.
            config: Fully resolved configuration.
            seed: Master seed, if any.
            outputs: Output file names.

        Returns:
            The first 16 hex digits of a SHA-256 digest.
        """
        payload = {"command": command, "config": config, "version": __version__, "seed": seed,
                   "outputs": outputs, "schema_version": Config.SCHEMA_VERSION}
        blob = json.dumps(payload, sort_keys=True, default=str).encode(Config.DEFAULT_ENCODING)
        return hashlib.sha256(blob).hexdigest()[:16]

    def build(self, command: str, config: Dict[str, Any], seed: Optional[int], outputs: List[str]) -> RunManifest:
        return RunManifest(
            command=command,
            config=config,
            version=__version__,
            seed=seed,
            outputs=outputs,
            wall_time=0.0,
            schema_version=Config.SCHEMA_VERSION,
            hash=self.compute_hash(command, config, seed, outputs),
        )

    def save_manifest(self, manifest: RunManifest) -> Optional[Path]:
        """
        Saves the manifest as JSON.

        Args:
            manifest: The manifest to write.

        Returns:
            The written path, or None on failure.
        """
        path = self.path_manager.manifest_path(manifest.command, manifest.hash)
        try:
            with path.open('w', encoding=Config.DEFAULT_ENCODING) as f:
                f.write(manifest.model_dump_json(indent=2))
            return path
        except IOError as e:
            logging.error(f"Error saving manifest: {e}")
            return None

    def load_manifest(self, path: Path) -> Optional[RunManifest]:
        """
        Loads a manifest from JSON.

        Returns:
            The manifest, or None if missing or invalid.
        """
        if not path.exists():
            return None
        try:
            with path.open('r', encoding=Config.DEFAULT_ENCODING) as f:
                return RunManifest.model_validate(json.load(f))
        except (json.JSONDecodeError, IOError, ValidationError) as e:
            logging.error(f"Error loading manifest: {e}")
            return None
