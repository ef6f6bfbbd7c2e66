# hqam_bicm/utils/path_manager.py
from pathlib import Path

from hqam_bicm.app.config import Config


class PathManager:
    """Resolves result and manifest locations under the output directory."""

    def __init__(self, out_dir: str):
        self.out_dir = Path(out_dir).expanduser().resolve()

    def ensure_out_dir(self) -> Path:
        """Create the output directory if it doesn't exist."""
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir

    def output_path(self, stem: str, suffix: str) -> Path:
        """Path of a result file such as bound.csv."""
        return self.ensure_out_dir() / f"{stem}{suffix}"

    def manifest_path(self, command: str, manifest_hash: str) -> Path:
        return self.ensure_out_dir() / f"{command}-{manifest_hash}-{Config.MANIFEST_NAME}"
