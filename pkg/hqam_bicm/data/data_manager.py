# hqam_bicm/data/data_manager.py
import json
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from hqam_bicm.app.config import Config
from hqam_bicm.app.error_handler import ConfigError


class ResultWriter:
    """Writes CSV and JSON results tagged with their manifest hash, and reads config documents."""

    def __init__(self, manifest_hash: str):
        self.manifest_hash = manifest_hash

    def header(self) -> str:
        return f"# manifest={self.manifest_hash} schema={Config.SCHEMA_VERSION}\n"

    def to_csv_text(self, rows: List[Dict[str, Any]]) -> str:
        """CSV text with the manifest comment line first."""
        return self.header() + pd.DataFrame(rows).to_csv(index=False)

    def to_gnuplot_text(self, rows: List[Dict[str, Any]]) -> str:
        """Whitespace-separated columns with a commented header, for gnuplot."""
        frame = pd.DataFrame(rows)
        return self.header() + "# " + " ".join(frame.columns) + "\n" + frame.to_csv(sep=" ", index=False, header=False)

    def save_csv(self, rows: List[Dict[str, Any]], path: Path, gnuplot: bool = False) -> bool:
        """Save rows as CSV, or in the gnuplot layout."""
        text = self.to_gnuplot_text(rows) if gnuplot else self.to_csv_text(rows)
        try:
            with open(path, 'w', encoding=Config.DEFAULT_ENCODING, newline='') as f:
                f.write(text)
            return True
        except Exception as e:
            logging.error(f"Failed to save CSV {path}: {e}")
            return False

    def tag(self, payload: Any) -> Dict[str, Any]:
        return {"manifest": self.manifest_hash, "schema": Config.SCHEMA_VERSION, "data": payload}

    def save_json(self, payload: Any, path: Path) -> bool:
        """Save a JSON document wrapped with the manifest hash."""
        try:
            with open(path, 'w', encoding=Config.DEFAULT_ENCODING) as f:
                json.dump(self.tag(payload), f, indent=2, ensure_ascii=False)
            return True
        except Exception as e:
            logging.error(f"Failed to save JSON {path}: {e}")
            return False


def load_csv(path: Path) -> pd.DataFrame:
    """Read a result CSV, skipping its manifest comment line."""
    return pd.read_csv(path, comment="#")


def load_config_document(path: Optional[Path]) -> Dict[str, Any]:
    """Load a TOML or JSON configuration document; an empty dict when path is None."""
    if path is None:
        return {}
    path = Path(path)
    try:
        if path.suffix.lower() == ".toml":
            with open(path, 'rb') as f:
                return tomllib.load(f)
        with open(path, 'r', encoding=Config.DEFAULT_ENCODING) as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"config document not found: {path}") from e
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ConfigError(f"config document {path} is malformed: {e}") from e
