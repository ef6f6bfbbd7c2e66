# hqam_bicm/utils/parsing.py
from typing import List, Optional

import numpy as np

from hqam_bicm.app.error_handler import ConfigError


def parse_float_list(text: Optional[str]) -> List[float]:
    """'0.5,0.25' -> [0.5, 0.25]; empty or None -> []."""
    if text is None or not str(text).strip():
        return []
    try:
        return [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError as e:
        raise ConfigError(f"invalid number list '{text}'") from e


def parse_snr_grid(text: str) -> List[float]:
    """'10:15:0.5' (inclusive range) or '10,12,14'."""
    text = str(text).strip()
    if ":" not in text:
        values = parse_float_list(text)
    else:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"SNR range '{text}' must read start:stop:step")
        try:
            start, stop, step = (float(p) for p in parts)
        except ValueError as e:
            raise ConfigError(f"invalid SNR range '{text}'") from e
        if step <= 0 or stop < start:
            raise ConfigError(f"SNR range '{text}' must have start <= stop and step > 0")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        values = [round(start + i * step, 10) for i in range(count)]
    if not values:
        raise ConfigError("the SNR grid is empty")
    return values
