# hqam_bicm/data/validator.py
from typing import Dict, List, Optional, Sequence, Tuple

from hqam_bicm.core.constellation import validate_region


class ConfigValidator:
    """Validates user-supplied configuration values."""

    @staticmethod
    def validate_constellation(M: int, alphas: Sequence[float]) -> Tuple[bool, List[str]]:
        """Validate constellation size and parameters."""
        errors = []
        if M < 2 or (M & (M - 1)) != 0:
            errors.append(f"M must be a power of two >= 2, got {M}")
            return False, errors
        q = M.bit_length() - 1
        if len(alphas) != q - 1:
            errors.append(f"M={M} needs {q - 1} alphas, got {len(alphas)}")
            return False, errors
        errors.extend(validate_region(alphas).violations)
        return len(errors) == 0, errors

    @staticmethod
    def validate_channel(kind: str, m: Optional[float]) -> Tuple[bool, List[str]]:
        """Validate the channel family and its shape parameter."""
        errors = []
        if kind not in ("awgn", "nakagami"):
            errors.append(f"unknown channel '{kind}'")
        elif kind == "nakagami" and (m is None or m <= 0):
            errors.append("Nakagami channels need --m > 0")
        elif kind == "awgn" and m is not None:
            errors.append("--m only applies to Nakagami channels")
        return len(errors) == 0, errors

    @staticmethod
    def validate_simulation(values: Dict) -> Tuple[bool, List[str]]:
        """Validate stop-rule and block settings."""
        errors = []
        for key in ("block_length", "min_errors", "max_blocks"):
            value = values.get(key)
            if value is None or int(value) < 1:
                errors.append(f"{key} must be a positive integer")
        if not values.get("snr_db"):
            errors.append("the SNR grid is empty")
        return len(errors) == 0, errors

    @staticmethod
    def validate_wmax(w_max: int, free_distance: Optional[int]) -> Tuple[bool, List[str]]:
        """Validate the spectrum truncation against the code's free distance."""
        errors = []
        if w_max < 1:
            errors.append("wmax must be positive")
        elif free_distance is not None and w_max < free_distance:
            errors.append(f"wmax={w_max} is below the free distance {free_distance}; the spectrum would be empty")
        return len(errors) == 0, errors
