# hqam_bicm/core/channel.py
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from hqam_bicm.app.error_handler import ConfigError

AWGN = "awgn"
NAKAGAMI = "nakagami"


def db_to_linear(value_db):
    return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)


def linear_to_db(value):
    return 10.0 * np.log10(value)


@dataclass(frozen=True)
class Channel:
    """
    Real-dimension channel with average SNR gamma_bar (linear).

    Nakagami-m fading makes the instantaneous SNR Gamma(m, gamma_bar/m)
    distributed, independently per symbol.
    """
    kind: str
    gamma_bar: float
    m: Optional[float] = None

    def __post_init__(self):
        if self.kind not in (AWGN, NAKAGAMI):
            raise ConfigError(f"unknown channel kind '{self.kind}'")
        if not self.gamma_bar > 0:
            raise ConfigError("average SNR must be positive")
        if self.kind == NAKAGAMI and (self.m is None or not self.m > 0):
            raise ConfigError("Nakagami channels need m > 0")

    @classmethod
    def awgn(cls, gamma_db: float) -> "Channel":
        return cls(AWGN, float(db_to_linear(gamma_db)))

    @classmethod
    def nakagami(cls, m: float, gamma_db: float) -> "Channel":
        return cls(NAKAGAMI, float(db_to_linear(gamma_db)), float(m))

    @property
    def is_fading(self) -> bool:
        return self.kind == NAKAGAMI

    @property
    def gamma_db(self) -> float:
        return float(linear_to_db(self.gamma_bar))

    @property
    def label(self) -> str:
        return "awgn" if not self.is_fading else f"nakagami-m{self.m:g}"

    def at_db(self, gamma_db: float) -> "Channel":
        return replace(self, gamma_bar=float(db_to_linear(gamma_db)))

    def sample_snr(self, rng: np.random.Generator, size=None) -> np.ndarray:
        """Per-symbol instantaneous SNR."""
        if not self.is_fading:
            return np.full(size if size is not None else (), self.gamma_bar)
        draw = rng.gamma(shape=self.m, scale=self.gamma_bar / self.m, size=size)
        # tiny m underflows to 0, which the demapper rejects
        return np.maximum(draw, np.finfo(float).tiny)
