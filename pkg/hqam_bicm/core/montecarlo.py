# hqam_bicm/core/montecarlo.py
"""
End-to-end BER simulation of the coded modulation chain:

    encode -> (puncture) -> multiplex -> per-stream interleave -> HPAM map
    -> AWGN / Nakagami-m channel -> max-log demap -> deinterleave -> demux
    -> (depuncture) -> Viterbi.

Every block draws from its own generator, seeded by (seed, SNR index, block
index), so results do not depend on batching or on the number of workers.
"""

import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from hqam_bicm.app.config import Config
from hqam_bicm.app.error_handler import ConfigError
from hqam_bicm.app.events import EventManager, EventTypes
from hqam_bicm.core.channel import Channel
from hqam_bicm.core.constellation import Constellation, gray_code
from hqam_bicm.core.convcode import (ConvCode, PuncturePattern, build_trellis, depuncture, encode,
                                     puncture, viterbi_decode)
from hqam_bicm.core.lvalues import maxlog_llr
from hqam_bicm.core.mux import DMuxPattern, Interleaver, MuxMap, RandomMuxTable, random_mux_baseline

LOGGER = logging.getLogger(__name__)

MUX_STREAM = 1
INTERLEAVER_STREAM = 2
BLOCK_STREAM = 3


def sample_snr(channel: Channel, rng: np.random.Generator, size=None) -> np.ndarray:
    """AWGN returns gamma_bar; Nakagami-m draws Gamma(m, gamma_bar/m) per symbol."""
    return channel.sample_snr(rng, size=size)


@dataclass(frozen=True, eq=False)
class SimConfig:
    """
    One simulated system. `code=None` bypasses coding: q x block_length raw
    bits are mapped and hard-decided.
    """
    code: Optional[ConvCode]
    mux: Union[DMuxPattern, RandomMuxTable, None]
    constellation: Constellation
    channel: Channel
    block_length: int = Config.DEFAULT_BLOCK_LENGTH
    min_errors: int = Config.DEFAULT_MIN_ERRORS
    max_blocks: int = Config.DEFAULT_MAX_BLOCKS
    seed: int = Config.DEFAULT_SEED
    puncture: Optional[PuncturePattern] = None
    all_zero: bool = False

    def __post_init__(self):
        q = self.constellation.q
        if self.block_length < 1 or self.min_errors < 1 or self.max_blocks < 1:
            raise ConfigError("block length, min errors and max blocks must be positive")
        if self.code is None:
            return
        n = self.code.n
        if self.block_length <= self.code.memory:
            raise ConfigError("block length must exceed the code memory")
        if self.puncture is not None:
            if self.puncture.n != n:
                raise ConfigError(f"puncture pattern has {self.puncture.n} rows, code has {n} outputs")
            if not isinstance(self.mux, RandomMuxTable) or self.mux.n != 1:
                raise ConfigError("punctured codes are multiplexed by a single-row random table")
            survivors = self.puncture.full_mask(self.block_length).sum()
            if survivors % q:
                raise ConfigError(f"{survivors} surviving bits per block do not fill {q} streams")
            return
        if isinstance(self.mux, DMuxPattern):
            if self.mux.n != n or self.mux.q != q:
                raise ConfigError(f"D-MUX is {self.mux.n} x {self.mux.J} for q={self.mux.q}, system needs n={n}, q={q}")
            if self.block_length % self.mux.J:
                raise ConfigError(f"block length {self.block_length} is not a multiple of J = {self.mux.J}")
        elif isinstance(self.mux, RandomMuxTable):
            if self.mux.n != n or self.mux.q != q:
                raise ConfigError(f"probability table is {self.mux.n} x {self.mux.q}, system needs {n} x {q}")
            if (n * self.block_length) % q:
                raise ConfigError(f"n * block length is not a multiple of q = {q}")
        else:
            raise ConfigError("coded systems need a D-MUX pattern or a probability table")

    @property
    def info_length(self) -> int:
        if self.code is None:
            return self.block_length
        return self.block_length - self.code.memory

    def describe(self) -> Dict:
        """Resolved configuration used for hashing and manifests."""
        if isinstance(self.mux, DMuxPattern):
            mux = {"kind": "d-mux", "text": self.mux.text, "time_fill": self.mux.time_fill.tolist()}
        elif isinstance(self.mux, RandomMuxTable):
            mux = {"kind": self.mux.name, "text": self.mux.text}
        else:
            mux = None
        return {
            "code": self.code.octal if self.code is not None else None,
            "mux": mux,
            "M": self.constellation.M,
            "alphas": list(self.constellation.alphas),
            "channel": self.channel.kind,
            "m": self.channel.m,
            "block_length": self.block_length,
            "min_errors": self.min_errors,
            "max_blocks": self.max_blocks,
            "seed": self.seed,
            "puncture": self.puncture.text if self.puncture is not None else None,
            "all_zero": self.all_zero,
        }

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.describe(), sort_keys=True).encode(Config.DEFAULT_ENCODING)
        return hashlib.sha256(blob).hexdigest()[:16]


class Transmission(NamedTuple):
    info: np.ndarray
    llrs: np.ndarray
    stream_llrs: np.ndarray


class LinkChain:
    """Precomputed pieces of a SimConfig: trellis, mux map, interleavers, label lookup."""

    def __init__(self, cfg: SimConfig):
        self.cfg = cfg
        c = cfg.constellation
        self.q = c.q
        self.lut = np.empty(c.M)
        self.lut[gray_code(np.arange(c.M))] = c.points
        self.weights = 1 << np.arange(self.q - 1, -1, -1)
        self.trellis = build_trellis(cfg.code) if cfg.code is not None else None
        self.mux_map: Optional[MuxMap] = None
        if cfg.code is None:
            self.code_shape = None
            self.stream_length = cfg.block_length
        elif cfg.puncture is not None:
            self.code_shape = (1, int(cfg.puncture.full_mask(cfg.block_length).sum()))
            self.stream_length = self.code_shape[1] // self.q
        else:
            self.code_shape = (cfg.code.n, cfg.block_length)
            self.stream_length = cfg.code.n * cfg.block_length // self.q
            if isinstance(cfg.mux, DMuxPattern):
                self.mux_map = cfg.mux.expand(cfg.block_length)
        self.interleavers = [Interleaver(self.stream_length, (cfg.seed, INTERLEAVER_STREAM, k))
                             for k in range(self.q)]

    def block_rng(self, snr_index: int, block: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.cfg.seed, BLOCK_STREAM, snr_index, block]))

    def _channel(self, streams: np.ndarray, channel: Channel, rng: np.random.Generator) -> np.ndarray:
        """
        q x N_s bits -> q x N_s L-values.

        All-zero blocks go through a random scrambler whose signs are undone on
        the L-values, so they still visit every constellation point.
        """
        flips = rng.integers(0, 2, size=streams.shape) if self.cfg.all_zero else None
        if flips is not None:
            streams = streams ^ flips
        x = self.lut[self.weights @ streams]
        gamma = np.broadcast_to(sample_snr(channel, rng, size=x.shape), x.shape)
        y = x + rng.standard_normal(x.shape) / np.sqrt(2.0 * gamma)
        llrs = maxlog_llr(y, gamma, self.cfg.constellation).T
        return llrs if flips is None else llrs * (1 - 2 * flips)

    def transmit(self, rng: np.random.Generator, channel: Optional[Channel] = None) -> Transmission:
        cfg = self.cfg
        channel = channel if channel is not None else cfg.channel
        if cfg.code is None:
            bits = np.zeros((self.q, cfg.block_length), dtype=np.int64) if cfg.all_zero \
                else rng.integers(0, 2, size=(self.q, cfg.block_length))
            llrs = self._channel(bits, channel, rng)
            return Transmission(bits, llrs, llrs)

        k_c = cfg.code.k_c
        shape = (k_c, cfg.info_length)
        info = np.zeros(shape, dtype=np.int64) if cfg.all_zero else rng.integers(0, 2, size=shape)
        framed = np.concatenate([info, np.zeros((k_c, cfg.code.memory), dtype=np.int64)], axis=1)
        code_bits = encode(cfg.code, framed).astype(np.int64)
        if cfg.puncture is not None:
            code_bits = puncture(code_bits, cfg.puncture)[None, :]
        mux_map = self.mux_map
        if mux_map is None:
            mux_map = random_mux_baseline(cfg.mux, code_bits.shape[1], rng)
        streams = mux_map.apply(code_bits)
        streams = np.stack([il.interleave(s) for il, s in zip(self.interleavers, streams)])
        stream_llrs = self._channel(streams, channel, rng)
        stream_llrs = np.stack([il.deinterleave(s) for il, s in zip(self.interleavers, stream_llrs)])
        llrs = mux_map.demux(stream_llrs)
        if cfg.puncture is not None:
            llrs = depuncture(llrs[0], cfg.puncture)
        return Transmission(info, llrs, stream_llrs)

    def count_errors(self, blocks: List[Transmission]) -> Tuple[int, int]:
        """(bit errors, bits) of a batch of blocks."""
        if self.trellis is None:
            decided = np.stack([(t.llrs < 0).astype(np.int64) for t in blocks])
            sent = np.stack([t.info for t in blocks])
            return int(np.count_nonzero(decided != sent)), int(sent.size)
        llrs = np.stack([t.llrs for t in blocks])
        decided = viterbi_decode(self.trellis, llrs, terminated=True)[..., :self.cfg.info_length]
        sent = np.stack([t.info for t in blocks])
        return int(np.count_nonzero(decided != sent)), int(sent.size)


def transmit_block(cfg: SimConfig, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """One block: (info bits, decoder-input L-values)."""
    t = LinkChain(cfg).transmit(rng)
    return t.info, t.llrs


@dataclass(frozen=True)
class BerPoint:
    """BER estimate with a 95% normal-approximation interval."""
    gamma_db: float
    errors: int
    bits: int
    blocks: int

    @property
    def ber(self) -> float:
        return self.errors / self.bits if self.bits else 0.0

    @property
    def ci(self) -> Tuple[float, float]:
        p = self.ber
        half = 1.96 * math.sqrt(p * (1 - p) / self.bits) if self.bits else 0.0
        return max(0.0, p - half), min(1.0, p + half)

    def row(self, config_hash: str) -> Dict:
        lo, hi = self.ci
        return {"gamma_dB": self.gamma_db, "ber": self.ber, "ci_low": lo, "ci_high": hi,
                "bits": self.bits, "errors": self.errors, "config_hash": config_hash}


_CHAINS: Dict[str, LinkChain] = {}


def _chain_for(cfg: SimConfig) -> LinkChain:
    key = cfg.config_hash
    if key not in _CHAINS:
        _CHAINS[key] = LinkChain(cfg)
    return _CHAINS[key]


def _simulate_batch(cfg: SimConfig, snr_index: int, gamma_db: float, blocks: Sequence[int]) -> Tuple[int, int]:
    chain = _chain_for(cfg)
    channel = cfg.channel.at_db(gamma_db)
    sent = [chain.transmit(chain.block_rng(snr_index, b), channel) for b in blocks]
    return chain.count_errors(sent)


def _batches(max_blocks: int, size: int) -> List[range]:
    return [range(lo, min(lo + size, max_blocks)) for lo in range(0, max_blocks, size)]


def run_ber_sweep(cfg: SimConfig, snr_db: Sequence[float], jobs: int = 1,
                  events: Optional[EventManager] = None,
                  batch_blocks: int = Config.SIM_BATCH_BLOCKS) -> List[BerPoint]:
    """
    Simulate every SNR until min_errors bit errors or max_blocks blocks.

    Batches are consumed in index order and the stop rule is checked after
    each, so the outcome is the same for any number of workers.
    """
    points = []
    batches = _batches(cfg.max_blocks, batch_blocks)
    pool = ProcessPoolExecutor(max_workers=jobs) if jobs > 1 else None
    try:
        for snr_index, g in enumerate(snr_db):
            errors = bits = blocks = 0
            cursor = 0
            while cursor < len(batches) and errors < cfg.min_errors:
                wave = batches[cursor:cursor + max(1, jobs)]
                if pool is not None:
                    results = list(pool.map(_simulate_batch, [cfg] * len(wave), [snr_index] * len(wave),
                                            [g] * len(wave), wave))
                else:
                    results = [_simulate_batch(cfg, snr_index, g, wave[0])]
                for rng_blocks, (e, b) in zip(wave, results):
                    errors += e
                    bits += b
                    blocks += len(rng_blocks)
                    cursor += 1
                    LOGGER.debug(f"{g:.2f} dB: {blocks} blocks, {errors} errors")
                    if events is not None:
                        events.publish(EventTypes.BATCH_DONE, {"gamma_dB": g, "blocks": blocks, "errors": errors})
                    if errors >= cfg.min_errors:
                        break
            point = BerPoint(float(g), errors, bits, blocks)
            LOGGER.info(f"{g:.2f} dB: BER {point.ber:.3e} ({errors} errors in {bits} bits)")
            if events is not None:
                events.publish(EventTypes.BER_POINT_DONE, point)
            points.append(point)
    finally:
        if pool is not None:
            pool.shutdown()
    return points
