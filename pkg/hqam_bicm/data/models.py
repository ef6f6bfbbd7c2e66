# hqam_bicm/data/models.py
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, model_validator


class SimConfigDocument(BaseModel):
    """Simulation configuration as read from a TOML or JSON document."""
    code: Optional[str] = Field("5,7", description="Octal generators, e.g. '5,7'; null for the uncoded bypass.")
    mux: Optional[str] = Field(None, description="D-MUX rows such as '2,2/1,1'.")
    rmux: Optional[str] = Field(None, description="R-MUX probability table such as '0,1/3,2/3;2/3,1/3,0'.")
    s_interleaver: bool = Field(False, description="Use a single interleaver over all coded bits.")
    puncture: Optional[str] = Field(None, description="Column-major keep-mask such as '10,11,01'.")
    M: int = Field(..., description="Constellation size.")
    alphas: List[float] = Field(default_factory=list, description="Constellation parameters alpha_1..alpha_{q-1}.")
    channel: Literal["awgn", "nakagami"] = Field("awgn", description="Channel family.")
    m: Optional[float] = Field(None, description="Nakagami shape parameter.")
    snr_db: List[float] = Field(..., description="Average SNR grid in dB.")
    block_length: int = Field(24000, description="Code columns per block, tail included.")
    min_errors: int = Field(100, description="Bit errors that end an SNR point.")
    max_blocks: int = Field(1000, description="Block cap per SNR point.")
    seed: int = Field(2024, description="Master seed.")
    all_zero: bool = Field(False, description="Transmit the all-zero codeword through a random scrambler.")

    @model_validator(mode="after")
    def _one_mux(self):
        chosen = [x for x in (self.mux, self.rmux) if x] + (["s"] if self.s_interleaver else [])
        if self.code is not None and len(chosen) != 1:
            raise ValueError("exactly one of mux, rmux or s_interleaver must be given")
        return self


class ConstellationCard(BaseModel):
    """Constellation dump."""
    M: int = Field(..., description="Constellation size.")
    alphas: List[float] = Field(..., description="alpha_1..alpha_{q-1}.")
    d: List[float] = Field(..., description="Unit-energy amplitudes d_1..d_q.")
    points: List[float] = Field(..., description="Points in ascending order.")
    labels: List[str] = Field(..., description="Gray labels, most significant bit first.")
    mu: List[float] = Field(..., description="Signed mu table, row-major by bit level then point.")
    region: Dict[str, Any] = Field(..., description="Region check: valid flag and violated inequalities.")


class DesignCard(BaseModel):
    """Optimizer result for one channel and SNR."""
    channel: str = Field(..., description="Channel family.")
    m: Optional[float] = Field(None, description="Nakagami shape parameter.")
    gamma_dB: float = Field(..., description="Average SNR in dB.")
    mux: str = Field(..., description="Winning multiplexer in text form.")
    pattern_id: Optional[int] = Field(None, description="1-based index among canonical patterns.")
    M: int = Field(..., description="Constellation size.")
    alphas: List[float] = Field(..., description="Winning constellation parameters.")
    ub: float = Field(..., description="Union bound at the optimum.")
    wmax: int = Field(..., description="Spectrum truncation.")
    grid_step: float = Field(..., description="Alpha grid step.")
    target: Optional[float] = Field(None, description="Bound target used to fix the SNR, if any.")
    ranked: List[Dict[str, Any]] = Field(default_factory=list, description="Best point of every pattern.")


class RunManifest(BaseModel):
    """Provenance record written next to every command's outputs."""
    command: str = Field(..., description="Command that produced the outputs.")
    config: Dict[str, Any] = Field(..., description="Fully resolved configuration.")
    version: str = Field(..., description="Toolkit version.")
    seed: Optional[int] = Field(None, description="Master seed.")
    outputs: List[str] = Field(default_factory=list, description="Output file names.")
    wall_time: float = Field(0.0, description="Elapsed seconds.")
    schema_version: int = Field(..., description="CSV/JSON schema version.")
    hash: str = Field(..., description="Hash referenced by every output file.")
