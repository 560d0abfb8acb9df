from datetime import datetime
from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from hopcrypt.models.errors import KeyLengthError

BLOCK_SIZE = 16
NB = 4

DEFAULT_FREQUENCY_HZ = 20_000_000
DEFAULT_PRESCALER = 8
ALLOWED_PRESCALERS = (1, 8, 64, 256, 1024)

DEFAULT_DATA_SIZES = [16, 32, 64, 128, 256, 512]
DEFAULT_BENCH_KEY_HEX = "000102030405060708090a0b0c0d0e0f"
DEFAULT_BENCH_IV_HEX = "00000000000000000000000000000000"

# Measured AES-128 CBC figures on the 20 MHz part, as printed:
# (size, enc_ms, enc_cycles, dec_ms, dec_cycles)
MEASURED_ROWS = [
    (16, 449, 8_980, 456, 9_120),
    (32, 898, 17_960, 912, 18_240),
    (64, 1_796, 35_920, 1_825, 36_500),
    (128, 3_592, 71_840, 3_649, 72_980),
    (256, 7_184, 143_680, 7_297, 145_940),
    (512, 14_368, 287_360, 14_592, 291_840),
]


class AesVariant(Enum):
    AES_128 = 16
    AES_192 = 24
    AES_256 = 32

    @classmethod
    def from_string(cls, value: str) -> 'AesVariant':
        """Convert 'aes-128' / 'AES_128' style strings to AesVariant"""
        return cls[value.upper().replace("-", "_")]

    def to_string(self) -> str:
        return self.name.replace("_", "-")

    @classmethod
    def from_key_length(cls, length: int) -> 'AesVariant':
        try:
            return cls(length)
        except ValueError:
            raise KeyLengthError(length) from None

    @property
    def nk(self) -> int:
        return self.value // 4


class Direction(Enum):
    ENC = "enc"
    DEC = "dec"

    @classmethod
    def from_string(cls, value: str) -> 'Direction':
        """Convert string to Direction enum"""
        return cls[value.upper()]

    def to_string(self) -> str:
        return self.value


class RoundDirection(Enum):
    FORWARD = "forward"
    INVERSE = "inverse"

    @classmethod
    def from_string(cls, value: str) -> 'RoundDirection':
        return cls[value.upper()]

    def to_string(self) -> str:
        return self.value


class PaddingPolicy(Enum):
    NONE_REQUIRED = "none_required"
    PKCS7 = "pkcs7"

    @classmethod
    def from_string(cls, value: str) -> 'PaddingPolicy':
        return cls[value.upper().replace("-", "_")]

    def to_string(self) -> str:
        return self.value


class UnitInterpretation(Enum):
    AS_PRINTED = "as_printed"
    PHYSICAL = "physical"

    @classmethod
    def from_string(cls, value: str) -> 'UnitInterpretation':
        return cls[value.upper().replace("-", "_")]

    def to_string(self) -> str:
        return self.value


class DelayInterpretation(Enum):
    LINEAR = "linear"
    SUMMATION = "summation"

    @classmethod
    def from_string(cls, value: str) -> 'DelayInterpretation':
        return cls[value.upper()]

    def to_string(self) -> str:
        return self.value


class OutputFormat(Enum):
    CSV = "csv"
    JSON = "json"
    TABLE = "table"

    @classmethod
    def from_string(cls, value: str) -> 'OutputFormat':
        return cls[value.upper()]

    def to_string(self) -> str:
        return self.value


# ------------- cipher -------------

class CipherKey(BaseModel):
    model_config = ConfigDict(frozen=True)

    octets: bytes
    variant: AesVariant

    @classmethod
    def from_octets(cls, octets: bytes) -> 'CipherKey':
        """Build a key, raising KeyLengthError for lengths outside 16/24/32"""
        variant = AesVariant.from_key_length(len(octets))
        return cls(octets=bytes(octets), variant=variant)

    @classmethod
    def from_hex(cls, value: str) -> 'CipherKey':
        return cls.from_octets(bytes.fromhex(value.strip()))

    @model_validator(mode='after')
    def check_variant(self) -> 'CipherKey':
        if len(self.octets) != self.variant.value:
            raise ValueError(
                f"{self.variant.to_string()} requires {self.variant.value} octets, "
                f"got {len(self.octets)}"
            )
        return self


class AesParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    nk: int
    nb: int = NB
    nr: int

    @classmethod
    def for_variant(cls, variant: AesVariant) -> 'AesParams':
        nk = variant.nk
        return cls(nk=nk, nb=NB, nr=max(nk, NB) + 6)

    @model_validator(mode='after')
    def check_rounds(self) -> 'AesParams':
        if self.nb != NB:
            raise ValueError(f"Nb must be {NB}, got {self.nb}")
        if self.nr != max(self.nk, self.nb) + 6:
            raise ValueError(f"Nr must be max(Nk, Nb) + 6, got {self.nr} for Nk={self.nk}")
        return self


# ------------- microcontroller timing -------------

class McuClockConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    frequency_hz: float = Field(default=DEFAULT_FREQUENCY_HZ, gt=0)
    prescaler: int = DEFAULT_PRESCALER

    @field_validator('prescaler')
    @classmethod
    def validate_prescaler(cls, v: int) -> int:
        if v not in ALLOWED_PRESCALERS:
            raise ValueError(f"Prescaler must be one of {ALLOWED_PRESCALERS}, got {v}")
        return v


class TimerCtc(BaseModel):
    """8-bit Timer/Counter in Clear Timer on Compare Match mode"""

    interrupt_count_per_ms: float = Field(default=0.0, ge=0)
    ocr: int = Field(ge=0, le=255)
    tcnt: int = Field(default=0, ge=0, le=255)

    def advance(self, ticks: int) -> int:
        """Step the counter by `ticks` prescaled clocks; returns compare matches fired"""
        if ticks < 0:
            raise ValueError("ticks must be non-negative")
        period = self.ocr + 1
        total = self.tcnt + ticks
        self.tcnt = total % period
        return total // period


class CalibrationRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    size: int = Field(gt=0)
    enc_ms: float = Field(gt=0)
    enc_cycles: float = Field(gt=0)
    dec_ms: float = Field(gt=0)
    dec_cycles: float = Field(gt=0)

    def time_ms(self, direction: Direction) -> float:
        return self.enc_ms if direction == Direction.ENC else self.dec_ms

    def cycles(self, direction: Direction) -> float:
        return self.enc_cycles if direction == Direction.ENC else self.dec_cycles


class CalibrationTable(BaseModel):
    model_config = ConfigDict(frozen=True)

    rows: List[CalibrationRow]
    frequency_hz: float = Field(default=DEFAULT_FREQUENCY_HZ, gt=0)
    unit: UnitInterpretation = UnitInterpretation.AS_PRINTED

    @classmethod
    def builtin(cls, unit: UnitInterpretation = UnitInterpretation.AS_PRINTED) -> 'CalibrationTable':
        rows = [
            CalibrationRow(size=s, enc_ms=em, enc_cycles=ec, dec_ms=dm, dec_cycles=dc)
            for s, em, ec, dm, dc in MEASURED_ROWS
        ]
        return cls(rows=rows, unit=unit)

    @model_validator(mode='after')
    def check_rows(self) -> 'CalibrationTable':
        if not self.rows:
            raise ValueError("Calibration table needs at least one row")
        sizes = [row.size for row in self.rows]
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError(f"Calibration sizes must be strictly increasing, got {sizes}")
        # printed time column and cycle column are tied by the clock rate
        ratio = self.frequency_hz / 1e6
        for row in self.rows:
            for direction in Direction:
                expected = row.time_ms(direction) * ratio
                if abs(row.cycles(direction) - expected) > 1e-6 * max(expected, 1.0):
                    raise ValueError(
                        f"Row {row.size}: {direction.to_string()} cycles {row.cycles(direction)} "
                        f"!= time {row.time_ms(direction)} x {ratio:g}"
                    )
        return self

    def row_for(self, size: int) -> Optional[CalibrationRow]:
        for row in self.rows:
            if row.size == size:
                return row
        return None


# ------------- benchmark -------------

class BenchConfig(BaseModel):
    data_sizes: List[int] = Field(default_factory=lambda: list(DEFAULT_DATA_SIZES))
    repetitions: Optional[int] = Field(default=None, ge=1)
    min_cell_seconds: float = Field(default=0.1, gt=0)
    key_hex: str = DEFAULT_BENCH_KEY_HEX
    iv_hex: str = DEFAULT_BENCH_IV_HEX
    seed: int = 0

    @field_validator('data_sizes')
    @classmethod
    def validate_sizes(cls, v: List[int]) -> List[int]:
        for size in v:
            if size <= 0 or size % BLOCK_SIZE:
                raise ValueError(f"Data size {size} is not a positive multiple of {BLOCK_SIZE}")
        return v


class BenchCell(BaseModel):
    size: int
    direction: Direction
    host_ns: int = Field(ge=0)
    block_ops: int
    repetitions: int = Field(ge=1)
    model_ms: float
    model_cycles: float

    @model_validator(mode='after')
    def check_block_ops(self) -> 'BenchCell':
        expected = self.size // BLOCK_SIZE * self.repetitions
        if self.block_ops != expected:
            raise ValueError(f"block_ops {self.block_ops} != {self.size}/16 x {self.repetitions}")
        return self


class BenchReport(BaseModel):
    timestamp: datetime
    unit: UnitInterpretation
    frequency_hz: float
    config: BenchConfig
    cells: List[BenchCell] = Field(default_factory=list)


# ------------- hop-by-hop relay -------------

class DelayParams(BaseModel):
    """Per-hop delay components in milliseconds"""
    model_config = ConfigDict(frozen=True)

    t_enc: float = Field(default=449, ge=0)
    t_dec: float = Field(default=456, ge=0)
    t_tx: float = Field(default=10, ge=0)
    delta_t: float = Field(default=0, ge=0)

    @model_validator(mode='after')
    def check_delta_t(self) -> 'DelayParams':
        # the bound is stated against the other three components
        bound = self.t_enc + self.t_tx + self.t_dec
        if self.delta_t > bound:
            raise ValueError(f"delta_t {self.delta_t} exceeds t_enc + t_tx + t_dec = {bound}")
        return self


class Node(BaseModel):
    id: int
    keys: Dict[int, bytes] = Field(default_factory=dict)

    def key_for(self, neighbor_id: int) -> Optional[bytes]:
        return self.keys.get(neighbor_id)


class HopChain(BaseModel):
    """Nodes N_1..N_n followed by the cluster head"""

    nodes: List[Node]

    @field_validator('nodes')
    @classmethod
    def validate_nodes(cls, v: List[Node]) -> List[Node]:
        if len(v) < 2:
            raise ValueError("A hop chain needs at least one node and the cluster head")
        ids = [node.id for node in v]
        if len(set(ids)) != len(ids):
            raise ValueError(f"Node ids must be unique, got {ids}")
        return v

    @property
    def hops(self) -> int:
        return len(self.nodes) - 1

    @property
    def cluster_head(self) -> Node:
        return self.nodes[-1]


class HopRecord(BaseModel):
    hop: int
    sender: int
    receiver: int
    msg_digest: str
    delay_ms: float
    cumulative_linear_ms: float
    cumulative_summation_ms: float


class SimReport(BaseModel):
    hops: int
    payload_size: int
    seed: int
    params: DelayParams
    ledger: List[HopRecord] = Field(default_factory=list)
    total_linear_ms: float
    total_summation_ms: float
    plaintext_intact: bool

    def total_for(self, interpretation: DelayInterpretation) -> float:
        if interpretation == DelayInterpretation.LINEAR:
            return self.total_linear_ms
        return self.total_summation_ms


class SweepRow(BaseModel):
    n: int
    total_delay_ms: float
