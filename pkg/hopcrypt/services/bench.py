"""
Host-side reproduction of the encryption/decryption timing experiment.

Host measurements and modeled microcontroller figures live in separate
columns. Cells run one after another on the calling thread; running them
concurrently would contaminate each other's timings.
"""
import logging
import math
import random
import statistics
import time
from datetime import datetime
from typing import Callable, List, Optional

from dateutil import tz

from hopcrypt.models.base_models import (
    BenchCell,
    BenchConfig,
    BenchReport,
    CalibrationTable,
    Direction,
)
from hopcrypt.models.errors import CorrectnessError
from hopcrypt.services.block_modes import CbcContext, cbc_decrypt, cbc_encrypt, count_blocks
from hopcrypt.services.mcu_timing import predict

logger = logging.getLogger(__name__)


def make_payload(seed: int, size: int) -> bytes:
    rng = random.Random(f"{seed}:{size}")
    return bytes(rng.getrandbits(8) for _ in range(size))


class BenchHarness:
    def __init__(
        self,
        cfg: BenchConfig,
        table: CalibrationTable,
        clock: Callable[[], int] = time.perf_counter_ns,
    ):
        self.cfg = cfg
        self.table = table
        self.clock = clock
        self.ctx = CbcContext.from_hex(cfg.key_hex, cfg.iv_hex)

    def _timed_encrypt(self, payload: bytes) -> int:
        start = self.clock()
        ciphertext = cbc_encrypt(self.ctx, payload)
        elapsed = self.clock() - start
        if cbc_decrypt(self.ctx, ciphertext) != payload:
            raise CorrectnessError(f"CBC round-trip mismatch for {len(payload)}-octet payload")
        return elapsed

    def _timed_decrypt(self, payload: bytes, ciphertext: bytes) -> int:
        start = self.clock()
        recovered = cbc_decrypt(self.ctx, ciphertext)
        elapsed = self.clock() - start
        if recovered != payload:
            raise CorrectnessError(f"CBC round-trip mismatch for {len(payload)}-octet payload")
        return elapsed

    def _repetitions_for(self, run_once: Callable[[], int]) -> int:
        if self.cfg.repetitions is not None:
            return self.cfg.repetitions
        probe_ns = max(run_once(), 1)
        return max(1, math.ceil(self.cfg.min_cell_seconds * 1e9 / probe_ns))

    def run_cell(self, size: int, direction: Direction) -> BenchCell:
        payload = make_payload(self.cfg.seed, size)
        if direction == Direction.ENC:
            def run_once() -> int:
                return self._timed_encrypt(payload)
        else:
            ciphertext = cbc_encrypt(self.ctx, payload)

            def run_once() -> int:
                return self._timed_decrypt(payload, ciphertext)

        run_once()  # warm-up, discarded
        repetitions = self._repetitions_for(run_once)
        samples = [run_once() for _ in range(repetitions)]
        model_ms, model_cycles = predict(self.table, size, direction)

        cell = BenchCell(
            size=size,
            direction=direction,
            host_ns=int(statistics.median(samples)),
            block_ops=count_blocks(size) * repetitions,
            repetitions=repetitions,
            model_ms=model_ms,
            model_cycles=model_cycles,
        )
        logger.info(
            f"Bench cell {size}B {direction.to_string()}: median {cell.host_ns} ns "
            f"over {repetitions} reps, model {model_ms:g} ms"
        )
        return cell

    def run(self) -> BenchReport:
        cells: List[BenchCell] = []
        for size in self.cfg.data_sizes:
            for direction in Direction:
                cells.append(self.run_cell(size, direction))
        return BenchReport(
            timestamp=datetime.now(tz=tz.tzutc()),
            unit=self.table.unit,
            frequency_hz=self.table.frequency_hz,
            config=self.cfg,
            cells=cells,
        )


def run_bench(cfg: BenchConfig, table: Optional[CalibrationTable] = None) -> BenchReport:
    table = table or CalibrationTable.builtin()
    logger.info(f"Running bench over sizes {cfg.data_sizes}")
    return BenchHarness(cfg, table).run()
