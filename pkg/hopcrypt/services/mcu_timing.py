"""
Clock, prescaler and CTC-timer arithmetic for the 8-bit microcontroller, and
the payload-size -> time/cycles predictor calibrated from the measured table.

Durations are seconds (float) unless a name says otherwise.

The compare value printed alongside the prescaler equation,
OCR0A = 0xFF - (0xFF - (P / T_p) + 1), does not survive a round trip; the
standard CTC relation OCR = ticks - 1 is used instead.
"""
import csv
import io
import logging
import math
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from hopcrypt.models.base_models import (
    ALLOWED_PRESCALERS,
    BLOCK_SIZE,
    DEFAULT_FREQUENCY_HZ,
    CalibrationRow,
    CalibrationTable,
    Direction,
    McuClockConfig,
    TimerCtc,
    UnitInterpretation,
)
from hopcrypt.models.errors import CalibrationError, TimerRangeError
from hopcrypt.models.report_utils import format_number

logger = logging.getLogger(__name__)

CSV_HEADER = ["size", "enc_ms", "enc_cycles", "dec_ms", "dec_cycles"]
OCR_MAX = 0xFF
MODEL_TOLERANCE = 1e-3
TICK_TOLERANCE = 1e-9


# ============= CLOCK AND TIMER =============

def clock_period(cfg: McuClockConfig) -> float:
    """T_c = 1 / frequency"""
    return 1.0 / cfg.frequency_hz


def prescaled_period(cfg: McuClockConfig) -> float:
    """T_p = prescaler * T_c"""
    return cfg.prescaler * clock_period(cfg)


def _exact_ticks(cfg: McuClockConfig, target_interval: float) -> float:
    return target_interval / prescaled_period(cfg)


def _feasible(ticks: float) -> bool:
    # range check on the unrounded count; the tolerance absorbs float error only
    return 1 - TICK_TOLERANCE <= ticks <= OCR_MAX + 1 + TICK_TOLERANCE


def _nearest_tick(ticks: float) -> int:
    """Round half up to a whole tick count"""
    return math.floor(ticks + 0.5)


def nearest_feasible_prescaler(cfg: McuClockConfig, target_interval: float) -> Optional[int]:
    """Closest prescaler (by position in the allowed list) that fits the 8-bit range"""
    feasible = [
        p for p in ALLOWED_PRESCALERS
        if _feasible(_exact_ticks(cfg.model_copy(update={"prescaler": p}), target_interval))
    ]
    if not feasible:
        return None
    here = ALLOWED_PRESCALERS.index(cfg.prescaler)
    return min(feasible, key=lambda p: (abs(ALLOWED_PRESCALERS.index(p) - here), p))


def ocr_for_interval(cfg: McuClockConfig, target_interval: float) -> int:
    """
    Compare value so the CTC interrupt fires every `target_interval` seconds.

    An interval that falls between two tick counts is rounded to the nearest
    tick, halves up. The 8-bit range check applies to the unrounded count, so
    anything longer than 256 ticks is rejected rather than rounded down into range.
    """
    if target_interval <= 0:
        raise TimerRangeError(f"Interval must be positive, got {target_interval}")
    ticks = _exact_ticks(cfg, target_interval)
    if not _feasible(ticks):
        raise TimerRangeError(
            f"Interval {target_interval * 1e6:g} us needs {ticks:g} ticks at prescaler "
            f"{cfg.prescaler}; the 8-bit compare register allows 1..{OCR_MAX + 1}",
            nearest_feasible_prescaler(cfg, target_interval),
        )
    return _nearest_tick(ticks) - 1


def interrupts_per_ms(cfg: McuClockConfig, ocr: int) -> float:
    """P: compare interrupts fired per millisecond for a given OCR"""
    if not 0 <= ocr <= OCR_MAX:
        raise TimerRangeError(f"OCR {ocr} does not fit in 8 bits")
    return 1e-3 / ((ocr + 1) * prescaled_period(cfg))


def timer_for_interval(cfg: McuClockConfig, target_interval: float) -> TimerCtc:
    ocr = ocr_for_interval(cfg, target_interval)
    return TimerCtc(interrupt_count_per_ms=interrupts_per_ms(cfg, ocr), ocr=ocr, tcnt=0)


# ============= CALIBRATED PREDICTION =============

def _unit_scale(table: CalibrationTable) -> float:
    # physical: the printed "ms" column is read as microseconds
    return 1e-3 if table.unit == UnitInterpretation.PHYSICAL else 1.0


def _check_size(size: int) -> None:
    if size <= 0 or size % BLOCK_SIZE:
        raise CalibrationError(f"Data size {size} is not a positive multiple of {BLOCK_SIZE}")


def linear_model(table: CalibrationTable, size: int, direction: Direction) -> Tuple[float, float]:
    """time(n) = time(16) * n / 16, cycles scaled by the anchor row's cycles/time ratio"""
    _check_size(size)
    anchor = table.rows[0]
    factor = size / anchor.size
    time_ms = anchor.time_ms(direction) * factor * _unit_scale(table)
    cycles = anchor.cycles(direction) * factor
    return time_ms, cycles


def predict(table: CalibrationTable, size: int, direction: Direction) -> Tuple[float, float]:
    """(time_ms, cycles); measured rows come back verbatim"""
    _check_size(size)
    row = table.row_for(size)
    if row is not None:
        return row.time_ms(direction) * _unit_scale(table), row.cycles(direction)
    return linear_model(table, size, direction)


def model_error(table: CalibrationTable) -> Dict[Tuple[int, Direction], float]:
    """Relative error of the linear model against each measured row"""
    errors = {}
    for row in table.rows:
        for direction in Direction:
            measured = row.time_ms(direction) * _unit_scale(table)
            modeled, _ = linear_model(table, row.size, direction)
            errors[(row.size, direction)] = abs(modeled - measured) / measured
    return errors


def check_model_agreement(table: CalibrationTable, tolerance: float = MODEL_TOLERANCE) -> None:
    for (size, direction), err in model_error(table).items():
        if err > tolerance:
            raise CalibrationError(
                f"Linear model misses the {size}-octet {direction.to_string()} row by "
                f"{err:.4%} (tolerance {tolerance:.2%})"
            )


# ============= CSV STORAGE =============

def _number(text: str) -> float:
    return float(text.replace(",", "").strip())


def load_calibration(
    path: Union[str, Path],
    unit: UnitInterpretation = UnitInterpretation.AS_PRINTED,
    frequency_hz: float = DEFAULT_FREQUENCY_HZ,
) -> CalibrationTable:
    """Load a CalibrationTable from CSV with header size,enc_ms,enc_cycles,dec_ms,dec_cycles"""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != CSV_HEADER:
            raise CalibrationError(
                f"{path}: expected header {','.join(CSV_HEADER)}, got {reader.fieldnames}"
            )
        try:
            rows = [
                CalibrationRow(
                    size=int(_number(record["size"])),
                    enc_ms=_number(record["enc_ms"]),
                    enc_cycles=_number(record["enc_cycles"]),
                    dec_ms=_number(record["dec_ms"]),
                    dec_cycles=_number(record["dec_cycles"]),
                )
                for record in reader
            ]
        except (AttributeError, TypeError, ValueError) as e:
            raise CalibrationError(f"{path}: malformed calibration row: {e}") from None

    try:
        table = CalibrationTable(rows=rows, frequency_hz=frequency_hz, unit=unit)
    except ValueError as e:
        raise CalibrationError(f"{path}: {e}") from None
    logger.info(f"Loaded calibration with {len(rows)} rows from {path}")
    return table


def dump_calibration(table: CalibrationTable) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in table.rows:
        writer.writerow([
            row.size,
            format_number(row.enc_ms), format_number(row.enc_cycles),
            format_number(row.dec_ms), format_number(row.dec_cycles),
        ])
    return buffer.getvalue()


def save_calibration(table: CalibrationTable, path: Union[str, Path]) -> None:
    Path(path).write_text(dump_calibration(table), encoding="utf-8")
    logger.info(f"Saved calibration with {len(table.rows)} rows to {path}")

