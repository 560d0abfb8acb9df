"""
Command-line entry point: encrypt, decrypt, bench, simulate, timer, predict.

Machine output goes to standard out (or --out FILE); diagnostics go to
standard error. Exit status is 0 on success, 1 on usage errors and 2 on
domain errors (bad key length, topology, timer range, ...).
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, TextIO

from pydantic import ValidationError

from hopcrypt.models.base_models import (
    ALLOWED_PRESCALERS,
    DEFAULT_BENCH_IV_HEX,
    DEFAULT_BENCH_KEY_HEX,
    DEFAULT_DATA_SIZES,
    DEFAULT_FREQUENCY_HZ,
    DEFAULT_PRESCALER,
    BenchConfig,
    CalibrationTable,
    DelayInterpretation,
    DelayParams,
    Direction,
    McuClockConfig,
    OutputFormat,
    PaddingPolicy,
    SweepRow,
    UnitInterpretation,
)
from hopcrypt.models.errors import HopcryptError
from hopcrypt.models.report_utils import emit_bench_report, emit_key_values, emit_sim_report, emit_sweep
from hopcrypt.services import hopnet, mcu_timing
from hopcrypt.services.bench import run_bench
from hopcrypt.services.block_modes import CbcContext, cbc_decrypt, cbc_encrypt

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2

# relays longer than this are reported from the closed form only
RELAY_HOP_LIMIT = 1000

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"


class UsageError(Exception):
    pass


class CliArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _sizes(value: str) -> List[int]:
    try:
        return [int(part) for part in value.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}")


def _add_output_flags(parser: argparse.ArgumentParser, default: Optional[OutputFormat]) -> None:
    parser.add_argument("--format", choices=[f.to_string() for f in OutputFormat],
                        default=default.to_string() if default else None)
    parser.add_argument("--out", metavar="FILE", help="write output here instead of standard out")


def _add_calibration_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--unit", choices=[u.to_string() for u in UnitInterpretation],
                        default=UnitInterpretation.AS_PRINTED.to_string(),
                        help="as_printed keeps the table's ms column; physical reads it as microseconds")
    parser.add_argument("--calibration", metavar="FILE",
                        help="CSV with header size,enc_ms,enc_cycles,dec_ms,dec_cycles")


def build_parser() -> CliArgumentParser:
    parser = CliArgumentParser(prog="hopcrypt", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    verbs = parser.add_subparsers(dest="verb", metavar="VERB")

    for verb in ("encrypt", "decrypt"):
        p = verbs.add_parser(verb, help=f"AES-CBC {verb} a file")
        p.add_argument("--key", required=True, metavar="HEX", help="16, 24 or 32 octets as hex")
        p.add_argument("--iv", required=True, metavar="HEX", help="16 octets as hex")
        p.add_argument("--in", dest="infile", required=True, metavar="FILE")
        p.add_argument("--out", metavar="FILE", help="binary output; hex on standard out when omitted")
        p.add_argument("--pad", choices=[policy.to_string() for policy in PaddingPolicy],
                       default=PaddingPolicy.NONE_REQUIRED.to_string())

    p = verbs.add_parser("bench", help="time CBC over the data sizes next to the modeled MCU figures")
    p.add_argument("--sizes", type=_sizes, default=list(DEFAULT_DATA_SIZES), metavar="16,32,...")
    p.add_argument("--reps", type=int, metavar="N", help="repetitions per cell (default: >=100 ms per cell)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--key", default=DEFAULT_BENCH_KEY_HEX, metavar="HEX")
    p.add_argument("--iv", default=DEFAULT_BENCH_IV_HEX, metavar="HEX")
    _add_calibration_flags(p)
    _add_output_flags(p, OutputFormat.TABLE)

    p = verbs.add_parser("simulate", help="hop-by-hop encrypted relay delay")
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--hops", type=int, metavar="N")
    target.add_argument("--sweep", type=int, metavar="N_MAX", help="emit total delay for n = 1..N_MAX")
    defaults = DelayParams()
    p.add_argument("--t-enc", type=float, default=defaults.t_enc, metavar="MS")
    p.add_argument("--t-dec", type=float, default=defaults.t_dec, metavar="MS")
    p.add_argument("--t-tx", type=float, default=defaults.t_tx, metavar="MS")
    p.add_argument("--dt", type=float, default=defaults.delta_t, metavar="MS")
    p.add_argument("--from-calibration", action="store_true",
                   help="take t_enc/t_dec from the calibration model for --payload-size")
    p.add_argument("--interpretation", choices=[i.to_string() for i in DelayInterpretation],
                   default=DelayInterpretation.LINEAR.to_string())
    p.add_argument("--payload-size", type=int, default=16, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--closed-form", action="store_true", help="skip the relay and report totals only")
    _add_calibration_flags(p)
    # sweeps and closed-form totals default to csv, the relay ledger to table
    _add_output_flags(p, None)

    p = verbs.add_parser("timer", help="clock period, prescaled period and CTC compare value")
    p.add_argument("--freq", type=float, default=DEFAULT_FREQUENCY_HZ, metavar="HZ")
    p.add_argument("--prescaler", type=int, default=DEFAULT_PRESCALER, choices=ALLOWED_PRESCALERS)
    p.add_argument("--interval-us", type=float, metavar="US", help="target compare interval")
    _add_output_flags(p, OutputFormat.TABLE)

    p = verbs.add_parser("predict", help="modeled MCU time and cycles for a payload size")
    p.add_argument("--size", type=int, required=True, metavar="N")
    p.add_argument("--direction", choices=[d.to_string() for d in Direction])
    _add_calibration_flags(p)
    _add_output_flags(p, OutputFormat.TABLE)
    return parser


# ============= VERBS =============

def _load_table(args) -> CalibrationTable:
    unit = UnitInterpretation.from_string(args.unit)
    if args.calibration:
        return mcu_timing.load_calibration(args.calibration, unit=unit)
    return CalibrationTable.builtin(unit)


def _write_text(args, text: str, stdout: TextIO) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {len(text)} characters to {args.out}")
    else:
        stdout.write(text)


def _cmd_cipher(args, stdout: TextIO) -> None:
    ctx = CbcContext.from_hex(args.key, args.iv)
    padding = PaddingPolicy.from_string(args.pad)
    data = Path(args.infile).read_bytes()
    if args.verb == "encrypt":
        result = cbc_encrypt(ctx, data, padding)
    else:
        result = cbc_decrypt(ctx, data, padding)
    if args.out:
        Path(args.out).write_bytes(result)
        logger.info(f"{args.verb}: {len(data)} -> {len(result)} octets into {args.out}")
    else:
        stdout.write(result.hex() + "\n")


def _cmd_bench(args, stdout: TextIO) -> None:
    cfg = BenchConfig(
        data_sizes=args.sizes,
        repetitions=args.reps,
        key_hex=args.key,
        iv_hex=args.iv,
        seed=args.seed,
    )
    report = run_bench(cfg, _load_table(args))
    _write_text(args, emit_bench_report(report, OutputFormat.from_string(args.format)), stdout)


def _output_format(args, default: OutputFormat) -> OutputFormat:
    return OutputFormat.from_string(args.format) if args.format else default


def _cmd_simulate(args, stdout: TextIO) -> None:
    interpretation = DelayInterpretation.from_string(args.interpretation)
    if args.from_calibration:
        params = hopnet.delay_params_from_calibration(
            _load_table(args), args.payload_size, t_tx=args.t_tx, delta_t=args.dt
        )
    else:
        params = DelayParams(t_enc=args.t_enc, t_dec=args.t_dec, t_tx=args.t_tx, delta_t=args.dt)

    if args.sweep is not None:
        rows = hopnet.sweep(params, args.sweep, interpretation)
        fmt = _output_format(args, OutputFormat.CSV)
        _write_text(args, emit_sweep(rows, params, fmt, interpretation), stdout)
        return

    if args.closed_form or args.hops > RELAY_HOP_LIMIT:
        if not args.closed_form:
            logger.warning(f"{args.hops} hops exceeds the relay limit {RELAY_HOP_LIMIT}; reporting closed form")
        rows = [SweepRow(n=args.hops, total_delay_ms=hopnet.total_delay(params, args.hops, interpretation))]
        fmt = _output_format(args, OutputFormat.CSV)
        _write_text(args, emit_sweep(rows, params, fmt, interpretation), stdout)
        return

    chain = hopnet.build_chain(args.hops, seed=args.seed)
    payload = hopnet.make_relay_payload(args.seed, args.payload_size)
    report = hopnet.relay_message(chain, payload, params, seed=args.seed)
    fmt = _output_format(args, OutputFormat.TABLE)
    _write_text(args, emit_sim_report(report, fmt, interpretation), stdout)


def _cmd_timer(args, stdout: TextIO) -> None:
    cfg = McuClockConfig(frequency_hz=args.freq, prescaler=args.prescaler)
    pairs = [
        ("frequency_hz", cfg.frequency_hz),
        ("prescaler", cfg.prescaler),
        ("clock_period_ns", mcu_timing.clock_period(cfg) * 1e9),
        ("prescaled_period_ns", mcu_timing.prescaled_period(cfg) * 1e9),
    ]
    if args.interval_us is not None:
        timer = mcu_timing.timer_for_interval(cfg, args.interval_us * 1e-6)
        pairs += [
            ("interval_us", args.interval_us),
            ("ocr", timer.ocr),
            ("interrupts_per_ms", timer.interrupt_count_per_ms),
        ]
    _write_text(args, emit_key_values(pairs, OutputFormat.from_string(args.format)), stdout)


def _cmd_predict(args, stdout: TextIO) -> None:
    table = _load_table(args)
    directions = [Direction.from_string(args.direction)] if args.direction else list(Direction)
    pairs = [("size", args.size)]
    for direction in directions:
        time_ms, cycles = mcu_timing.predict(table, args.size, direction)
        pairs += [(f"{direction.to_string()}_ms", time_ms), (f"{direction.to_string()}_cycles", cycles)]
    _write_text(args, emit_key_values(pairs, OutputFormat.from_string(args.format)), stdout)


COMMANDS = {
    "encrypt": _cmd_cipher,
    "decrypt": _cmd_cipher,
    "bench": _cmd_bench,
    "simulate": _cmd_simulate,
    "timer": _cmd_timer,
    "predict": _cmd_predict,
}


def _first_error(e: ValidationError) -> str:
    errors = e.errors()
    if not errors:
        return str(e)
    first = errors[0]
    location = ".".join(str(part) for part in first.get("loc", ()))
    return f"{location}: {first['msg']}" if location else first["msg"]


def dispatch(
    argv: Optional[List[str]] = None,
    stdout: Optional[TextIO] = None,
    stderr: Optional[TextIO] = None,
) -> int:
    """Run one command; returns the process exit status"""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()

    if not argv:
        stderr.write(parser.format_help())
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        stderr.write(f"{e}\n")
        return EXIT_USAGE
    if args.verb is None:
        stderr.write(parser.format_help())
        return EXIT_USAGE

    # diagnostics go to the caller's stderr for this call only
    handler = logging.StreamHandler(stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    package_logger = logging.getLogger("hopcrypt")
    package_logger.addHandler(handler)
    package_logger.setLevel(getattr(logging, args.log_level))

    try:
        COMMANDS[args.verb](args, stdout)
    except HopcryptError as e:
        stderr.write(f"error: {e}\n")
        return EXIT_DOMAIN
    except ValidationError as e:
        stderr.write(f"error: {_first_error(e)}\n")
        return EXIT_DOMAIN
    except OSError as e:
        stderr.write(f"error: {e}\n")
        return EXIT_DOMAIN
    finally:
        handler.flush()
        package_logger.removeHandler(handler)
    return EXIT_OK


def main():
    """Main entry point for the application"""
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
