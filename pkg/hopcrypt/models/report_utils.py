"""
Report Serialization Utilities

Converts result records (BenchReport, SimReport, sweep rows) to CSV, JSON and
aligned text tables, and reads emitted JSON back into models. Field order is
fixed so that output for fixed inputs is byte-stable.
"""
import csv
import io
import json
from typing import Any, Dict, List, Sequence, Union

from dateutil import parser as date_parser

from hopcrypt.models.base_models import (
    BenchCell,
    BenchConfig,
    BenchReport,
    DelayInterpretation,
    DelayParams,
    Direction,
    OutputFormat,
    SimReport,
    SweepRow,
    UnitInterpretation,
)

BENCH_CSV_HEADER = ["size", "direction", "host_ns", "block_ops", "model_ms", "model_cycles"]
SIM_CSV_HEADER = [
    "hop", "sender", "receiver", "msg_digest",
    "delay_ms", "cumulative_linear_ms", "cumulative_summation_ms",
]
SWEEP_CSV_HEADER = ["n", "total_delay_ms"]


# ============= NUMBER FORMATTING =============

def format_number(value: Union[int, float], grouping: bool = False) -> str:
    """Integral values print without a trailing .0; others keep full precision"""
    value = float(value)
    if value.is_integer():
        return f"{int(value):,}" if grouping else str(int(value))
    if grouping:
        return f"{value:,.3f}".rstrip("0").rstrip(".")
    return repr(value)


def json_number(value: Union[int, float]) -> Union[int, float]:
    value = float(value)
    return int(value) if value.is_integer() else value


def render_table(headers: Sequence[str], rows: Sequence[Sequence[Any]], footer: Sequence[str] = ()) -> str:
    """Render rows as a left-aligned text table with a dashed rule under the header"""
    cells = [[str(c) for c in row] for row in rows]
    widths = [len(h) for h in headers]
    for row in cells:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))

    def line(values: Sequence[str]) -> str:
        return " | ".join(v.ljust(w) for v, w in zip(values, widths)).rstrip()

    rule = "-+-".join("-" * w for w in widths)
    out = [line(headers), rule]
    out.extend(line(row) for row in cells)
    if footer:
        out.append(rule)
        out.extend(footer)
    return "\n".join(out) + "\n"


def _csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


# ============= SERIALIZATION =============

class ReportSerializer:
    """Serializes result models to text documents"""

    # ---- bench ----

    @staticmethod
    def _bench_rows(report: BenchReport) -> List[List[str]]:
        return [
            [
                str(cell.size),
                cell.direction.to_string(),
                str(cell.host_ns),
                str(cell.block_ops),
                format_number(cell.model_ms),
                format_number(cell.model_cycles),
            ]
            for cell in report.cells
        ]

    def bench_to_csv(self, report: BenchReport) -> str:
        return _csv(BENCH_CSV_HEADER, self._bench_rows(report))

    def bench_to_dict(self, report: BenchReport) -> Dict[str, Any]:
        return {
            "metadata": {
                "timestamp": report.timestamp.isoformat(),
                "unit": report.unit.to_string(),
                "frequency_hz": json_number(report.frequency_hz),
                "config": report.config.model_dump(mode="json"),
            },
            "rows": [
                {
                    "size": cell.size,
                    "direction": cell.direction.to_string(),
                    "host_ns": cell.host_ns,
                    "block_ops": cell.block_ops,
                    "repetitions": cell.repetitions,
                    "model_ms": json_number(cell.model_ms),
                    "model_cycles": json_number(cell.model_cycles),
                }
                for cell in report.cells
            ],
        }

    def bench_to_json(self, report: BenchReport) -> str:
        return json.dumps(self.bench_to_dict(report), indent=2) + "\n"

    def bench_to_table(self, report: BenchReport) -> str:
        unit = "us" if report.unit == UnitInterpretation.PHYSICAL else "ms"
        headers = ["Size (byte)", "Dir", "Host median (ns)", "Block ops", f"Model time ({unit})", "Model cycles"]
        rows = [
            [
                f"{cell.size:,}",
                cell.direction.to_string(),
                f"{cell.host_ns:,}",
                f"{cell.block_ops:,}",
                format_number(cell.model_ms * (1000 if unit == "us" else 1), grouping=True),
                format_number(cell.model_cycles, grouping=True),
            ]
            for cell in report.cells
        ]
        return render_table(headers, rows)

    # ---- hop relay ----

    @staticmethod
    def _sim_rows(report: SimReport) -> List[List[str]]:
        return [
            [
                str(rec.hop),
                str(rec.sender),
                str(rec.receiver),
                rec.msg_digest,
                format_number(rec.delay_ms),
                format_number(rec.cumulative_linear_ms),
                format_number(rec.cumulative_summation_ms),
            ]
            for rec in report.ledger
        ]

    def sim_to_csv(self, report: SimReport) -> str:
        return _csv(SIM_CSV_HEADER, self._sim_rows(report))

    def sim_to_json(self, report: SimReport, interpretation: DelayInterpretation) -> str:
        payload = report.model_dump(mode="json")
        payload["interpretation"] = interpretation.to_string()
        payload["total_delay_ms"] = json_number(report.total_for(interpretation))
        return json.dumps(payload, indent=2) + "\n"

    def sim_to_table(self, report: SimReport, interpretation: DelayInterpretation) -> str:
        headers = ["Hop", "From", "To", "msg_E digest", "Delay (ms)", "Cumulative (ms)"]
        rows = []
        for rec in report.ledger:
            cumulative = (
                rec.cumulative_linear_ms
                if interpretation == DelayInterpretation.LINEAR
                else rec.cumulative_summation_ms
            )
            rows.append([
                rec.hop, rec.sender, rec.receiver, rec.msg_digest[:16],
                format_number(rec.delay_ms, grouping=True),
                format_number(cumulative, grouping=True),
            ])
        footer = [
            f"Total delay ({interpretation.to_string()}, {report.hops} hops): "
            f"{format_number(report.total_for(interpretation), grouping=True)} ms",
            f"Plaintext intact at cluster head: {'yes' if report.plaintext_intact else 'no'}",
        ]
        return render_table(headers, rows, footer)

    # ---- delay sweep ----

    def sweep_to_csv(self, rows: List[SweepRow]) -> str:
        return _csv(SWEEP_CSV_HEADER, [[str(r.n), format_number(r.total_delay_ms)] for r in rows])

    def sweep_to_json(self, rows: List[SweepRow], params: DelayParams, interpretation: DelayInterpretation) -> str:
        payload = {
            "interpretation": interpretation.to_string(),
            "params": params.model_dump(mode="json"),
            "rows": [{"n": r.n, "total_delay_ms": json_number(r.total_delay_ms)} for r in rows],
        }
        return json.dumps(payload, indent=2) + "\n"

    def sweep_to_table(self, rows: List[SweepRow], interpretation: DelayInterpretation) -> str:
        headers = ["Hops", f"Total delay (ms, {interpretation.to_string()})"]
        return render_table(headers, [[f"{r.n:,}", format_number(r.total_delay_ms, grouping=True)] for r in rows])


# ============= DESERIALIZATION =============

class ReportDeserializer:
    """Reads emitted JSON documents back into models"""

    @staticmethod
    def bench_from_json(document: str) -> BenchReport:
        payload = json.loads(document)
        meta = payload["metadata"]
        cells = [
            BenchCell(
                size=row["size"],
                direction=Direction.from_string(row["direction"]),
                host_ns=row["host_ns"],
                block_ops=row["block_ops"],
                repetitions=row["repetitions"],
                model_ms=row["model_ms"],
                model_cycles=row["model_cycles"],
            )
            for row in payload["rows"]
        ]
        return BenchReport(
            timestamp=date_parser.isoparse(meta["timestamp"]),
            unit=UnitInterpretation.from_string(meta["unit"]),
            frequency_hz=meta["frequency_hz"],
            config=BenchConfig(**meta["config"]),
            cells=cells,
        )


# ============= CONVENIENCE FUNCTIONS =============

def emit_bench_report(report: BenchReport, fmt: OutputFormat = OutputFormat.CSV) -> str:
    serializer = ReportSerializer()
    if fmt == OutputFormat.JSON:
        return serializer.bench_to_json(report)
    if fmt == OutputFormat.TABLE:
        return serializer.bench_to_table(report)
    return serializer.bench_to_csv(report)


def emit_sim_report(
    report: SimReport,
    fmt: OutputFormat = OutputFormat.TABLE,
    interpretation: DelayInterpretation = DelayInterpretation.LINEAR,
) -> str:
    serializer = ReportSerializer()
    if fmt == OutputFormat.JSON:
        return serializer.sim_to_json(report, interpretation)
    if fmt == OutputFormat.CSV:
        return serializer.sim_to_csv(report)
    return serializer.sim_to_table(report, interpretation)


def emit_sweep(
    rows: List[SweepRow],
    params: DelayParams,
    fmt: OutputFormat = OutputFormat.CSV,
    interpretation: DelayInterpretation = DelayInterpretation.LINEAR,
) -> str:
    serializer = ReportSerializer()
    if fmt == OutputFormat.JSON:
        return serializer.sweep_to_json(rows, params, interpretation)
    if fmt == OutputFormat.TABLE:
        return serializer.sweep_to_table(rows, interpretation)
    return serializer.sweep_to_csv(rows)


def bench_report_from_json(document: str) -> BenchReport:
    return ReportDeserializer.bench_from_json(document)


def emit_key_values(pairs: Sequence[Sequence[Any]], fmt: OutputFormat = OutputFormat.TABLE) -> str:
    """Emit (quantity, value) pairs; used for the timer and predict verbs"""
    if fmt == OutputFormat.JSON:
        payload = {
            str(k): (json_number(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else v)
            for k, v in pairs
        }
        return json.dumps(payload, indent=2) + "\n"
    formatted = [
        [str(k), format_number(v, grouping=fmt == OutputFormat.TABLE) if isinstance(v, (int, float)) else str(v)]
        for k, v in pairs
    ]
    if fmt == OutputFormat.CSV:
        return _csv(["quantity", "value"], formatted)
    return render_table(["Quantity", "Value"], formatted)
