import csv
import io
import json

import pytest

from hopcrypt.models.base_models import BenchConfig, DelayInterpretation, DelayParams, OutputFormat
from hopcrypt.models.report_utils import (
    BENCH_CSV_HEADER,
    SIM_CSV_HEADER,
    ReportSerializer,
    bench_report_from_json,
    emit_bench_report,
    emit_key_values,
    emit_sim_report,
    emit_sweep,
    format_number,
    render_table,
)
from hopcrypt.services.bench import BenchHarness
from hopcrypt.services.hopnet import build_chain, make_relay_payload, relay_message, sweep


@pytest.fixture
def bench_report(calibration):
    step = iter(range(0, 10**9, 250))
    cfg = BenchConfig(repetitions=1)
    return BenchHarness(cfg, calibration, clock=lambda: next(step)).run()


@pytest.fixture
def sim_report(default_delays):
    return relay_message(build_chain(30, seed=1), make_relay_payload(1, 16), default_delays, seed=1)


class TestFormatting:
    """Test number formatting and table rendering"""

    @pytest.mark.parametrize("value, grouping, expected", [
        (449, False, "449"),
        (449.0, False, "449"),
        (0.449, False, "0.449"),
        (27450, True, "27,450"),
        (59964525.0, True, "59,964,525"),
        (1234.5, True, "1,234.5"),
    ])
    def test_format_number(self, value, grouping, expected):
        assert format_number(value, grouping) == expected

    def test_render_table(self):
        text = render_table(["a", "bb"], [["1", "2"], ["333", "4"]], ["done"])
        lines = text.splitlines()
        assert lines[0] == "a   | bb"
        assert lines[1] == "----+---"
        assert lines[3] == "333 | 4"
        assert lines[-1] == "done"


class TestBenchSerialization:
    """Test benchmark report output"""

    def test_csv_rows(self, bench_report):
        rows = list(csv.reader(io.StringIO(emit_bench_report(bench_report))))
        assert rows[0] == BENCH_CSV_HEADER
        assert len(rows) == 13
        assert rows[1] == ["16", "enc", "250", "1", "449", "8980"]
        assert rows[2][1] == "dec"

    def test_empty_size_list_gives_header_only(self, calibration):
        report = BenchHarness(BenchConfig(data_sizes=[]), calibration).run()
        assert emit_bench_report(report) == ",".join(BENCH_CSV_HEADER) + "\n"

    def test_json_matches_csv(self, bench_report):
        document = json.loads(emit_bench_report(bench_report, OutputFormat.JSON))
        rows = list(csv.DictReader(io.StringIO(emit_bench_report(bench_report))))
        assert len(document["rows"]) == len(rows)
        for from_json, from_csv in zip(document["rows"], rows):
            for field in BENCH_CSV_HEADER:
                assert str(from_json[field]) == from_csv[field]
        assert document["metadata"]["unit"] == "as_printed"
        assert document["metadata"]["frequency_hz"] == 20_000_000

    def test_json_read_back(self, bench_report):
        restored = bench_report_from_json(emit_bench_report(bench_report, OutputFormat.JSON))
        assert restored.model_dump() == bench_report.model_dump()

    def test_byte_stable(self, bench_report):
        serializer = ReportSerializer()
        assert serializer.bench_to_csv(bench_report) == serializer.bench_to_csv(bench_report)

    def test_table(self, bench_report):
        text = emit_bench_report(bench_report, OutputFormat.TABLE)
        assert "Model time (ms)" in text
        assert "14,368" in text


class TestSimSerialization:
    """Test relay ledger output"""

    def test_table_footer(self, sim_report):
        text = emit_sim_report(sim_report)
        assert "Total delay (linear, 30 hops): 27,450 ms" in text
        assert "Plaintext intact at cluster head: yes" in text

    def test_summation_footer(self, sim_report):
        text = emit_sim_report(sim_report, interpretation=DelayInterpretation.SUMMATION)
        assert "Total delay (summation, 30 hops): 425,475 ms" in text

    def test_csv(self, sim_report):
        rows = list(csv.reader(io.StringIO(emit_sim_report(sim_report, OutputFormat.CSV))))
        assert rows[0] == SIM_CSV_HEADER
        assert len(rows) == 31
        assert rows[-1][4:] == ["915", "27450", "425475"]

    def test_json(self, sim_report):
        document = json.loads(emit_sim_report(sim_report, OutputFormat.JSON))
        assert document["total_delay_ms"] == 27_450
        assert document["interpretation"] == "linear"
        assert len(document["ledger"]) == 30


class TestSweepSerialization:
    def test_csv(self, default_delays):
        text = emit_sweep(sweep(default_delays, 3), default_delays)
        assert text == "n,total_delay_ms\n1,915\n2,1830\n3,2745\n"

    def test_json(self, default_delays):
        document = json.loads(emit_sweep(sweep(default_delays, 2), default_delays, OutputFormat.JSON))
        assert document["rows"] == [{"n": 1, "total_delay_ms": 915}, {"n": 2, "total_delay_ms": 1830}]
        assert document["params"]["t_enc"] == 449

    def test_table(self):
        params = DelayParams()
        text = emit_sweep(sweep(params, 30), params, OutputFormat.TABLE)
        assert "27,450" in text


class TestKeyValues:
    def test_csv(self):
        text = emit_key_values([("ocr", 255), ("period_s", 4e-07)], OutputFormat.CSV)
        assert text.splitlines() == ["quantity,value", "ocr,255", "period_s,4e-07"]

    def test_json(self):
        document = json.loads(emit_key_values([("ocr", 255.0), ("direction", "enc")], OutputFormat.JSON))
        assert document == {"ocr": 255, "direction": "enc"}
