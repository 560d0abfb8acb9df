import pytest
from pydantic import ValidationError

from hopcrypt.models.base_models import (
    CalibrationRow,
    CalibrationTable,
    Direction,
    McuClockConfig,
    TimerCtc,
    UnitInterpretation,
)
from hopcrypt.models.errors import CalibrationError, TimerRangeError
from hopcrypt.services.mcu_timing import (
    check_model_agreement,
    clock_period,
    dump_calibration,
    interrupts_per_ms,
    linear_model,
    load_calibration,
    model_error,
    nearest_feasible_prescaler,
    ocr_for_interval,
    predict,
    prescaled_period,
    save_calibration,
    timer_for_interval,
)


class TestClock:
    """Test clock and prescaled periods"""

    def test_default_periods(self):
        """Test 20 MHz gives 50 ns, 400 ns at prescaler 8 and 51.2 us at 1024"""
        cfg = McuClockConfig()
        assert clock_period(cfg) == pytest.approx(50e-9)
        assert prescaled_period(cfg) == pytest.approx(400e-9)
        assert prescaled_period(McuClockConfig(prescaler=1024)) == pytest.approx(51.2e-6)

    def test_identity_prescaler(self):
        cfg = McuClockConfig(prescaler=1)
        assert prescaled_period(cfg) == clock_period(cfg)

    @pytest.mark.parametrize("frequency_hz", [1_000_000, 8_000_000, 20_000_000])
    @pytest.mark.parametrize("prescaler", [1, 8, 64, 256, 1024])
    def test_prescaler_ratio_is_exact(self, frequency_hz, prescaler):
        cfg = McuClockConfig(frequency_hz=frequency_hz, prescaler=prescaler)
        assert prescaled_period(cfg) / clock_period(cfg) == prescaler

    @pytest.mark.parametrize("prescaler", [0, 2, 32, 128, 2048])
    def test_invalid_prescaler(self, prescaler):
        with pytest.raises(ValidationError):
            McuClockConfig(prescaler=prescaler)

    def test_frequency_must_be_positive(self):
        with pytest.raises(ValidationError):
            McuClockConfig(frequency_hz=0)


class TestCompareValue:
    """Test OCR selection for a target interrupt interval"""

    def test_extremes(self):
        cfg = McuClockConfig()
        assert ocr_for_interval(cfg, 256 * 400e-9) == 255
        assert ocr_for_interval(cfg, 400e-9) == 0

    def test_interval_too_long(self):
        """Test 1 ms at prescaler 8 names prescaler 256 as the nearest that fits"""
        with pytest.raises(TimerRangeError) as exc_info:
            ocr_for_interval(McuClockConfig(), 1e-3)
        assert exc_info.value.nearest_prescaler == 256
        assert "256" in str(exc_info.value)

    def test_one_tick_past_range(self):
        with pytest.raises(TimerRangeError):
            ocr_for_interval(McuClockConfig(), 257 * 400e-9)

    def test_half_tick_past_range(self):
        """Test 102.6 us (256.5 ticks) is rejected rather than rounded into range"""
        with pytest.raises(TimerRangeError) as exc_info:
            ocr_for_interval(McuClockConfig(), 102.6e-6)
        assert exc_info.value.nearest_prescaler == 64

    def test_below_one_tick(self):
        with pytest.raises(TimerRangeError):
            ocr_for_interval(McuClockConfig(), 200e-9)

    @pytest.mark.parametrize("interval_us, expected", [
        (100.1, 249),  # 250.25 ticks
        (100.3, 250),  # 250.75 ticks
        (0.44, 0),     # 1.1 ticks
    ])
    def test_between_tick_counts_rounds_to_nearest(self, interval_us, expected):
        assert ocr_for_interval(McuClockConfig(), interval_us * 1e-6) == expected

    def test_unrepresentable_interval(self):
        """Test an interval longer than any prescaler can count"""
        with pytest.raises(TimerRangeError) as exc_info:
            ocr_for_interval(McuClockConfig(), 1.0)
        assert exc_info.value.nearest_prescaler is None
        assert nearest_feasible_prescaler(McuClockConfig(), 1.0) is None

    def test_non_positive_interval(self):
        with pytest.raises(TimerRangeError):
            ocr_for_interval(McuClockConfig(), 0)

    @pytest.mark.parametrize("prescaler", [8, 64, 256, 1024])
    def test_every_ocr_round_trips(self, prescaler):
        """Test that the interval for each OCR maps back to that OCR"""
        cfg = McuClockConfig(prescaler=prescaler)
        period = prescaled_period(cfg)
        for ocr in range(256):
            assert ocr_for_interval(cfg, (ocr + 1) * period) == ocr

    def test_interrupts_per_ms(self):
        assert interrupts_per_ms(McuClockConfig(prescaler=64), 249) == pytest.approx(1.25)
        assert interrupts_per_ms(McuClockConfig(), 249) == pytest.approx(10.0)

    def test_interrupts_per_ms_rejects_wide_ocr(self):
        with pytest.raises(TimerRangeError):
            interrupts_per_ms(McuClockConfig(), 256)

    def test_timer_for_interval(self):
        timer = timer_for_interval(McuClockConfig(prescaler=64), 0.8e-3)
        assert timer.ocr == 249
        assert timer.tcnt == 0
        assert timer.interrupt_count_per_ms == pytest.approx(1.25)


class TestTimerCtc:
    """Test the CTC counter model"""

    def test_advance_counts_matches(self):
        timer = TimerCtc(ocr=9)
        assert timer.advance(25) == 2
        assert timer.tcnt == 5
        assert timer.advance(5) == 1
        assert timer.tcnt == 0

    def test_advance_zero(self):
        timer = TimerCtc(ocr=0, tcnt=0)
        assert timer.advance(0) == 0
        assert timer.advance(3) == 3

    def test_negative_ticks(self):
        with pytest.raises(ValueError):
            TimerCtc(ocr=1).advance(-1)

    def test_ocr_is_eight_bit(self):
        with pytest.raises(ValidationError):
            TimerCtc(ocr=256)


class TestPrediction:
    """Test the calibrated size -> time/cycles model"""

    @pytest.mark.parametrize("size, direction, expected", [
        (16, Direction.ENC, (449, 8_980)),
        (16, Direction.DEC, (456, 9_120)),
        (64, Direction.DEC, (1_825, 36_500)),
        (512, Direction.ENC, (14_368, 287_360)),
        (512, Direction.DEC, (14_592, 291_840)),
    ])
    def test_measured_rows_verbatim(self, calibration, size, direction, expected):
        assert predict(calibration, size, direction) == expected

    def test_doubling_law(self, calibration):
        """Test that doubling the size doubles the modeled time and cycles"""
        for direction in Direction:
            for size in (16, 32, 48, 128, 512, 1024):
                t1, c1 = linear_model(calibration, size, direction)
                t2, c2 = linear_model(calibration, 2 * size, direction)
                assert t2 == pytest.approx(2 * t1)
                assert c2 == pytest.approx(2 * c1)

    def test_unmeasured_size_uses_linear_model(self, calibration):
        assert predict(calibration, 48, Direction.ENC) == pytest.approx((1_347, 26_940))
        assert predict(calibration, 1024, Direction.DEC) == pytest.approx((29_184, 583_680))

    def test_decrypt_never_faster(self, calibration):
        for row in calibration.rows:
            assert predict(calibration, row.size, Direction.DEC)[0] >= predict(calibration, row.size, Direction.ENC)[0]

    def test_model_agrees_within_tenth_of_percent(self, calibration):
        errors = model_error(calibration)
        assert len(errors) == 12
        assert max(errors.values()) <= 1e-3
        check_model_agreement(calibration)

    def test_model_disagreement_raises(self):
        table = CalibrationTable(rows=[
            CalibrationRow(size=16, enc_ms=449, enc_cycles=8_980, dec_ms=456, dec_cycles=9_120),
            CalibrationRow(size=32, enc_ms=1_000, enc_cycles=20_000, dec_ms=912, dec_cycles=18_240),
        ])
        with pytest.raises(CalibrationError):
            check_model_agreement(table)

    def test_physical_unit(self):
        """Test that the physical reading scales time by 1/1000 and keeps cycles"""
        table = CalibrationTable.builtin(UnitInterpretation.PHYSICAL)
        time_ms, cycles = predict(table, 16, Direction.ENC)
        assert time_ms == pytest.approx(0.449)
        assert cycles == 8_980

    @pytest.mark.parametrize("size", [0, -16, 15, 17, 100])
    def test_size_must_be_block_multiple(self, calibration, size):
        with pytest.raises(CalibrationError):
            predict(calibration, size, Direction.ENC)


class TestCalibrationTable:
    """Test calibration table validation and CSV storage"""

    def test_cycles_must_match_clock(self):
        with pytest.raises(ValidationError):
            CalibrationTable(rows=[
                CalibrationRow(size=16, enc_ms=449, enc_cycles=9_000, dec_ms=456, dec_cycles=9_120),
            ])

    def test_sizes_strictly_increasing(self):
        row = CalibrationRow(size=16, enc_ms=449, enc_cycles=8_980, dec_ms=456, dec_cycles=9_120)
        with pytest.raises(ValidationError):
            CalibrationTable(rows=[row, row])

    def test_save_and_load(self, calibration, tmp_path):
        path = tmp_path / "calibration.csv"
        save_calibration(calibration, path)
        loaded = load_calibration(path)
        assert loaded.rows == calibration.rows
        assert path.read_text().splitlines()[1] == "16,449,8980,456,9120"

    def test_load_with_unit(self, calibration, tmp_path):
        path = tmp_path / "calibration.csv"
        path.write_text(dump_calibration(calibration))
        loaded = load_calibration(path, unit=UnitInterpretation.PHYSICAL)
        assert loaded.unit == UnitInterpretation.PHYSICAL

    def test_load_grouped_numbers(self, tmp_path):
        path = tmp_path / "calibration.csv"
        path.write_text('size,enc_ms,enc_cycles,dec_ms,dec_cycles\n16,449,"8,980",456,"9,120"\n')
        assert load_calibration(path).rows[0].enc_cycles == 8_980

    def test_bad_header(self, tmp_path):
        path = tmp_path / "calibration.csv"
        path.write_text("size,enc,dec\n16,449,456\n")
        with pytest.raises(CalibrationError):
            load_calibration(path)

    def test_malformed_row(self, tmp_path):
        path = tmp_path / "calibration.csv"
        path.write_text("size,enc_ms,enc_cycles,dec_ms,dec_cycles\n16,abc,8980,456,9120\n")
        with pytest.raises(CalibrationError):
            load_calibration(path)

    def test_inconsistent_rows(self, tmp_path):
        path = tmp_path / "calibration.csv"
        path.write_text("size,enc_ms,enc_cycles,dec_ms,dec_cycles\n16,449,1,456,9120\n")
        with pytest.raises(CalibrationError):
            load_calibration(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            load_calibration(tmp_path / "absent.csv")
