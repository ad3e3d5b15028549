import math

import pytest

from hmsplace import AccessRecord, Sensitivity, active_time, calibrate_cf, \
    classify_sensitivity, object_bandwidth
from hmsplace.errors import CalibrationError, NoAttributedSamplesError, UnitError, \
    ValidationError
from hmsplace.units import parse_bandwidth, parse_bytes, parse_seconds

from conftest import MiB, small_machine


def test_active_time_from_sample_fraction():
    assert active_time(10**5, 10**7, 10.0) == 0.1


def test_object_bandwidth_divides_bytes_by_active_time(machine):
    rec = AccessRecord("x", 1_000_000, 100)
    bw = object_bandwidth(rec, 2.0, 1000, machine)
    assert bw == pytest.approx(1_000_000 * 64 / 0.2)


def test_object_bandwidth_needs_samples(machine):
    with pytest.raises(NoAttributedSamplesError):
        object_bandwidth(AccessRecord("x", 0, 0), 1.0, 100, machine)


@pytest.mark.parametrize("fraction, expected", [
    (0.80, Sensitivity.BANDWIDTH),
    (0.95, Sensitivity.BANDWIDTH),
    (0.7999, Sensitivity.MIXED),
    (0.10, Sensitivity.MIXED),
    (0.0999, Sensitivity.LATENCY),
    (0.0, Sensitivity.LATENCY),
])
def test_classification_thresholds(machine, fraction, expected):
    assert classify_sensitivity(fraction * machine.bw_peak_nvm, machine) is expected


def test_calibration_is_mean_ratio():
    assert calibrate_cf([(1.0, 2.0), (2.0, 3.0)]) == pytest.approx(1.75)


@pytest.mark.parametrize("pairs", [[], [(0.0, 1.0)], [(1.0, -1.0)]])
def test_calibration_rejects_bad_input(pairs):
    with pytest.raises(CalibrationError):
        calibrate_cf(pairs)


def test_capacity_rounds_down_to_granules():
    cfg = small_machine(dram_capacity=512 * MiB + 12345)
    assert cfg.dram_capacity == 512 * MiB
    assert cfg.capacity_granules == 512
    assert cfg.warnings


def test_granules_round_up(machine):
    assert machine.granules(1) == 1
    assert machine.granules(MiB) == 1
    assert machine.granules(MiB + 1) == 2


def test_default_chunk_size_is_eighth_of_dram(machine):
    assert machine.effective_chunk_size == 64 * MiB
    assert small_machine(chunk_size=10**12).effective_chunk_size == machine.dram_capacity


@pytest.mark.parametrize("overrides", [
    {"dram_bw": 0},
    {"nvm_bw": 20e9},
    {"nvm_lat": 50e-9},
    {"t1_pct": 5.0},
    {"mem_copy_bw": math.inf},
    {"cf_bw": -1.0},
    {"dram_capacity": 100},
])
def test_invalid_machines(overrides):
    with pytest.raises(ValidationError):
        small_machine(**overrides)


@pytest.mark.parametrize("text, expected", [
    ("256 MiB", 256 * MiB), ("1GB", 10**9), ("64", 64), (4096, 4096), ("2 kib", 2048)])
def test_parse_bytes(text, expected):
    assert parse_bytes(text) == expected


@pytest.mark.parametrize("text, expected", [
    ("5 GB/s", 5e9), ("4 GiB/s", 4 * 2**30), (1e9, 1e9)])
def test_parse_bandwidth(text, expected):
    assert parse_bandwidth(text) == expected


@pytest.mark.parametrize("text, expected", [
    ("100 ns", 100e-9), ("2 ms", 2e-3), ("1.5", 1.5), ("3 s", 3.0)])
def test_parse_seconds(text, expected):
    assert parse_seconds(text) == pytest.approx(expected)


@pytest.mark.parametrize("fn, text", [
    (parse_bytes, "12 parsecs"), (parse_bandwidth, "5 GB"), (parse_seconds, "fast"),
    (parse_bytes, True)])
def test_bad_units(fn, text):
    with pytest.raises(UnitError):
        fn(text)
