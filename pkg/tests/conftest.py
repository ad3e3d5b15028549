import sys

import pytest

from hmsplace import AccessRecord, DataObject, MachineConfig, PhaseProfile, Trace

MiB = 2**20


def small_machine(**overrides):
    base = dict(dram_bw=12.8e9, nvm_bw=6.4e9, dram_lat=100e-9, nvm_lat=400e-9,
                mem_copy_bw=4 * 2**30, dram_capacity=512 * MiB, bw_peak_nvm=6.4e9)
    base.update(overrides)
    return MachineConfig(**base)


def rotation_trace(iterations=10):
    """Three 256 MiB latency-bound objects over five 1 s phases."""
    refs = [("a", "b"), ("c",), ("a",), ("b", "c"), ("c",)]
    objects = [DataObject(x, 256 * MiB) for x in "abc"]
    phases = [PhaseProfile(p, 1.0, 10**6, [AccessRecord(x, 10**6, 5 * 10**5) for x in r], r)
              for p, r in enumerate(refs)]
    return Trace(objects, phases, iterations)


def rotation_machine():
    # Copy bandwidth low enough that moving an object outweighs a phase of benefit.
    return small_machine(mem_copy_bw=2**30)


@pytest.fixture
def rotation():
    return rotation_trace(), rotation_machine()


@pytest.fixture
def machine():
    return small_machine()


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if not mod or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
