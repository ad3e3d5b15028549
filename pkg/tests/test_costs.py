import random

import pytest

from hmsplace import AccessRecord, DataObject, PhaseProfile, Sensitivity, Trace, benefit, \
    benefit_bw, benefit_lat, estimate_movement, eviction_plan, movement_cost, overlap_window
from hmsplace.costs import min_victims, phase_benefit, quiet_window, sensitivity_of
from hmsplace.errors import InfeasibleEvictionError, NotReferencedError

from conftest import MiB, rotation_trace, small_machine
from oracles import eviction_best


def test_bandwidth_benefit_is_transfer_time_difference(machine):
    n = 10**6
    moved = n * 64
    assert benefit_bw(n, machine) == pytest.approx(moved / 6.4e9 - moved / 12.8e9)


def test_latency_benefit_is_latency_difference(machine):
    assert benefit_lat(10**6, machine) == pytest.approx(10**6 * 300e-9)


def test_calibration_constants_scale_benefits():
    cfg = small_machine(cf_bw=2.0, cf_lat=0.5)
    base = small_machine()
    assert benefit_bw(1000, cfg) == pytest.approx(2 * benefit_bw(1000, base))
    assert benefit_lat(1000, cfg) == pytest.approx(0.5 * benefit_lat(1000, base))


def test_mixed_takes_larger_benefit(machine):
    rec = AccessRecord("x", 1000, 1)
    expected = max(benefit_bw(1000, machine), benefit_lat(1000, machine))
    assert benefit(rec, Sensitivity.MIXED, machine) == expected


def test_zero_samples_count_as_latency_without_benefit(machine):
    ph = PhaseProfile(0, 1.0, 100, [AccessRecord("x", 0, 0)], {"x"})
    assert sensitivity_of(ph.accesses[0], ph, machine) is Sensitivity.LATENCY
    assert phase_benefit(ph, "x", machine) == 0.0


@pytest.mark.parametrize("oid, target, wrap, trigger, overlap", [
    ("c", 1, True, 0, 1.0),
    ("a", 2, True, 1, 1.0),
    ("b", 3, True, 1, 2.0),
    ("a", 0, True, 3, 2.0),
    ("a", 0, False, 0, 0.0),
    ("c", 3, True, 2, 1.0),
])
def test_overlap_windows_on_rotation(oid, target, wrap, trigger, overlap):
    w = overlap_window(rotation_trace(), target, oid, wrap)
    assert (w.trigger_phase, w.overlap_time) == (trigger, overlap)
    assert w.wrapped == (trigger > target)


def test_overlap_window_requires_reference():
    tr = rotation_trace()
    with pytest.raises(NotReferencedError):
        overlap_window(tr, 1, "a")
    lonely = Trace(list(tr.objects) + [DataObject("z", MiB)], tr.phases, tr.iterations)
    with pytest.raises(NotReferencedError):
        overlap_window(lonely, 0, "z")


def test_quiet_window_never_passes_the_target():
    # Object referenced only in phase 2: the wrapped scan stops one short of it.
    phases = [PhaseProfile(p, 1.0, 10, [], {"x"} if p == 2 else set()) for p in range(4)]
    tr = Trace([DataObject("x", MiB)], phases, 2)
    w = quiet_window(tr, 2, "x")
    assert (w.trigger_phase, w.overlap_time) == (3, 3.0)


@pytest.mark.parametrize("size, overlap, expected", [
    (2**30, 0.0, 1.0), (2**30, 0.25, 0.75), (2**30, 5.0, 0.0)])
def test_movement_cost_subtracts_overlap(size, overlap, expected):
    cfg = small_machine(mem_copy_bw=2**30)
    assert movement_cost(size, overlap, cfg) == expected


def test_min_victims_prefers_fewest_granules_then_fewest_victims():
    assert min_victims(3, [("a", 1), ("b", 2), ("c", 3)]) == ("c",)
    assert min_victims(2, [("a", 1), ("b", 1), ("c", 2)]) == ("c",)
    assert min_victims(2, [("b", 1), ("a", 1), ("c", 1)]) == ("a", "b")
    assert min_victims(0, [("a", 1)]) == ()
    with pytest.raises(InfeasibleEvictionError):
        min_victims(5, [("a", 1), ("b", 2)])


def test_eviction_matches_brute_force_on_random_sets(machine):
    rng = random.Random(7)
    tr = rotation_trace()
    for _ in range(200):
        resident = [(f"o{i}", rng.randint(1, 64) * MiB) for i in range(rng.randint(1, 8))]
        needed = rng.randint(1, sum(s for _, s in resident) // MiB) * MiB
        plan = eviction_plan(needed, resident, tr, 0, machine)
        freed, victims = eviction_best(needed, resident)
        assert plan.evicted_bytes == freed
        assert len(plan.victims) <= len(victims)


def test_eviction_cost_uses_smallest_victim_window():
    cfg = small_machine(mem_copy_bw=2**30)
    tr = rotation_trace()
    # c is resident at phase 2; its quiet window before phase 2 is phase 2 alone -> 0 s.
    plan = eviction_plan(256 * MiB, [("c", 256 * MiB)], tr, 2, cfg)
    assert plan.victims == ("c",)
    assert plan.extra_cost == pytest.approx(0.25 - quiet_window(tr, 2, "c").overlap_time)


def test_estimate_for_resident_object_has_no_cost(rotation):
    tr, cfg = rotation
    est = estimate_movement("a", 0, {"a", "b"}, tr, cfg)
    assert est.cost == 0.0 and est.extra_cost == 0.0
    assert est.weight == pytest.approx(0.3)


def test_estimate_evicts_idle_residents_first(rotation):
    tr, cfg = rotation
    # Phase 3 needs b and c; a and c are resident, a is idle in phase 3.
    est = estimate_movement("b", 3, {"a", "c"}, tr, cfg)
    assert est.victims == ("a",)
    assert est.weight == pytest.approx(est.benefit - est.cost - est.extra_cost)
