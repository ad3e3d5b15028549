"""Benefit and cost of moving an object from NVM to DRAM for a phase."""

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import InfeasibleEvictionError, NotReferencedError
from .machine import Sensitivity, classify_sensitivity, object_bandwidth


@dataclass(frozen=True)
class OverlapWindow:
    trigger_phase: int
    target_phase: int
    overlap_time: float

    @property
    def wrapped(self):
        return self.trigger_phase > self.target_phase


@dataclass(frozen=True)
class EvictionPlan:
    victims: tuple
    extra_cost: float
    evicted_bytes: int = 0


@dataclass(frozen=True)
class MovementEstimate:
    benefit: float
    cost: float
    extra_cost: float
    weight: float
    sensitivity: Sensitivity
    victims: tuple = ()


def benefit_bw(data_access, cfg):
    moved = data_access * cfg.cacheline_size
    return (moved / cfg.nvm_bw - moved / cfg.dram_bw) * cfg.cf_bw


def benefit_lat(data_access, cfg):
    return (data_access * cfg.nvm_lat - data_access * cfg.dram_lat) * cfg.cf_lat


def benefit(record, sens, cfg):
    if sens is Sensitivity.BANDWIDTH:
        return benefit_bw(record.data_access, cfg)
    if sens is Sensitivity.LATENCY:
        return benefit_lat(record.data_access, cfg)
    return max(benefit_bw(record.data_access, cfg), benefit_lat(record.data_access, cfg))


def sensitivity_of(record, phase, cfg):
    # No attributed samples means no main-memory traffic: zero bandwidth.
    if record is None or record.samples_with_access == 0:
        return Sensitivity.LATENCY
    bw = object_bandwidth(record, phase.baseline_time, phase.samples_total, cfg)
    return classify_sensitivity(bw, cfg)


def phase_benefit(phase, object_id, cfg):
    """Estimated time saved in ``phase`` with ``object_id`` in DRAM."""
    rec = phase.access_for(object_id)
    if rec is None or rec.data_access == 0:
        return 0.0
    return benefit(rec, sensitivity_of(rec, phase, cfg), cfg)


def quiet_window(trace, target, object_id, wrap=True):
    """Earliest start of the run of phases before ``target`` not referencing the object.

    Scans backward from ``target``; with ``wrap`` the scan may continue into
    the previous iteration, but never reaches ``target`` itself again.
    """
    n = trace.n_phases
    j = target
    for _ in range(n - 1):
        prev = j - 1
        if prev < 0:
            if not wrap:
                break
            prev += n
        if object_id in trace.phases[prev].referenced:
            break
        j = prev
    overlap = math.fsum(trace.phases[q].baseline_time for q in cyclic_range(j, target, n))
    return OverlapWindow(j, target, overlap)


def cyclic_range(start, stop, n):
    """Phase indices in [start, stop), wrapping once past the iteration end."""
    q = start
    while q != stop:
        yield q
        q = (q + 1) % n


def overlap_window(trace, target_phase, object_id, wrap=True):
    if not any(object_id in ph.referenced for ph in trace.phases):
        raise NotReferencedError(f"object {object_id!r} is never referenced")
    if object_id not in trace.phases[target_phase].referenced:
        raise NotReferencedError(
            f"object {object_id!r} is not referenced in phase {target_phase}")
    return quiet_window(trace, target_phase, object_id, wrap)


def movement_cost(size, overlap_time, cfg):
    return max(size / cfg.mem_copy_bw - overlap_time, 0.0)


def min_victims(needed_granules, candidates):
    """Victim subset covering ``needed_granules`` with the fewest granules.

    ``candidates`` is a sequence of (id, granules). Ties go to fewer victims,
    then to the lexicographically smallest sorted id list.
    """
    if needed_granules <= 0:
        return ()
    items = sorted(candidates)
    sizes = np.array([g for _, g in items], dtype=np.int64)
    total = int(sizes.sum()) if len(items) else 0
    if total < needed_granules:
        raise InfeasibleEvictionError(
            f"need {needed_granules} granules but only {total} are evictable")
    tab = kernels.subset_min_count(sizes, total)
    row = tab[0, needed_granules:]
    target = needed_granules + int(np.flatnonzero(row != kernels.UNREACHABLE)[0])
    chosen = []
    t = target
    for i, (oid, g) in enumerate(items):
        if t == 0:
            break
        if g <= t and tab[i + 1, t - g] != kernels.UNREACHABLE \
                and tab[i + 1, t - g] + 1 == tab[i, t]:
            chosen.append(oid)
            t -= g
    return tuple(chosen)


def eviction_plan(needed, resident, trace, target_phase, cfg, wrap=True):
    """Objects to push back to NVM so ``needed`` bytes fit, and what that costs.

    ``resident`` is a sequence of (object_id, size in bytes).
    """
    if needed <= 0:
        return EvictionPlan((), 0.0, 0)
    sizes = dict(resident)
    victims = min_victims(cfg.granules(needed),
                          [(oid, cfg.granules(s)) for oid, s in sizes.items()])
    evicted = sum(sizes[v] for v in victims)
    overlap = min(quiet_window(trace, target_phase, v, wrap).overlap_time for v in victims)
    return EvictionPlan(victims, movement_cost(evicted, overlap, cfg), evicted)


def estimate_movement(object_id, phase_index, resident, trace, cfg, wrap=True):
    """Weight of bringing ``object_id`` into DRAM for ``phase_index``.

    ``resident`` is the set of ids in DRAM when the phase's decision is made.
    """
    phase = trace.phases[phase_index]
    rec = phase.access_for(object_id)
    sens = sensitivity_of(rec, phase, cfg)
    gain = phase_benefit(phase, object_id, cfg)
    if object_id in resident:
        return MovementEstimate(gain, 0.0, 0.0, gain, sens)
    sizes = trace.sizes
    size = sizes[object_id]
    window = quiet_window(trace, phase_index, object_id, wrap)
    cost = movement_cost(size, window.overlap_time, cfg)
    used = sum(cfg.granules(sizes[o]) for o in resident)
    short = cfg.granules(size) - (cfg.capacity_granules - used)
    plan = EvictionPlan((), 0.0, 0)
    if short > 0:
        idle = [(o, sizes[o]) for o in sorted(resident) if o not in phase.referenced]
        try:
            plan = eviction_plan(short * cfg.capacity_granule, idle, trace, phase_index, cfg, wrap)
        except InfeasibleEvictionError:
            others = [(o, sizes[o]) for o in sorted(resident)]
            plan = eviction_plan(short * cfg.capacity_granule, others, trace, phase_index,
                                 cfg, wrap)
    return MovementEstimate(gain, cost, plan.extra_cost, gain - cost - plan.extra_cost,
                            sens, plan.victims)
