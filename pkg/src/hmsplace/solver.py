"""Placement search: per-phase and whole-iteration knapsacks, plan selection,
initial placement and large-object partitioning."""

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .costs import (
    cyclic_range,
    estimate_movement,
    min_victims,
    movement_cost,
    phase_benefit,
    quiet_window,
)
from .errors import InfeasibleEvictionError, ValidationError
from .trace import AccessRecord, Chunk, DataObject


class Mode(enum.Enum):
    PHASE_LOCAL = "PhaseLocal"
    CROSS_GLOBAL = "CrossGlobal"


class Direction(enum.Enum):
    TO_DRAM = "NVM->DRAM"
    TO_NVM = "DRAM->NVM"


@dataclass(frozen=True)
class Migration:
    object_id: str
    direction: Direction
    trigger: int
    target: int

    @property
    def wrapped(self):
        return self.trigger > self.target


@dataclass(frozen=True)
class KnapsackItem:
    id: str
    weight: float
    size: int


@dataclass(frozen=True)
class PlacementPlan:
    """Residency per phase for one iteration plus the moves that realize it.

    ``migrations`` is what the first enforced iteration runs, starting from
    ``initial_dram``. ``steady_migrations`` is what every later iteration
    runs, starting from the last phase's residency; wrapped entries
    (trigger > target) are enqueued during the preceding iteration.
    """

    mode: Mode
    per_phase_residency: tuple
    initial_dram: frozenset = frozenset()
    migrations: tuple = ()
    steady_migrations: tuple = ()
    partitioned: tuple = ()
    chunk_size: int | None = None
    predicted_total: float | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "per_phase_residency",
                           tuple(frozenset(r) for r in self.per_phase_residency))
        object.__setattr__(self, "initial_dram", frozenset(self.initial_dram))
        object.__setattr__(self, "migrations", tuple(self.migrations))
        object.__setattr__(self, "steady_migrations", tuple(self.steady_migrations))
        object.__setattr__(self, "partitioned", tuple(self.partitioned))

    @property
    def dram_objects(self):
        return frozenset().union(*self.per_phase_residency) if self.per_phase_residency \
            else frozenset()


def empty_plan(trace, initial=frozenset()):
    """Keep ``initial`` in DRAM for the whole run and never move anything."""
    return PlacementPlan(Mode.CROSS_GLOBAL, [frozenset(initial)] * trace.n_phases,
                         initial_dram=initial)


def knapsack_solve(items, capacity):
    """Exact 0-1 knapsack over integer sizes; returns the chosen ids.

    Among optimal selections the one with the smallest total size wins, then
    the lexicographically smallest sorted id list.
    """
    items = sorted((it for it in items if it.weight > 0 and it.size <= capacity),
                   key=lambda it: it.id)
    if capacity <= 0 or not items:
        return frozenset()
    sizes = np.array([it.size for it in items], dtype=np.int64)
    weights = np.array([it.weight for it in items], dtype=np.float64)
    best_w, best_s = kernels.knapsack_suffix(sizes, weights, capacity)
    chosen = []
    c = int(capacity)
    for i, it in enumerate(items):
        if it.size <= c:
            w = best_w[i + 1, c - it.size] + it.weight
            s = best_s[i + 1, c - it.size] + it.size
            if w == best_w[i, c] and s == best_s[i, c]:
                chosen.append(it.id)
                c -= it.size
    return frozenset(chosen)


def _later(a, b, target, n):
    """Of two trigger phases for ``target``, the one closer to it."""
    return a if (target - a) % n <= (target - b) % n else b


def _transition_moves(trace, cfg, residency, start, wrap):
    """Migrations turning ``start`` into residency[0], residency[0] into [1], ..."""
    n = trace.n_phases
    sizes = trace.sizes
    moves = []
    prev = frozenset(start)
    for p in range(n):
        cur = residency[p]
        outs = sorted(prev - cur)
        ins = sorted(cur - prev)
        out_trig = {o: quiet_window(trace, p, o, wrap).trigger_phase for o in outs}
        for o in outs:
            moves.append(Migration(o, Direction.TO_NVM, out_trig[o], p))
        need = sum(cfg.granules(sizes[o]) for o in prev | cur)
        for x in ins:
            trig = quiet_window(trace, p, x, wrap).trigger_phase
            # Wait until the object has left DRAM if an earlier phase held it.
            trig = _later(trig, _absent_since(residency, start, p, x, wrap), p, n)
            if need > cfg.capacity_granules:
                for t in out_trig.values():
                    trig = _later(trig, t, p, n)
            moves.append(Migration(x, Direction.TO_DRAM, trig, p))
        prev = cur
    return tuple(moves)


def _absent_since(residency, start, target, object_id, wrap):
    n = len(residency)
    j = target
    for _ in range(n - 1):
        prev = j - 1
        if prev < 0:
            if not wrap:
                break
            prev += n
        if object_id in residency[prev]:
            break
        j = prev
    return j


def phase_local_search(trace, cfg, initial=frozenset()):
    """Knapsack per phase, each decision made knowing the previous one."""
    if trace.n_phases == 0:
        raise ValidationError("trace has no phases")
    sizes = trace.sizes
    cap = cfg.capacity_granules
    context = frozenset(initial)
    residency = []
    for p, phase in enumerate(trace.phases):
        items = []
        for oid in sorted(phase.referenced):
            g = cfg.granules(sizes[oid])
            if g > cap:
                continue
            try:
                est = estimate_movement(oid, p, context, trace, cfg)
            except InfeasibleEvictionError:
                continue
            items.append(KnapsackItem(oid, est.weight, g))
        selected = knapsack_solve(items, cap)
        keep = context - selected
        used = sum(cfg.granules(sizes[o]) for o in keep | selected)
        if used > cap:
            idle = [(o, cfg.granules(sizes[o])) for o in keep if o not in phase.referenced]
            try:
                victims = min_victims(used - cap, idle)
            except InfeasibleEvictionError:
                victims = min_victims(used - cap,
                                      [(o, cfg.granules(sizes[o])) for o in keep])
            keep = keep - set(victims)
        context = keep | selected
        residency.append(context)
    return PlacementPlan(
        Mode.PHASE_LOCAL, residency, initial_dram=initial,
        migrations=_transition_moves(trace, cfg, residency, initial, wrap=False),
        steady_migrations=_transition_moves(trace, cfg, residency, residency[-1], wrap=True),
    )


def _first_reference(trace, object_id):
    for p, ph in enumerate(trace.phases):
        if object_id in ph.referenced:
            return p
    return None


def cross_global_search(trace, cfg, initial=frozenset()):
    """One knapsack over the whole iteration; residency never changes."""
    if trace.n_phases == 0:
        raise ValidationError("trace has no phases")
    cap = cfg.capacity_granules
    items = []
    for obj in trace.objects:
        first = _first_reference(trace, obj.id)
        g = cfg.granules(obj.size)
        if first is None or g > cap:
            continue
        gain = math.fsum(phase_benefit(ph, obj.id, cfg) for ph in trace.phases)
        if obj.id in initial:
            cost = 0.0
        else:
            lead = math.fsum(trace.phases[q].baseline_time for q in range(first))
            cost = movement_cost(obj.size, lead, cfg)
        items.append(KnapsackItem(obj.id, gain - cost, g))
    selected = knapsack_solve(items, cap)
    sizes = trace.sizes
    keep = frozenset(initial) - selected
    used = sum(cfg.granules(sizes[o]) for o in keep | selected)
    if used > cap:
        victims = min_victims(used - cap, [(o, cfg.granules(sizes[o])) for o in keep])
        keep = keep - set(victims)
    final = keep | selected
    ins = sorted(final - frozenset(initial), key=lambda o: (_first_reference(trace, o), o))
    outs = sorted(frozenset(initial) - final)
    # Evictions must land before the first inbound needs the room and before
    # the evicted object's own next use.
    first_in = _first_reference(trace, ins[0]) if ins else trace.n_phases - 1
    moves = []
    for o in outs:
        ref = _first_reference(trace, o)
        moves.append(Migration(o, Direction.TO_NVM, 0,
                               first_in if ref is None else min(first_in, ref)))
    moves += [Migration(x, Direction.TO_DRAM, 0, _first_reference(trace, x)) for x in ins]
    return PlacementPlan(Mode.CROSS_GLOBAL, [final] * trace.n_phases,
                         initial_dram=initial, migrations=moves)


def choose_plan(local, global_, trace, cfg):
    """The plan with the smaller simulated total; ties go to the global plan."""
    from .sim import predict_total

    t_local = local.predicted_total
    if t_local is None:
        t_local = predict_total(trace, local, cfg)
    t_global = global_.predicted_total
    if t_global is None:
        t_global = predict_total(trace, global_, cfg)
    local = replace(local, predicted_total=t_local)
    global_ = replace(global_, predicted_total=t_global)
    return global_ if t_global <= t_local else local


def initial_placement(objects, cfg):
    """Objects with the largest static reference estimates that fit in DRAM."""
    ranked = sorted((o for o in objects if o.static_ref_estimate is not None),
                    key=lambda o: (-o.static_ref_estimate, o.id))
    free = cfg.capacity_granules
    chosen = set()
    for o in ranked:
        g = cfg.granules(o.size)
        if g <= free:
            chosen.add(o.id)
            free -= g
    return frozenset(chosen)


# -- large objects ----------------------------------------------------------

def chunk_id(parent, index):
    return f"{parent}#{index}"


def partition_object(obj, cfg, chunk_size=None):
    """Equal chunks of ``chunk_size`` (capped at DRAM size) plus a smaller tail."""
    if not obj.partitionable:
        return [Chunk(obj.id, obj.id, 0, 0, obj.size)]
    size = min(int(chunk_size or cfg.effective_chunk_size), cfg.dram_capacity)
    chunks = []
    offset = 0
    while offset < obj.size:
        n = min(size, obj.size - offset)
        chunks.append(Chunk(chunk_id(obj.id, len(chunks)), obj.id, len(chunks), offset, n))
        offset += n
    return chunks


def split_counts(total, fractions):
    """Integer split of ``total`` proportional to ``fractions`` (largest remainder)."""
    fr = np.asarray(fractions, dtype=np.float64)
    fr = fr / fr.sum()
    raw = fr * total
    base = np.floor(raw).astype(np.int64)
    rest = int(round(total)) - int(base.sum())
    order = sorted(range(len(fr)), key=lambda i: (-(raw[i] - base[i]), i))
    for i in order[:max(rest, 0)]:
        base[i] += 1
    return [int(x) for x in base]


def apply_partitioning(trace, object_ids, cfg, chunk_size=None):
    """Trace with each listed (partitionable) object replaced by its chunks."""
    targets = {oid for oid in object_ids if trace.object(oid).partitionable}
    if not targets:
        return trace
    chunks_of = {oid: partition_object(trace.object(oid), cfg, chunk_size) for oid in targets}
    objects = []
    for o in trace.objects:
        if o.id not in targets:
            objects.append(o)
            continue
        chunks = chunks_of[o.id]
        for c in chunks:
            est = None if o.static_ref_estimate is None else \
                o.static_ref_estimate * c.size / o.size
            objects.append(DataObject(c.id, c.size, False, est, parent=o.id))

    def split(phase_index, recs, referenced):
        out = []
        for rec in recs:
            if rec.object_id not in targets:
                out.append(rec)
                continue
            chunks = chunks_of[rec.object_id]
            hist = trace.chunk_histograms.get(rec.object_id, {}).get(phase_index)
            if hist is None:
                hist = [c.size for c in chunks]
            elif len(hist) != len(chunks):
                raise ValidationError(
                    f"chunk_histograms[{rec.object_id}][{phase_index}]: expected "
                    f"{len(chunks)} fractions, got {len(hist)}")
            accesses = split_counts(rec.data_access, hist)
            samples = split_counts(rec.samples_with_access, hist)
            for c, a, s in zip(chunks, accesses, samples):
                if a > 0 and s == 0:
                    s = 1
                out.append(AccessRecord(c.id, a, s))
        return out

    def expand(referenced):
        out = set()
        for oid in referenced:
            if oid in targets:
                out.update(c.id for c in chunks_of[oid])
            else:
                out.add(oid)
        return frozenset(out)

    phases = [replace(ph, accesses=split(p, ph.accesses, ph.referenced),
                      referenced=expand(ph.referenced))
              for p, ph in enumerate(trace.phases)]
    overrides = {k: {p: split(p, recs, trace.phases[p].referenced) for p, recs in per.items()}
                 for k, per in trace.per_iteration_overrides.items()}
    hists = {k: v for k, v in trace.chunk_histograms.items() if k not in targets}
    return replace(trace, objects=objects, phases=phases,
                   per_iteration_overrides=overrides, chunk_histograms=hists)


def partition_candidates(trace, cfg, mode="auto", initial=frozenset()):
    """Ids of objects to split into chunks under ``mode`` (on, off, auto).

    ``auto`` splits partitionable objects larger than DRAM, and also
    positive-benefit ones left out of a global plan that leaves more than a
    quarter of DRAM unused.
    """
    if mode == "off":
        return ()
    if mode == "on":
        return tuple(sorted(o.id for o in trace.objects if o.partitionable))
    if mode != "auto":
        raise ValidationError(f"partition mode must be on, off or auto (got {mode!r})")
    cap = cfg.capacity_granules
    picks = {o.id for o in trace.objects
             if o.partitionable and cfg.granules(o.size) > cap}
    if trace.n_phases:
        plan = cross_global_search(trace, cfg, initial)
        chosen = plan.per_phase_residency[0]
        free = cap - sum(cfg.granules(trace.object(o).size) for o in chosen)
        if free > cap / 4:
            for o in trace.objects:
                if o.partitionable and o.id not in chosen and cfg.granules(o.size) > free:
                    gain = sum(phase_benefit(ph, o.id, cfg) for ph in trace.phases)
                    if gain > 0:
                        picks.add(o.id)
    return tuple(sorted(picks))


def with_partitioning(plan, partitioned, chunk_size):
    return replace(plan, partitioned=tuple(partitioned), chunk_size=chunk_size)


def check_plan(plan, trace, cfg):
    """Raise if the plan breaks capacity or dependency rules for ``trace``."""
    from .errors import CapacityViolation, DependencyViolation

    n = trace.n_phases
    if len(plan.per_phase_residency) != n:
        raise ValidationError(
            f"plan has {len(plan.per_phase_residency)} phases, trace has {n}")
    sizes = trace.sizes
    for group in (plan.per_phase_residency, [plan.initial_dram]):
        for p, res in enumerate(group):
            unknown = res - sizes.keys()
            if unknown:
                raise ValidationError(f"plan names unknown objects {sorted(unknown)}")
            if sum(cfg.granules(sizes[o]) for o in res) > cfg.capacity_granules:
                raise CapacityViolation(f"plan residency for phase {p} exceeds DRAM")
    for listing, wrap_ok in ((plan.migrations, False), (plan.steady_migrations, True)):
        for m in listing:
            if m.object_id not in sizes:
                raise ValidationError(f"plan migrates unknown object {m.object_id!r}")
            if not (0 <= m.trigger < n and 0 <= m.target < n):
                raise ValidationError(f"migration {m} refers to a phase out of range")
            if m.wrapped and not wrap_ok:
                raise DependencyViolation(
                    f"migration {m} starts before the first enforced iteration")
            for q in cyclic_range(m.trigger, m.target, n):
                if m.object_id in trace.phases[q].referenced:
                    raise DependencyViolation(
                        f"migration of {m.object_id!r} triggered at phase {m.trigger} "
                        f"overlaps phase {q}, which references it")
