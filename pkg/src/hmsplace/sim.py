"""Virtual-time execution of a placement plan over a trace.

Phases run back to back on one timeline. A single migration engine serves a
FIFO of requests concurrently with phase execution; a phase start blocks
until every pending request that touches one of its objects (or targets it)
has finished.
"""

import enum
import logging
import math
from dataclasses import dataclass, field, replace

from .costs import min_victims, phase_benefit
from .errors import CapacityViolation, DependencyViolation, InfeasibleEvictionError, ValidationError
from .solver import (
    Direction,
    apply_partitioning,
    check_plan,
    choose_plan,
    cross_global_search,
    empty_plan,
    initial_placement,
    partition_candidates,
    phase_local_search,
    with_partitioning,
)

log = logging.getLogger(__name__)


class Policy(enum.Enum):
    NVM_ONLY = "NvmOnly"
    DRAM_ONLY = "DramOnly"
    UNIMEM = "Unimem"
    LOCAL_ONLY = "LocalOnly"
    GLOBAL_ONLY = "GlobalOnly"
    STATIC_PLAN = "StaticPlan"


class Location(enum.Enum):
    DRAM = "DRAM"
    NVM = "NVM"
    IN_FLIGHT = "InFlight"


@dataclass(frozen=True)
class Stall:
    iteration: int
    phase: int
    wait: float


@dataclass(frozen=True)
class SimulationReport:
    policy: str
    total_time: float
    per_phase_times: tuple
    migrations_count: int = 0
    migrated_bytes: int = 0
    pct_overlap: float = 100.0
    stalls: tuple = ()
    replans: int = 0
    skipped_migrations: int = 0
    clamped_phases: int = 0
    warnings: tuple = ()

    @property
    def stall_time(self):
        return math.fsum(s.wait for s in self.stalls)

    def stall_at(self, iteration, phase):
        return math.fsum(s.wait for s in self.stalls
                         if s.iteration == iteration and s.phase == phase)


@dataclass
class SimulationLog:
    """Raw timeline, for checking safety and capacity from the outside."""

    phases: list = field(default_factory=list)     # (iteration, phase, start, end, refs)
    moves: list = field(default_factory=list)      # (object_id, direction, start, end, granules)
    initial_used: int = 0
    capacity: int = 0
    plans: list = field(default_factory=list)      # (first enforced iteration, plan)


@dataclass
class _Request:
    object_id: str
    direction: Direction
    granules: int
    size: int
    target: tuple
    start: float
    end: float


class _Engine:
    def __init__(self, resident, sizes, cfg, enforce_capacity):
        self.resident = set(resident)
        self.sizes = sizes
        self.cfg = cfg
        self.enforce = enforce_capacity
        self.queue = []
        self.free_at = 0.0
        self.done = []

    def granules(self, oid):
        return self.cfg.granules(self.sizes[oid])

    def projected(self):
        out = set(self.resident)
        for r in self.queue:
            if r.direction is Direction.TO_DRAM:
                out.add(r.object_id)
            else:
                out.discard(r.object_id)
        return out

    def location(self, oid):
        if any(r.object_id == oid for r in self.queue):
            return Location.IN_FLIGHT
        return Location.DRAM if oid in self.resident else Location.NVM

    def dram_free(self, now):
        """Granules not held by resident objects or by inbound moves started by ``now``."""
        held = set(self.resident)
        for r in self.queue:
            if r.direction is Direction.TO_DRAM and r.start <= now:
                held.add(r.object_id)
            elif r.direction is Direction.TO_NVM and r.end <= now:
                held.discard(r.object_id)
        return self.cfg.capacity_granules - sum(self.granules(o) for o in held)

    def push(self, oid, direction, target, now):
        g = self.granules(oid)
        if self.enforce and direction is Direction.TO_DRAM:
            used = sum(self.granules(o) for o in self.projected()) + g
            if used > self.cfg.capacity_granules:
                raise CapacityViolation(
                    f"moving {oid!r} into DRAM would need {used} granules "
                    f"of {self.cfg.capacity_granules}")
        start = max(now, self.free_at)
        end = start + self.sizes[oid] / self.cfg.mem_copy_bw
        self.free_at = end
        self.queue.append(_Request(oid, direction, g, self.sizes[oid], target, start, end))
        if self.enforce and direction is Direction.TO_DRAM:
            if self.dram_free(start) < 0:
                raise CapacityViolation(f"DRAM overcommitted when {oid!r} starts moving in")

    def retire(self, now):
        while self.queue and self.queue[0].end <= now:
            r = self.queue.pop(0)
            if r.direction is Direction.TO_DRAM:
                self.resident.add(r.object_id)
            else:
                self.resident.discard(r.object_id)
            self.done.append(r)

    def ready_time(self, refs, target):
        """When every pending request touching ``refs`` or aimed at ``target`` is done."""
        t = 0.0
        for r in self.queue:
            if r.object_id in refs or r.target == target:
                t = max(t, r.end)
        return t


def phase_time(phase, resident, cfg):
    """(time, clamped) for ``phase`` with ``resident`` objects in DRAM."""
    saved = math.fsum(phase_benefit(phase, oid, cfg)
                      for oid in sorted(phase.referenced) if oid in resident)
    floor = cfg.phase_time_floor * phase.baseline_time
    t = phase.baseline_time - saved
    if t < floor:
        return floor, True
    return t, False


def predict_phase_time(phase, resident, cfg):
    return phase_time(phase, resident, cfg)[0]


def _noise_matrix(trace, noise):
    if noise is not None:
        return tuple(tuple(row) for row in noise)
    if trace.per_iteration_noise is not None:
        return trace.per_iteration_noise
    return tuple((1.0,) * trace.n_phases for _ in range(trace.iterations))


def _reprofile(trace, iteration, noise):
    """Trace as profiled in ``iteration``, covering only the iterations still to run.

    Phase ``p`` comes out so that its predicted time under any residency is
    the noise multiplier times that of the observed profile. The first
    iteration of the result stands for the one just profiled (no
    moves are enforced in it), so candidate plans are scored on the
    remaining horizon only.
    """
    phases = []
    for p in range(trace.n_phases):
        ph = trace.observed_phase(iteration, p)
        f = noise[iteration][p]
        # Noise scales the whole phase, memory traffic included; scaling the
        # counts with the time keeps each object's bandwidth (and class) fixed.
        recs = [replace(r, data_access=r.data_access * f) for r in ph.accesses]
        phases.append(replace(ph, baseline_time=ph.baseline_time * f, accesses=recs))
    return replace(trace, phases=phases, iterations=trace.iterations - iteration,
                   per_iteration_noise=None, per_iteration_overrides={},
                   chunk_histograms={})


def simulate(trace, plan, cfg, noise=None, *, policy="StaticPlan", adapt=False,
             replan=None, enforce_capacity=True, managed=True, log_to=None):
    """Run ``plan`` over every iteration of ``trace`` and report the outcome.

    ``noise`` overrides the trace's per-iteration multipliers. With ``adapt``,
    a phase whose realized time strays from its expected time by more than
    ``cfg.reprofile_threshold`` makes ``replan(trace, cfg, resident)`` build a
    new plan from that iteration's profile, used from the next iteration on.
    """
    if trace.n_phases == 0:
        raise ValidationError("trace has no phases")
    if enforce_capacity:
        check_plan(plan, trace, cfg)
    noise = _noise_matrix(trace, noise)
    if len(noise) != trace.iterations or any(len(r) != trace.n_phases for r in noise):
        raise ValidationError("noise: needs iterations x phases multipliers")
    sizes = trace.sizes
    n = trace.n_phases
    engine = _Engine(plan.initial_dram, sizes, cfg, enforce_capacity)
    if log_to is not None:
        log_to.initial_used = sum(engine.granules(o) for o in plan.initial_dram)
        log_to.capacity = cfg.capacity_granules
        log_to.plans.append((1, plan))
    planning = trace
    first_enforced = 1
    times = [[0.0] * n for _ in range(trace.iterations)]
    stalls = []
    replans = skipped = clamped = 0
    clock = 0.0

    def listing(k):
        if k < first_enforced or k >= trace.iterations:
            return ()
        return plan.migrations if k == first_enforced else plan.steady_migrations

    for k in range(trace.iterations):
        deviated = False
        current, upcoming = listing(k), listing(k + 1)
        for p in range(n):
            phase = trace.phases[p]
            refs = phase.referenced
            here = (k, p)
            begin = clock
            engine.retire(clock)
            clock = max(clock, engine.ready_time(refs, here))
            engine.retire(clock)
            todo = [(m, k) for m in current if m.trigger == p and not m.wrapped]
            todo += [(m, k + 1) for m in upcoming if m.trigger == p and m.wrapped]
            for m, tk in todo:
                skipped += _enqueue(engine, m, (tk, m.target), refs, plan, clock)
            clock = max(clock, engine.ready_time(refs, here))
            engine.retire(clock)
            if clock > begin:
                stalls.append(Stall(k, p, clock - begin))
            for r in engine.queue:
                if r.object_id in refs:
                    raise DependencyViolation(
                        f"{r.object_id!r} in flight while phase {p} of iteration {k} runs")

            observed = trace.observed_phase(k, p)
            t, hit = phase_time(observed, engine.resident, cfg)
            clamped += hit
            scale = 1.0 + cfg.runtime_overhead if managed and k >= 1 else 1.0
            t *= noise[k][p] * scale
            if adapt and k >= first_enforced:
                expected = predict_phase_time(planning.phases[p], engine.resident, cfg) * scale
                if abs(t - expected) > cfg.reprofile_threshold * expected:
                    deviated = True
            times[k][p] = t
            if log_to is not None:
                log_to.phases.append((k, p, clock, clock + t, refs))
            clock += t

        if deviated and replan is not None and k + 1 < trace.iterations:
            planning = _reprofile(trace, k, noise)
            plan = replan(planning, cfg, frozenset(engine.projected()))
            first_enforced = k + 1
            replans += 1
            log.debug("replanned after iteration %d (%s)", k, plan.mode.value)
            if log_to is not None:
                log_to.plans.append((k + 1, plan))

    engine.retire(clock)
    done = engine.done
    busy = math.fsum(r.end - r.start for r in done)
    stall_total = math.fsum(s.wait for s in stalls)
    pct = 100.0 if busy == 0 else min(100.0, max(0.0, (busy - stall_total) / busy * 100.0))
    if log_to is not None:
        log_to.moves.extend((r.object_id, r.direction, r.start, r.end, r.granules)
                            for r in done + engine.queue)
    warnings = tuple(cfg.warnings)
    if clamped:
        warnings += (f"phase time clamped at {cfg.phase_time_floor:g} x baseline "
                     f"in {clamped} phase runs",)
    return SimulationReport(
        policy=policy,
        total_time=math.fsum(math.fsum(row) for row in times) + stall_total,
        per_phase_times=tuple(tuple(row) for row in times),
        migrations_count=len(done),
        migrated_bytes=sum(r.size for r in done),
        pct_overlap=pct,
        stalls=tuple(stalls),
        replans=replans,
        skipped_migrations=skipped,
        clamped_phases=clamped,
        warnings=warnings,
    )


def _enqueue(engine, m, target, refs, plan, now):
    """Queue one planned move; returns 1 if it had to be dropped."""
    x = m.object_id
    projected = engine.projected()
    if m.direction is Direction.TO_NVM:
        if x in projected:
            engine.push(x, Direction.TO_NVM, target, now)
        return 0
    if x in projected:
        return 0
    if engine.enforce:
        cfg = engine.cfg
        used = sum(engine.granules(o) for o in projected)
        short = used + engine.granules(x) - cfg.capacity_granules
        if short > 0:
            busy = {r.object_id for r in engine.queue}
            keep = set(refs) | set(plan.per_phase_residency[m.target]) | busy | {x}
            pool = [(o, engine.granules(o)) for o in sorted(projected - keep)]
            try:
                victims = min_victims(short, pool)
            except InfeasibleEvictionError:
                log.debug("dropping move of %s: no room", x)
                return 1
            for v in victims:
                engine.push(v, Direction.TO_NVM, target, now)
    engine.push(x, Direction.TO_DRAM, target, now)
    return 0


def predict_total(trace, plan, cfg):
    """Noise-free simulated total for ``plan``."""
    quiet = replace(trace, per_iteration_noise=None, per_iteration_overrides={})
    return simulate(quiet, plan, cfg).total_time


def make_planner(search="auto", hold=True):
    """Planner used at the end of the profiling iteration and on every replan.

    ``search`` picks local, global or both (best of the two). With ``hold``,
    keeping the current residency without moves is also a candidate and wins
    if it is strictly faster.
    """

    def plan_for(trace, cfg, initial):
        if search == "local":
            best = phase_local_search(trace, cfg, initial)
        elif search == "global":
            best = cross_global_search(trace, cfg, initial)
        else:
            best = choose_plan(phase_local_search(trace, cfg, initial),
                               cross_global_search(trace, cfg, initial), trace, cfg)
        if best.predicted_total is None:
            best = replace(best, predicted_total=predict_total(trace, best, cfg))
        if hold:
            stay = empty_plan(trace, initial)
            t_stay = predict_total(trace, stay, cfg)
            if t_stay < best.predicted_total:
                return replace(stay, predicted_total=t_stay)
        return best

    return plan_for


def adapt(trace, cfg, plan, replan=None):
    """Simulate with re-planning enabled; returns (last plan, replan count)."""
    replan = replan or make_planner()
    log = SimulationLog()
    report = simulate(trace, plan, cfg, adapt=True, replan=replan, log_to=log)
    return log.plans[-1][1], report.replans


def run_policy(trace, cfg, policy, plan=None, partition="auto", log_to=None):
    """Simulate ``trace`` under one of the comparison policies."""
    policy = Policy(policy) if not isinstance(policy, Policy) else policy
    label = policy.value
    if policy is Policy.NVM_ONLY:
        return simulate(trace, empty_plan(trace), cfg, policy=label, managed=False,
                        log_to=log_to)
    if policy is Policy.DRAM_ONLY:
        everything = frozenset(o.id for o in trace.objects)
        return simulate(trace, empty_plan(trace, everything), cfg, policy=label,
                        enforce_capacity=False, managed=False, log_to=log_to)
    if policy is Policy.STATIC_PLAN:
        if plan is None:
            raise ValidationError("StaticPlan policy needs a plan")
        if plan.partitioned:
            trace = apply_partitioning(trace, plan.partitioned, cfg, plan.chunk_size)
        return simulate(trace, plan, cfg, policy=label, log_to=log_to)
    search = {Policy.UNIMEM: "auto", Policy.LOCAL_ONLY: "local",
              Policy.GLOBAL_ONLY: "global"}[policy]
    trace, first = plan_trace(trace, cfg, search, partition)
    return simulate(trace, first, cfg, policy=label, adapt=True,
                    replan=make_planner(search, hold=policy is Policy.UNIMEM),
                    log_to=log_to)


def plan_trace(trace, cfg, search="auto", partition="auto", hold=True):
    """(possibly partitioned trace, plan) as decided after the profiling iteration."""
    initial = initial_placement(trace.objects, cfg)
    parts = partition_candidates(trace, cfg, partition, initial)
    if parts:
        trace = apply_partitioning(trace, parts, cfg)
        initial = initial_placement(trace.objects, cfg)
    plan = make_planner(search, hold=hold)(trace, cfg, initial)
    if parts:
        plan = with_partitioning(plan, parts, cfg.effective_chunk_size)
    return trace, plan
