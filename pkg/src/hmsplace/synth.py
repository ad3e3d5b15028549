"""Seeded synthetic traces built from per-object access archetypes.

``streaming`` objects are swept several times per referencing phase at close
to peak NVM bandwidth, so they classify as bandwidth-sensitive. ``chasing``
objects issue dependent accesses one at a time (latency-sensitive). ``idle``
objects are referenced but never reach main memory.
"""

from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import ValidationError
from .machine import default_machine
from .trace import AccessRecord, DataObject, PhaseProfile, Trace
from .units import parse_bytes, parse_seconds

MiB = 2**20


@dataclass(frozen=True)
class GeneratorSpec:
    n_phases: int = 5
    iterations: int = 10
    streaming: int = 2
    chasing: int = 2
    idle: int = 1
    size_min: int = 64 * MiB
    size_max: int = 256 * MiB
    ref_prob: float = 0.6
    compute_time: float = 0.2
    sampling_interval: float = 1e-6
    intensity: float = 1.0
    noise_sigma: float = 0.0
    partitionable_fraction: float = 0.0
    static_estimates: bool = True

    def __post_init__(self):
        if self.n_phases < 1:
            raise ValidationError("n_phases: must be >= 1")
        if self.iterations < 2:
            raise ValidationError("iterations: must be >= 2")
        if min(self.streaming, self.chasing, self.idle) < 0:
            raise ValidationError("archetype counts: must be >= 0")
        if not 0 < self.size_min <= self.size_max:
            raise ValidationError("size_min/size_max: need 0 < size_min <= size_max")
        if not 0 <= self.ref_prob <= 1:
            raise ValidationError("ref_prob: must lie in [0, 1]")
        if self.compute_time <= 0 or self.sampling_interval <= 0:
            raise ValidationError("compute_time, sampling_interval: must be > 0")

    @classmethod
    def from_dict(cls, doc):
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known - {"schema_version"}
        if unknown:
            raise ValidationError(f"generator spec: unknown fields {sorted(unknown)}")
        values = {k: v for k, v in doc.items() if k in known}
        for key in ("size_min", "size_max"):
            if key in values:
                values[key] = parse_bytes(values[key])
        for key in ("compute_time", "sampling_interval"):
            if key in values:
                values[key] = parse_seconds(values[key])
        return cls(**values)

    def to_dict(self):
        return asdict(self)


def gen_synthetic(spec, seed, machine=None):
    """Deterministic trace for ``spec`` and ``seed``.

    ``machine`` (default: :func:`default_machine`) sets the NVM speeds used to
    turn access counts into phase times and the bandwidth peak used to aim
    streaming objects above the bandwidth-class threshold.
    """
    cfg = machine or default_machine()
    rng = np.random.default_rng(seed)
    kinds = ["streaming"] * spec.streaming + ["chasing"] * spec.chasing + ["idle"] * spec.idle
    names = {"streaming": "s", "chasing": "p", "idle": "i"}
    counters = {k: 0 for k in names}
    specs = []
    for kind in kinds:
        oid = f"{names[kind]}{counters[kind]}"
        counters[kind] += 1
        size = int(rng.integers(spec.size_min // MiB, spec.size_max // MiB + 1)) * MiB \
            if spec.size_max >= MiB else int(spec.size_min)
        refs = rng.random(spec.n_phases) < spec.ref_prob
        if not refs.any():
            refs[int(rng.integers(spec.n_phases))] = True
        partitionable = bool(rng.random() < spec.partitionable_fraction)
        specs.append((oid, kind, size, refs, partitionable))

    phases = []
    totals = {oid: 0.0 for oid, *_ in specs}
    for p in range(spec.n_phases):
        referenced = []
        loads = []
        for oid, kind, size, refs, _ in specs:
            if not refs[p]:
                continue
            referenced.append(oid)
            if kind == "streaming":
                passes = float(rng.uniform(1.0, 4.0)) * spec.intensity
                count = round(passes * size / cfg.cacheline_size)
                util = float(rng.uniform(0.85, 1.0))
                active = count * cfg.cacheline_size / (util * cfg.bw_peak_nvm)
            elif kind == "chasing":
                count = round(float(rng.uniform(1e5, 1e6)) * spec.intensity)
                active = count * cfg.nvm_lat
            else:
                continue
            if count > 0:
                loads.append((oid, count, active))
        baseline = float(spec.compute_time + sum(a for _, _, a in loads))
        samples = max(1, round(baseline / spec.sampling_interval))
        accesses = []
        for oid, count, active in loads:
            with_access = min(samples, max(1, round(active / baseline * samples)))
            accesses.append(AccessRecord(oid, count, with_access))
            totals[oid] += count
        phases.append(PhaseProfile(p, baseline, samples, accesses, referenced))

    objects = [
        DataObject(oid, size, partitionable,
                   float(totals[oid] * spec.iterations) if spec.static_estimates else None)
        for oid, _, size, _, partitionable in specs
    ]
    noise = None
    if spec.noise_sigma > 0:
        raw = 1.0 + rng.normal(0.0, spec.noise_sigma, (spec.iterations, spec.n_phases))
        noise = np.clip(raw, 0.5, 2.0).tolist()
    return Trace(objects, phases, spec.iterations, noise)
