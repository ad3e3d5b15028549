"""Domain values describing one rank's iterative workload."""

from dataclasses import dataclass, field, replace

from .errors import ValidationError


@dataclass(frozen=True)
class DataObject:
    id: str
    size: int
    partitionable: bool = False
    static_ref_estimate: float | None = None
    parent: str | None = None

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ValidationError("objects.id: must be a non-empty string")
        if not self.size > 0:
            raise ValidationError(f"objects[{self.id}].size: must be > 0")
        if self.static_ref_estimate is not None and self.static_ref_estimate < 0:
            raise ValidationError(f"objects[{self.id}].static_ref_estimate: must be >= 0")


@dataclass(frozen=True)
class Chunk:
    id: str
    parent: str
    index: int
    offset: int
    size: int


@dataclass(frozen=True)
class AccessRecord:
    """Sampled main-memory accesses attributed to one object in one phase."""

    object_id: str
    data_access: float
    samples_with_access: int

    def __post_init__(self):
        where = f"accesses[{self.object_id}]"
        if self.data_access < 0:
            raise ValidationError(f"{where}.data_access: must be >= 0")
        if self.samples_with_access < 0:
            raise ValidationError(f"{where}.samples_with_access: must be >= 0")
        if self.data_access > 0 and self.samples_with_access == 0:
            raise ValidationError(
                f"{where}.samples_with_access: must be > 0 when data_access > 0")


@dataclass(frozen=True)
class PhaseProfile:
    id: int
    baseline_time: float
    samples_total: int
    accesses: tuple = ()
    referenced: frozenset = frozenset()
    kind: str = "compute"

    def __post_init__(self):
        object.__setattr__(self, "accesses", tuple(self.accesses))
        object.__setattr__(self, "referenced", frozenset(self.referenced))
        where = f"phases[{self.id}]"
        if self.kind not in ("compute", "comm"):
            raise ValidationError(f"{where}.kind: must be 'compute' or 'comm'")
        if not self.baseline_time > 0:
            raise ValidationError(f"{where}.baseline_time: must be > 0")
        if not self.samples_total > 0:
            raise ValidationError(f"{where}.samples_total: must be > 0")
        seen = set()
        for rec in self.accesses:
            if rec.object_id not in self.referenced:
                raise ValidationError(
                    f"{where}.accesses: object {rec.object_id!r} missing from referenced")
            if rec.object_id in seen:
                raise ValidationError(
                    f"{where}.accesses: duplicate record for {rec.object_id!r}")
            if rec.samples_with_access > self.samples_total:
                raise ValidationError(
                    f"{where}.accesses[{rec.object_id}].samples_with_access: "
                    "exceeds samples_total")
            seen.add(rec.object_id)

    def access_for(self, object_id):
        for rec in self.accesses:
            if rec.object_id == object_id:
                return rec
        return None


@dataclass(frozen=True, eq=True)
class Trace:
    """One iteration of phases, repeated ``iterations`` times.

    ``per_iteration_noise`` is an iterations x phases matrix of multipliers.
    ``per_iteration_overrides`` maps iteration -> phase -> replacement access
    records. ``chunk_histograms`` maps object id -> phase -> access fractions.
    """

    objects: tuple
    phases: tuple
    iterations: int
    per_iteration_noise: tuple | None = None
    per_iteration_overrides: dict = field(default_factory=dict)
    chunk_histograms: dict = field(default_factory=dict)

    __hash__ = None

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "phases", tuple(self.phases))
        object.__setattr__(self, "per_iteration_overrides", {
            int(k): {int(p): tuple(recs) for p, recs in per.items()}
            for k, per in self.per_iteration_overrides.items()})
        object.__setattr__(self, "chunk_histograms", {
            oid: {int(p): tuple(float(h) for h in hist) for p, hist in per.items()}
            for oid, per in self.chunk_histograms.items()})
        if not isinstance(self.iterations, int) or self.iterations < 2:
            raise ValidationError("iterations: must be an integer >= 2")
        ids = [o.id for o in self.objects]
        if len(set(ids)) != len(ids):
            raise ValidationError("objects: ids must be unique")
        known = set(ids)
        for i, ph in enumerate(self.phases):
            if ph.id != i:
                raise ValidationError(f"phases[{i}].id: must equal its position {i}")
            missing = ph.referenced - known
            if missing:
                raise ValidationError(
                    f"phases[{i}].referenced: unknown objects {sorted(missing)}")
        if self.per_iteration_noise is not None:
            noise = tuple(tuple(float(x) for x in row) for row in self.per_iteration_noise)
            if len(noise) != self.iterations:
                raise ValidationError("per_iteration_noise: length must equal iterations")
            for k, row in enumerate(noise):
                if len(row) != len(self.phases):
                    raise ValidationError(
                        f"per_iteration_noise[{k}]: needs one multiplier per phase")
                if any(not x > 0 for x in row):
                    raise ValidationError(f"per_iteration_noise[{k}]: multipliers must be > 0")
            object.__setattr__(self, "per_iteration_noise", noise)
        for k, per_phase in self.per_iteration_overrides.items():
            if not 0 <= k < self.iterations:
                raise ValidationError(f"per_iteration_overrides: iteration {k} out of range")
            for p, recs in per_phase.items():
                if not 0 <= p < len(self.phases):
                    raise ValidationError(
                        f"per_iteration_overrides[{k}]: phase {p} out of range")
                ref = self.phases[p].referenced
                for rec in recs:
                    if rec.object_id not in ref:
                        raise ValidationError(
                            f"per_iteration_overrides[{k}][{p}]: object "
                            f"{rec.object_id!r} missing from referenced")
                    if rec.samples_with_access > self.phases[p].samples_total:
                        raise ValidationError(
                            f"per_iteration_overrides[{k}][{p}]: samples_with_access "
                            "exceeds samples_total")
        for oid, per_phase in self.chunk_histograms.items():
            if oid not in known:
                raise ValidationError(f"chunk_histograms: unknown object {oid!r}")
            for p, hist in per_phase.items():
                if not 0 <= p < len(self.phases):
                    raise ValidationError(f"chunk_histograms[{oid}]: phase {p} out of range")
                if not hist or any(h < 0 for h in hist) or sum(hist) <= 0:
                    raise ValidationError(
                        f"chunk_histograms[{oid}][{p}]: fractions must be >= 0 "
                        "with a positive sum")

    @property
    def n_phases(self):
        return len(self.phases)

    def object(self, object_id):
        for o in self.objects:
            if o.id == object_id:
                return o
        raise KeyError(object_id)

    @property
    def sizes(self):
        return {o.id: o.size for o in self.objects}

    def noise(self, iteration, phase):
        if self.per_iteration_noise is None:
            return 1.0
        return self.per_iteration_noise[iteration][phase]

    def observed_phase(self, iteration, phase):
        """Phase profile as it plays out in ``iteration`` (overrides applied)."""
        ph = self.phases[phase]
        recs = self.per_iteration_overrides.get(iteration, {}).get(phase)
        if recs is None:
            return ph
        return replace(ph, accesses=tuple(recs))

    def with_(self, **changes):
        return replace(self, **changes)
