"""Machine model: tier parameters, sensitivity classification, CF calibration."""

import enum
import math
from dataclasses import dataclass, field, fields, replace

from .errors import CalibrationError, NoAttributedSamplesError, ValidationError

MiB = 2**20


class Sensitivity(enum.Enum):
    BANDWIDTH = "Bandwidth"
    LATENCY = "Latency"
    MIXED = "Mixed"


@dataclass(frozen=True)
class MachineConfig:
    """DRAM/NVM tier parameters. Bandwidths in B/s, latencies in s/access.

    ``dram_capacity`` is rounded down to a multiple of ``capacity_granule`` on
    construction; the rounding (if any) is recorded in ``warnings``.
    """

    dram_bw: float
    nvm_bw: float
    dram_lat: float
    nvm_lat: float
    mem_copy_bw: float
    dram_capacity: int
    bw_peak_nvm: float
    cacheline_size: int = 64
    t1_pct: float = 80.0
    t2_pct: float = 10.0
    cf_bw: float = 1.0
    cf_lat: float = 1.0
    capacity_granule: int = MiB
    reprofile_threshold: float = 0.10
    chunk_size: int | None = None
    phase_time_floor: float = 0.05
    runtime_overhead: float = 0.0
    warnings: tuple = field(default=(), compare=False)

    def __post_init__(self):
        for name in ("dram_bw", "nvm_bw", "dram_lat", "nvm_lat", "mem_copy_bw",
                     "dram_capacity", "bw_peak_nvm", "cacheline_size",
                     "capacity_granule"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValidationError(f"{name}: must be a finite positive number (got {v!r})")
        for name in ("dram_bw", "nvm_bw", "dram_lat", "nvm_lat", "mem_copy_bw", "bw_peak_nvm",
                     "t1_pct", "t2_pct", "cf_bw", "cf_lat", "reprofile_threshold",
                     "phase_time_floor", "runtime_overhead"):
            object.__setattr__(self, name, float(getattr(self, name)))
        for name in ("cacheline_size", "capacity_granule"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if self.chunk_size is not None:
            object.__setattr__(self, "chunk_size", int(self.chunk_size))
        if self.nvm_bw > self.dram_bw:
            raise ValidationError("nvm_bw: must not exceed dram_bw")
        if self.nvm_lat < self.dram_lat:
            raise ValidationError("nvm_lat: must not be below dram_lat")
        if not 0 < self.t2_pct < self.t1_pct <= 100:
            raise ValidationError("t1_pct/t2_pct: require 0 < t2_pct < t1_pct <= 100")
        for name in ("cf_bw", "cf_lat"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name}: must be >= 0")
        if not 0 < self.reprofile_threshold:
            raise ValidationError("reprofile_threshold: must be > 0")
        if not 0 <= self.phase_time_floor <= 1:
            raise ValidationError("phase_time_floor: must lie in [0, 1]")
        if self.runtime_overhead < 0:
            raise ValidationError("runtime_overhead: must be >= 0")
        if self.chunk_size is not None and self.chunk_size <= 0:
            raise ValidationError("chunk_size: must be positive")
        granule = int(self.capacity_granule)
        rounded = (int(self.dram_capacity) // granule) * granule
        if rounded <= 0:
            raise ValidationError("dram_capacity: smaller than one capacity_granule")
        original = self.dram_capacity
        object.__setattr__(self, "dram_capacity", rounded)
        if rounded != original:
            object.__setattr__(self, "warnings", self.warnings + (
                f"dram_capacity rounded down to {rounded} bytes "
                f"({rounded // granule} granules)",))

    @property
    def capacity_granules(self):
        return self.dram_capacity // self.capacity_granule

    @property
    def effective_chunk_size(self):
        size = self.chunk_size if self.chunk_size is not None else self.dram_capacity // 8
        return max(1, min(int(size), self.dram_capacity))

    def granules(self, size):
        """Size in capacity granules, rounded up."""
        return -(-int(size) // self.capacity_granule)

    def with_(self, **changes):
        return replace(self, warnings=(), **changes)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self) if f.name != "warnings"}


def default_machine():
    """A 1/2-bandwidth, 4x-latency NVM paired with 1 GiB of DRAM."""
    return MachineConfig(
        dram_bw=12.8e9, nvm_bw=6.4e9,
        dram_lat=100e-9, nvm_lat=400e-9,
        mem_copy_bw=4 * 2**30,
        dram_capacity=2**30,
        bw_peak_nvm=6.4e9,
    )


def active_time(samples_with_access, samples_total, phase_time):
    """Part of ``phase_time`` during which sampling attributed accesses to an object."""
    return samples_with_access / samples_total * phase_time


def object_bandwidth(access, phase_time, samples_total, cfg):
    """Main-memory bandwidth consumed by one object during one phase.

    The denominator is the portion of the phase during which sampling saw
    accesses to the object.
    """
    if samples_total <= 0:
        raise ValidationError("samples_total: must be > 0")
    if phase_time <= 0:
        raise ValidationError("phase_time: must be > 0")
    if access.samples_with_access <= 0:
        raise NoAttributedSamplesError(
            f"no attributed samples for object {access.object_id!r}")
    if access.samples_with_access > samples_total:
        raise ValidationError("samples_with_access: exceeds samples_total")
    active = active_time(access.samples_with_access, samples_total, phase_time)
    return access.data_access * cfg.cacheline_size / active


def classify_sensitivity(bw_obj, cfg):
    if bw_obj < 0:
        raise ValidationError("bw_obj: must be >= 0")
    if bw_obj >= cfg.t1_pct / 100 * cfg.bw_peak_nvm:
        return Sensitivity.BANDWIDTH
    if bw_obj < cfg.t2_pct / 100 * cfg.bw_peak_nvm:
        return Sensitivity.LATENCY
    return Sensitivity.MIXED


def calibrate_cf(pairs):
    """Mean measured/predicted ratio over (predicted, measured) pairs."""
    pairs = list(pairs)
    if not pairs:
        raise CalibrationError("calibration needs at least one (predicted, measured) pair")
    ratios = []
    for predicted, measured in pairs:
        if not (predicted > 0 and measured > 0):
            raise CalibrationError(f"non-positive calibration entry ({predicted}, {measured})")
        ratios.append(measured / predicted)
    return math.fsum(ratios) / len(ratios)
