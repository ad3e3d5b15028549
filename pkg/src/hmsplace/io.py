"""JSON documents for machines, traces, plans and reports, plus the CSV report.

Every document carries ``"schema_version": "1"``. Loaders reject unknown
fields and re-check every domain invariant.
"""

import csv
import io
import json
from dataclasses import fields
from pathlib import Path

from .errors import SchemaVersionError, ValidationError
from .machine import MachineConfig
from .sim import SimulationReport, Stall
from .solver import Direction, Migration, Mode, PlacementPlan
from .trace import AccessRecord, DataObject, PhaseProfile, Trace
from .units import parse_bandwidth, parse_bytes, parse_seconds

SCHEMA_VERSION = "1"

_BW = ("dram_bw", "nvm_bw", "mem_copy_bw", "bw_peak_nvm")
_LAT = ("dram_lat", "nvm_lat")
_BYTES = ("dram_capacity", "cacheline_size", "capacity_granule", "chunk_size")


def _check_version(doc, what):
    if not isinstance(doc, dict):
        raise ValidationError(f"{what}: expected a JSON object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"{what}.schema_version: expected {SCHEMA_VERSION!r}, got {version!r}")


def _check_keys(doc, allowed, required, where):
    if not isinstance(doc, dict):
        raise ValidationError(f"{where}: expected a JSON object")
    unknown = set(doc) - set(allowed)
    if unknown:
        raise ValidationError(f"{where}: unknown fields {sorted(unknown)}")
    missing = set(required) - set(doc)
    if missing:
        raise ValidationError(f"{where}: missing fields {sorted(missing)}")


def _read(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from None


def _write(path, doc):
    Path(path).write_text(dumps(doc))


def dumps(doc):
    return json.dumps(doc, indent=2) + "\n"


# -- machine ----------------------------------------------------------------

_MACHINE_FIELDS = [f.name for f in fields(MachineConfig) if f.name != "warnings"]
_MACHINE_REQUIRED = ("dram_bw", "nvm_bw", "dram_lat", "nvm_lat", "mem_copy_bw",
                     "dram_capacity", "bw_peak_nvm")


def machine_from_dict(doc):
    _check_version(doc, "machine")
    body = {k: v for k, v in doc.items() if k != "schema_version"}
    _check_keys(body, _MACHINE_FIELDS, _MACHINE_REQUIRED, "machine")
    values = {}
    for key, v in body.items():
        if v is None and key == "chunk_size":
            values[key] = None
        elif key in _BW:
            values[key] = parse_bandwidth(v)
        elif key in _LAT:
            values[key] = parse_seconds(v)
        elif key in _BYTES:
            values[key] = parse_bytes(v)
        elif isinstance(v, (int, float)) and not isinstance(v, bool):
            values[key] = v
        else:
            raise ValidationError(f"machine.{key}: expected a number, got {v!r}")
    return MachineConfig(**values)


def machine_to_dict(cfg):
    return {"schema_version": SCHEMA_VERSION, **cfg.to_dict()}


def load_machine(path):
    return machine_from_dict(_read(path))


def save_machine(cfg, path):
    _write(path, machine_to_dict(cfg))


# -- trace ------------------------------------------------------------------

def _access_from(doc, where):
    _check_keys(doc, ("object_id", "data_access", "samples_with_access"),
                ("object_id", "data_access", "samples_with_access"), where)
    return AccessRecord(doc["object_id"], doc["data_access"], doc["samples_with_access"])


def _access_to(rec):
    return {"object_id": rec.object_id, "data_access": rec.data_access,
            "samples_with_access": rec.samples_with_access}


def _int_key(key, where):
    try:
        return int(key)
    except (TypeError, ValueError):
        raise ValidationError(f"{where}: key {key!r} is not an integer index") from None


def trace_from_dict(doc):
    _check_version(doc, "trace")
    _check_keys(doc, ("schema_version", "objects", "phases", "iterations",
                      "per_iteration_noise", "per_iteration_overrides", "chunk_histograms"),
                ("objects", "phases", "iterations"), "trace")
    objects = []
    for i, o in enumerate(doc["objects"]):
        where = f"objects[{i}]"
        _check_keys(o, ("id", "size", "partitionable", "static_ref_estimate", "parent"),
                    ("id", "size"), where)
        objects.append(DataObject(o["id"], parse_bytes(o["size"]),
                                  bool(o.get("partitionable", False)),
                                  o.get("static_ref_estimate"), o.get("parent")))
    phases = []
    for i, ph in enumerate(doc["phases"]):
        where = f"phases[{i}]"
        _check_keys(ph, ("id", "kind", "baseline_time", "samples_total", "accesses",
                         "referenced"), ("baseline_time", "samples_total"), where)
        phases.append(PhaseProfile(
            id=ph.get("id", i),
            kind=ph.get("kind", "compute"),
            baseline_time=parse_seconds(ph["baseline_time"]),
            samples_total=ph["samples_total"],
            accesses=[_access_from(a, f"{where}.accesses")
                      for a in ph.get("accesses", [])],
            referenced=ph.get("referenced", []),
        ))
    noise = doc.get("per_iteration_noise")
    if noise is not None:
        noise = [[float(row)] * len(phases) if isinstance(row, (int, float)) else row
                 for row in noise]
    overrides = {}
    for k, per in (doc.get("per_iteration_overrides") or {}).items():
        kk = _int_key(k, "per_iteration_overrides")
        overrides[kk] = {
            _int_key(p, f"per_iteration_overrides[{k}]"):
                tuple(_access_from(a, f"per_iteration_overrides[{k}][{p}]") for a in recs)
            for p, recs in per.items()}
    hists = {}
    for oid, per in (doc.get("chunk_histograms") or {}).items():
        hists[oid] = {_int_key(p, f"chunk_histograms[{oid}]"): tuple(h)
                      for p, h in per.items()}
    if not isinstance(doc["iterations"], int) or isinstance(doc["iterations"], bool):
        raise ValidationError("iterations: must be an integer >= 2")
    return Trace(objects, phases, doc["iterations"], noise, overrides, hists)


def trace_to_dict(trace):
    doc = {
        "schema_version": SCHEMA_VERSION,
        "iterations": trace.iterations,
        "objects": [],
        "phases": [],
    }
    for o in trace.objects:
        item = {"id": o.id, "size": o.size, "partitionable": o.partitionable,
                "static_ref_estimate": o.static_ref_estimate}
        if o.parent is not None:
            item["parent"] = o.parent
        doc["objects"].append(item)
    for ph in trace.phases:
        doc["phases"].append({
            "id": ph.id, "kind": ph.kind, "baseline_time": ph.baseline_time,
            "samples_total": ph.samples_total,
            "referenced": sorted(ph.referenced),
            "accesses": [_access_to(a) for a in ph.accesses],
        })
    if trace.per_iteration_noise is not None:
        doc["per_iteration_noise"] = [list(row) for row in trace.per_iteration_noise]
    if trace.per_iteration_overrides:
        doc["per_iteration_overrides"] = {
            str(k): {str(p): [_access_to(a) for a in recs] for p, recs in sorted(per.items())}
            for k, per in sorted(trace.per_iteration_overrides.items())}
    if trace.chunk_histograms:
        doc["chunk_histograms"] = {
            oid: {str(p): list(h) for p, h in sorted(per.items())}
            for oid, per in sorted(trace.chunk_histograms.items())}
    return doc


def load_trace(path):
    return trace_from_dict(_read(path))


def save_trace(trace, path):
    _write(path, trace_to_dict(trace))


# -- plan -------------------------------------------------------------------

def _migration_from(doc, where):
    _check_keys(doc, ("object_id", "direction", "trigger", "target"),
                ("object_id", "direction", "trigger", "target"), where)
    try:
        direction = Direction(doc["direction"])
    except ValueError:
        raise ValidationError(f"{where}.direction: unknown value {doc['direction']!r}") from None
    return Migration(doc["object_id"], direction, int(doc["trigger"]), int(doc["target"]))


def _migration_to(m):
    return {"object_id": m.object_id, "direction": m.direction.value,
            "trigger": m.trigger, "target": m.target}


def plan_from_dict(doc):
    _check_version(doc, "plan")
    _check_keys(doc, ("schema_version", "mode", "per_phase_residency", "initial_dram",
                      "migrations", "steady_migrations", "partitioned", "chunk_size",
                      "predicted_total"),
                ("mode", "per_phase_residency"), "plan")
    try:
        mode = Mode(doc["mode"])
    except ValueError:
        raise ValidationError(f"plan.mode: unknown value {doc['mode']!r}") from None
    return PlacementPlan(
        mode=mode,
        per_phase_residency=[frozenset(r) for r in doc["per_phase_residency"]],
        initial_dram=frozenset(doc.get("initial_dram", [])),
        migrations=[_migration_from(m, "plan.migrations") for m in doc.get("migrations", [])],
        steady_migrations=[_migration_from(m, "plan.steady_migrations")
                           for m in doc.get("steady_migrations", [])],
        partitioned=tuple(doc.get("partitioned", [])),
        chunk_size=doc.get("chunk_size"),
        predicted_total=doc.get("predicted_total"),
    )


def plan_to_dict(plan):
    return {
        "schema_version": SCHEMA_VERSION,
        "mode": plan.mode.value,
        "per_phase_residency": [sorted(r) for r in plan.per_phase_residency],
        "initial_dram": sorted(plan.initial_dram),
        "migrations": [_migration_to(m) for m in plan.migrations],
        "steady_migrations": [_migration_to(m) for m in plan.steady_migrations],
        "partitioned": list(plan.partitioned),
        "chunk_size": plan.chunk_size,
        "predicted_total": plan.predicted_total,
    }


def load_plan(path):
    return plan_from_dict(_read(path))


def save_plan(plan, path):
    _write(path, plan_to_dict(plan))


# -- report -----------------------------------------------------------------

_REPORT_FIELDS = [f.name for f in fields(SimulationReport)]


def report_to_dict(report):
    doc = {"schema_version": SCHEMA_VERSION}
    for name in _REPORT_FIELDS:
        value = getattr(report, name)
        if name == "per_phase_times":
            value = [list(row) for row in value]
        elif name == "stalls":
            value = [{"iteration": s.iteration, "phase": s.phase, "wait": s.wait}
                     for s in value]
        elif name == "warnings":
            value = list(value)
        doc[name] = value
    return doc


def report_from_dict(doc):
    _check_version(doc, "report")
    _check_keys(doc, ["schema_version", *_REPORT_FIELDS], ("policy", "total_time",
                                                           "per_phase_times"), "report")
    values = {k: v for k, v in doc.items() if k != "schema_version"}
    values["per_phase_times"] = tuple(tuple(row) for row in values["per_phase_times"])
    stalls = []
    for s in values.get("stalls", []):
        _check_keys(s, ("iteration", "phase", "wait"), ("iteration", "phase", "wait"),
                    "report.stalls")
        stalls.append(Stall(s["iteration"], s["phase"], s["wait"]))
    values["stalls"] = tuple(stalls)
    values["warnings"] = tuple(values.get("warnings", ()))
    report = SimulationReport(**values)
    if not 0 <= report.pct_overlap <= 100:
        raise ValidationError("report.pct_overlap: must lie in [0, 100]")
    return report


def load_report(path):
    return report_from_dict(_read(path))


def save_report(report, path):
    _write(path, report_to_dict(report))


CSV_HEADER = ("policy", "iteration", "phase", "time_s", "stall_s")


def reports_to_csv(reports):
    """One row per (policy, iteration, phase)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rep in reports:
        for k, row in enumerate(rep.per_phase_times):
            for p, t in enumerate(row):
                w.writerow((rep.policy, k, p, repr(t), repr(rep.stall_at(k, p))))
    return buf.getvalue()


def format_table(reports):
    """Aligned plain-text summary, one line per policy."""
    head = ("policy", "total_s", "migrations", "migrated_MiB", "overlap_%", "stall_s",
            "replans")
    rows = [head]
    for r in reports:
        rows.append((r.policy, f"{r.total_time:.6f}", str(r.migrations_count),
                     f"{r.migrated_bytes / 2**20:.1f}", f"{r.pct_overlap:.1f}",
                     f"{r.stall_time:.6f}", str(r.replans)))
    widths = [max(len(row[i]) for row in rows) for i in range(len(head))]
    lines = ["  ".join(cell.rjust(w) if i else cell.ljust(w)
                       for i, (cell, w) in enumerate(zip(row, widths)))
             for row in rows]
    return "\n".join(lines) + "\n"
