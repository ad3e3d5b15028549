"""Command-line front end: plan, simulate, compare, calibrate, gen."""

import argparse
import csv
import io as _io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import io
from .errors import HmsError, ValidationError
from .machine import calibrate_cf
from .sim import Policy, predict_total, run_policy
from .solver import (
    Mode,
    apply_partitioning,
    choose_plan,
    cross_global_search,
    initial_placement,
    partition_candidates,
    phase_local_search,
    with_partitioning,
)
from .synth import GeneratorSpec, gen_synthetic

log = logging.getLogger("hmsplace")

POLICY_NAMES = {
    "nvm": Policy.NVM_ONLY,
    "dram": Policy.DRAM_ONLY,
    "unimem": Policy.UNIMEM,
    "local": Policy.LOCAL_ONLY,
    "global": Policy.GLOBAL_ONLY,
}
COMPARE_POLICIES = (Policy.NVM_ONLY, Policy.DRAM_ONLY, Policy.UNIMEM)


def _load_inputs(args):
    trace = io.load_trace(args.trace)
    cfg = io.load_machine(args.machine)
    for w in cfg.warnings:
        log.warning(w)
    if trace.n_phases == 0:
        raise ValidationError("no phases")
    return trace, cfg


def cmd_plan(args, out):
    trace, cfg = _load_inputs(args)
    initial = initial_placement(trace.objects, cfg)
    parts = partition_candidates(trace, cfg, args.partition, initial)
    if parts:
        trace = apply_partitioning(trace, parts, cfg)
        initial = initial_placement(trace.objects, cfg)
    local = phase_local_search(trace, cfg, initial)
    glob = cross_global_search(trace, cfg, initial)
    local = replace(local, predicted_total=predict_total(trace, local, cfg))
    glob = replace(glob, predicted_total=predict_total(trace, glob, cfg))
    if args.policy == "local":
        chosen = local
    elif args.policy == "global":
        chosen = glob
    else:
        chosen = choose_plan(local, glob, trace, cfg)
    if parts:
        chosen = with_partitioning(chosen, parts, cfg.effective_chunk_size)
    io.save_plan(chosen, args.output)
    out.write(f"chosen: {'global' if chosen.mode is Mode.CROSS_GLOBAL else 'local'}\n")
    for name, plan in (("local", local), ("global", glob)):
        out.write(f"{name + ':':8}predicted_total={plan.predicted_total:.6f} s  "
                  f"migrations={len(plan.migrations)}\n")
    out.write(f"dram objects: {len(chosen.dram_objects)}\n")
    if parts:
        out.write(f"partitioned: {', '.join(parts)}\n")
    out.write(f"plan written to {args.output}\n")
    return 0


def noise_matrix(seed, sigma, iterations, phases):
    rng = np.random.default_rng(seed)
    raw = 1.0 + rng.normal(0.0, sigma, (iterations, phases))
    return np.clip(raw, 0.5, 2.0).tolist()


def cmd_simulate(args, out):
    trace, cfg = _load_inputs(args)
    if args.seed_noise is not None:
        trace = trace.with_(per_iteration_noise=noise_matrix(
            args.seed_noise, args.noise_sigma, trace.iterations, trace.n_phases))
    if args.plan:
        reports = [run_policy(trace, cfg, Policy.STATIC_PLAN, plan=io.load_plan(args.plan))]
    elif args.policy == "all":
        reports = [run_policy(trace, cfg, p, partition=args.partition)
                   for p in (Policy.NVM_ONLY, Policy.DRAM_ONLY, Policy.UNIMEM,
                             Policy.LOCAL_ONLY, Policy.GLOBAL_ONLY)]
    else:
        reports = [run_policy(trace, cfg, POLICY_NAMES[args.policy], partition=args.partition)]
    out.write(io.format_table(reports))
    if args.json:
        if len(reports) == 1:
            io.save_report(reports[0], args.json)
        else:
            Path(args.json).write_text(io.dumps({
                "schema_version": io.SCHEMA_VERSION,
                "reports": [io.report_to_dict(r) for r in reports]}))
    if args.csv:
        text = io.reports_to_csv(reports)
        if args.csv == "-":
            out.write(text)
        else:
            Path(args.csv).write_text(text)
    return 0


def parse_sweep(text):
    try:
        axis, values = text.split("=", 1)
        points = [float(v) for v in values.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"--sweep: expected bw=... or lat=..., got {text!r}") from None
    if axis not in ("bw", "lat") or not points:
        raise ValidationError(f"--sweep: expected bw=... or lat=..., got {text!r}")
    if any(v <= 0 for v in points):
        raise ValidationError("--sweep: values must be > 0")
    if axis == "bw" and any(v > 1 for v in points):
        raise ValidationError("--sweep bw: NVM/DRAM bandwidth ratios must be <= 1")
    if axis == "lat" and any(v < 1 for v in points):
        raise ValidationError("--sweep lat: NVM/DRAM latency ratios must be >= 1")
    return axis, points


def sweep_machine(cfg, axis, value):
    """Machine with NVM set ``value`` x DRAM on ``axis`` and equal to DRAM otherwise."""
    if axis == "bw":
        nvm_bw, nvm_lat = cfg.dram_bw * value, cfg.dram_lat
    else:
        nvm_bw, nvm_lat = cfg.dram_bw, cfg.dram_lat * value
    peak = cfg.bw_peak_nvm * nvm_bw / cfg.nvm_bw
    return cfg.with_(nvm_bw=nvm_bw, nvm_lat=nvm_lat, bw_peak_nvm=peak)


def _sweep_point(job):
    trace, cfg, axis, value, policies = job
    point = sweep_machine(cfg, axis, value)
    return {p.value: run_policy(trace, point, p).total_time for p in policies}


def compare(trace, cfg, axis, points, policies=COMPARE_POLICIES, jobs=1):
    """Rows of (axis, value, policy, total, total / DramOnly total)."""
    needed = tuple(dict.fromkeys((*policies, Policy.DRAM_ONLY)))
    work = [(trace, cfg, axis, v, needed) for v in points]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, work))
    else:
        results = [_sweep_point(w) for w in work]
    rows = []
    for v, totals in zip(points, results):
        ref = totals[Policy.DRAM_ONLY.value]
        for p in policies:
            rows.append((axis, v, p.value, totals[p.value], totals[p.value] / ref))
    return rows


def cmd_compare(args, out):
    trace, cfg = _load_inputs(args)
    axis, points = parse_sweep(args.sweep)
    policies = tuple(POLICY_NAMES[p] for p in args.policies.split(","))
    rows = compare(trace, cfg, axis, points, policies, args.jobs)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("sweep", "value", "policy", "total_s", "normalized"))
    for axis_, v, p, total, norm in rows:
        w.writerow((axis_, repr(v), p, repr(total), repr(norm)))
    if args.output:
        Path(args.output).write_text(buf.getvalue())
    else:
        out.write(buf.getvalue())
    return 0


def load_pairs(path):
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError:
        doc = [row for row in csv.reader(_io.StringIO(text)) if row]
        if doc and not _is_number(doc[0][0]):
            doc = doc[1:]
    if isinstance(doc, dict):
        doc = doc.get("pairs", [])
    pairs = []
    for item in doc:
        if isinstance(item, dict):
            pairs.append((float(item["predicted"]), float(item["measured"])))
        else:
            predicted, measured = item
            pairs.append((float(predicted), float(measured)))
    return pairs


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def cmd_calibrate(args, out):
    out.write(f"{calibrate_cf(load_pairs(args.pairs))!r}\n")
    return 0


def cmd_gen(args, out):
    doc = json.loads(Path(args.spec).read_text()) if args.spec else {}
    machine = io.load_machine(args.machine) if args.machine else None
    trace = gen_synthetic(GeneratorSpec.from_dict(doc), args.seed, machine)
    io.save_trace(trace, args.output)
    out.write(f"wrote {args.output}: {len(trace.objects)} objects, {trace.n_phases} phases, "
              f"{trace.iterations} iterations\n")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hmsplace", description="DRAM+NVM data placement planner and simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="compute a placement plan")
    p.add_argument("trace")
    p.add_argument("machine")
    p.add_argument("-o", "--output", default="plan.json")
    p.add_argument("--policy", choices=("local", "global", "auto"), default="auto")
    p.add_argument("--partition", choices=("on", "off", "auto"), default="auto")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="simulate a plan or a policy")
    p.add_argument("trace")
    p.add_argument("machine")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--plan", help="plan JSON written by `plan`")
    g.add_argument("--policy", choices=(*POLICY_NAMES, "all"), default="unimem")
    p.add_argument("--partition", choices=("on", "off", "auto"), default="auto")
    p.add_argument("--json", help="write the report JSON here")
    p.add_argument("--csv", nargs="?", const="-",
                   help="per-phase CSV; to stdout when no path is given")
    p.add_argument("--seed-noise", type=int, help="replace trace noise with seeded noise")
    p.add_argument("--noise-sigma", type=float, default=0.05)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="bandwidth or latency sensitivity sweep (CSV)")
    p.add_argument("trace")
    p.add_argument("machine")
    p.add_argument("--sweep", required=True, help="bw=1.0,0.5,... or lat=1,2,...")
    p.add_argument("--policies", default="nvm,dram,unimem")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("calibrate", help="constant factor from (predicted, measured) pairs")
    p.add_argument("pairs")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("gen", help="generate a synthetic trace")
    p.add_argument("spec", nargs="?", help="generator parameters (JSON)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--machine", help="machine JSON used to size access counts")
    p.add_argument("-o", "--output", default="trace.json")
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    logging.basicConfig(level=os.environ.get("HMSPLACE_LOG_LEVEL", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except HmsError as exc:
        err.write(f"hmsplace: error[{exc.code}]: {exc}\n")
    except OSError as exc:
        err.write(f"hmsplace: error[io]: {exc}\n")
    except (KeyError, TypeError, ValueError) as exc:
        err.write(f"hmsplace: error[input]: {exc}\n")
    return 1


if __name__ == "__main__":
    sys.exit(main())
