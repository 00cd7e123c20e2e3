"""Command-line interface.

Subcommands: ``motif build``, ``motif check``, ``sbm sample``, ``count``,
``recover``, and ``experiment {mean,variance,recovery,certify}``.
Commands that verify something exit 0 iff every asserted check passed.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .counting import CountRequest, count_attached, count_blocks
from .estimator import EstimatorConfig, make_blocks, recover
from .experiments import ExperimentSpec, run_experiment
from .motif import MotifError, build_blowup_motif, load_motif, save_motif
from .sbm import SbmParams, export_sample, import_sample, sample, sample_conditioned
from .verify import (
    DEFAULT_EXHAUSTIVE_CAP,
    certify_exhaustive,
    certify_sampled,
    check_boundary_lemma,
    check_fastener_lemma,
    check_overlap_cap,
)


def _write_json(doc, path):
    if path is None or path == "-":
        json.dump(doc, sys.stdout, indent=1, sort_keys=True)
        sys.stdout.write("\n")
    else:
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=1, sort_keys=True)
            fh.write("\n")


def cmd_motif_build(args) -> int:
    motif = build_blowup_motif(args.L, args.B, Fraction(args.a))
    save_motif(motif, args.out)
    print(f"wrote motif with {motif.num_vertices} vertices, {motif.num_edges} edges, "
          f"r = {motif.r} to {args.out}")
    return 0


def cmd_motif_check(args) -> int:
    motif = load_motif(args.motif)
    if args.exhaustive or (args.samples is None and motif.num_vertices <= args.max_vertices):
        slack = certify_exhaustive(motif, max_vertices=max(args.max_vertices,
                                                           motif.num_vertices))
    else:
        slack = certify_sampled(motif, args.samples or 10000, args.seed)
    report = {
        "min_slack": {"num": slack.min_slack.numerator, "den": slack.min_slack.denominator},
        "min_slack_float": float(slack.min_slack),
        "argmin_partition": list(slack.argmin_partition.labels),
        "argmin_groups": slack.argmin_partition.num_groups,
        "partitions_checked": slack.partitions_checked,
        "mode": slack.mode,
    }
    ok = slack.min_slack >= 0
    if motif.cycle_nodes is not None:
        bnd = check_boundary_lemma(motif, seed=args.seed)
        fst = check_fastener_lemma(motif, seed=args.seed)
        report["boundary_lemma"] = {"ok": bnd.ok, "mode": bnd.mode,
                                    "subsets_checked": bnd.subsets_checked,
                                    "witness": list(bnd.witness) if bnd.witness else None}
        report["fastener_lemma"] = {"ok": fst.ok, "mode": fst.mode,
                                    "subsets_checked": fst.subsets_checked,
                                    "witness": list(fst.witness) if fst.witness else None}
        ok = ok and bnd.ok and fst.ok
    universe = 2 * motif.num_vertices
    ov = check_overlap_cap(motif, universe, args.overlap_trials, args.seed)
    report["overlap_cap"] = {"ok": ov.ok, "trials": ov.trials,
                             "equality_at_full_overlap": ov.equality_at_full_overlap,
                             "witness": ov.witness}
    ok = ok and ov.ok
    report["all_passed"] = ok
    _write_json(report, args.report)
    print(f"min_slack = {slack.min_slack} over {slack.partitions_checked} partitions "
          f"({slack.mode}); {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def cmd_sbm_sample(args) -> int:
    params = SbmParams(n=args.n, K=args.K, p=args.p, q=args.q, seed=args.seed)
    s = sample_conditioned(params, args.pin) if args.pin else sample(params)
    _write_json(export_sample(s), args.out)
    return 0


def _load_sample(path):
    with open(path) as fh:
        return import_sample(json.load(fh))


def cmd_count(args) -> int:
    s = _load_sample(args.sample)
    motif = load_motif(args.motif)
    Y = s.centered()
    total = count_attached(Y, CountRequest(
        motif=motif, i=args.i, j=args.j,
        allowed=tuple(v for v in range(s.n) if v not in (args.i, args.j))))
    doc = {
        "i": args.i,
        "j": args.j,
        "total": total.value,
        "num_injections": total.num_injections,
        "compensation_error_bound": total.compensation_error_bound,
    }
    if args.blocks:
        blocks = make_blocks(s.n, args.i, args.j, args.blocks)
        results = count_blocks(Y, motif, args.i, args.j, blocks)
        doc["blocks"] = [
            {"values": r.value, "num_injections": r.num_injections,
             "compensation_error_bound": r.compensation_error_bound}
            for r in results
        ]
    _write_json(doc, args.out)
    return 0


def cmd_recover(args) -> int:
    s = _load_sample(args.sample)
    motif = load_motif(args.motif)
    config = EstimatorConfig(motif=motif, K=args.K, lam=args.lam, q=args.q,
                             Lambda=args.blocks, threshold_scale=args.threshold_scale)
    result = recover(s.centered(), config, workers=args.workers)
    doc = {
        "clusters": [list(c) for c in result.clusters],
        "exact_match": result.exact_match,
        "pair_error_rate": result.pair_error_rate,
    }
    if args.per_pair:
        iu = np.triu_indices(s.n, 1)
        doc["per_pair"] = [
            [int(i), int(j), float(result.xhat[i, j])] for i, j in zip(*iu)
        ]
    _write_json(doc, args.out)
    print(f"recovered {len(result.clusters)} clusters; exact_match={result.exact_match}; "
          f"pair_error_rate={result.pair_error_rate:.4f}")
    return 0


def _parse_config(path) -> dict:
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return json.loads(text)
    doc = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        if not _:
            raise ValueError(f"config line is not key=value: {line!r}")
        try:
            doc[key.strip()] = json.loads(value.strip())
        except json.JSONDecodeError:
            doc[key.strip()] = value.strip()
    return doc


def cmd_experiment(args) -> int:
    doc = _parse_config(args.config)
    doc["kind"] = args.kind
    if args.workers is not None:
        doc["workers"] = args.workers
    spec = ExperimentSpec.from_mapping(doc)
    report = run_experiment(spec)
    if args.out:
        report.write(args.out)
    else:
        print(report.to_json())
    for row in report.rows:
        status = "PASS" if row.passed else "FAIL"
        if not row.asserted:
            status = "info"
        print(f"[{status}] {row.name}: estimate={row.estimate:.6g} "
              f"target={row.target if row.target is None else format(row.target, '.6g')}")
    if report.partial:
        print("WARNING: runtime budget exceeded; partial report")
    return 0 if report.all_passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sbmotif", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    motif = sub.add_parser("motif", help="build or check motifs")
    motif_sub = motif.add_subparsers(dest="motif_command", required=True)
    build = motif_sub.add_parser("build", help="construct a blow-up motif")
    build.add_argument("--L", type=int, required=True)
    build.add_argument("--B", type=int, required=True)
    build.add_argument("--a", required=True, help="fraction like 1/4")
    build.add_argument("--out", required=True)
    build.set_defaults(func=cmd_motif_build)
    check = motif_sub.add_parser("check", help="certify the structural condition")
    check.add_argument("--motif", required=True)
    mode = check.add_mutually_exclusive_group()
    mode.add_argument("--exhaustive", action="store_true")
    mode.add_argument("--samples", type=int)
    check.add_argument("--seed", type=int, default=0)
    check.add_argument("--report", default=None, help="report JSON path (default stdout)")
    check.add_argument("--max-vertices", type=int, default=DEFAULT_EXHAUSTIVE_CAP)
    check.add_argument("--overlap-trials", type=int, default=10000)
    check.set_defaults(func=cmd_motif_check)

    sbm = sub.add_parser("sbm", help="sample stochastic block models")
    sbm_sub = sbm.add_subparsers(dest="sbm_command", required=True)
    samp = sbm_sub.add_parser("sample", help="draw one SBM instance")
    samp.add_argument("--n", type=int, required=True)
    samp.add_argument("--K", type=int, required=True)
    samp.add_argument("--p", type=float, required=True)
    samp.add_argument("--q", type=float, required=True)
    samp.add_argument("--seed", type=int, required=True)
    samp.add_argument("--pin", choices=["same", "different"], default=None)
    samp.add_argument("--out", required=True)
    samp.set_defaults(func=cmd_sbm_sample)

    count = sub.add_parser("count", help="evaluate the motif count at a pair")
    count.add_argument("--sample", required=True)
    count.add_argument("--motif", required=True)
    count.add_argument("--i", type=int, required=True)
    count.add_argument("--j", type=int, required=True)
    count.add_argument("--blocks", type=int, default=None)
    count.add_argument("--out", default=None)
    count.set_defaults(func=cmd_count)

    rec = sub.add_parser("recover", help="estimate all pairs and recover communities")
    rec.add_argument("--sample", required=True)
    rec.add_argument("--motif", required=True)
    rec.add_argument("--lambda", dest="lam", type=float, required=True)
    rec.add_argument("--q", type=float, required=True)
    rec.add_argument("--K", type=int, required=True)
    rec.add_argument("--blocks", type=int, required=True, help="number of blocks (must divide n-2)")
    rec.add_argument("--threshold-scale", type=float, default=0.5)
    rec.add_argument("--workers", type=int, default=1)
    rec.add_argument("--per-pair", action="store_true", help="include per-pair diagnostics")
    rec.add_argument("--out", default=None)
    rec.set_defaults(func=cmd_recover)

    exp = sub.add_parser("experiment", help="run a reproducible experiment")
    exp.add_argument("kind", choices=["mean", "variance", "recovery", "certify"])
    exp.add_argument("--config", required=True, help="JSON or key=value config file")
    exp.add_argument("--out", default=None, help="report JSON path (CSV written alongside)")
    exp.add_argument("--workers", type=int, default=None)
    exp.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MotifError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
