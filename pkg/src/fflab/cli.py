"""Operator surface: theory tables, campaigns, matrix analysis, audits.

Exit codes: 0 success, 1 a configured acceptance threshold failed,
2 usage or parse error.  Master seeds are echoed into every output so
any run can be reproduced exactly.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys

from . import theory
from .analyzer import analyze_matrix, default_omega
from .gf2 import BitMatrix
from .gfp import PrimeFieldMatrix, gfp_rank_nullspace
from .harness import (
    AUDIT_FAMILIES,
    compare_to_theory,
    headline_checks,
    run_campaign,
    special_case_audits,
    summary_to_csv,
    write_records_jsonl,
)
from .models import MatrixParseError, ModelConfig, parse_matrix, sample


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=500, help="row count (default 500)")
    p.add_argument("--r", type=int, default=1, help="column blocks per row (default 1)")
    p.add_argument("--s", type=int, default=3, help="column weight parameter (default 3)")
    p.add_argument("--replacement", choices=["with", "without"], default="without")
    p.add_argument("--field", choices=["gf2", "gfp"], default="gf2")
    p.add_argument("--p", type=int, default=None, help="prime modulus for --field gfp")
    p.add_argument("--gft-model", type=int, choices=[1, 2, 3], default=None)
    p.add_argument("--f-dist", type=str, default=None,
                   help="comma-separated probabilities for residues 1..p-1")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")


def _add_analysis_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--omega", type=int, default=None,
                   help="small/large threshold (default ceil(ln^2 n))")
    p.add_argument("--window-a", type=float, default=4.0,
                   help="large-band window constant a (default 4)")
    p.add_argument("--guard", type=int, default=20,
                   help="codeword enumeration guard (default 20)")


def _config_from_args(args) -> ModelConfig:
    f_dist = None
    if args.f_dist:
        f_dist = tuple(float(x) for x in args.f_dist.split(","))
    return ModelConfig(n=args.n, r=args.r, s=args.s, replacement=args.replacement,
                       field=args.field, p=args.p, gft_model=args.gft_model,
                       f_dist=f_dist, master_seed=args.seed)


def _write_table_csv(table: theory.TheoryTable, prefix: str) -> list[str]:
    paths = []
    with open(f"{prefix}_scalars.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["key", "value"])
        w.writerows([["model", table.model], ["phi", repr(table.phi)],
                     ["tol", repr(table.tol)], ["phi_terms", table.phi_terms],
                     ["pi_factors", table.pi_factors],
                     ["full_rank_probability", repr(table.full_rank_probability)]])
    paths.append(f"{prefix}_scalars.csv")
    with open(f"{prefix}_pi.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["k", "pi"])
        w.writerows(enumerate(table.pi))
    paths.append(f"{prefix}_pi.csv")
    with open(f"{prefix}_corank.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["d", "probability"])
        w.writerows(enumerate(table.corank))
    paths.append(f"{prefix}_corank.csv")
    with open(f"{prefix}_joint.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["sigma", "lambda", "probability"])
        w.writerows((s, l, v) for (s, l), v in sorted(table.joint.items()))
    paths.append(f"{prefix}_joint.csv")
    with open(f"{prefix}_pstar.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["h", "r", "m", "probability"])
        w.writerows((h, r, m, v) for (h, r, m), v in sorted(table.p_star.items()))
    paths.append(f"{prefix}_pstar.csv")
    return paths


def cmd_theory(args) -> int:
    if args.gft:
        if args.gamma is None:
            print("error: --gft requires --gamma", file=sys.stderr)
            return 2
        try:
            value = theory.phi_t(args.gamma, args.tol)
        except ValueError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        print(f"phi_t(gamma={args.gamma}) = {value:.6f}")
        if args.out:
            with open(args.out, "w") as f:
                json.dump({"gamma": args.gamma, "phi_t": value, "tol": args.tol}, f)
            print(f"wrote {args.out}")
        return 0
    table = theory.build_table(model=args.replacement, d_max=args.dmax, tol=args.tol)
    print(f"model: {table.model} replacement")
    print(f"phi = {table.phi:.4f}")
    print(f"pi(0) = {table.pi[0]:.4f}")
    print(f"Pr(full rank) = {table.full_rank_probability:.4f}")
    print("corank distribution:",
          " ".join(f"{d}:{v:.5f}" for d, v in enumerate(table.corank[:6])))
    if args.out:
        if args.format == "json":
            path = args.out if args.out.endswith(".json") else args.out + ".json"
            with open(path, "w") as f:
                json.dump(table.to_json_dict(), f, indent=1)
            print(f"wrote {path}")
        else:
            for path in _write_table_csv(table, args.out):
                print(f"wrote {path}")
    return 0


def cmd_simulate(args) -> int:
    try:
        cfg = _config_from_args(args)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    records, summary = run_campaign(cfg, trials=args.trials, workers=args.workers,
                                    omega=args.omega, window_a=args.window_a,
                                    guard=args.guard)
    print(f"model {summary.model} n={summary.n} trials={summary.trials} "
          f"seed={summary.master_seed} wall={summary.wall_s:.1f}s")
    print("corank histogram:",
          " ".join(f"{d}:{c}" for d, c in sorted(summary.corank_hist.items())))
    if summary.sigma_mean or summary.joint_hist:
        print(f"sigma mean={summary.sigma_mean:.5f} var={summary.sigma_var:.5f} "
              f"dispersion={summary.sigma_dispersion:.3f}")
        print(f"anomalies={summary.anomaly_total} "
              f"disjoint_violations={summary.disjoint_violations} "
              f"equiv_violations={summary.equiv_violations} "
              f"guard_hits={summary.guard_hits}")
    if summary.lam_pos_trials:
        print(f"simple-sequence pass rates over {summary.lam_pos_trials} "
              f"lam>=1 trials: a=1 {summary.simple_a1_pass / summary.lam_pos_trials:.3f}, "
              f"a={args.window_a:g} {summary.simple_a4_pass / summary.lam_pos_trials:.3f}")
    if args.records:
        write_records_jsonl(records, args.records)
        print(f"wrote {args.records}")
    if args.out:
        with open(args.out, "w") as f:
            if args.format == "csv":
                f.write(summary_to_csv(summary))
            else:
                json.dump(summary.to_json_dict(), f, indent=1)
        print(f"wrote {args.out}")
    if args.check:
        if cfg.field != "gf2" or cfg.r != 1 or cfg.s != 3:
            print("error: --check applies to the r=1, s=3 GF(2) models",
                  file=sys.stderr)
            return 2
        table = theory.build_table(model=cfg.replacement, d_max=args.dmax)
        fit = compare_to_theory(summary, table)
        checks = headline_checks(summary, fit, table)
        print(f"corank0 emp={fit.corank0_emp:.4f} theory={fit.corank0_theory:.4f} "
              f"(3se={3 * fit.corank0_se:.4f})")
        print(f"tv_corank={fit.tv_corank:.4f} tv_joint={fit.tv_joint:.4f} "
              f"chi2={fit.chi2_stat:.2f}/{fit.chi2_dof} p={fit.chi2_pvalue:.3f}")
        for name, ok in checks.items():
            print(f"check {name}: {'PASS' if ok else 'FAIL'}")
        if not all(checks.values()):
            return 1
    return 0


def cmd_analyze(args) -> int:
    if args.matrix:
        try:
            with open(args.matrix) as f:
                text = f.read()
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        try:
            m = parse_matrix(text)
        except MatrixParseError as e:
            print(f"error: {args.matrix}: {e}", file=sys.stderr)
            return 2
    else:
        if args.trial is None:
            print("error: provide --matrix PATH or model flags with --trial",
                  file=sys.stderr)
            return 2
        try:
            cfg = _config_from_args(args)
        except ValueError as e:
            print(f"error: {e}", file=sys.stderr)
            return 2
        m = sample(cfg, args.trial).matrix
    if isinstance(m, PrimeFieldMatrix):
        rank, basis = gfp_rank_nullspace(m)
        print(f"gfp p={m.p} n_rows={m.n_rows} n_cols={m.n_cols}")
        print(f"rank={rank} corank={m.n_rows - rank}")
        out = {"p": m.p, "rank": rank, "corank": m.n_rows - rank}
    else:
        assert isinstance(m, BitMatrix)
        rep = analyze_matrix(m, omega=args.omega, window_a=args.window_a,
                             guard=args.guard)
        print(f"gf2 n_rows={m.n_rows} n_cols={m.n_cols}")
        print(f"rank={rep.rank} corank={rep.d} sigma={rep.sigma} lambda={rep.lam}")
        print(f"weights={rep.weights}")
        print(f"anomalies={rep.anomalies} omega={rep.omega} window_a={rep.window_a}")
        out = rep.to_json_dict()
    if args.out:
        with open(args.out, "w") as f:
            json.dump(out, f, indent=1)
        print(f"wrote {args.out}")
    return 0


def cmd_audit(args) -> int:
    families = AUDIT_FAMILIES if args.family == "all" else (args.family,)
    results = special_case_audits(families, n=args.n, trials=args.trials,
                                  master_seed=args.seed, workers=args.workers)
    print(f"seed={args.seed}")
    for res in results:
        print(res.describe())
    return 0 if all(r.passed for r in results) else 1


def cmd_sweep(args) -> int:
    ns = [int(x) for x in args.n_list.split(",")]
    table = theory.build_table(model=args.replacement, d_max=args.dmax)
    rows = []
    print(f"seed={args.seed} trials={args.trials} model={args.replacement}")
    print(f"{'n':>6} {'p0_emp':>8} {'p0_thy':>8} {'tv':>7} {'sig_mean':>9} "
          f"{'phi':>7} {'anom':>5}")
    for n in ns:
        cfg = ModelConfig(n=n, replacement=args.replacement, master_seed=args.seed)
        _, summary = run_campaign(cfg, trials=args.trials, workers=args.workers)
        fit = compare_to_theory(summary, table)
        rows.append({"n": n, "trials": args.trials,
                     "corank0_emp": fit.corank0_emp,
                     "corank0_theory": fit.corank0_theory,
                     "tv_corank": fit.tv_corank, "tv_joint": fit.tv_joint,
                     "sigma_mean": summary.sigma_mean, "phi": table.phi,
                     "anomalies": summary.anomaly_total})
        print(f"{n:>6} {fit.corank0_emp:>8.4f} {fit.corank0_theory:>8.4f} "
              f"{fit.tv_corank:>7.4f} {summary.sigma_mean:>9.5f} "
              f"{table.phi:>7.4f} {summary.anomaly_total:>5}")
    if args.out:
        with open(args.out, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
            w.writeheader()
            w.writerows(rows)
        print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fflab",
                                 description="finite-field random-matrix lab")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("theory", help="compute exact limiting tables")
    p.add_argument("--replacement", choices=["with", "without"], default="without")
    p.add_argument("--gft", action="store_true", help="evaluate phi_t instead")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--dmax", type=int, default=12)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(fn=cmd_theory)

    p = sub.add_parser("simulate", help="run a seeded campaign")
    _add_model_flags(p)
    _add_analysis_flags(p)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--dmax", type=int, default=12)
    p.add_argument("--records", type=str, default=None, help="JSONL record path")
    p.add_argument("--out", type=str, default=None, help="summary output path")
    p.add_argument("--format", choices=["json", "csv"], default="json",
                   help="summary format (default json)")
    p.add_argument("--check", action="store_true",
                   help="compare to theory; exit 1 on threshold failure")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("analyze", help="analyze a stored or replayed matrix")
    _add_model_flags(p)
    _add_analysis_flags(p)
    p.add_argument("--matrix", type=str, default=None, help="matrix fixture path")
    p.add_argument("--trial", type=int, default=None, help="replay trial index")
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("audit", help="special-case audits")
    p.add_argument("--family", choices=list(AUDIT_FAMILIES) + ["all"], default="all")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(fn=cmd_audit)

    p = sub.add_parser("sweep", help="convergence sweep over n")
    p.add_argument("--n-list", type=str, default="250,500,1000,2000")
    p.add_argument("--replacement", choices=["with", "without"], default="without")
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--dmax", type=int, default=12)
    p.add_argument("--out", type=str, default=None)
    p.set_defaults(fn=cmd_sweep)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
