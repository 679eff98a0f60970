"""Seeded Monte Carlo campaigns and statistical reconciliation.

A campaign maps trial indices to TrialRecords (sample, eliminate,
analyse), then folds them into a CampaignSummary.  Per-trial seeds
derive from (master_seed, trial) alone, so the record stream is
reproducible and independent of the worker count; aggregation is a
deterministic fold ordered by trial index.

Wall-clock times are kept on the in-memory records but excluded from
the canonical JSON serialisation, which is required to be bitwise
reproducible across runs.
"""
from __future__ import annotations

import json
import math
import multiprocessing
import time
from dataclasses import dataclass, field
from functools import partial
from typing import Iterable, Sequence

from scipy.stats import chi2 as _chi2

from .analyzer import GuardExceeded, analyze_matrix, default_omega
from .gf2 import BitMatrix, gf2_rank_nullspace
from .gfp import PrimeFieldMatrix, gfp_rank
from .models import ModelConfig, functional_graph_components, sample
from .theory import TheoryTable

# Headline statistical thresholds (binomial sampling error at the stated
# trial counts plus finite-n slack; the limits themselves are asymptotic).
TV_CORANK_MAX = 0.02
TV_JOINT_MAX = 0.03
DISPERSION_BAND = (0.9, 1.1)
FRACTION_MIN = 0.99
SE_MULTIPLE = 3.0


@dataclass
class TrialRecord:
    trial: int
    n: int
    model: str
    rank: int
    corank: int
    sigma: int | None
    lam: int | None
    weights: list[int] | None
    anomaly_count: int | None
    disjoint_violations: int
    equiv_violations: int
    guard_exceeded: bool
    simple_a1: bool | None
    simple_a4: bool | None
    intersection_flags: int | None
    large_basis_deficit: int
    wall_ms: float = field(default=0.0, compare=False)

    def to_json_line(self) -> str:
        d = {k: v for k, v in self.__dict__.items() if k != "wall_ms"}
        return json.dumps(d, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_line(cls, line: str) -> "TrialRecord":
        return cls(wall_ms=0.0, **json.loads(line))


def run_trial(cfg: ModelConfig, trial: int, omega: int | None = None,
              window_a: float = 4.0, guard: int = 20) -> TrialRecord:
    """Sample one matrix, eliminate, analyse; never raises on guard hits."""
    t0 = time.perf_counter()
    sm = sample(cfg, trial)
    m = sm.matrix
    if isinstance(m, PrimeFieldMatrix):
        corank = m.n_rows - gfp_rank(m)
        return TrialRecord(
            trial=trial, n=cfg.n, model=cfg.tag(), rank=m.n_rows - corank,
            corank=corank, sigma=None, lam=None, weights=None,
            anomaly_count=None, disjoint_violations=0, equiv_violations=0,
            guard_exceeded=False, simple_a1=None, simple_a4=None,
            intersection_flags=None, large_basis_deficit=0,
            wall_ms=1e3 * (time.perf_counter() - t0))
    assert isinstance(m, BitMatrix)
    try:
        rep = analyze_matrix(m, omega=omega, window_a=window_a, guard=guard)
    except GuardExceeded:
        rank, basis = gf2_rank_nullspace(m)
        return TrialRecord(
            trial=trial, n=cfg.n, model=cfg.tag(), rank=rank,
            corank=basis.dimension, sigma=None, lam=None, weights=None,
            anomaly_count=None, disjoint_violations=0, equiv_violations=0,
            guard_exceeded=True, simple_a1=None, simple_a4=None,
            intersection_flags=None, large_basis_deficit=0,
            wall_ms=1e3 * (time.perf_counter() - t0))
    return TrialRecord(
        trial=trial, n=cfg.n, model=cfg.tag(), rank=rep.rank, corank=rep.d,
        sigma=rep.sigma, lam=rep.lam, weights=rep.weights,
        anomaly_count=len(rep.anomalies),
        disjoint_violations=rep.disjoint_violations,
        equiv_violations=rep.equiv_violations, guard_exceeded=False,
        simple_a1=rep.simple_a1, simple_a4=rep.simple_a4,
        intersection_flags=rep.intersection_flags,
        large_basis_deficit=rep.large_basis_deficit,
        wall_ms=1e3 * (time.perf_counter() - t0))


@dataclass
class CampaignSummary:
    model: str
    n: int
    trials: int
    master_seed: int
    corank_hist: dict[int, int]
    joint_hist: dict[tuple[int, int], int]
    sigma_mean: float
    sigma_var: float
    sigma_dispersion: float
    anomaly_total: int
    disjoint_violations: int
    equiv_violations: int
    guard_hits: int
    intersection_flags_total: int
    large_basis_deficit_total: int
    lam_pos_trials: int
    simple_a1_pass: int
    simple_a4_pass: int
    wall_s: float = field(default=0.0, compare=False)

    def to_json_dict(self) -> dict:
        d = dict(self.__dict__)
        d["joint_hist"] = {f"{s},{l}": c for (s, l), c in sorted(self.joint_hist.items())}
        d["corank_hist"] = {str(k): v for k, v in sorted(self.corank_hist.items())}
        return d


def summarize(records: Sequence[TrialRecord], master_seed: int) -> CampaignSummary:
    corank_hist: dict[int, int] = {}
    joint_hist: dict[tuple[int, int], int] = {}
    sigmas = []
    anom = disj = equiv = guard = iflags = deficit = 0
    lam_pos = a1 = a4 = 0
    wall = 0.0
    for r in records:
        corank_hist[r.corank] = corank_hist.get(r.corank, 0) + 1
        wall += r.wall_ms
        if r.guard_exceeded:
            guard += 1
            continue
        if r.sigma is not None:
            joint_hist[(r.sigma, r.lam)] = joint_hist.get((r.sigma, r.lam), 0) + 1
            sigmas.append(r.sigma)
            anom += r.anomaly_count or 0
            disj += r.disjoint_violations
            equiv += r.equiv_violations
            deficit += abs(r.large_basis_deficit)
            if r.lam and r.lam >= 1:
                lam_pos += 1
                a1 += bool(r.simple_a1)
                a4 += bool(r.simple_a4)
                iflags += r.intersection_flags or 0
    mean = sum(sigmas) / len(sigmas) if sigmas else 0.0
    var = (sum((s - mean) ** 2 for s in sigmas) / (len(sigmas) - 1)
           if len(sigmas) > 1 else 0.0)
    disp = var / mean if mean > 0 else float("nan")
    return CampaignSummary(
        model=records[0].model if records else "", n=records[0].n if records else 0,
        trials=len(records), master_seed=master_seed, corank_hist=corank_hist,
        joint_hist=joint_hist, sigma_mean=mean, sigma_var=var,
        sigma_dispersion=disp, anomaly_total=anom, disjoint_violations=disj,
        equiv_violations=equiv, guard_hits=guard,
        intersection_flags_total=iflags, large_basis_deficit_total=deficit,
        lam_pos_trials=lam_pos, simple_a1_pass=a1, simple_a4_pass=a4,
        wall_s=wall / 1e3)


def _pool_map(fn, items: Iterable, workers: int):
    items = list(items)
    if workers <= 1:
        return [fn(x) for x in items]
    ctx = multiprocessing.get_context("fork")
    chunk = max(1, len(items) // (8 * workers))
    with ctx.Pool(workers) as pool:
        return pool.map(fn, items, chunksize=chunk)


def run_campaign(cfg: ModelConfig, trials: int, workers: int = 1,
                 omega: int | None = None, window_a: float = 4.0,
                 guard: int = 20) -> tuple[list[TrialRecord], CampaignSummary]:
    """Run `trials` seeded trials; records come back ordered by trial index."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    t0 = time.perf_counter()
    fn = partial(run_trial, cfg, omega=omega, window_a=window_a, guard=guard)
    records = _pool_map(fn, range(trials), workers)
    records.sort(key=lambda r: r.trial)
    summary = summarize(records, cfg.master_seed)
    summary.wall_s = time.perf_counter() - t0
    return records, summary


def write_records_jsonl(records: Sequence[TrialRecord], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for r in records:
            f.write(r.to_json_line() + "\n")


def read_records_jsonl(path: str) -> list[TrialRecord]:
    with open(path, encoding="utf-8") as f:
        return [TrialRecord.from_json_line(line) for line in f if line.strip()]


def summary_to_csv(summary: CampaignSummary) -> str:
    """Flat CSV form: kind,key1,key2,value rows (scalars, then histograms)."""
    rows = [["kind", "key1", "key2", "value"]]
    for k, v in summary.to_json_dict().items():
        if k in ("corank_hist", "joint_hist"):
            continue
        rows.append(["scalar", k, "", repr(v) if isinstance(v, float) else str(v)])
    for d, c in sorted(summary.corank_hist.items()):
        rows.append(["corank", str(d), "", str(c)])
    for (s, l), c in sorted(summary.joint_hist.items()):
        rows.append(["joint", str(s), str(l), str(c)])
    return "\n".join(",".join(r) for r in rows) + "\n"


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials == 0:
        return (0.0, 1.0)
    phat = successes / trials
    denom = 1 + z * z / trials
    centre = phat + z * z / (2 * trials)
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials))
    return ((centre - half) / denom, (centre + half) / denom)


def _tv(emp_counts: dict, theory_probs: dict, trials: int) -> float:
    """Total variation with an explicit tail cell for mass beyond the grid."""
    tv = 0.0
    emp_seen = 0
    for cell, q in theory_probs.items():
        c = emp_counts.get(cell, 0)
        emp_seen += c
        tv += abs(c / trials - q)
    tail_theory = max(0.0, 1.0 - sum(theory_probs.values()))
    tail_emp = (trials - emp_seen) / trials
    return 0.5 * (tv + abs(tail_emp - tail_theory))


@dataclass(frozen=True)
class FitReport:
    model: str
    trials: int
    tv_corank: float
    tv_joint: float
    chi2_stat: float
    chi2_dof: int
    chi2_pvalue: float
    wilson: dict[int, tuple[float, float]]
    corank0_emp: float
    corank0_theory: float
    corank0_se: float

    def to_json_dict(self) -> dict:
        d = dict(self.__dict__)
        d["wilson"] = {str(k): list(v) for k, v in self.wilson.items()}
        return d


def compare_to_theory(summary: CampaignSummary, table: TheoryTable) -> FitReport:
    """TV distances, pooled chi-square and Wilson intervals vs a theory table."""
    expected_tag = f"gf2:r1:s3:{table.model}"
    if summary.model != expected_tag:
        raise ValueError(f"model tag mismatch: campaign {summary.model!r} "
                         f"vs theory {expected_tag!r}")
    trials = summary.trials
    d_max = len(table.corank) - 1
    corank_probs = {d: table.corank[d] for d in range(d_max + 1)}
    tv_corank = _tv(summary.corank_hist, corank_probs, trials)
    tv_joint = _tv(summary.joint_hist, table.joint, trials)

    # chi-square on corank cells, pooling expected counts below 5 from the tail
    cells: list[tuple[float, float]] = []   # (observed, expected)
    for d in range(d_max + 1):
        cells.append((summary.corank_hist.get(d, 0), trials * table.corank[d]))
    tail_obs = trials - sum(o for o, _ in cells)
    tail_exp = trials * max(0.0, 1.0 - sum(table.corank))
    cells.append((tail_obs, tail_exp))
    pooled = [cells[0]]
    for obs, exp in cells[1:]:
        if pooled[-1][1] < 5 or exp < 5:
            pooled[-1] = (pooled[-1][0] + obs, pooled[-1][1] + exp)
        else:
            pooled.append((obs, exp))
    if len(pooled) > 1 and pooled[-1][1] < 5:
        obs, exp = pooled.pop()
        pooled[-1] = (pooled[-1][0] + obs, pooled[-1][1] + exp)
    stat = sum((o - e) ** 2 / e for o, e in pooled if e > 0)
    dof = max(1, len(pooled) - 1)
    pvalue = float(_chi2.sf(stat, dof))

    wilson = {d: wilson_interval(summary.corank_hist.get(d, 0), trials)
              for d in range(d_max + 1)}
    p0 = summary.corank_hist.get(0, 0) / trials
    q0 = table.corank[0]
    se = math.sqrt(q0 * (1 - q0) / trials)
    return FitReport(model=summary.model, trials=trials, tv_corank=tv_corank,
                     tv_joint=tv_joint, chi2_stat=stat, chi2_dof=dof,
                     chi2_pvalue=pvalue, wilson=wilson, corank0_emp=p0,
                     corank0_theory=q0, corank0_se=se)


@dataclass(frozen=True)
class PoissonFit:
    count: int
    mean: float
    variance: float
    dispersion: float


def poisson_fit(records: Sequence[TrialRecord]) -> PoissonFit:
    """Sample mean/variance/dispersion of sigma over a campaign."""
    sigmas = [r.sigma for r in records if r.sigma is not None]
    if len(sigmas) < 1000:
        raise ValueError("poisson_fit needs at least 1000 records")
    mean = sum(sigmas) / len(sigmas)
    var = sum((s - mean) ** 2 for s in sigmas) / (len(sigmas) - 1)
    disp = var / mean if mean > 0 else float("nan")
    return PoissonFit(count=len(sigmas), mean=mean, variance=var, dispersion=disp)


def headline_checks(summary: CampaignSummary, fit: FitReport,
                    table: TheoryTable) -> dict[str, bool]:
    """The campaign-level acceptance thresholds, in one place."""
    se_mean = (math.sqrt(summary.sigma_var / summary.trials)
               if summary.sigma_var > 0 else float("inf"))
    return {
        "corank0_within_3se": abs(fit.corank0_emp - fit.corank0_theory)
                              <= SE_MULTIPLE * fit.corank0_se,
        "tv_corank": fit.tv_corank < TV_CORANK_MAX,
        "tv_joint": fit.tv_joint < TV_JOINT_MAX,
        "zero_anomalies": summary.anomaly_total == 0,
        "sigma_mean_within_3se": abs(summary.sigma_mean - table.phi)
                                 <= SE_MULTIPLE * se_mean,
        "dispersion_in_band": (DISPERSION_BAND[0] <= summary.sigma_dispersion
                               <= DISPERSION_BAND[1]),
    }


AUDIT_FAMILIES = ("r1s2", "r2s2", "r2s3", "gf3model1")


@dataclass(frozen=True)
class AuditResult:
    family: str
    n: int
    trials: int
    violations: int            # exact-property violations (family-specific)
    fraction: float | None     # measured target fraction, when one applies
    threshold: float | None
    passed: bool

    def describe(self) -> str:
        frac = "-" if self.fraction is None else f"{self.fraction:.4f}"
        return (f"{self.family}: n={self.n} trials={self.trials} "
                f"violations={self.violations} fraction={frac} "
                f"{'PASS' if self.passed else 'FAIL'}")


def _audit_trial(family: str, cfg: ModelConfig, trial: int) -> tuple[int, int]:
    """Returns (violation, hit) for one trial of an audit family."""
    sm = sample(cfg, trial)
    m = sm.matrix
    if family == "r1s2":
        rank, basis = gf2_rank_nullspace(m)
        comps = functional_graph_components(sm)
        return (int(basis.dimension != comps), 0)
    if family == "r2s2":
        rank, basis = gf2_rank_nullspace(m)
        # s even: the all-ones vector annihilates every column, so corank >= 1
        return (int(basis.dimension < 1), int(basis.dimension == 1))
    if family == "r2s3":
        rank, basis = gf2_rank_nullspace(m)
        return (0, int(basis.dimension == 0))
    if family == "gf3model1":
        corank = m.n_rows - gfp_rank(m)
        return (int(corank < 1), int(corank == 1))
    raise ValueError(f"unknown audit family {family!r}")


def _audit_config(family: str, n: int, master_seed: int) -> ModelConfig:
    if family == "r1s2":
        return ModelConfig(n=n, r=1, s=2, master_seed=master_seed)
    if family == "r2s2":
        return ModelConfig(n=n, r=2, s=2, master_seed=master_seed)
    if family == "r2s3":
        return ModelConfig(n=n, r=2, s=3, master_seed=master_seed)
    if family == "gf3model1":
        return ModelConfig(n=n, field="gfp", p=3, gft_model=1, master_seed=master_seed)
    raise ValueError(f"unknown audit family {family!r}")


def special_case_audits(families: Sequence[str], n: int = 500, trials: int = 1000,
                        master_seed: int = 0, workers: int = 1) -> list[AuditResult]:
    """Exact and high-probability checks for the special-case models."""
    out = []
    for family in families:
        cfg = _audit_config(family, n, master_seed)
        fn = partial(_audit_trial, family, cfg)
        results = _pool_map(fn, range(trials), workers)
        violations = sum(v for v, _ in results)
        hits = sum(h for _, h in results)
        if family == "r1s2":
            fraction, threshold = None, None
            passed = violations == 0
        else:
            fraction, threshold = hits / trials, FRACTION_MIN
            passed = violations == 0 and fraction >= FRACTION_MIN
        out.append(AuditResult(family=family, n=n, trials=trials,
                               violations=violations, fraction=fraction,
                               threshold=threshold, passed=passed))
    return out
