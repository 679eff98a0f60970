"""Exact evaluation of the limiting quantities for the incidence models.

All series and infinite products are truncated by explicit term-size
bounds, never by fixed iteration counts.  Internals run in mpmath
extended precision (the published 4-digit constants demand comfortably
more than float headroom once products of many near-unit factors are
involved); public functions return plain floats or exact ints/Fractions.

Quantities:

* sigma_s / kappa_s: connectivity constants of random functional
  digraphs, exact rationals.
* phi: Poisson rate of small fundamental dependencies, one variant per
  replacement mode; phi_t generalises to entry distributions over GF(t)
  through the cancellation weight gamma.
* pi(k): the limiting law of the large-part dimension.
* P*(h, r; m): survival probability that h of h+r large dependencies
  persist in the presence of m small ones.
* P(sigma, lambda) and the co-rank distribution assembled from them.
* E X_ell: exact expected number of ell-row dependencies at finite n,
  evaluated in log space.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from mpmath import mp, mpf

WITH = "with"
WITHOUT = "without"

_PRODUCT_TRUNC = 1e-15   # drop product factors within this of unity
_MAX_TERMS = 100_000


def _check_model(model: str) -> None:
    if model not in (WITH, WITHOUT):
        raise ValueError(f"model must be '{WITH}' or '{WITHOUT}', got {model!r}")


def sigma_kappa(s: int, model: str = WITH) -> tuple[Fraction, Fraction]:
    """Connectivity constants (sigma_s, kappa_s) as exact rationals.

    kappa_s is the probability that the underlying graph of a uniform
    functional digraph on s vertices is connected; the without-
    replacement variant forbids fixed points, so each vertex maps to one
    of the other s-1 and the denominator becomes (s-1)^s.
    """
    _check_model(model)
    if model == WITH:
        if s < 1:
            raise ValueError("s must be >= 1 for the with-replacement model")
        sig = sum(Fraction(s ** j, math.factorial(j)) for j in range(s))
        return sig, Fraction(math.factorial(s - 1), s ** s) * sig
    if s < 2:
        raise ValueError("s must be >= 2 for the without-replacement model")
    sig = sum(Fraction(s ** j, math.factorial(j)) for j in range(s - 1))
    return sig, Fraction(math.factorial(s - 1), (s - 1) ** s) * sig


def _phi_series(base: "mpf", start: int, inner_gap: int, tol: float) -> tuple["mpf", int]:
    """sum_{l>=start} base^l / l * sum_{j=0}^{l-inner_gap} l^j / j!"""
    cutoff = mpf(tol) * mpf("1e-2")
    total = mpf(0)
    terms = 0
    l = start
    while l < _MAX_TERMS:
        inner = mpf(0)
        pw = mpf(1)
        for j in range(0, l - inner_gap + 1):
            if j > 0:
                pw = pw * l / j
            inner += pw
        term = base ** l / l * inner
        total += term
        terms += 1
        if term < cutoff:
            break
        l += 1
    return total, terms


def phi(model: str = WITH, tol: float = 1e-9) -> float:
    """Poisson rate of small fundamental dependencies (r=1, s=3).

    With replacement the sum starts at single rows; without replacement
    single-row and fixed-point terms drop and it starts at pairs.
    Numerically ~0.5215 (with) and ~0.1151 (without).
    """
    _check_model(model)
    if tol <= 0:
        raise ValueError("tol must be positive")
    with mp.workdps(50):
        base = 2 * mp.exp(-2)
        start, gap = (1, 1) if model == WITH else (2, 2)
        total, _ = _phi_series(base, start, gap, tol)
        return float(total)


def phi_t(gamma: float, tol: float = 1e-9) -> float:
    """GF(t) small-dependency rate for cancellation weight gamma in (0, 1]."""
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    with mp.workdps(50):
        base = 2 * mpf(gamma) * mp.exp(-2)
        total, _ = _phi_series(base, 2, 2, tol)
        return float(total)


def _pi_product_length(q: int = 2) -> int:
    jmax = 1
    while float(q) ** -jmax >= _PRODUCT_TRUNC:
        jmax += 1
    return jmax


def _pi_mp(k: int, q: int = 2) -> "mpf":
    jmax = _pi_product_length(q)

    def prod(j0: int) -> "mpf":
        out = mpf(1)
        for j in range(j0, jmax + 1):
            out *= 1 - mpf(q) ** -j
        return out

    if k == 0:
        return prod(1)
    num = prod(k + 1) if k + 1 <= jmax else mpf(1)
    den = mpf(1)
    for j in range(1, k + 1):
        den *= 1 - mpf(q) ** -j
    return num / den * mpf(q) ** (-k * k)


def pi_k(k: int, q: int = 2) -> float:
    """Limiting probability that the large part spans dimension k.

    The q parameter substitutes 1/q for the 1/2 factors (the GF(t)
    analogue); only q=2 is exercised by the acceptance surface.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    with mp.workdps(50):
        return float(_pi_mp(k, q))


def gaussian_binomial(m: int, r: int, q: int) -> int:
    """Exact q-binomial: the number of r-dim subspaces of GF(q)^m."""
    if r < 0 or r > m:
        raise ValueError("need 0 <= r <= m")
    num = 1
    den = 1
    for i in range(1, r + 1):
        num *= q ** (m - i + 1) - 1
        den *= q ** i - 1
    assert num % den == 0
    return num // den


def _p_star_mp(h: int, r: int, m: int) -> "mpf":
    if h < 0 or r < 0 or r > m:
        raise ValueError("need h >= 0 and 0 <= r <= m")
    v = mpf(gaussian_binomial(m, r, 2)) * mpf(2) ** (-(h + r) * (m - r))
    for j in range(h + 1, h + r + 1):
        v *= 1 - mpf(2) ** (-j)
    return v


def p_star(h: int, r: int, m: int) -> float:
    """Survival probability P*(h, h+r; m): of h+r large dependencies, h
    persist after m small ones are added back.  Empty products are 1."""
    with mp.workdps(50):
        return float(_p_star_mp(h, r, m))


def _p_joint_mp(sigma: int, lam: int, phi_value: "mpf") -> "mpf":
    s = mpf(0)
    for r in range(0, sigma + 1):
        s += _pi_mp(lam + r) * _p_star_mp(lam, r, sigma)
    return phi_value ** sigma / math.factorial(sigma) * mp.exp(-phi_value) * s


def p_joint(sigma: int, lam: int, phi_value: float) -> float:
    """Limiting joint probability of sigma small fundamentals and a
    lambda-dimensional large part, mixing Poisson(phi) with pi through
    the survival factors."""
    if sigma < 0 or lam < 0:
        raise ValueError("sigma and lambda must be >= 0")
    with mp.workdps(50):
        return float(_p_joint_mp(sigma, lam, mpf(phi_value)))


def corank_distribution(d_max: int, model: str = WITHOUT, tol: float = 1e-9) -> list[float]:
    """Pr(corank = d) for d = 0..d_max: diagonal sums of the joint law."""
    if d_max < 0:
        raise ValueError("d_max must be >= 0")
    _check_model(model)
    with mp.workdps(50):
        base = 2 * mp.exp(-2)
        start, gap = (1, 1) if model == WITH else (2, 2)
        ph, _ = _phi_series(base, start, gap, tol)
        return [float(sum(_p_joint_mp(s, d - s, ph) for s in range(d + 1)))
                for d in range(d_max + 1)]


def expected_num_deps(n: int, ell: int, model: str = WITH) -> float:
    """Exact E X_ell, the expected number of ell-row dependencies at
    finite n (r=1, s=3), evaluated in log space via lgamma."""
    _check_model(model)
    if not 1 <= ell <= n:
        raise ValueError("need 1 <= ell <= n")
    if model == WITH:
        if ell == n:
            return 0.0
        ln_c = math.lgamma(n + 1) - math.lgamma(ell + 1) - math.lgamma(n - ell + 1)
        ln_dep = ell * (math.log(2) + math.log(ell) + math.log(n - ell) - 2 * math.log(n))
        ln_out = (n - ell) * math.log((ell * ell + (n - ell) * (n - ell)) / (n * n))
        return math.exp(ln_c + ln_dep + ln_out)
    if ell <= 1 or ell == n:
        return 0.0
    den = (n - 1) * (n - 2)
    inner = ell * (ell - 1) + (n - 1 - ell) * (n - 2 - ell)
    if inner == 0:
        return 0.0
    ln_c = math.lgamma(n + 1) - math.lgamma(ell + 1) - math.lgamma(n - ell + 1)
    ln_dep = ell * (math.log(2) + math.log(ell - 1) + math.log(n - ell) - math.log(den))
    ln_out = (n - ell) * (math.log(inner) - math.log(den))
    return math.exp(ln_c + ln_dep + ln_out)


def expected_num_deps_gft(n: int, ell: int, gamma: float, alpha: float,
                          beta: float) -> float:
    """Field-parameterised E X_ell over GF(t) (without replacement limit
    shape): per-column cancellation weight gamma, three-way zero-sum
    weight alpha, outside-column pair weight beta."""
    if not 1 <= ell <= n:
        raise ValueError("need 1 <= ell <= n")
    x = ell / n
    dep = 2 * gamma * x * (1 - x) + alpha * x * x
    out = beta * x * x + (1 - x) * (1 - x)
    if dep <= 0 or out <= 0:
        return 0.0
    ln_c = math.lgamma(n + 1) - math.lgamma(ell + 1) - math.lgamma(n - ell + 1)
    return math.exp(ln_c + ell * math.log(dep) + (n - ell) * math.log(out))


def gft_params(gft_model: int, p: int, f: "list[float] | None" = None
               ) -> tuple[float, float, float]:
    """(gamma, alpha, beta) for a GF(p) model; f gives Pr(residue 1..p-1).

    Model 1 is Model 2 with all mass on residue 1.
    """
    if f is None:
        f = [1.0 / (p - 1)] * (p - 1)
    if gft_model == 1:
        f = [0.0] * (p - 1)
        f[0] = 1.0
    if len(f) != p - 1:
        raise ValueError("f must give probabilities for residues 1..p-1")

    def fv(i: int) -> float:
        i %= p
        return f[i - 1] if i else 0.0

    beta = sum(fv(i) * fv(p - i) for i in range(1, p))
    if gft_model in (1, 2):
        gamma = fv(p - 1)
        alpha = sum(fv(i) * fv(p - 1 - i) for i in range(1, p))
    elif gft_model == 3:
        gamma = beta
        alpha = sum(fv(i) * fv(j) * fv((-i - j) % p)
                    for i in range(1, p) for j in range(1, p))
    else:
        raise ValueError("gft_model must be 1, 2 or 3")
    return gamma, alpha, beta


def gft_corank_distribution(gamma: float, alpha: float, d_max: int,
                            tol: float = 1e-9) -> list[float]:
    """Poisson(phi_t) co-rank law for GF(t) Models 2/3.

    Valid only under alpha <= 2 gamma <= 1; outside that hypothesis the
    calculator refuses rather than extrapolates.
    """
    if not alpha <= 2 * gamma <= 1:
        raise ValueError(f"outside the validity hypothesis: need alpha <= 2*gamma <= 1, "
                         f"got alpha={alpha}, gamma={gamma}")
    ph = phi_t(gamma, tol)
    return [math.exp(-ph) * ph ** d / math.factorial(d) for d in range(d_max + 1)]


def verify_q_system(k_max: int, lam_terms: int = 60) -> float:
    """Max residual |sum_{lam>=k} pi(lam) prod_{i<k}(2^lam - 2^i) - 1|
    over k = 0..k_max, with lam summed to k + lam_terms."""
    if k_max > 8:
        raise ValueError("k_max must be <= 8")
    worst = 0.0
    with mp.workdps(50):
        for k in range(k_max + 1):
            total = mpf(0)
            for lam in range(k, k + lam_terms + 1):
                prod = mpf(1)
                for i in range(k):
                    prod *= mpf(2) ** lam - mpf(2) ** i
                total += _pi_mp(lam) * prod
            worst = max(worst, abs(float(total - 1)))
    return worst


def window_range(n: int, a: float) -> range:
    """Integer weights inside J_a = [n/2 - sqrt(a n ln n), n/2 + sqrt(a n ln n)],
    clamped to the feasible sizes 1..n."""
    half = math.sqrt(a * n * math.log(n))
    return range(max(1, math.ceil(n / 2 - half)),
                 min(n, math.floor(n / 2 + half)) + 1)


def first_moment_window_sum(n: int, a: float = 1.0, model: str = WITH) -> float:
    """sum over J_a of E X_ell; tends to 1 for a >= 1."""
    return sum(expected_num_deps(n, ell, model) for ell in window_range(n, a))


@dataclass(frozen=True)
class TheoryTable:
    """Exact limiting quantities for one model, at a stated tolerance."""

    model: str
    phi: float
    pi: tuple[float, ...]                          # k = 0..k_max
    p_star: dict[tuple[int, int, int], float]      # (h, r, m)
    joint: dict[tuple[int, int], float]            # (sigma, lambda)
    corank: tuple[float, ...]                      # d = 0..d_max
    tol: float
    phi_terms: int                                 # series length used for phi
    pi_factors: int                                # product length used for pi

    @property
    def full_rank_probability(self) -> float:
        return self.corank[0]

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "phi": self.phi,
            "tol": self.tol,
            "phi_terms": self.phi_terms,
            "pi_factors": self.pi_factors,
            "pi": list(self.pi),
            "p_star": [{"h": h, "r": r, "m": m, "value": v}
                       for (h, r, m), v in sorted(self.p_star.items())],
            "joint": [{"sigma": s, "lambda": l, "value": v}
                      for (s, l), v in sorted(self.joint.items())],
            "corank": list(self.corank),
        }


def build_table(model: str = WITHOUT, d_max: int = 12, k_max: int = 12,
                pstar_max: int = 8, tol: float = 1e-9) -> TheoryTable:
    """Assemble the full theory table; normalisation is checked here."""
    _check_model(model)
    span = max(d_max, 12)   # normalisation is contractual at 12 cells
    with mp.workdps(50):
        base = 2 * mp.exp(-2)
        start, gap = (1, 1) if model == WITH else (2, 2)
        ph, terms = _phi_series(base, start, gap, tol)
        pi_vals = tuple(float(_pi_mp(k)) for k in range(max(k_max, 12) + 1))
        pstar = {(k - r, r, m): float(_p_star_mp(k - r, r, m))
                 for m in range(pstar_max + 1)
                 for k in range(pstar_max + 1)
                 for r in range(min(m, k) + 1)}
        joint_full = {(s, l): float(_p_joint_mp(s, l, ph))
                      for s in range(span + 1) for l in range(span + 1)}
        corank_full = tuple(float(sum(_p_joint_mp(s, d - s, ph) for s in range(d + 1)))
                            for d in range(span + 1))
    for label, total in (("pi", sum(pi_vals)), ("corank", sum(corank_full)),
                         ("joint", sum(joint_full.values()))):
        if abs(total - 1) > 1e-9:
            raise AssertionError(f"{label} table fails normalisation: {total}")
    joint = {(s, l): v for (s, l), v in joint_full.items()
             if s <= d_max and l <= d_max}
    return TheoryTable(model=model, phi=float(ph), pi=pi_vals[:k_max + 1],
                       p_star=pstar, joint=joint, corank=corank_full[:d_max + 1],
                       tol=tol, phi_terms=terms, pi_factors=_pi_product_length())
