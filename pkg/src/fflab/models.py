"""Seeded samplers for the random incidence-matrix models.

A configuration describes an n x rn matrix: for every row index i there
are r columns, each carrying a unit entry on row i (the diagonal of its
block) plus s-1 random unit entries.  "with" replacement draws those
rows i.i.d. from [n] and lets coinciding entries cancel over GF(2);
"without" replacement draws them distinct and away from i.

Prime-field variants (s=3, without replacement, one column block) come
in three flavours: all entries 1; diagonal 1 with the two off-diagonal
values drawn from a distribution f on the nonzero residues; or all
three values drawn from f.

Sampling is a pure function of (config, trial): the per-trial generator
is derived from the master seed and trial index alone, so trials can be
produced in any order and on any number of workers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .gf2 import WORD_BITS, BitMatrix
from .gfp import PrimeFieldMatrix, is_prime
from .unionfind import UnionFind

WITH = "with"
WITHOUT = "without"


@dataclass(frozen=True)
class ModelConfig:
    """Full description of a sampling model."""

    n: int
    r: int = 1
    s: int = 3
    replacement: str = WITHOUT
    field: str = "gf2"             # "gf2" | "gfp"
    p: int | None = None           # prime modulus for field="gfp"
    gft_model: int | None = None   # 1 | 2 | 3 for field="gfp"
    f_dist: tuple[float, ...] | None = None  # probs of residues 1..p-1
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if self.s < 2:
            raise ValueError("s must be >= 2")
        if self.replacement not in (WITH, WITHOUT):
            raise ValueError(f"unknown replacement mode {self.replacement!r}")
        if self.replacement == WITHOUT and self.s - 1 > self.n - 1:
            raise ValueError("without replacement requires s-1 <= n-1")
        if self.field == "gf2":
            if self.p is not None or self.gft_model is not None:
                raise ValueError("p/gft_model are only valid with field='gfp'")
        elif self.field == "gfp":
            if self.p is None or not is_prime(self.p):
                raise ValueError("field='gfp' requires a prime modulus p")
            if self.gft_model not in (1, 2, 3):
                raise ValueError("gft_model must be 1, 2 or 3")
            if self.s != 3 or self.replacement != WITHOUT or self.r != 1:
                raise ValueError("gfp models are defined for r=1, s=3, without replacement")
            if self.f_dist is not None:
                f = self.f_dist
                if len(f) != self.p - 1:
                    raise ValueError("f_dist must give probabilities for residues 1..p-1")
                if any(x < 0 for x in f):
                    raise ValueError("f_dist entries must be nonnegative")
                if abs(sum(f) - 1.0) > 1e-12:
                    raise ValueError("f_dist must sum to 1 within 1e-12")
        else:
            raise ValueError(f"unknown field {self.field!r}")

    def tag(self) -> str:
        if self.field == "gf2":
            return f"gf2:r{self.r}:s{self.s}:{self.replacement}"
        return f"gf{self.p}:model{self.gft_model}"

    def effective_f(self) -> np.ndarray:
        """Entry distribution for Models 2/3; uniform when not given."""
        assert self.p is not None
        if self.f_dist is None:
            return np.full(self.p - 1, 1.0 / (self.p - 1))
        return np.asarray(self.f_dist, dtype=float)


@dataclass(frozen=True)
class SampledMatrix:
    matrix: BitMatrix | PrimeFieldMatrix
    config: ModelConfig
    trial: int

    @property
    def derived_seed(self) -> tuple[int, int]:
        return (self.config.master_seed, self.trial)


def trial_generator(cfg: ModelConfig, trial: int) -> np.random.Generator:
    """Stable per-trial RNG: SeedSequence(master_seed) spawned at key (trial,)."""
    ss = np.random.SeedSequence(cfg.master_seed, spawn_key=(trial,))
    return np.random.Generator(np.random.PCG64(ss))


def _draw_positions(rng: np.random.Generator, n: int, r: int, s: int,
                    replacement: str) -> np.ndarray:
    """Random row positions, shape (r*n, s-1); column c is block c//n, row index c%n.

    The raw uniforms for all columns come from a single generator call
    (column-major, entry slots within a column consecutive), so streams
    are reproducible for a given (config, trial) regardless of caller.
    """
    rn = r * n
    diag = np.tile(np.arange(n), r)
    if replacement == WITH:
        return rng.integers(0, n, size=(rn, s - 1))
    highs = n - 1 - np.arange(s - 1)
    raw = rng.integers(0, highs, size=(rn, s - 1))
    out = np.empty((rn, s - 1), dtype=np.int64)
    excl = diag[:, None]  # sorted exclusion lists, grown one slot at a time
    for t in range(s - 1):
        x = raw[:, t].copy()
        for j in range(excl.shape[1]):
            x += x >= excl[:, j]
        out[:, t] = x
        excl = np.sort(np.concatenate([excl, x[:, None]], axis=1), axis=1)
    return out


def _pack_gf2(n: int, r: int, positions: np.ndarray) -> BitMatrix:
    rn = r * n
    cols = np.arange(rn)
    diag = np.tile(np.arange(n), r)
    words = np.zeros((n, (rn + WORD_BITS - 1) // WORD_BITS), dtype=np.uint64)
    masks = np.uint64(1) << (cols % WORD_BITS).astype(np.uint64)
    wi = cols // WORD_BITS
    np.bitwise_xor.at(words, (diag, wi), masks)
    for t in range(positions.shape[1]):
        np.bitwise_xor.at(words, (positions[:, t], wi), masks)
    return BitMatrix(n, rn, words)


def sample_gf2(cfg: ModelConfig, trial: int) -> SampledMatrix:
    """Sample the GF(2) model for one trial.

    Column i of block j is the XOR of a unit at row i and s-1 random
    unit rows; with replacement all s entries accumulate (a random hit
    on the diagonal row cancels it), without replacement the random
    rows are distinct and never equal to i.
    """
    if cfg.field != "gf2":
        raise ValueError("sample_gf2 requires field='gf2'")
    rng = trial_generator(cfg, trial)
    pos = _draw_positions(rng, cfg.n, cfg.r, cfg.s, cfg.replacement)
    return SampledMatrix(_pack_gf2(cfg.n, cfg.r, pos), cfg, trial)


def sample_gft(cfg: ModelConfig, trial: int) -> SampledMatrix:
    """Sample the GF(p) model for one trial.

    Position draws consume the generator exactly like the GF(2) sampler,
    so Model 3 over GF(2) with f = {1: 1.0} is bit-identical to
    sample_gf2 under the same seed schedule.  Value draws (when the
    model has any) follow: off-diagonal values first, then diagonal
    values for Model 3.
    """
    if cfg.field != "gfp":
        raise ValueError("sample_gft requires field='gfp'")
    p = cfg.p
    n = cfg.n
    rng = trial_generator(cfg, trial)
    pos = _draw_positions(rng, n, 1, 3, WITHOUT)
    entries = np.zeros((n, n), dtype=np.int64)
    i = np.arange(n)
    f = cfg.effective_f()
    residues = np.arange(1, p)
    degenerate = p == 2  # the only nonzero residue is 1; nothing to draw
    if cfg.gft_model == 1 or degenerate:
        off = np.ones((n, 2), dtype=np.int64)
    else:
        off = rng.choice(residues, size=(n, 2), p=f)
    if cfg.gft_model == 3 and not degenerate:
        dia = rng.choice(residues, size=n, p=f)
    else:
        dia = np.ones(n, dtype=np.int64)
    # positions are distinct within a column, so plain assignment is exact
    entries[i, i] = dia
    entries[pos[:, 0], i] = off[:, 0]
    entries[pos[:, 1], i] = off[:, 1]
    return SampledMatrix(PrimeFieldMatrix(p, n, n, entries), cfg, trial)


def sample(cfg: ModelConfig, trial: int) -> SampledMatrix:
    return sample_gf2(cfg, trial) if cfg.field == "gf2" else sample_gft(cfg, trial)


def functional_graph_components(sm: SampledMatrix) -> int:
    """Component count of the functional graph underlying an s=2, r=1 sample.

    Each column is an edge {i, f(i)} (or nothing, when a with-replacement
    column cancelled to zero); isolated vertices count as components.
    This is the independent combinatorial oracle for the s=2 co-rank.
    """
    cfg = sm.config
    if cfg.s != 2 or cfg.r != 1 or cfg.field != "gf2":
        raise ValueError("functional graph oracle requires s=2, r=1 over GF(2)")
    m = sm.matrix
    assert isinstance(m, BitMatrix)
    uf = UnionFind(m.n_rows)
    hits: dict[int, list[int]] = {}
    for row, rint in enumerate(m.rows_as_ints()):
        while rint:
            low = rint & -rint
            hits.setdefault(low.bit_length() - 1, []).append(row)
            rint ^= low
    for col, rows in hits.items():
        if len(rows) == 2:
            uf.union(rows[0], rows[1])
        elif len(rows) != 0:
            raise ValueError(f"column {col} has weight {len(rows)}, not an s=2 sample")
    return uf.n_sets


# --- textual fixture format ---------------------------------------------
#
#   gf2 <n_rows> <n_cols>          |  gfp <p> <n_rows> <n_cols>
#   <row>:<value> <row>:<value> ...     one line per column, rows ascending
#
# Round-trips bit-exactly.


class MatrixParseError(ValueError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


def serialize_matrix(m: BitMatrix | PrimeFieldMatrix) -> str:
    lines = []
    if isinstance(m, BitMatrix):
        lines.append(f"gf2 {m.n_rows} {m.n_cols}")
        dense = m.to_dense()
    else:
        lines.append(f"gfp {m.p} {m.n_rows} {m.n_cols}")
        dense = m.entries
    for j in range(m.n_cols):
        rows = np.nonzero(dense[:, j])[0]
        lines.append(" ".join(f"{int(rr)}:{int(dense[rr, j])}" for rr in rows))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> BitMatrix | PrimeFieldMatrix:
    lines = text.splitlines()
    if not lines:
        raise MatrixParseError(1, 1, "empty input")
    head = lines[0].split()
    if head[:1] == ["gf2"]:
        if len(head) != 3:
            raise MatrixParseError(1, 1, "header must be 'gf2 <n_rows> <n_cols>'")
        p = 2
        dims = head[1:]
    elif head[:1] == ["gfp"]:
        if len(head) != 4:
            raise MatrixParseError(1, 1, "header must be 'gfp <p> <n_rows> <n_cols>'")
        try:
            p = int(head[1])
        except ValueError:
            raise MatrixParseError(1, len(head[0]) + 2, "modulus must be an integer")
        dims = head[2:]
    else:
        raise MatrixParseError(1, 1, "header must start with 'gf2' or 'gfp'")
    try:
        n_rows, n_cols = (int(x) for x in dims)
    except ValueError:
        raise MatrixParseError(1, 1, "dimensions must be integers")
    if n_rows < 1 or n_cols < 1:
        raise MatrixParseError(1, 1, "dimensions must be >= 1")
    if head[0] == "gfp" and not is_prime(p):
        raise MatrixParseError(1, len(head[0]) + 2, f"modulus {p} is not prime")
    if len(lines) - 1 != n_cols:
        raise MatrixParseError(len(lines), 1,
                               f"expected {n_cols} column lines, found {len(lines) - 1}")
    dense = np.zeros((n_rows, n_cols), dtype=np.int64)
    for j in range(n_cols):
        lineno = j + 2
        pos = 1
        seen: set[int] = set()
        for tok in lines[j + 1].split():
            col_at = lines[j + 1].find(tok, pos - 1) + 1
            try:
                row_s, val_s = tok.split(":")
                row, val = int(row_s), int(val_s)
            except ValueError:
                raise MatrixParseError(lineno, col_at, f"malformed entry {tok!r}")
            if not 0 <= row < n_rows:
                raise MatrixParseError(lineno, col_at, f"row {row} out of range")
            if row in seen:
                raise MatrixParseError(lineno, col_at, f"duplicate row {row} in column {j}")
            if not 0 < val < p:
                raise MatrixParseError(lineno, col_at, f"value {val} out of range for {head[0]}")
            seen.add(row)
            dense[row, j] = val
            pos = col_at + len(tok)
    if head[0] == "gf2":
        return BitMatrix.from_dense(dense)
    return PrimeFieldMatrix.from_dense(dense, p)
