"""Dense exact linear algebra over prime fields GF(p).

Same contract as the GF(2) side: row rank plus a basis of the *left*
null space {x : xM = 0 mod p}.  Entries are int64 residues in [0, p).
Prime moduli only; extension fields are out of scope.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass
class PrimeFieldMatrix:
    p: int
    n_rows: int
    n_cols: int
    entries: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if not is_prime(self.p):
            raise ValueError(f"modulus {self.p} is not prime")
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("dimension-zero matrix rejected")
        if self.entries.shape != (self.n_rows, self.n_cols):
            raise ValueError("entries shape mismatch")
        if self.entries.dtype != np.int64:
            raise ValueError("entries must be int64")
        if int(self.entries.min(initial=0)) < 0 or int(self.entries.max(initial=0)) >= self.p:
            raise ValueError("entries must be residues in [0, p)")

    @classmethod
    def zeros(cls, p: int, n_rows: int, n_cols: int) -> "PrimeFieldMatrix":
        return cls(p, n_rows, n_cols, np.zeros((n_rows, n_cols), dtype=np.int64))

    @classmethod
    def identity(cls, p: int, n: int) -> "PrimeFieldMatrix":
        return cls(p, n, n, np.eye(n, dtype=np.int64))

    @classmethod
    def from_dense(cls, dense: np.ndarray, p: int) -> "PrimeFieldMatrix":
        a = np.asarray(dense, dtype=np.int64) % p
        return cls(p, a.shape[0], a.shape[1], a)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, PrimeFieldMatrix)
                and self.p == other.p
                and self.n_rows == other.n_rows
                and self.n_cols == other.n_cols
                and bool(np.array_equal(self.entries, other.entries)))


def gfp_vecmat(x: np.ndarray, m: PrimeFieldMatrix) -> np.ndarray:
    """x M mod p for a length-n_rows residue vector x."""
    return (np.asarray(x, dtype=np.int64) @ m.entries) % m.p


def gfp_rank(m: PrimeFieldMatrix) -> int:
    """Row rank over GF(p), no transform carried (fast path for audits)."""
    a = m.entries.copy()
    p = m.p
    nr, nc = a.shape
    r = 0
    for c in range(nc):
        col = a[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r, c:] = (a[r, c:] * inv) % p
        below = a[r + 1:, c:]
        f = below[:, 0]
        nzf = np.nonzero(f)[0]
        if nzf.size:
            below[nzf] = (below[nzf] - np.multiply.outer(f[nzf], a[r, c:])) % p
        r += 1
        if r == nr:
            break
    return r


def gfp_rank_nullspace(m: PrimeFieldMatrix) -> tuple[int, list[np.ndarray]]:
    """Rank and left-null-space basis over GF(p).

    Eliminates on rows while carrying an identity-initialised transform;
    transform rows aligned with zero rows of the reduced matrix are the
    basis.  Each basis vector x satisfies x M = 0 (mod p), and
    rank + len(basis) == n_rows.
    """
    p = m.p
    nr, nc = m.n_rows, m.n_cols
    a = np.concatenate([m.entries, np.eye(nr, dtype=np.int64)], axis=1)
    r = 0
    for c in range(nc):
        col = a[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r] = (a[r] * inv) % p
        f = a[r + 1:, c]
        nzf = np.nonzero(f)[0]
        if nzf.size:
            a[r + 1 + nzf] = (a[r + 1 + nzf] - np.multiply.outer(f[nzf], a[r])) % p
        r += 1
        if r == nr:
            break
    basis = [a[i, nc:].copy() for i in range(r, nr)
             if not a[i, :nc].any()]
    # rows past the pivot count are zero in the matrix part by construction
    assert len(basis) == nr - r
    return r, basis
