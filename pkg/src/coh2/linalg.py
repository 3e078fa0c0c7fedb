"""Exact linear algebra over Z/nZ.

Row-vector convention throughout: a matrix ``M`` acts on the right, so the
image of ``x`` is ``x @ M`` and the row span of ``M`` is ``{x @ M}``.

Canonical forms are Howell normal forms.  For prime moduli the Howell form
is the reduced row echelon form, and a vectorized elimination (BLAS products
in float64, exact for the sizes involved) is used instead of the generic
gcd-based loop.
"""

from __future__ import annotations

from math import gcd
from typing import Optional, Sequence

import numpy as np

_PRIMES_CACHE: dict[int, bool] = {}

# float64 products are exact while every partial sum stays below 2**53
_FLOAT_EXACT = 2**52


def is_prime(n: int) -> bool:
    if n in _PRIMES_CACHE:
        return _PRIMES_CACHE[n]
    ok = n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))
    _PRIMES_CACHE[n] = ok
    return ok


def _unit_normalizer(a: int, n: int) -> tuple[int, int]:
    """Return ``(u, g)`` with ``u`` a unit mod ``n`` and ``u*a = g = gcd(a, n)``."""
    g = gcd(a, n)
    if g == n:
        return 1, n
    m = n // g
    u = pow(a // g, -1, m) if m > 1 else 1
    while gcd(u, n) != 1:
        u += m
    return u % n, g


def _gcdex(a: int, b: int) -> tuple[int, int, int]:
    # s*a + t*b = g over the integers
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return a, s0, t0


def matmul_mod(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.size == 0 or b.size == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    if a.shape[1] * (n - 1) ** 2 < _FLOAT_EXACT:
        out = a.astype(np.float64) @ b.astype(np.float64)
        return np.mod(out, n).astype(np.int64)
    return (a @ b) % n


class ZnMatrix:
    """Immutable dense matrix over Z/nZ."""

    __slots__ = ("modulus", "entries")

    def __init__(self, entries, modulus: int, cols: Optional[int] = None):
        if modulus < 1:
            raise ValueError("modulus must be positive")
        arr = np.asarray(entries, dtype=np.int64)
        if arr.ndim == 1:
            arr = arr.reshape(0 if arr.size == 0 else 1, -1)
        if arr.size == 0:
            arr = arr.reshape(0, cols if cols is not None else (arr.shape[1] if arr.ndim == 2 else 0))
        arr = np.mod(arr, modulus)
        arr.setflags(write=False)
        self.modulus = modulus
        self.entries = arr

    @classmethod
    def identity(cls, size: int, modulus: int) -> "ZnMatrix":
        return cls(np.eye(size, dtype=np.int64), modulus)

    @classmethod
    def zeros(cls, rows: int, cols: int, modulus: int) -> "ZnMatrix":
        return cls(np.zeros((rows, cols), dtype=np.int64), modulus)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def __matmul__(self, other: "ZnMatrix") -> "ZnMatrix":
        _check_modulus(self, other)
        return ZnMatrix(matmul_mod(self.entries, other.entries, self.modulus), self.modulus)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ZnMatrix)
            and self.modulus == other.modulus
            and self.shape == other.shape
            and bool(np.array_equal(self.entries, other.entries))
        )

    def __hash__(self):
        return hash((self.modulus, self.shape, self.entries.tobytes()))

    def __repr__(self) -> str:
        return f"ZnMatrix(mod {self.modulus}, {self.rows}x{self.cols})\n{self.entries}"

    def span_size(self) -> int:
        """Number of elements of the row span (exact, as a Python int)."""
        h = howell_form(self)
        size = 1
        for row in h.entries:
            piv = row[np.flatnonzero(row)[0]]
            size *= self.modulus // int(piv)
        return size

    def tolist(self) -> list[list[int]]:
        return self.entries.tolist()


def _check_modulus(a: ZnMatrix, b: ZnMatrix) -> None:
    if a.modulus != b.modulus:
        raise ValueError(f"modulus mismatch: {a.modulus} vs {b.modulus}")


# ---------------------------------------------------------------------------
# Howell form


_PANEL = 64


def _rref_prime(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over F_p; returns (nonzero rows, pivot columns).

    Columns are processed in panels: pivots of a panel are found on the panel
    alone, and the rest of the matrix is updated with a single product.
    """
    a = np.mod(np.array(a, dtype=np.int64), p)
    m, d = a.shape
    if m * d <= 4 * _PANEL * _PANEL:
        return _rref_prime_unblocked(a, p)
    pivots: list[int] = []
    r = 0
    for c0 in range(0, d, _PANEL):
        if r == m:
            break
        panel = a[r:, c0:c0 + _PANEL]
        cols, rows = _panel_pivots(panel, p)
        if not cols:
            continue
        k = len(cols)
        gcols = [c0 + c for c in cols]
        prow = r + np.array(rows, dtype=np.int64)
        q = a[np.ix_(prow, gcols)]
        qinv = _rref_prime_unblocked(np.concatenate([q, np.eye(k, dtype=np.int64)], axis=1), p)[0][:, k:]
        new = matmul_mod(qinv, a[prow], p)
        rest = np.setdiff1d(np.arange(m), prow)
        coeff = a[np.ix_(rest, gcols)]
        hit = rest[coeff.any(axis=1)]
        if hit.size:
            a[hit] = np.mod(a[hit] - matmul_mod(a[np.ix_(hit, gcols)], new, p), p)
        below = rest[rest >= r]
        a = np.concatenate([a[:r], new, a[below]])
        pivots += gcols
        r += k
    return a[:r], pivots


def _panel_pivots(panel: np.ndarray, p: int) -> tuple[list[int], list[int]]:
    """Pivot columns of ``panel`` and original indices of rows independent on them."""
    a = panel.copy()
    perm = np.arange(a.shape[0])
    cols: list[int] = []
    r = 0
    for c in range(a.shape[1]):
        if r == a.shape[0]:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        i = r + nz[0]
        if i != r:
            a[[r, i]] = a[[i, r]]
            perm[[r, i]] = perm[[i, r]]
        a[r] = (a[r] * pow(int(a[r, c]), -1, p)) % p
        below = r + 1 + np.flatnonzero(a[r + 1:, c])
        if below.size:
            a[below] = (a[below] - np.outer(a[below, c], a[r])) % p
        cols.append(c)
        r += 1
    return cols, perm[:r].tolist()


def _rref_prime_unblocked(a: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    a = np.mod(np.array(a, dtype=np.int64), p)
    m, d = a.shape
    inv = np.zeros(p, dtype=np.int64)
    for x in range(1, p):
        inv[x] = pow(x, -1, p)
    pivots: list[int] = []
    r = 0
    for c in range(d):
        if r == m:
            break
        col = a[r:, c]
        nz = np.flatnonzero(col)
        if nz.size == 0:
            continue
        i = r + nz[0]
        if i != r:
            a[[r, i]] = a[[i, r]]
        a[r] = (a[r] * inv[a[r, c]]) % p
        factors = a[:, c].copy()
        factors[r] = 0
        rows = np.flatnonzero(factors)
        if rows.size:
            a[rows] = (a[rows] - np.outer(factors[rows], a[r])) % p
        pivots.append(c)
        r += 1
    return a[:r], pivots


def _howell_generic(a: np.ndarray, n: int) -> np.ndarray:
    a = np.mod(np.array(a, dtype=np.int64), n)
    d = a.shape[1]
    rows = [row for row in a if row.any()]
    out: list[np.ndarray] = []
    pending = np.array(rows, dtype=np.int64).reshape(-1, d)
    for c in range(d):
        if pending.shape[0] == 0:
            break
        col = pending[:, c]
        nz = np.flatnonzero(col)
        if nz.size == 0:
            continue
        # drive one row to carry gcd(column, n)
        target = n
        for x in col[nz]:
            target = gcd(target, int(x))
        gs = np.gcd(col[nz], n)
        hit = np.flatnonzero(gs == target)
        if hit.size:
            piv_i = int(nz[hit[0]])
        else:
            piv_i = int(nz[0])
            for j in nz[1:]:
                a_, b_ = int(pending[piv_i, c]), int(pending[j, c])
                g, s, t = _gcdex(a_, b_)
                u, v = a_ // g, b_ // g
                ri, rj = pending[piv_i].copy(), pending[j].copy()
                pending[piv_i] = (s * ri + t * rj) % n
                pending[j] = (-v * ri + u * rj) % n
                if gcd(int(pending[piv_i, c]), n) == target:
                    break
        u, g = _unit_normalizer(int(pending[piv_i, c]), n)
        piv_row = (pending[piv_i] * u) % n
        others = np.delete(pending, piv_i, axis=0)
        q = others[:, c] // g
        others = (others - np.outer(q, piv_row)) % n
        for k, prev in enumerate(out):
            f = prev[c] // g
            if f:
                out[k] = (prev - f * piv_row) % n
        out.append(piv_row)
        extra = ((n // g) * piv_row) % n
        new = [r for r in others if r.any()]
        if extra.any():
            new.append(extra)
        pending = np.array(new, dtype=np.int64).reshape(-1, d)
    if not out:
        return np.zeros((0, d), dtype=np.int64)
    return np.array(out, dtype=np.int64)


def howell_form(m: ZnMatrix) -> ZnMatrix:
    """Howell normal form of the row span of ``m`` (zero rows dropped).

    Pivots divide the modulus, entries above a pivot are reduced modulo it,
    and for every row with pivot ``g`` the multiple ``(n/g)*row`` lies in the
    span of the rows below.  Two matrices have the same row span iff their
    Howell forms are equal.
    """
    n = m.modulus
    if n == 1 or m.rows == 0:
        return ZnMatrix(np.zeros((0, m.cols), dtype=np.int64), n, cols=m.cols)
    if is_prime(n):
        rows, _ = _rref_prime(m.entries, n)
        return ZnMatrix(rows, n, cols=m.cols)
    return ZnMatrix(_howell_generic(m.entries, n), n, cols=m.cols)


def _pivots(h: np.ndarray) -> list[tuple[int, int]]:
    out = []
    for row in h:
        c = int(np.flatnonzero(row)[0])
        out.append((c, int(row[c])))
    return out


def _reduce(v: np.ndarray, h: np.ndarray, pivots, n: int, upto: Optional[int] = None):
    """Reduce rows of ``v`` by Howell rows ``h``.

    Returns (remainder, coefficients, ok) where ok[i] says whether every
    pivot column of row i was divisible by the pivot (only pivots with column
    < ``upto`` are used when given).
    """
    v = np.mod(np.array(v, dtype=np.int64), n)
    coeffs = np.zeros((v.shape[0], h.shape[0]), dtype=np.int64)
    ok = np.ones(v.shape[0], dtype=bool)
    for k, (c, g) in enumerate(pivots):
        if upto is not None and c >= upto:
            continue
        col = v[:, c]
        ok &= col % g == 0
        q = col // g
        coeffs[:, k] = q
        nz = np.flatnonzero(q)
        if nz.size:
            v[nz] = (v[nz] - np.outer(q[nz], h[k])) % n
    return v, coeffs, ok


# ---------------------------------------------------------------------------
# solve / kernel


_SKETCH_EXTRA = 32


def kernel_basis(m: ZnMatrix) -> ZnMatrix:
    """Rows generating ``{x : x @ m = 0}`` (in Howell form)."""
    n = m.modulus
    r, c = m.shape
    if r == 0:
        return ZnMatrix(np.zeros((0, 0), dtype=np.int64), n, cols=0)
    if c > 2 * r + _SKETCH_EXTRA:
        # many more equations than unknowns: solve a random combination of
        # them, then keep the result only if it satisfies all of them
        rng = np.random.default_rng(c * 1_000_003 + r)
        sketch = rng.integers(0, n, size=(c, r + _SKETCH_EXTRA))
        cand = kernel_basis(ZnMatrix(matmul_mod(m.entries, sketch, n), n))
        if cand.rows == 0 or not matmul_mod(cand.entries, m.entries, n).any():
            return cand
    if is_prime(n) and c > 0:
        # nullspace of m^T via RREF
        rows, piv = _rref_prime(m.entries.T, n)
        free = [j for j in range(r) if j not in set(piv)]
        basis = np.zeros((len(free), r), dtype=np.int64)
        for k, f in enumerate(free):
            basis[k, f] = 1
            for i, pc in enumerate(piv):
                basis[k, pc] = (-rows[i, f]) % n
        return howell_form(ZnMatrix(basis, n, cols=r))
    aug = np.concatenate([m.entries, np.eye(r, dtype=np.int64)], axis=1)
    h = howell_form(ZnMatrix(aug, n)).entries
    ker = [row[c:] for row in h if not row[:c].any()]
    return ZnMatrix(np.array(ker, dtype=np.int64).reshape(-1, r), n, cols=r)


class Solver:
    """Repeated solves of ``x @ m = rhs`` against a fixed matrix."""

    def __init__(self, m: ZnMatrix):
        self.matrix = m
        self.modulus = m.modulus
        r, c = m.shape
        self._r, self._c = r, c
        aug = np.concatenate([m.entries, np.eye(r, dtype=np.int64)], axis=1)
        self._h = howell_form(ZnMatrix(aug, m.modulus)).entries
        self._piv = _pivots(self._h)

    def solve_many(self, rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Returns (solutions, solvable mask); unsolvable rows hold zeros."""
        n = self.modulus
        rhs = np.atleast_2d(np.asarray(rhs, dtype=np.int64))
        if rhs.shape[1] != self._c:
            raise ValueError(f"rhs length {rhs.shape[1]} != {self._c}")
        v = np.concatenate([rhs % n, np.zeros((rhs.shape[0], self._r), dtype=np.int64)], axis=1)
        if n == 1:
            return np.zeros((rhs.shape[0], self._r), dtype=np.int64), np.ones(rhs.shape[0], bool)
        v, _, ok = _reduce(v, self._h, self._piv, n, upto=self._c)
        ok &= ~v[:, : self._c].any(axis=1)
        x = (-v[:, self._c :]) % n
        x[~ok] = 0
        return x, ok

    def solve(self, rhs) -> Optional[np.ndarray]:
        x, ok = self.solve_many(np.asarray(rhs).reshape(1, -1))
        if not ok[0]:
            return None
        sol = x[0]
        check = matmul_mod(sol.reshape(1, -1), self.matrix.entries, self.modulus)[0]
        if not np.array_equal(check, np.mod(np.asarray(rhs), self.modulus)):
            raise AssertionError("solve produced a vector that does not re-multiply to rhs")
        return sol


def solve(m: ZnMatrix, rhs: Sequence[int]) -> Optional[np.ndarray]:
    """Some ``x`` with ``x @ m = rhs``, or None when no solution exists."""
    if len(rhs) != m.cols:
        raise ValueError(f"rhs length {len(rhs)} does not match {m.cols} columns")
    return Solver(m).solve(rhs)


def left_certificate(m: ZnMatrix, rhs: Sequence[int]) -> Optional[np.ndarray]:
    """A vector ``y`` with ``m @ y = 0`` and ``rhs . y != 0``, if one exists.

    Such a ``y`` certifies that ``x @ m = rhs`` has no solution.  Only meaningful
    for prime moduli, where it exists iff the system is inconsistent.
    """
    n = m.modulus
    ker = kernel_basis(ZnMatrix(m.entries.T, n)).entries
    rhs = np.asarray(rhs, dtype=np.int64) % n
    best = None
    for y in ker:
        if int(y @ rhs) % n:
            if best is None or np.count_nonzero(y) < np.count_nonzero(best):
                best = y
    return best


# ---------------------------------------------------------------------------
# span tracking


class SpanTracker:
    """Incrementally grown row span over Z/nZ with membership queries.

    The basis is kept in Howell form, so membership does not depend on the
    insertion order.  Single writer.
    """

    def __init__(self, ambient_dim: int, modulus: int):
        self.ambient_dim = ambient_dim
        self.modulus = modulus
        self._prime = is_prime(modulus)
        self._basis = np.zeros((0, ambient_dim), dtype=np.int64)
        self._piv: list[tuple[int, int]] = []

    @property
    def basis(self) -> ZnMatrix:
        return ZnMatrix(self._basis, self.modulus, cols=self.ambient_dim)

    @property
    def rank(self) -> int:
        return self._basis.shape[0]

    def _as_rows(self, v) -> np.ndarray:
        v = np.atleast_2d(np.asarray(v, dtype=np.int64))
        if v.shape[1] != self.ambient_dim:
            raise ValueError(f"vector length {v.shape[1]} != ambient dim {self.ambient_dim}")
        return np.mod(v, self.modulus)

    def _residual(self, v: np.ndarray) -> np.ndarray:
        # prime moduli only: basis is RREF, so one product clears pivot columns
        p = self.modulus
        if not self._piv:
            return v.copy()
        cols = [c for c, _ in self._piv]
        return (v - matmul_mod(v[:, cols], self._basis, p)) % p

    def contains_many(self, v) -> np.ndarray:
        rows = self._as_rows(v)
        if self.modulus == 1:
            return np.ones(rows.shape[0], dtype=bool)
        if self._prime:
            return ~self._residual(rows).any(axis=1)
        res, _, ok = _reduce(rows, self._basis, self._piv, self.modulus)
        return ok & ~res.any(axis=1)

    def contains(self, v) -> bool:
        return bool(self.contains_many(v)[0])

    def insert_many(self, v, chunk: int = 64) -> np.ndarray:
        """Insert rows in order; flags the rows that grew the span."""
        rows = self._as_rows(v)
        grew = np.zeros(rows.shape[0], dtype=bool)
        if self.modulus == 1 or rows.shape[0] == 0:
            return grew
        if not self._prime:
            for i, row in enumerate(rows):
                if not self.contains(row):
                    grew[i] = True
                    stacked = np.concatenate([self._basis, row.reshape(1, -1)])
                    self._set(_howell_generic(stacked, self.modulus))
            return grew
        p = self.modulus
        for lo in range(0, rows.shape[0], chunk):
            res = self._residual(rows[lo : lo + chunk])
            nz = np.flatnonzero(res.any(axis=1))
            if nz.size == 0:
                continue
            # a row grows the span iff it is a pivot column of the transpose
            _, colpiv = _rref_prime(res[nz].T, p)
            grew[lo + nz[colpiv]] = True
            new_rows, new_piv = _rref_prime(res[nz], p)
            self._merge_prime(new_rows, new_piv)
        return grew

    def insert(self, v) -> bool:
        return bool(self.insert_many(v)[0])

    def _merge_prime(self, new_rows: np.ndarray, new_piv: list[int]) -> None:
        p = self.modulus
        old = self._basis
        if old.shape[0]:
            old = (old - matmul_mod(old[:, new_piv], new_rows, p)) % p
        basis = np.concatenate([old, new_rows])
        pivs = [c for c, _ in self._piv] + list(new_piv)
        order = np.argsort(pivs, kind="stable")
        self._basis = basis[order]
        self._piv = [(pivs[i], 1) for i in order]

    def _set(self, h: np.ndarray) -> None:
        self._basis = h.reshape(-1, self.ambient_dim)
        self._piv = _pivots(self._basis)

    def copy(self) -> "SpanTracker":
        t = SpanTracker(self.ambient_dim, self.modulus)
        t._basis = self._basis.copy()
        t._piv = list(self._piv)
        return t


def same_span(a: ZnMatrix, b: ZnMatrix) -> bool:
    _check_modulus(a, b)
    return howell_form(a) == howell_form(b)
