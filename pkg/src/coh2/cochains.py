"""Inhomogeneous bar-resolution cochains in degrees 0 to 3.

A q-cochain stores one module element per q-tuple of group elements; the
tuple ``(g1, ..., gq)`` sits at row ``g1*|G|^(q-1) + ... + gq``.  Flattened
coefficient vectors are row-major (tuple index, then coordinate), which is the
ambient space used by every span and solve.
"""

from __future__ import annotations

from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .groups import FiniteGroup
from .linalg import Solver, SpanTracker, ZnMatrix, howell_form, is_prime, kernel_basis
from .modules import HModule

DEFAULT_MAX_AMBIENT_DIM = 50_000
DEFAULT_MAX_H2_DIM = 4_096


class CochainError(ValueError):
    pass


class Cochain:
    """A degree-``q`` cochain of ``module.group`` with values in ``module``."""

    __slots__ = ("degree", "module", "values")

    def __init__(self, degree: int, module: HModule, values):
        if degree not in (0, 1, 2, 3):
            raise CochainError("degree must be 0..3")
        N, k = module.group.order, module.rank
        vals = np.mod(np.asarray(values, dtype=np.int64), module.modulus).reshape(N**degree, k)
        vals.setflags(write=False)
        self.degree = degree
        self.module = module
        self.values = vals

    @property
    def group(self) -> FiniteGroup:
        return self.module.group

    @property
    def flat(self) -> np.ndarray:
        return self.values.ravel()

    @classmethod
    def zero(cls, degree: int, module: HModule) -> "Cochain":
        return cls(degree, module, np.zeros((module.group.order**degree, module.rank), dtype=np.int64))

    @classmethod
    def random(cls, degree: int, module: HModule, rng: np.random.Generator) -> "Cochain":
        shape = (module.group.order**degree, module.rank)
        return cls(degree, module, rng.integers(0, module.modulus, size=shape))

    @classmethod
    def from_function(cls, degree: int, module: HModule, fn: Callable) -> "Cochain":
        N = module.group.order
        rows = []
        for idx in range(N**degree):
            args = [(idx // N ** (degree - 1 - j)) % N for j in range(degree)]
            rows.append(np.asarray(fn(*args), dtype=np.int64).reshape(module.rank))
        return cls(degree, module, np.array(rows).reshape(N**degree, module.rank))

    def __call__(self, *elements: int) -> np.ndarray:
        if len(elements) != self.degree:
            raise CochainError(f"expected {self.degree} arguments")
        N = self.group.order
        idx = 0
        for g in elements:
            idx = idx * N + int(g)
        return self.values[idx]

    def _check_compatible(self, other: "Cochain") -> None:
        if other.degree != self.degree or other.group is not self.group or other.module.modulus != self.module.modulus \
                or other.module.rank != self.module.rank:
            raise CochainError("cochains live in different spaces")

    def __add__(self, other: "Cochain") -> "Cochain":
        self._check_compatible(other)
        return Cochain(self.degree, self.module, self.values + other.values)

    def __sub__(self, other: "Cochain") -> "Cochain":
        self._check_compatible(other)
        return Cochain(self.degree, self.module, self.values - other.values)

    def __neg__(self) -> "Cochain":
        return Cochain(self.degree, self.module, -self.values)

    def __rmul__(self, k: int) -> "Cochain":
        return Cochain(self.degree, self.module, int(k) * self.values)

    def __eq__(self, other) -> bool:
        return isinstance(other, Cochain) and other.degree == self.degree and other.group is self.group \
            and np.array_equal(other.values, self.values)

    def __hash__(self):
        return hash((self.degree, id(self.group), self.values.tobytes()))

    def is_zero(self) -> bool:
        return not self.values.any()

    def is_normalized(self) -> bool:
        if self.degree != 2:
            raise CochainError("normalization is checked for 2-cochains")
        N = self.group.order
        v = self.values.reshape(N, N, -1)
        return not v[0].any() and not v[:, 0].any()

    def __repr__(self) -> str:
        return f"Cochain(deg {self.degree}, {self.module!r})"


def _acted(module: HModule, g: int, vals: np.ndarray) -> np.ndarray:
    return vals @ module.action[g].T


def differential(c: Cochain) -> Cochain:
    """The coboundary ``d c`` (degree ``q+1``)."""
    M, G = c.module, c.group
    N, n, k = G.order, M.modulus, M.rank
    q = c.degree
    v = c.values
    if q == 0:
        a = v[0]
        out = np.einsum("gij,j->gi", M.action, a) - a
        return Cochain(1, M, out)
    if q == 1:
        # (dx)(g,h) = g.x(h) - x(gh) + x(g)
        gx = np.einsum("gij,hj->ghi", M.action, v)
        out = gx - v[G.mult.astype(np.int64)] + v[:, None, :]
        return Cochain(2, M, out.reshape(N * N, k))
    if q == 2:
        out = np.empty((N, N * N, k), dtype=np.int64)
        for g in range(N):
            out[g] = _d2_block(c, g)
        return Cochain(3, M, out.reshape(N**3, k))
    raise CochainError("no differential out of degree 3")


def _d2_block(c: Cochain, g: int) -> np.ndarray:
    """``(dc)(g, h, l)`` for all ``h, l`` (shape (N*N, k))."""
    M, G = c.module, c.group
    N = G.order
    v = c.values.reshape(N, N, -1)
    mult = G.mult.astype(np.int64)
    gh = mult[g]                          # gh[h]
    term1 = _acted(M, g, c.values).reshape(N, N, -1)
    term2 = v[gh]                         # c(gh, l)
    term3 = v[g][mult]                    # c(g, hl)
    term4 = v[g][:, None, :]              # c(g, h)
    return ((term1 - term2 + term3 - term4) % M.modulus).reshape(N * N, -1)


def is_cocycle(c: Cochain) -> bool:
    """Pointwise test of ``dc = 0`` (the full C^q -> C^q+1 matrix is never built)."""
    if c.degree == 3:
        raise CochainError("degree-3 cocycle test needs C^4")
    if c.degree < 2:
        return not differential(c).values.any()
    for g in range(c.group.order):
        if _d2_block(c, g).any():
            return False
    return True


def d1_matrix(module: HModule) -> np.ndarray:
    """Matrix of ``d: C^1 -> C^2`` in row convention (``x.flat @ D = (dx).flat``)."""
    G = module.group
    N, k = G.order, module.rank
    D = np.zeros((N, k, N, N, k), dtype=np.int64)
    g = np.arange(N)
    # g.x(h): D[h, j, g, h, i] += act[g][i, j]
    for h in range(N):
        D[h, :, :, h, :] += np.transpose(module.action, (2, 0, 1))
    mult = G.mult.astype(np.int64)
    eye = np.eye(k, dtype=np.int64)
    for gi in range(N):
        for h in range(N):
            D[mult[gi, h], :, gi, h, :] -= eye
        D[gi, :, gi, :, :] += eye[:, None, :]
    return np.mod(D.reshape(N * k, N * N * k), module.modulus)


def d0_matrix(module: HModule) -> np.ndarray:
    N, k = module.group.order, module.rank
    D = np.transpose(module.action, (2, 0, 1)) - np.eye(k, dtype=np.int64)[:, None, :]
    return np.mod(D.reshape(k, N * k), module.modulus)


def d2_matrix(module: HModule, max_ambient_dim: int = DEFAULT_MAX_AMBIENT_DIM) -> np.ndarray:
    G = module.group
    N, k = G.order, module.rank
    if N**3 * k > max_ambient_dim:
        raise CochainError(f"C^3 has dimension {N ** 3 * k} > cap {max_ambient_dim} (--max-ambient-dim)")
    rows = []
    basis = np.eye(N * N * k, dtype=np.int64)
    for r in range(N * N * k):
        rows.append(differential(Cochain(2, module, basis[r])).flat)
    return np.array(rows, dtype=np.int64)


class CohomologyContext:
    """Cached coboundary data for one (group, module) pair."""

    def __init__(self, module: HModule, max_ambient_dim: int = DEFAULT_MAX_AMBIENT_DIM):
        self.module = module
        self.group = module.group
        N, k = self.group.order, module.rank
        if N * N * k > max_ambient_dim:
            raise CochainError(f"C^2 has dimension {N * N * k} > cap {max_ambient_dim} (--max-ambient-dim)")
        self.max_ambient_dim = max_ambient_dim

    @property
    def modulus(self) -> int:
        return self.module.modulus

    @property
    def c2_dim(self) -> int:
        return self.group.order ** 2 * self.module.rank

    @cached_property
    def d1(self) -> ZnMatrix:
        return ZnMatrix(d1_matrix(self.module), self.modulus)

    @cached_property
    def _solver(self) -> Solver:
        return Solver(self.d1)

    @cached_property
    def coboundaries(self) -> SpanTracker:
        t = SpanTracker(self.c2_dim, self.modulus)
        t.insert_many(self.d1.entries)
        return t

    def is_coboundary(self, c: Cochain) -> bool:
        self._check(c)
        return self.coboundaries.contains(c.flat)

    def cohomologous(self, c1: Cochain, c2: Cochain) -> bool:
        return self.is_coboundary(c1 - c2)

    def coboundary_preimage(self, c: Cochain, check: bool = True) -> Optional[Cochain]:
        """Some 1-cochain ``x`` with ``dx = c``, or None when ``c`` is not a coboundary."""
        self._check(c)
        if check and not is_cocycle(c):
            raise CochainError("input is not a cocycle")
        x = self._solver.solve(c.flat)
        if x is None:
            return None
        out = Cochain(1, self.module, x)
        if differential(out) != c:
            raise AssertionError("preimage does not re-differentiate to the input")
        return out

    def _check(self, c: Cochain) -> None:
        if c.degree != 2 or c.group is not self.group or c.module.rank != self.module.rank \
                or c.module.modulus != self.modulus:
            raise CochainError("cochain does not belong to this context")

    def cocycle_basis(self) -> ZnMatrix:
        """Rows generating Z^2 (guarded: builds the C^2 -> C^3 matrix)."""
        return kernel_basis(ZnMatrix(d2_matrix(self.module, self.max_ambient_dim), self.modulus))


def coboundary_preimage(c: Cochain, ctx: Optional[CohomologyContext] = None) -> Optional[Cochain]:
    ctx = ctx or CohomologyContext(c.module)
    return ctx.coboundary_preimage(c)


def _span_size(rows: np.ndarray, n: int, d: int) -> int:
    return ZnMatrix(rows.reshape(-1, d), n, cols=d).span_size()


def _factorize(n: int) -> dict[int, int]:
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def invariant_factors_from_sizes(size_of_multiple: Callable[[int], int], modulus: int) -> list[int]:
    """Invariant factors of a finite Z/n-module from the sizes ``|m*M|``.

    For each prime power ``q^j``, ``log_q |q^j M| / |q^(j+1) M|`` counts the
    cyclic q-primary summands of order greater than ``q^j``.
    """
    primary: dict[int, list[int]] = {}
    for q, e in _factorize(modulus).items():
        sizes = [size_of_multiple(q**j) for j in range(e + 1)]
        counts = []
        for j in range(e):
            ratio = sizes[j] // sizes[j + 1]
            c = 0
            while ratio > 1:
                ratio //= q
                c += 1
            counts.append(c)
        # counts[j] = number of summands of order > q^j
        exps = []
        for j in range(e):
            nxt = counts[j + 1] if j + 1 < e else 0
            exps += [j + 1] * (counts[j] - nxt)
        primary[q] = sorted(exps, reverse=True)
    width = max((len(v) for v in primary.values()), default=0)
    factors = [1] * width
    for q, exps in primary.items():
        for i, x in enumerate(exps):
            factors[i] *= q**x
    return sorted(f for f in factors if f > 1)


def h2_structure(ctx: CohomologyContext, max_h2_dim: int = DEFAULT_MAX_H2_DIM) -> list[int]:
    """Invariant factors of ``H^2(G, A) = Z^2 / B^2`` (empty list = trivial group)."""
    if ctx.c2_dim > max_h2_dim:
        raise CochainError(f"|G|^2 * rank = {ctx.c2_dim} exceeds the h2 cap {max_h2_dim}")
    n, d = ctx.modulus, ctx.c2_dim
    Z = ctx.cocycle_basis().entries
    B = ctx.d1.entries
    size_B = _span_size(B, n, d)

    def size(m: int) -> int:
        return _span_size(np.concatenate([(m * Z) % n, B]), n, d) // size_B

    return invariant_factors_from_sizes(size, n)
