"""Finitely generated projective modules over the grid algebra.

A module is the range of a hermitian idempotent ``p`` in ``M_m(A)``; at each
grid point ``p(t)`` is an orthogonal projection of ``C^m`` whose rank may vary
with ``t``.  Matrices over ``A`` are stored as ``(n, rows, cols)`` arrays and
vectors over ``A`` as ``(n, m)`` arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import AlgebraElement, seminorm
from .calculus import pointwise_scale
from .errors import IllDefinedMap, MalformedIdempotent, ModuleMismatch, NotMember

IDEMPOTENT_TOL = 1e-12
MEMBERSHIP_TOL = 1e-10


def adjoint(arr) -> np.ndarray:
    """Pointwise conjugate transpose of a stack of matrices."""
    return np.conj(np.swapaxes(arr, -1, -2))


def eye(n: int, m: int) -> np.ndarray:
    return np.broadcast_to(np.eye(m, dtype=complex), (n, m, m)).copy()


def apply(mat, vec) -> np.ndarray:
    """Pointwise matrix-vector product of ``(n, r, c)`` and ``(n, c)``."""
    return np.einsum("nij,nj->ni", mat, vec)


class MatrixOverA:
    __slots__ = ("_entries",)
    __array_priority__ = 100

    def __init__(self, entries):
        if isinstance(entries, MatrixOverA):
            entries = entries._entries
        arr = np.array(entries, dtype=complex)
        if arr.ndim != 3:
            raise ValueError(f"matrix over A needs shape (n, rows, cols), got {arr.shape}")
        arr.flags.writeable = False
        self._entries = arr

    @classmethod
    def identity(cls, n: int, m: int) -> MatrixOverA:
        return cls(eye(n, m))

    @classmethod
    def zeros(cls, n: int, rows: int, cols: int | None = None) -> MatrixOverA:
        return cls(np.zeros((n, rows, rows if cols is None else cols), dtype=complex))

    @classmethod
    def diag(cls, elements) -> MatrixOverA:
        vals = np.stack([np.asarray(e, dtype=complex) for e in elements], axis=-1)
        n, m = vals.shape
        out = np.zeros((n, m, m), dtype=complex)
        idx = np.arange(m)
        out[:, idx, idx] = vals
        return cls(out)

    @property
    def entries(self) -> np.ndarray:
        return self._entries

    @property
    def shape(self) -> tuple[int, int]:
        return self._entries.shape[1], self._entries.shape[2]

    @property
    def grid_size(self) -> int:
        return self._entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self._entries if dtype is None else self._entries.astype(dtype)

    def __repr__(self):
        r, c = self.shape
        return f"MatrixOverA({r}x{c} over grid of {self.grid_size})"

    def at(self, t: int) -> np.ndarray:
        return self._entries[t]

    def entry(self, i: int, j: int) -> AlgebraElement:
        return AlgebraElement(self._entries[:, i, j])

    def star(self) -> MatrixOverA:
        return MatrixOverA(adjoint(self._entries))

    def seminorm(self) -> float:
        return seminorm(self._entries)

    def __matmul__(self, other):
        if isinstance(other, MatrixOverA):
            return MatrixOverA(self._entries @ other._entries)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, MatrixOverA):
            return MatrixOverA(self._entries + other._entries)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, MatrixOverA):
            return MatrixOverA(self._entries - other._entries)
        return NotImplemented

    def __neg__(self):
        return MatrixOverA(-self._entries)

    def __mul__(self, a):
        # scalar or algebra element acting entrywise
        if isinstance(a, (AlgebraElement, np.ndarray)) or np.isscalar(a):
            return MatrixOverA(pointwise_scale(a, self._entries))
        return NotImplemented

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, MatrixOverA):
            return NotImplemented
        return np.array_equal(self._entries, other._entries)

    __hash__ = None


def block_diag(a: MatrixOverA, b: MatrixOverA) -> MatrixOverA:
    n = a.grid_size
    (r1, c1), (r2, c2) = a.shape, b.shape
    out = np.zeros((n, r1 + r2, c1 + c2), dtype=complex)
    out[:, :r1, :c1] = a.entries
    out[:, r1:, c1:] = b.entries
    return MatrixOverA(out)


class PModule:
    """The range of a hermitian idempotent ``p`` in ``M_m(A)``."""

    __slots__ = ("idempotent",)

    def __init__(self, idempotent, check: bool = True):
        p = MatrixOverA(idempotent)
        r, c = p.shape
        if r != c:
            raise MalformedIdempotent(f"idempotent must be square, got {r}x{c}")
        if check:
            e = p.entries
            if seminorm(e @ e - e) > IDEMPOTENT_TOL:
                raise MalformedIdempotent(f"p^2 != p (residual {seminorm(e @ e - e):.3e})")
            if seminorm(adjoint(e) - e) > IDEMPOTENT_TOL:
                raise MalformedIdempotent(f"p* != p (residual {seminorm(adjoint(e) - e):.3e})")
        self.idempotent = p

    @classmethod
    def free(cls, n: int, m: int) -> PModule:
        return cls(MatrixOverA.identity(n, m))

    @classmethod
    def zero(cls, n: int, m: int) -> PModule:
        return cls(MatrixOverA.zeros(n, m))

    @property
    def p(self) -> np.ndarray:
        return self.idempotent.entries

    @property
    def ambient_rank(self) -> int:
        return self.idempotent.shape[0]

    @property
    def grid_size(self) -> int:
        return self.idempotent.grid_size

    @property
    def is_free_ambient(self) -> bool:
        """True when ``p`` is the identity, i.e. the module is all of ``A^m``."""
        return bool(np.array_equal(self.p, eye(self.grid_size, self.ambient_rank)))

    def __eq__(self, other):
        if not isinstance(other, PModule):
            return NotImplemented
        return self.idempotent == other.idempotent

    __hash__ = None

    def __repr__(self):
        return f"PModule(ambient_rank={self.ambient_rank}, ranks={pointwise_rank(self).tolist()})"

    def contains(self, coords, tol: float = MEMBERSHIP_TOL) -> bool:
        coords = np.asarray(coords, dtype=complex)
        return seminorm(apply(self.p, coords) - coords) <= tol

    def element(self, coords) -> ModuleElement:
        return ModuleElement(self, coords)

    def project_coords(self, raw) -> np.ndarray:
        return apply(self.p, np.asarray(raw, dtype=complex))

    def random_element(self, rng: np.random.Generator, scale: float = 1.0) -> ModuleElement:
        n, m = self.grid_size, self.ambient_rank
        raw = scale * (rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m)))
        return project(self, raw)

    def basis_of_range(self, t: int) -> np.ndarray:
        """Orthonormal columns spanning the range of ``p(t)``."""
        w, v = np.linalg.eigh(self.p[t])
        return v[:, w > 0.5]


@dataclass(frozen=True)
class ModuleElement:
    module: PModule
    coords: np.ndarray

    # let ``ndarray * element`` reach __rmul__ instead of broadcasting
    __array_ufunc__ = None

    def __post_init__(self):
        c = np.array(self.coords, dtype=complex)
        if c.shape != (self.module.grid_size, self.module.ambient_rank):
            raise ValueError(f"coords of shape {c.shape} do not fit {self.module!r}")
        if not self.module.contains(c):
            raise NotMember("coordinates are not in the range of the idempotent")
        c.flags.writeable = False
        object.__setattr__(self, "coords", c)

    def _same(self, other: ModuleElement):
        if other.module is not self.module and other.module != self.module:
            raise ModuleMismatch("elements belong to different modules")

    def __add__(self, other: ModuleElement) -> ModuleElement:
        self._same(other)
        return ModuleElement(self.module, self.coords + other.coords)

    def __sub__(self, other: ModuleElement) -> ModuleElement:
        self._same(other)
        return ModuleElement(self.module, self.coords - other.coords)

    def __neg__(self):
        return ModuleElement(self.module, -self.coords)

    def __rmul__(self, a):
        return ModuleElement(self.module, pointwise_scale(np.asarray(a, dtype=complex), self.coords))

    def component(self, i: int) -> AlgebraElement:
        return AlgebraElement(self.coords[:, i])


@dataclass(frozen=True)
class ModuleMap:
    """An A-linear map between modules, given by a matrix ``G = p_t G p_s``."""

    source: PModule
    target: PModule
    matrix: MatrixOverA

    def __post_init__(self):
        g = MatrixOverA(self.matrix)
        object.__setattr__(self, "matrix", g)
        if g.shape != (self.target.ambient_rank, self.source.ambient_rank):
            raise ValueError(f"matrix shape {g.shape} does not match the modules")
        e = g.entries
        res = seminorm(self.target.p @ e @ self.source.p - e)
        if res > MEMBERSHIP_TOL:
            raise IllDefinedMap(f"matrix does not respect the module ranges (residual {res:.3e})")

    @classmethod
    def identity(cls, module: PModule) -> ModuleMap:
        return cls(module, module, module.idempotent)

    @classmethod
    def compressed(cls, source: PModule, target: PModule, matrix) -> ModuleMap:
        """Build from any ambient matrix by sandwiching with the idempotents."""
        e = np.asarray(matrix, dtype=complex)
        return cls(source, target, MatrixOverA(target.p @ e @ source.p))

    def __call__(self, x: ModuleElement) -> ModuleElement:
        if x.module != self.source:
            raise ModuleMismatch("argument is not in the source module")
        return ModuleElement(self.target, apply(self.matrix.entries, x.coords))

    def __matmul__(self, other: ModuleMap) -> ModuleMap:
        if other.target != self.source:
            raise ModuleMismatch("cannot compose: target and source differ")
        return ModuleMap(other.source, self.target, self.matrix @ other.matrix)


def project(module: PModule, raw) -> ModuleElement:
    raw = np.asarray(raw, dtype=complex)
    if raw.shape != (module.grid_size, module.ambient_rank):
        raise ValueError(f"raw vector of shape {raw.shape} does not fit {module!r}")
    return ModuleElement(module, module.project_coords(raw))


def complement(module: PModule) -> PModule:
    n, m = module.grid_size, module.ambient_rank
    return PModule(eye(n, m) - module.p)


def pointwise_rank(module: PModule) -> np.ndarray:
    tr = np.trace(module.p, axis1=1, axis2=2).real
    rounded = np.rint(tr)
    bad = np.flatnonzero(np.abs(tr - rounded) > 0.1)
    if bad.size:
        raise MalformedIdempotent(f"trace of p is not near an integer at grid points {bad.tolist()}")
    return rounded.astype(int)


def mixed_rank_idempotent(n: int) -> np.ndarray:
    """``diag(1, 0)`` on the first half of the grid and the identity on the rest."""
    p = eye(n, 2)
    p[: n // 2, 1, 1] = 0.0
    return p


@dataclass(frozen=True)
class WhitneySum:
    """``M1 + M2`` with canonical injections and projections."""

    module: PModule
    inject1: ModuleMap
    project1: ModuleMap
    inject2: ModuleMap
    project2: ModuleMap


def whitney_sum(first: PModule, second: PModule) -> WhitneySum:
    if first.grid_size != second.grid_size:
        raise ModuleMismatch("summands live on grids of different size")
    n, m1, m2 = first.grid_size, first.ambient_rank, second.ambient_rank
    total = PModule(block_diag(first.idempotent, second.idempotent))

    i1 = np.zeros((n, m1 + m2, m1), dtype=complex)
    i1[:, :m1, :] = first.p
    i2 = np.zeros((n, m1 + m2, m2), dtype=complex)
    i2[:, m1:, :] = second.p
    inj1 = ModuleMap(first, total, MatrixOverA(i1))
    inj2 = ModuleMap(second, total, MatrixOverA(i2))
    pr1 = ModuleMap(total, first, MatrixOverA(adjoint(i1)))
    pr2 = ModuleMap(total, second, MatrixOverA(adjoint(i2)))
    return WhitneySum(total, inj1, pr1, inj2, pr2)


def matrix_to_json(mat) -> list:
    """Nested ``[grid][row][col] -> [re, im]`` lists."""
    e = np.asarray(mat, dtype=complex)
    return np.stack([e.real, e.imag], axis=-1).tolist()


def matrix_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 4 or arr.shape[-1] != 2:
        raise ValueError("expected nested [grid][row][col][re, im] arrays")
    return arr[..., 0] + 1j * arr[..., 1]
