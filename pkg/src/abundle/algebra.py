"""The coefficient algebra: complex functions on a finite grid.

``C^n`` with pointwise operations, complex conjugation as involution and the
sup-norm as its single seminorm is a commutative unital C*-algebra.  An
element is invertible iff it vanishes nowhere, so its spectrum is the set of
its values and positivity means pointwise nonnegative real values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotInvertible, NotPositive

DEFAULT_GRID_SIZE = 8


@dataclass(frozen=True)
class GridSpec:
    size: int = DEFAULT_GRID_SIZE
    label: str = "grid"

    def __post_init__(self):
        if int(self.size) < 1:
            raise ValueError(f"grid size must be positive, got {self.size}")

    def zero(self) -> AlgebraElement:
        return AlgebraElement(np.zeros(self.size, dtype=complex))

    def one(self) -> AlgebraElement:
        return AlgebraElement(np.ones(self.size, dtype=complex))

    def constant(self, z: complex) -> AlgebraElement:
        return AlgebraElement(np.full(self.size, complex(z)))

    def element(self, values) -> AlgebraElement:
        a = AlgebraElement(values)
        if len(a) != self.size:
            raise ValueError(f"expected {self.size} values, got {len(a)}")
        return a

    def random(self, rng: np.random.Generator, scale: float = 1.0) -> AlgebraElement:
        v = rng.standard_normal(self.size) + 1j * rng.standard_normal(self.size)
        return AlgebraElement(scale * v)

    def random_positive(self, rng: np.random.Generator, low: float = 0.0, high: float = 4.0):
        return AlgebraElement(rng.uniform(low, high, self.size).astype(complex))


class AlgebraElement:
    """Immutable element of the grid algebra.

    Supports ``+``, ``-``, ``*`` (with elements or complex scalars) and exposes
    its values through ``__array__`` so numpy functions accept it directly.
    """

    __slots__ = ("_values",)
    __array_priority__ = 100

    def __init__(self, values):
        if isinstance(values, AlgebraElement):
            values = values._values
        arr = np.array(values, dtype=complex).reshape(-1)
        arr.flags.writeable = False
        self._values = arr

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __len__(self):
        return self._values.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._values
        return self._values.astype(dtype)

    def __repr__(self):
        return f"AlgebraElement({np.array2string(self._values, precision=4)})"

    def _coerce(self, other):
        if isinstance(other, AlgebraElement):
            if len(other) != len(self):
                raise ValueError("algebra elements live on grids of different size")
            return other._values
        if np.isscalar(other):
            return complex(other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return AlgebraElement(self._values + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return AlgebraElement(self._values - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return AlgebraElement(o - self._values)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return AlgebraElement(self._values * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not np.isscalar(other):
            return NotImplemented
        return AlgebraElement(self._values / complex(other))

    def __neg__(self):
        return AlgebraElement(-self._values)

    def __eq__(self, other):
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return np.array_equal(self._values, other._values)

    def __hash__(self):
        return hash(self._values.tobytes())

    def star(self) -> AlgebraElement:
        return star(self)

    def seminorm(self) -> float:
        return seminorm(self)

    def spectrum(self) -> frozenset:
        return spectrum(self)


def _values(a) -> np.ndarray:
    return np.asarray(a, dtype=complex)


def star(a) -> AlgebraElement:
    return AlgebraElement(np.conj(_values(a)))


def seminorm(a) -> float:
    """Sup-norm over the grid (and over any trailing axes of an array)."""
    v = _values(a)
    if v.size == 0:
        return 0.0
    return float(np.max(np.abs(v)))


def spectrum(a) -> frozenset:
    return frozenset(complex(z) for z in _values(a))


def is_positive(a, tol: float = 1e-12) -> bool:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    v = _values(a)
    return bool(np.all(np.abs(v.imag) <= tol) and np.all(v.real >= -tol))


def positivity_violation(a) -> float:
    """Smallest tol at which ``is_positive(a, tol)`` holds."""
    v = _values(a)
    return float(max(np.max(np.abs(v.imag)), np.max(-v.real), 0.0))


def sqrt_positive(a, tol: float = 1e-12) -> AlgebraElement:
    if not is_positive(a, tol):
        raise NotPositive(f"element is not positive within tol={tol:g} "
                          f"(violation {positivity_violation(a):.3e})")
    return AlgebraElement(np.sqrt(np.maximum(_values(a).real, 0.0)))


def invert(a, tol: float = 1e-12) -> AlgebraElement:
    v = _values(a)
    small = np.flatnonzero(np.abs(v) <= tol)
    if small.size:
        raise NotInvertible(f"element vanishes (|value| <= {tol:g}) at grid points {small.tolist()}")
    return AlgebraElement(1.0 / v)


def to_pairs(a) -> list[list[float]]:
    """Serialize as a list of ``[re, im]`` pairs."""
    return [[float(z.real), float(z.imag)] for z in _values(a).reshape(-1)]


def from_pairs(pairs) -> AlgebraElement:
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("expected a list of [re, im] pairs")
    return AlgebraElement(arr[:, 0] + 1j * arr[:, 1])
