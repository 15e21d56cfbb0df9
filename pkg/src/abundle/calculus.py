"""First-order calculus for maps between regions of free modules ``A^k``.

Points and directions are complex arrays of shape ``(n, k)`` with the grid
axis first.  Map values are arrays whose leading axis is the grid axis; the
trailing shape is arbitrary (``()`` for A-valued maps, ``(m,)`` for sections,
``(m, m)`` for Gram-valued maps).

The differential along ``h`` is split into its A-linear part ``L`` and its
skew-linear part ``S`` using a second difference along ``i*h``::

    L(h) = (D_h - i D_ih) / 2        S(h) = (D_h + i D_ih) / 2

For a map that is a polynomial in ``z`` and ``conj(z)`` these are the
Wirtinger derivatives ``df/dz . h`` and ``df/dzbar . conj(h)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .algebra import seminorm
from .errors import DomainEscape

DEFAULT_STEP = 1e-4


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Coerce to a complex ``(n, k)`` array; 1-D input is read as ``k = 1``."""
    arr = np.asarray(x, dtype=complex)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError(f"points must have shape (n, k), got {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"expected a point of A^{dim}, got shape {arr.shape}")
    return arr


def pointwise_scale(a, arr) -> np.ndarray:
    """Multiply an array with leading grid axis by an algebra element."""
    arr = np.asarray(arr, dtype=complex)
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return a * arr
    return a.reshape(a.shape[0], *([1] * (arr.ndim - 1))) * arr


@dataclass(frozen=True)
class AMap:
    """A map from an open region of ``A^k`` into ``A``, a module or matrices.

    ``domain`` is an optional membership predicate on points; the
    finite-difference routines refuse stencils that leave it.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    domain_dim: int = 1
    domain: Callable[[np.ndarray], bool] | None = None
    step: float = DEFAULT_STEP
    name: str = ""

    def __call__(self, x) -> np.ndarray:
        return np.asarray(self.fn(as_point(x, self.domain_dim)), dtype=complex)

    def contains(self, x) -> bool:
        return True if self.domain is None else bool(self.domain(as_point(x)))

    def restricted(self, domain) -> AMap:
        return AMap(self.fn, self.domain_dim, domain, self.step, self.name)


def as_amap(f, domain_dim: int = 1) -> AMap:
    if isinstance(f, AMap):
        return f
    return AMap(f, domain_dim)


@dataclass(frozen=True)
class TangentVector:
    """A tangent vector as its pair of linear and skew slots.

    The module structure is twisted on the second slot:
    ``a . (h, k) = (a h, conj(a) k)``.
    """

    h: np.ndarray
    k: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "h", as_point(self.h))
        object.__setattr__(self, "k", as_point(self.k))
        if self.h.shape != self.k.shape:
            raise ValueError("tangent slots must have equal shapes")

    @classmethod
    def diagonal(cls, h) -> TangentVector:
        return cls(h, h)

    def scaled(self, a) -> TangentVector:
        a = np.asarray(a, dtype=complex)
        return TangentVector(pointwise_scale(a, self.h), pointwise_scale(np.conj(a), self.k))

    def __add__(self, other: TangentVector) -> TangentVector:
        return TangentVector(self.h + other.h, self.k + other.k)

    @property
    def is_diagonal(self) -> bool:
        return bool(np.array_equal(self.h, self.k))


class LSSplit(NamedTuple):
    L: np.ndarray
    S: np.ndarray


def _stencil(f: AMap, x, h, step):
    s = f.step if step is None else step
    x = as_point(x, f.domain_dim)
    h = as_point(h, f.domain_dim)
    xp, xm = x + s * h, x - s * h
    if f.domain is not None and not (f.contains(xp) and f.contains(xm)):
        raise DomainEscape(f"stencil x +- {s:g} h leaves the domain of {f.name or 'map'}")
    return xp, xm, s


def directional_derivative(f, x, h, step: float | None = None) -> np.ndarray:
    """Central difference of ``f`` at ``x`` along ``h``."""
    f = as_amap(f)
    xp, xm, s = _stencil(f, x, h, step)
    return (f(xp) - f(xm)) / (2 * s)


def differential_LS(f, x, h, step: float | None = None) -> LSSplit:
    f = as_amap(f)
    h = as_point(h, f.domain_dim)
    d_h = directional_derivative(f, x, h, step)
    d_ih = directional_derivative(f, x, 1j * h, step)
    return LSSplit((d_h - 1j * d_ih) / 2, (d_h + 1j * d_ih) / 2)


def tangent_apply(f, x, v: TangentVector, step: float | None = None) -> np.ndarray:
    """``Lf(x)(v.h) + Sf(x)(v.k)``: the differential applied to a tangent pair."""
    f = as_amap(f)
    if v.is_diagonal:
        # L(h) + S(h) is the plain directional derivative
        return directional_derivative(f, x, v.h, step)
    lin = differential_LS(f, x, v.h, step).L
    skew = differential_LS(f, x, v.k, step).S
    return lin + skew


@dataclass(frozen=True)
class LinearityReport:
    l_residual: float
    s_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(self.l_residual <= self.tol and self.s_residual <= self.tol)


def check_linearity_split(f, x, sample_dirs, sample_scalars, tol: float = 1e-6,
                          step: float | None = None) -> LinearityReport:
    """Measure ``L(a h) - a L(h)`` and ``S(a h) - conj(a) S(h)`` over samples.

    Scalars may be complex numbers or algebra elements.  Maps that are not
    A-differentiable simply produce large residuals.
    """
    f = as_amap(f)
    l_res = s_res = 0.0
    for h in sample_dirs:
        h = as_point(h, f.domain_dim)
        base = differential_LS(f, x, h, step)
        for a in sample_scalars:
            a = np.asarray(a, dtype=complex)
            scaled = differential_LS(f, x, pointwise_scale(a, h), step)
            l_res = max(l_res, seminorm(scaled.L - pointwise_scale(a, base.L)))
            s_res = max(s_res, seminorm(scaled.S - pointwise_scale(np.conj(a), base.S)))
    return LinearityReport(l_res, s_res, tol)


class Polynomial:
    """A polynomial in the coordinates of ``A^k`` and their conjugates.

    ``terms`` is a sequence of ``(coef, zpow, zbarpow)`` with ``zpow`` and
    ``zbarpow`` tuples of length ``k``; evaluation is pointwise on the grid.
    """

    def __init__(self, terms, dim: int = 1):
        self.dim = dim
        cleaned = []
        for coef, zp, zbp in terms:
            zp, zbp = tuple(int(p) for p in zp), tuple(int(p) for p in zbp)
            if len(zp) != dim or len(zbp) != dim:
                raise ValueError("exponent tuples must match the domain dimension")
            if min(zp + zbp, default=0) < 0:
                raise ValueError("exponents must be nonnegative")
            cleaned.append((complex(coef), zp, zbp))
        self.terms = tuple(cleaned)

    @classmethod
    def from_dict(cls, powers: dict[tuple, complex], dim: int = 1):
        """Build from ``{(zpow, zbarpow): coef}``; for ``dim == 1`` ints are accepted."""
        terms = []
        for (zp, zbp), c in powers.items():
            zp = (zp,) if isinstance(zp, int) else zp
            zbp = (zbp,) if isinstance(zbp, int) else zbp
            terms.append((c, zp, zbp))
        return cls(terms, dim)

    def __call__(self, x) -> np.ndarray:
        x = as_point(x, self.dim)
        out = np.zeros(x.shape[0], dtype=complex)
        xc = np.conj(x)
        for coef, zp, zbp in self.terms:
            term = np.full(x.shape[0], coef)
            for l in range(self.dim):
                if zp[l]:
                    term = term * x[:, l] ** zp[l]
                if zbp[l]:
                    term = term * xc[:, l] ** zbp[l]
            out += term
        return out

    def wirtinger(self, l: int = 0, conjugate: bool = False) -> Polynomial:
        """Partial derivative in ``z_l`` (or ``conj(z_l)`` when ``conjugate``)."""
        new = []
        for coef, zp, zbp in self.terms:
            powers = zbp if conjugate else zp
            if powers[l] == 0:
                continue
            bumped = list(powers)
            bumped[l] -= 1
            if conjugate:
                new.append((coef * powers[l], zp, tuple(bumped)))
            else:
                new.append((coef * powers[l], tuple(bumped), zbp))
        return Polynomial(new, self.dim)

    def to_json(self) -> list:
        return [[[c.real, c.imag], list(zp), list(zbp)] for c, zp, zbp in self.terms]

    @classmethod
    def from_json(cls, data, dim: int = 1) -> Polynomial:
        return cls([(complex(c[0], c[1]), zp, zbp) for c, zp, zbp in data], dim)

    def __repr__(self):
        return f"Polynomial({len(self.terms)} terms, dim={self.dim})"


def symbolic_LS(poly: Polynomial, x, h) -> LSSplit:
    """Exact L/S split of a polynomial map along ``h`` via Wirtinger derivatives."""
    x = as_point(x, poly.dim)
    h = as_point(h, poly.dim)
    lin = sum(poly.wirtinger(l)(x) * h[:, l] for l in range(poly.dim))
    skew = sum(poly.wirtinger(l, True)(x) * np.conj(h[:, l]) for l in range(poly.dim))
    return LSSplit(np.asarray(lin, complex), np.asarray(skew, complex))


def stack_maps(components, domain_dim: int = 1) -> Callable[[np.ndarray], np.ndarray]:
    """Combine A-valued component maps into one map with values in ``A^m``."""
    comps = tuple(components)

    def fn(x):
        return np.stack([np.asarray(c(x), dtype=complex) for c in comps], axis=-1)

    return fn


def unit_directions(n: int, dim: int) -> list[np.ndarray]:
    """The canonical basis of ``A^dim`` as ``(n, dim)`` arrays."""
    out = []
    for l in range(dim):
        e = np.zeros((n, dim), dtype=complex)
        e[:, l] = 1.0
        out.append(e)
    return out


def random_directions(rng: np.random.Generator, n: int, dim: int, count: int,
                      scale: float = 1.0) -> list[np.ndarray]:
    return [scale * (rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim)))
            / np.sqrt(2) for _ in range(count)]
