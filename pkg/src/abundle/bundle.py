"""A-bundles over open regions of ``A^k``.

Base charts are identity charts on coordinate-proximity sets
``U = {x : |x(t) - c(t)| < r' for some grid point t}``; all nontrivial
structure lives in the bundle cocycle.  Chart representatives follow
``xi_i(x) = g_ij(x) xi_j(x)`` and transitions are stored compressed to the
fiber, so ``g_ii`` is the idempotent ``p``.

Verification runs on a finite sample plan stored with the base region.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Callable, Sequence

import numpy as np

from .algebra import positivity_violation, seminorm
from .calculus import AMap, TangentVector, as_point, pointwise_scale, unit_directions
from .checks import Check
from .errors import ChartMismatch, FrameUnavailable, NormalizerNotInvertible, NotReduced
from .hermitian import (
    HermitianForm,
    is_form_unitary,
    pad_gram,
    pair,
    unitarity_residual,
    verify_axioms,
)
from .pmodule import MatrixOverA, PModule, adjoint, apply, eye

COVER_DELTA = 1e-6
CONSISTENCY_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class Chart:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))

    def distances(self, x) -> np.ndarray:
        d = as_point(x) - self.center
        return np.sqrt(np.sum(np.abs(d) ** 2, axis=1))

    def contains(self, x) -> bool:
        return bool(np.any(self.distances(x) < self.radius))

    def predicate(self) -> Callable[[np.ndarray], bool]:
        return self.contains


@dataclass(frozen=True, eq=False)
class SamplePlan:
    points: np.ndarray
    membership: np.ndarray
    kinds: tuple
    seed: int

    def __len__(self):
        return self.points.shape[0]

    def in_chart(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.membership[:, i])

    def outside_chart(self, i: int) -> np.ndarray:
        return np.flatnonzero(~self.membership[:, i])

    def overlap(self, i: int, j: int) -> np.ndarray:
        return np.flatnonzero(self.membership[:, i] & self.membership[:, j])

    def subset(self, count: int, seed: int) -> np.ndarray:
        """A deterministic sorted selection of sample indices."""
        count = min(count, len(self))
        rng = np.random.default_rng(seed)
        return np.sort(rng.choice(len(self), size=count, replace=False))


def _ball_sample(rng, center: np.ndarray, radius: float) -> np.ndarray:
    k = center.shape[0]
    g = rng.standard_normal(k) + 1j * rng.standard_normal(k)
    g /= np.linalg.norm(g)
    return center + radius * rng.uniform() ** (1.0 / (2 * k)) * g


def _exclusive_sample(rng, charts, i, t, radius, tries=200):
    for _ in range(tries):
        z = _ball_sample(rng, charts[i].center[t], radius)
        if all(np.linalg.norm(z - c.center[t]) >= c.radius for j, c in enumerate(charts) if j != i):
            return z
    return None


def build_sample_plan(charts: Sequence[Chart], sample_radius: float, seed: int,
                      per_chart: int = 64, per_overlap: int = 32) -> SamplePlan:
    """Seeded probe points: per chart (half of them outside every other chart
    where possible) plus points in each pairwise overlap."""
    rng = np.random.default_rng(seed)
    n, k = charts[0].center.shape
    points, kinds = [], []
    for i in range(len(charts)):
        for s in range(per_chart):
            exclusive = len(charts) > 1 and s >= per_chart // 2
            x = np.empty((n, k), dtype=complex)
            for t in range(n):
                z = _exclusive_sample(rng, charts, i, t, sample_radius) if exclusive else None
                x[t] = _ball_sample(rng, charts[i].center[t], sample_radius) if z is None else z
            points.append(x)
            kinds.append(f"chart{i}-only" if exclusive else f"chart{i}")
    for i, j in combinations(range(len(charts)), 2):
        made = 0
        for _ in range(per_overlap * 50):
            if made == per_overlap:
                break
            x = np.empty((n, k), dtype=complex)
            for t in range(n):
                c = charts[i] if rng.uniform() < 0.5 else charts[j]
                x[t] = _ball_sample(rng, c.center[t], sample_radius)
            if charts[i].contains(x) and charts[j].contains(x):
                points.append(x)
                kinds.append(f"overlap{i}{j}")
                made += 1
    pts = np.array(points)
    member = np.array([[c.contains(x) for c in charts] for x in pts], dtype=bool)
    return SamplePlan(pts, member, tuple(kinds), seed)


@dataclass(frozen=True, eq=False)
class BaseRegion:
    """Union of chart sets in ``A^k`` with its sample plan."""

    dim: int
    charts: tuple
    sample_plan: SamplePlan

    def __post_init__(self):
        object.__setattr__(self, "charts", tuple(self.charts))
        plan = self.sample_plan
        if not np.all(plan.membership.any(axis=1)):
            raise ValueError("some sample points lie in no chart")
        recomputed = np.array([[c.contains(x) for c in self.charts] for x in plan.points])
        if not np.array_equal(recomputed, plan.membership):
            raise ValueError("sample membership flags disagree with the chart predicates")

    @classmethod
    def build(cls, charts, sample_radius: float, seed: int, per_chart: int = 64,
              per_overlap: int = 32) -> BaseRegion:
        plan = build_sample_plan(charts, sample_radius, seed, per_chart, per_overlap)
        return cls(charts[0].center.shape[1], tuple(charts), plan)

    @property
    def grid_size(self) -> int:
        return self.charts[0].center.shape[0]

    def contains(self, x) -> bool:
        return any(c.contains(x) for c in self.charts)

    def charts_at(self, x) -> list[int]:
        return [i for i, c in enumerate(self.charts) if c.contains(x)]


def bump_profile(s: np.ndarray, radius: float) -> np.ndarray:
    """``exp(1 / (s - r^2))`` for ``s < r^2`` and 0 beyond; smooth and flat at the edge."""
    s = np.asarray(s, dtype=float)
    r2 = radius * radius
    inside = s < r2
    out = np.zeros_like(s)
    out[inside] = np.exp(1.0 / (s[inside] - r2))
    return out


class PartitionOfUnity:
    """Pointwise-normalized bumps ``psi_i = phi_i / sum_j phi_j``."""

    def __init__(self, charts: Sequence[Chart], bump_radius: float, delta: float = COVER_DELTA):
        self.charts = tuple(charts)
        self.bump_radius = float(bump_radius)
        self.delta = delta

    def bumps(self, x) -> np.ndarray:
        return np.array([bump_profile(c.distances(x) ** 2, self.bump_radius) for c in self.charts])

    def weights(self, x, point_index: int | None = None) -> np.ndarray:
        phi = self.bumps(x)
        weak = np.flatnonzero(phi.max(axis=0) < self.delta)
        if weak.size:
            raise NormalizerNotInvertible(point_index, weak.tolist())
        return (phi / phi.sum(axis=0)).astype(complex)

    def weight(self, i: int) -> AMap:
        return AMap(lambda x: self.weights(x)[i], self.charts[0].center.shape[1], name=f"psi_{i}")


def make_bump_partition(base: BaseRegion, bump_radius: float, charts=None) -> PartitionOfUnity:
    """Bump partition subordinate to the charts of ``base``.

    Raises :class:`NormalizerNotInvertible` if some sample point is not
    covered, at some grid point, by a bump of height at least ``1e-6``.
    """
    charts = base.charts if charts is None else tuple(charts)
    for c in charts:
        if not bump_radius < c.radius:
            raise ValueError(f"bump radius {bump_radius} must be below the chart radius {c.radius}")
    part = PartitionOfUnity(charts, bump_radius)
    for idx, x in enumerate(base.sample_plan.points):
        part.weights(x, idx)
    return part


def verify_partition(partition: PartitionOfUnity, base: BaseRegion, tol: float = 1e-12) -> list[Check]:
    plan = base.sample_plan
    sums, pos, leaks = [], [], []
    violations = 0
    for idx, x in enumerate(plan.points):
        w = partition.weights(x, idx)
        sums.append(seminorm(w.sum(axis=0) - 1.0))
        pos.append(max(positivity_violation(wi) for wi in w))
        for i in np.flatnonzero(~plan.membership[idx]):
            leak = seminorm(w[i])
            leaks.append(leak)
            if leak > tol:
                violations += 1
    tested = len(leaks)
    return [
        Check.upper("sum", sums, tol, anchor="partition of unity: weights sum to 1"),
        Check.upper("positivity", pos, tol, anchor="partition of unity: weights positive"),
        Check.upper("support", [violations], 0, anchor="partition of unity: supp(psi_i) in U_i",
                    detail=f"{tested} (point, chart) exclusions tested; "
                           f"max leaked weight {max(leaks, default=0.0):.3e}; "
                           "support checked on the finite sample plan"),
    ]


class GaugeCocycle:
    """Transitions ``g_ij = G_i G_j^{-1}`` from chartwise gauge maps.

    Cocycle identities hold by construction; ``g_ii`` is exactly the identity.
    """

    def __init__(self, gauges: Sequence[Callable[[np.ndarray], np.ndarray]], descriptor=None):
        self.gauges = tuple(gauges)
        self.descriptor = descriptor or {"generator": "custom"}

    @property
    def n_charts(self) -> int:
        return len(self.gauges)

    def __call__(self, i: int, j: int, x) -> np.ndarray:
        gi = self.gauges[i](x)
        if i == j:
            return eye(gi.shape[0], gi.shape[1])
        return gi @ np.linalg.inv(self.gauges[j](x))


def _diag(vals: np.ndarray) -> np.ndarray:
    n, m = vals.shape
    out = np.zeros((n, m, m), dtype=complex)
    out[:, np.arange(m), np.arange(m)] = vals
    return out


class DiagonalGaugeCocycle(GaugeCocycle):
    """Gauges given by their diagonals ``x -> (n, m)``; avoids matrix inverses."""

    def __init__(self, diagonals, descriptor=None):
        self.diagonals = tuple(diagonals)
        super().__init__([(lambda d: lambda x: _diag(d(x)))(d) for d in self.diagonals], descriptor)

    def __call__(self, i: int, j: int, x) -> np.ndarray:
        di = self.diagonals[i](x)
        if i == j:
            return eye(di.shape[0], di.shape[1])
        return _diag(di / self.diagonals[j](x))


def _real_coordinate(x) -> np.ndarray:
    return np.sum(as_point(x).real, axis=1)


def trivial_cocycle(n_charts: int, rank: int) -> GaugeCocycle:
    def gauge(x):
        return eye(as_point(x).shape[0], rank)
    return GaugeCocycle([gauge] * n_charts, {"generator": "trivial", "charts": n_charts, "rank": rank})


def phase_cocycle(frequencies, offsets) -> GaugeCocycle:
    """Diagonal gauges ``exp(i (w_il Re(sum x) + phi_il))``; transitions are unitary."""
    freq = np.asarray(frequencies, dtype=float)
    off = np.asarray(offsets, dtype=float)

    def make(i):
        def gauge(x):
            s = _real_coordinate(x)
            return np.exp(1j * (s[:, None] * freq[i] + off[i]))
        return gauge

    return DiagonalGaugeCocycle([make(i) for i in range(freq.shape[0])],
                                {"generator": "phase", "frequencies": freq.tolist(),
                                 "offsets": off.tolist()})


def diagonal_cocycle(scales) -> GaugeCocycle:
    """Constant diagonal gauges; ``g_ij = diag(s_i / s_j)`` need not be unitary."""
    sc = np.asarray(scales, dtype=float)

    def make(i):
        def gauge(x):
            return np.broadcast_to(sc[i], (as_point(x).shape[0], sc.shape[1])).astype(complex)
        return gauge

    return DiagonalGaugeCocycle([make(i) for i in range(sc.shape[0])],
                                {"generator": "diagonal", "scales": sc.tolist()})


def rotation_cocycle(frequencies, offsets) -> GaugeCocycle:
    """Rank-2 real rotations by ``w_i Re(sum x) + phi_i``; unitary but not diagonal."""
    freq = np.asarray(frequencies, dtype=float)
    off = np.asarray(offsets, dtype=float)

    def make(i):
        def gauge(x):
            th = freq[i] * _real_coordinate(x) + off[i]
            c, s = np.cos(th), np.sin(th)
            return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2).astype(complex)
        return gauge

    return GaugeCocycle([make(i) for i in range(freq.shape[0])],
                        {"generator": "rotation", "frequencies": freq.tolist(), "offsets": off.tolist()})


class CorruptedCocycle:
    """Scales one ordered transition only, breaking ``g_ij g_ji = 1``."""

    def __init__(self, base, pair: tuple[int, int], factor: float):
        self.base = base
        self.pair = tuple(pair)
        self.factor = float(factor)
        self.descriptor = dict(base.descriptor, corrupt={"pair": list(pair), "factor": factor})

    @property
    def n_charts(self) -> int:
        return self.base.n_charts

    def __call__(self, i, j, x):
        g = self.base(i, j, x)
        return self.factor * g if (i, j) == self.pair else g


class BundleAtlas:
    def __init__(self, base: BaseRegion, fiber: PModule, cocycle):
        if cocycle.n_charts != len(base.charts):
            raise ValueError("cocycle and base region disagree on the number of charts")
        if fiber.grid_size != base.grid_size:
            raise ValueError("fiber and base region live on grids of different size")
        self.base = base
        self.fiber = fiber
        self.cocycle = cocycle
        self._free = fiber.is_free_ambient

    @property
    def n_charts(self) -> int:
        return len(self.base.charts)

    @property
    def rank(self) -> int:
        return self.fiber.ambient_rank

    @property
    def grid_size(self) -> int:
        return self.base.grid_size

    def chart(self, i: int) -> Chart:
        return self.base.charts[i]

    def charts_at(self, x) -> list[int]:
        return self.base.charts_at(x)

    def transition(self, i: int, j: int, x) -> np.ndarray:
        """``g_ij(x)`` compressed to the fiber: maps chart-j to chart-i coordinates."""
        if self._free:
            return self.cocycle(i, j, x)
        p = self.fiber.p
        return p @ self.cocycle(i, j, x) @ p

    def require_chart(self, i: int, x):
        if not self.chart(i).contains(x):
            raise ChartMismatch(f"point is not in chart {i}")


def verify_cocycle(atlas: BundleAtlas, tol: float = CONSISTENCY_TOL, indices=None) -> list[Check]:
    plan = atlas.base.sample_plan
    idx = range(len(plan)) if indices is None else indices
    p = atlas.fiber.p
    ident, comp, inv = [], [], []
    for s in idx:
        x = plan.points[s]
        cs = np.flatnonzero(plan.membership[s])
        g = {(i, j): atlas.transition(i, j, x) for i in cs for j in cs}
        ident.extend(seminorm(g[i, i] - p) for i in cs)
        comp.extend(seminorm(g[i, j] @ g[j, k] - g[i, k]) for i, j, k in product(cs, repeat=3))
        padded = [g[key] + (eye(*p.shape[:2]) - p) for key in g]
        inv.extend(float(np.min(np.linalg.svd(m, compute_uv=False))) for m in padded)
    return [
        Check.upper("identity", ident, tol, anchor="trivialization compatibility: g_ii = 1"),
        Check.upper("composition", comp, tol, anchor="trivialization compatibility: g_ij g_jk = g_ik"),
        Check.lower("invertibility", inv, tol, anchor="tau_jx o tau_ix^-1 is a module isomorphism"),
    ]


class Section:
    """Chartwise representatives ``xi_i : U_i -> M``."""

    def __init__(self, atlas: BundleAtlas, maps: Sequence[Callable]):
        if len(maps) != atlas.n_charts:
            raise ValueError("need one representative per chart")
        k = atlas.base.dim
        self.atlas = atlas
        self.maps = tuple(
            m.restricted(atlas.chart(i).contains) if isinstance(m, AMap)
            else AMap(m, k, atlas.chart(i).contains, name=f"xi_{i}")
            for i, m in enumerate(maps)
        )

    @classmethod
    def from_chart(cls, atlas: BundleAtlas, i: int, fn: Callable, project: bool = True) -> Section:
        """Transport a chart-``i`` formula to every chart through the cocycle."""
        p = atlas.fiber.p

        def base(x):
            v = np.asarray(fn(x), dtype=complex)
            return apply(p, v) if project else v

        def make(j):
            if j == i:
                return base
            return lambda x: apply(atlas.transition(j, i, x), base(x))

        return cls(atlas, [make(j) for j in range(atlas.n_charts)])

    def __call__(self, i: int, x) -> np.ndarray:
        return self.maps[i](x)

    def scaled(self, f: Callable) -> Section:
        """The section ``f . xi`` for an A-valued map ``f`` on the base."""
        return Section(self.atlas, [
            (lambda m: lambda x: pointwise_scale(np.asarray(f(x), dtype=complex), m(x)))(m)
            for m in self.maps
        ])

    def __add__(self, other: Section) -> Section:
        return Section(self.atlas, [
            (lambda a, b: lambda x: a(x) + b(x))(a, b) for a, b in zip(self.maps, other.maps)
        ])


def verify_section(section: Section, tol: float = CONSISTENCY_TOL, indices=None) -> Check:
    atlas = section.atlas
    plan = atlas.base.sample_plan
    idx = range(len(plan)) if indices is None else indices
    res = []
    for s in idx:
        x = plan.points[s]
        cs = np.flatnonzero(plan.membership[s])
        vals = {i: section(i, x) for i in cs}
        for i in cs:
            res.append(seminorm(apply(atlas.fiber.p, vals[i]) - vals[i]))
            for j in cs:
                res.append(seminorm(vals[i] - apply(atlas.transition(i, j, x), vals[j])))
    return Check.upper("section-compatibility", res, tol, anchor="sections: xi_i = g_ij xi_j")


class HermitianStructure:
    """Chartwise Gram maps ``x -> H_i(x)`` (padded) inducing one fiberwise form."""

    def __init__(self, atlas: BundleAtlas, grams: Sequence[Callable], label: str = ""):
        self.atlas = atlas
        self.grams = tuple(grams)
        self.label = label

    def gram(self, i: int, x) -> np.ndarray:
        return self.grams[i](x)

    def pair(self, i: int, x, u, w) -> np.ndarray:
        return pair(self.gram(i, x), u, w)

    def form_at(self, i: int, x) -> HermitianForm:
        return HermitianForm(self.atlas.fiber, self.gram(i, x))

    def pairing_map(self, xi: Section, eta: Section, chart: int) -> AMap:
        """``x -> g_x(xi(x), eta(x))`` computed in one chart."""
        def fn(x):
            return self.pair(chart, x, xi(chart, x), eta(chart, x))
        return AMap(fn, self.atlas.base.dim, self.atlas.chart(chart).contains, name="g(xi,eta)")


def hermitian_structure_by_gluing(atlas: BundleAtlas, alpha: HermitianForm,
                                  partition: PartitionOfUnity) -> HermitianStructure:
    """``H_j(x) = sum_i psi_i(x) g_ij(x)* H_alpha g_ij(x)`` over charts containing ``x``."""
    p = atlas.fiber.p
    h_alpha = alpha.H

    def make(j):
        def gram(x):
            w = partition.weights(x)
            acc = np.zeros_like(h_alpha)
            for i in atlas.charts_at(x):
                g = atlas.transition(i, j, x)
                acc = acc + pointwise_scale(w[i], adjoint(g) @ h_alpha @ g)
            return pad_gram(p, acc)
        return gram

    return HermitianStructure(atlas, [make(j) for j in range(atlas.n_charts)], "gluing")


def reduction_residuals(atlas: BundleAtlas, alpha: HermitianForm, indices=None):
    """Yield ``(i, j, sample_index, g_ji, residual)`` of form-unitarity on overlaps."""
    plan = atlas.base.sample_plan
    idx = range(len(plan)) if indices is None else indices
    for s in idx:
        x = plan.points[s]
        cs = np.flatnonzero(plan.membership[s])
        for i in cs:
            for j in cs:
                if i != j:
                    g = atlas.transition(j, i, x)
                    yield int(i), int(j), int(s), g, unitarity_residual(g, alpha)


def hermitian_structure_by_reduction(atlas: BundleAtlas, alpha: HermitianForm,
                                     tol: float = CONSISTENCY_TOL, indices=None) -> HermitianStructure:
    """Constant chartwise Gram ``H_alpha``, valid when every transition preserves ``alpha``.

    Raises :class:`NotReduced` naming the first offending ``(i, j, sample)``.
    """
    for i, j, s, g, res in reduction_residuals(atlas, alpha, indices):
        if not is_form_unitary(g, alpha, tol):
            raise NotReduced(i, j, s, res)
    h = alpha.H
    grams = [lambda x, h=h: h for _ in range(atlas.n_charts)]
    return HermitianStructure(atlas, grams, "reduction")


def verify_hermitian_structure(structure: HermitianStructure, tol: float = 1e-9, indices=None,
                               consistency_tol: float | None = None,
                               rng: np.random.Generator | None = None) -> list[Check]:
    """Fiberwise axioms at every sampled point and chart, plus chart independence."""
    atlas = structure.atlas
    plan = atlas.base.sample_plan
    rng = np.random.default_rng(0) if rng is None else rng
    idx = range(len(plan)) if indices is None else indices
    p = atlas.fiber.p
    worst = {}
    indep = []
    for s in idx:
        x = plan.points[s]
        cs = np.flatnonzero(plan.membership[s])
        grams = {i: structure.gram(i, x) for i in cs}
        for i in cs:
            rep = verify_axioms(HermitianForm(atlas.fiber, grams[i]), tol=tol, rng=rng, n_samples=4)
            for c in rep.checks:
                worst.setdefault(c.name, []).append(c.residual)
        for j in cs:
            for k in cs:
                g = atlas.transition(j, k, x)
                indep.append(seminorm(p @ (grams[k] - adjoint(g) @ grams[j] @ g) @ p))
    ctol = tol if consistency_tol is None else consistency_tol
    out = []
    for name, vals in worst.items():
        if name == "nondegeneracy":
            out.append(Check.lower(f"fiber-{name}", vals, tol, anchor="g_x is nondegenerate for every x"))
        else:
            out.append(Check.upper(f"fiber-{name}", vals, tol, anchor="(E_x, g_x) is a hermitian form"))
    out.append(Check.upper("chart-independence", indep, ctol,
                           anchor="s(x) = a o (tau_ix x tau_ix) independent of i"))
    return out


def frame_sections(atlas: BundleAtlas, i: int, basis=None) -> list[Section]:
    """Sections equal to the constant ``b_j`` in chart ``i``, transported elsewhere.

    Without a basis the canonical generators ``p e_j`` are used, which form a
    basis exactly when the fiber is free.
    """
    n, m = atlas.grid_size, atlas.rank
    if basis is None:
        basis = [atlas.fiber.p[:, :, j] for j in range(m)]
    out = []
    for b in basis:
        b = np.asarray(getattr(b, "coords", b), dtype=complex)
        out.append(Section.from_chart(atlas, i, lambda x, b=b: b, project=False))
    return out


def frame_matrix(basis) -> np.ndarray:
    """Columns ``b_j`` stacked into ``(n, m, m)``."""
    return np.stack([np.asarray(getattr(b, "coords", b), dtype=complex) for b in basis], axis=-1)


def frame_inverse(basis, cond_limit: float = 1e12) -> np.ndarray:
    mat = frame_matrix(basis)
    if mat.shape[1] != mat.shape[2] or np.max(np.linalg.cond(mat)) > cond_limit:
        raise FrameUnavailable("frame is not a basis at every grid point")
    return np.linalg.inv(mat)


def frame_components(basis, values) -> np.ndarray:
    """Coefficients ``c`` with ``values = sum_j c_j b_j`` for a basis of ``A^m``."""
    return apply(frame_inverse(basis), np.asarray(values, dtype=complex))


@dataclass(frozen=True, eq=False)
class HomElement:
    """An element of ``L_A(T(X,x), E_x)`` written in one chart.

    It acts as ``(h, k) -> L h + S conj(k)``, which is A-linear for the
    twisted action on tangent pairs.
    """

    x: np.ndarray
    chart: int
    L: np.ndarray
    S: np.ndarray

    def __call__(self, v: TangentVector) -> np.ndarray:
        return apply(self.L, v.h) + apply(self.S, np.conj(v.k))

    @property
    def matrix(self) -> MatrixOverA:
        return MatrixOverA(np.concatenate([self.L, self.S], axis=2))


def lhom_trivialization(atlas: BundleAtlas, i: int, fiberwise_map, x, source_chart: int | None = None
                        ) -> HomElement:
    """Chart-``i`` matrices of a fiberwise map ``T(X,x) -> E_x``.

    ``fiberwise_map`` is a :class:`HomElement` or a callable taking a
    :class:`TangentVector` to coordinates in ``source_chart`` (default ``i``).
    """
    x = as_point(x, atlas.base.dim)
    atlas.require_chart(i, x)
    if isinstance(fiberwise_map, HomElement):
        src = fiberwise_map.chart
        lmat, smat = fiberwise_map.L, fiberwise_map.S
    else:
        src = i if source_chart is None else source_chart
        zero = np.zeros_like(x)
        dirs = unit_directions(x.shape[0], x.shape[1])
        lmat = np.stack([np.asarray(fiberwise_map(TangentVector(e, zero))) for e in dirs], axis=-1)
        smat = np.stack([np.asarray(fiberwise_map(TangentVector(zero, e))) for e in dirs], axis=-1)
    atlas.require_chart(src, x)
    g = atlas.transition(i, src, x)
    return HomElement(x, i, g @ lmat, g @ smat)
