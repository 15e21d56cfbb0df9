"""Connections: local frame connections, gluing, Grassmann compression, and
numerical checks of the Leibniz rule and metric compatibility.

A connection is stored as its evaluation rule
``rule(section, x, v, chart, step) -> coordinates in chart``; matrices in
the hom-bundle are extracted on demand with :func:`lhom_trivialization`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebra import seminorm
from .bundle import (
    BundleAtlas,
    HermitianStructure,
    HomElement,
    PartitionOfUnity,
    Section,
    frame_inverse,
    frame_matrix,
    lhom_trivialization,
)
from .calculus import AMap, TangentVector, as_amap, as_point, pointwise_scale, tangent_apply
from .checks import Check
from .errors import ChartMismatch, FrameUnavailable
from .hermitian import HermitianForm, orthonormal_basis
from .pmodule import MatrixOverA, ModuleMap, PModule, apply, complement, eye, whitney_sum


class ConnectionOperator:
    """``D : sections -> sections of L(TX, E)`` given by an evaluation rule."""

    def __init__(self, atlas: BundleAtlas, rule: Callable, charts: Sequence[int] | None = None,
                 label: str = ""):
        self.atlas = atlas
        self.rule = rule
        self.charts = tuple(range(atlas.n_charts) if charts is None else charts)
        self.label = label

    def defined_at(self, x) -> list[int]:
        return [i for i in self.charts if self.atlas.chart(i).contains(x)]

    def __call__(self, section: Section, x, v: TangentVector, chart: int | None = None,
                 step: float | None = None) -> np.ndarray:
        x = as_point(x, self.atlas.base.dim)
        domain = self.defined_at(x)
        if not domain:
            raise ChartMismatch("connection is not defined at this point")
        if chart is None:
            chart = domain[0]
        else:
            self.atlas.require_chart(chart, x)
        return self.rule(section, x, v, chart, step)

    def value(self, section: Section, x, chart: int | None = None, step: float | None = None
              ) -> HomElement:
        """``D xi(x)`` as chart matrices of an element of ``L_A(T(X,x), E_x)``."""
        x = as_point(x, self.atlas.base.dim)
        chart = self.defined_at(x)[0] if chart is None else chart
        return lhom_trivialization(self.atlas, chart, lambda v: self(section, x, v, chart, step), x)

    def scaled(self, factor: float) -> ConnectionOperator:
        rule = self.rule
        return ConnectionOperator(self.atlas, lambda *a: factor * rule(*a), self.charts,
                                  f"{factor}*{self.label}")


def local_trivial_connection(atlas: BundleAtlas, i: int, basis=None) -> ConnectionOperator:
    """``D_i xi = sum_j (T xi_ij) eps_ij`` for the constant frame ``b_j`` of chart ``i``.

    Outputs requested in another chart are transported by the cocycle.
    """
    n, m = atlas.grid_size, atlas.rank
    if basis is None:
        if not atlas.fiber.is_free_ambient:
            raise FrameUnavailable("fiber is not free; pass a basis or use the Grassmann extension")
        basis = [eye(n, m)[:, :, j] for j in range(m)]
    basis = [np.asarray(getattr(b, "coords", b), dtype=complex) for b in basis]
    if len(basis) != m:
        raise FrameUnavailable(f"need {m} frame elements, got {len(basis)}")
    frame = frame_matrix(basis)
    inverse = frame_inverse(basis)
    chart = atlas.chart(i)

    def rule(section, x, v, out_chart, step):
        comps = AMap(lambda y: apply(inverse, section(i, y)), atlas.base.dim,
                     chart.contains, name=f"xi_{i}j")
        local = apply(frame, tangent_apply(comps, x, v, step))
        if out_chart == i:
            return local
        return apply(atlas.transition(out_chart, i, x), local)

    return ConnectionOperator(atlas, rule, [i], f"D_{i}")


def glue_connections(partition: PartitionOfUnity, locals_: Sequence[ConnectionOperator]
                     ) -> ConnectionOperator:
    """``D xi = sum_i psi_i D_i xi``, the ``i``-th local connection living on chart ``i``."""
    atlas = locals_[0].atlas
    owner = {}
    for d in locals_:
        for c in d.charts:
            owner[c] = d
    if set(owner) != set(range(len(partition.charts))):
        raise ChartMismatch("local connections must cover every chart of the partition")

    def rule(section, x, v, chart, step):
        w = partition.weights(x)
        out = np.zeros((atlas.grid_size, atlas.rank), dtype=complex)
        for i in atlas.charts_at(x):
            if not np.any(w[i]):
                continue
            out = out + pointwise_scale(w[i], owner[i](section, x, v, chart, step))
        return out

    return ConnectionOperator(atlas, rule, None, "glued")


class _SumCocycle:
    """Transitions of ``E + (X x N)`` folded onto ``A^m``."""

    def __init__(self, atlas: BundleAtlas, fold: np.ndarray, unfold: np.ndarray, comp: np.ndarray):
        self.atlas = atlas
        self.fold = fold
        self.unfold = unfold
        self.comp = comp
        self.descriptor = {"generator": "whitney-sum", "of": atlas.cocycle.descriptor}

    @property
    def n_charts(self):
        return self.atlas.n_charts

    def __call__(self, i, j, x):
        g = self.atlas.transition(i, j, x)
        n, m = g.shape[0], g.shape[1]
        block = np.zeros((n, 2 * m, 2 * m), dtype=complex)
        block[:, :m, :m] = g
        block[:, m:, m:] = self.comp
        return self.fold @ block @ self.unfold


@dataclass(frozen=True, eq=False)
class WhitneyScaffold:
    """The free bundle ``E + (X x N)`` with ``I : E -> F`` and ``Pr : F -> E``."""

    atlas: BundleAtlas
    inject: ModuleMap
    project: ModuleMap


def whitney_sum_atlas(atlas: BundleAtlas) -> WhitneyScaffold:
    """Embed a projective-fiber bundle in a free one.

    The fiber ``M + N`` (``N`` the complement of ``M`` in ``A^m``) is identified
    with ``A^m`` by the fold ``(u, w) -> u + w``; the complement summand is the
    trivial bundle, so transitions become ``p g p + (1 - p)``.
    """
    fiber = atlas.fiber
    n, m = fiber.grid_size, fiber.ambient_rank
    ws = whitney_sum(fiber, complement(fiber))
    fold = np.concatenate([eye(n, m), eye(n, m)], axis=2)
    unfold = np.concatenate([fiber.p, eye(n, m) - fiber.p], axis=1)
    free = PModule.free(n, m)
    inject = ModuleMap(fiber, free, MatrixOverA(fold @ ws.inject1.matrix.entries))
    project = ModuleMap(free, fiber, MatrixOverA(ws.project1.matrix.entries @ unfold))
    cocycle = _SumCocycle(atlas, fold, unfold, eye(n, m) - fiber.p)
    return WhitneyScaffold(BundleAtlas(atlas.base, free, cocycle), inject, project)


def grassmann_extend(atlas: BundleAtlas, scaffold: WhitneyScaffold, d_tilde: ConnectionOperator
                     ) -> ConnectionOperator:
    """``D xi(x) = Pr o D~(I o xi)(x)`` on the projective-fiber bundle."""
    inj = scaffold.inject.matrix.entries
    prj = scaffold.project.matrix.entries

    def lift(section):
        return Section(scaffold.atlas, [
            (lambda mp: lambda y: apply(inj, mp(y)))(mp) for mp in section.maps
        ])

    def rule(section, x, v, chart, step):
        return apply(prj, d_tilde(lift(section), x, v, chart, step))

    return ConnectionOperator(atlas, rule, d_tilde.charts, "grassmann")


def sample_tangents(rng: np.random.Generator, n: int, dim: int, count: int = 8,
                    diagonal: bool = False) -> list[TangentVector]:
    """Random tangent pairs with slots in the unit polydisc.

    The last quarter are twisted-scalar multiples of earlier ones; in the
    diagonal case the scalars are real so that the results stay diagonal.
    """
    def disc():
        r = np.sqrt(rng.uniform(size=(n, dim)))
        return r * np.exp(2j * np.pi * rng.uniform(size=(n, dim)))

    probes = max(count // 4, 0) if count > 1 else 0
    out = []
    for _ in range(count - probes):
        h = disc()
        out.append(TangentVector.diagonal(h) if diagonal else TangentVector(h, disc()))
    for q in range(probes):
        a = rng.uniform(-1, 1, n) if diagonal else disc()[:, 0]
        out.append(out[q].scaled(a))
    return out


def _points(atlas, points):
    return [as_point(x, atlas.base.dim) for x in points]


def leibniz_residuals(D: ConnectionOperator, xi: Section, f, points, tangents_for,
                      step: float | None = None) -> list[float]:
    f = as_amap(f, D.atlas.base.dim)
    fxi = xi.scaled(f)
    res = []
    for s, x in enumerate(_points(D.atlas, points)):
        fx = f(x)
        for v in tangents_for(s):
            tf = tangent_apply(f, x, v, step)
            for c in D.defined_at(x):
                lhs = D(fxi, x, v, c, step)
                rhs = pointwise_scale(tf, xi(c, x)) + pointwise_scale(fx, D(xi, x, v, c, step))
                res.append(seminorm(lhs - rhs))
    return res


def _tangent_source(atlas, points, tangents, directions, diagonal, rng):
    if tangents is not None:
        return lambda s: tangents
    rng = np.random.default_rng(0) if rng is None else rng
    table = [sample_tangents(rng, atlas.grid_size, atlas.base.dim, directions, diagonal)
             for _ in range(len(points))]
    return lambda s: table[s]


def verify_leibniz(D: ConnectionOperator, xi: Section, f, points, tol: float = 1e-6,
                   step: float | None = None, directions: int = 8, tangents=None,
                   rng: np.random.Generator | None = None) -> Check:
    """Max over samples of ``|D(f xi)(v) - Tf(v) xi - f D xi(v)|``."""
    src = _tangent_source(D.atlas, points, tangents, directions, False, rng)
    res = leibniz_residuals(D, xi, f, points, src, step)
    return Check.upper("leibniz", res, tol, anchor="Leibniz rule D(f xi) = Tf . xi + f . D xi")


def leibniz_convergence(D: ConnectionOperator, xi: Section, f, points, step: float = 1e-4,
                        directions: int = 8, rng: np.random.Generator | None = None) -> float:
    """Ratio of the Leibniz residual at ``step`` to that at ``step / 2``."""
    src = _tangent_source(D.atlas, points, None, directions, False, rng)
    coarse = max(leibniz_residuals(D, xi, f, points, src, step))
    fine = max(leibniz_residuals(D, xi, f, points, src, step / 2))
    return coarse / fine if fine > 0 else float("inf")


@dataclass(frozen=True)
class CompatibilityReport:
    diagonal: Check
    generic: Check
    diagonal_only: bool

    @property
    def passed(self) -> bool:
        return bool(self.diagonal.passed if self.diagonal_only else
                    (self.diagonal.passed and self.generic.passed))

    @property
    def checks(self) -> tuple[Check, Check]:
        return (self.diagonal, self.generic)


def _compat_residuals(D, structure, xi, eta, points, tangents_for, step):
    res = []
    for s, x in enumerate(_points(D.atlas, points)):
        charts = D.defined_at(x)
        for v in tangents_for(s):
            for c in charts:
                lhs = (structure.pair(c, x, D(xi, x, v, c, step), eta(c, x))
                       + structure.pair(c, x, xi(c, x), D(eta, x, v, c, step)))
                rhs = tangent_apply(structure.pairing_map(xi, eta, c), x, v, step)
                res.append(seminorm(lhs - rhs))
    return res


def verify_compatibility(D: ConnectionOperator, structure: HermitianStructure, xi: Section,
                         eta: Section, points, tol: float = 1e-6, diagonal_only: bool = True,
                         step: float | None = None, directions: int = 8,
                         rng: np.random.Generator | None = None) -> CompatibilityReport:
    """Residual of ``g(D xi(v), eta) + g(xi, D eta(v)) - T(g(xi, eta))(v)``.

    Both diagonal pairs ``(h, h)`` and generic pairs ``(h, k)`` are measured.
    Only the selected family carries a pass bar; the identity is exact on the
    diagonal and generally false off it, so the generic entry is informative
    when ``diagonal_only`` is set.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    atlas = D.atlas
    diag_src = _tangent_source(atlas, points, None, directions, True, rng)
    gen_src = _tangent_source(atlas, points, None, directions, False, rng)
    anchor = "compatibility g(D xi(v), eta) + g(xi, D eta(v)) = T(g(xi, eta))(v)"
    diag = Check.upper("compatibility-diagonal", _compat_residuals(D, structure, xi, eta, points,
                                                                   diag_src, step), tol,
                       anchor=anchor + ", v = (h, h)")
    gen = Check.upper("compatibility-generic", _compat_residuals(D, structure, xi, eta, points,
                                                                 gen_src, step), tol,
                      anchor=anchor + ", v = (h, k)", informative=diagonal_only,
                      detail="informative: the identity holds only on diagonal tangent pairs"
                      if diagonal_only else "")
    return CompatibilityReport(diag, gen, diagonal_only)


def verify_tangent_linearity(D: ConnectionOperator, xi: Section, points, tol: float = 1e-6,
                             step: float | None = None, directions: int = 4,
                             rng: np.random.Generator | None = None) -> Check:
    """``D xi(x)(a . v) = a D xi(x)(v)`` for the twisted action on tangent pairs."""
    rng = np.random.default_rng(0) if rng is None else rng
    atlas = D.atlas
    res = []
    for x in _points(atlas, points):
        for v in sample_tangents(rng, atlas.grid_size, atlas.base.dim, directions):
            a = rng.standard_normal(atlas.grid_size) + 1j * rng.standard_normal(atlas.grid_size)
            for c in D.defined_at(x):
                res.append(seminorm(D(xi, x, v.scaled(a), c, step)
                                    - pointwise_scale(a, D(xi, x, v, c, step))))
    return Check.upper("tangent-linearity", res, tol, anchor="D xi(x) is A-linear on T(X,x)")


def verify_additivity(D: ConnectionOperator, xi: Section, eta: Section, points, tol: float = 1e-10,
                      step: float | None = None, rng: np.random.Generator | None = None) -> Check:
    rng = np.random.default_rng(0) if rng is None else rng
    atlas = D.atlas
    total = xi + eta
    res = []
    for x in _points(atlas, points):
        for v in sample_tangents(rng, atlas.grid_size, atlas.base.dim, 2):
            for c in D.defined_at(x):
                res.append(seminorm(D(total, x, v, c, step) - D(xi, x, v, c, step)
                                    - D(eta, x, v, c, step)))
    return Check.upper("additivity", res, tol, anchor="D is additive")


def verify_chart_consistency(D: ConnectionOperator, xi: Section, points, tol: float = 1e-8,
                             roundtrip_tol: float = 1e-12, step: float | None = None
                             ) -> list[Check]:
    """Hom-bundle transport checks on overlaps.

    ``transport`` compares the chart-``k`` value of ``D xi(x)`` with the
    chart-``j`` value carried over by the cocycle; ``roundtrip`` carries a
    chart-``j`` value to chart ``k`` and back.
    """
    atlas = D.atlas
    trans, trip = [], []
    for x in _points(atlas, points):
        charts = D.defined_at(x)
        vals = {c: D.value(xi, x, c, step) for c in charts}
        for j in charts:
            for k in charts:
                moved = lhom_trivialization(atlas, k, vals[j], x)
                trans.append(max(seminorm(moved.L - vals[k].L), seminorm(moved.S - vals[k].S)))
                back = lhom_trivialization(atlas, j, moved, x)
                trip.append(max(seminorm(back.L - vals[j].L), seminorm(back.S - vals[j].S)))
    return [
        Check.upper("transport", trans, tol, anchor="D xi is a section of L(TX,E): chart values agree"),
        Check.upper("roundtrip", trip, roundtrip_tol,
                    anchor="hom-bundle trivializations f -> tau_ix o f o phi_i^-1 are compatible"),
    ]


def orthonormal_frame(atlas: BundleAtlas, alpha: HermitianForm | None = None) -> list[np.ndarray]:
    """Constant frame of ``A^m`` orthonormal for the padded Gram of ``alpha``.

    With no form the canonical basis is returned.  The padding makes this a
    frame of the free Whitney sum when the fiber is projective.
    """
    n, m = atlas.grid_size, atlas.rank
    if alpha is None:
        return [eye(n, m)[:, :, j] for j in range(m)]
    free = PModule.free(n, m)
    return [b.coords for b in orthonormal_basis(HermitianForm(free, alpha.H))]


def frame_connection(atlas: BundleAtlas, partition: PartitionOfUnity,
                     alpha: HermitianForm | None = None) -> ConnectionOperator:
    """Local frame connections glued by ``partition``.

    Free fibers use the frames directly; projective fibers go through the
    Whitney-sum scaffold and :func:`grassmann_extend`.
    """
    frame = orthonormal_frame(atlas, alpha)
    if atlas.fiber.is_free_ambient:
        locals_ = [local_trivial_connection(atlas, i, frame) for i in range(atlas.n_charts)]
        return glue_connections(partition, locals_)
    scaffold = whitney_sum_atlas(atlas)
    locals_ = [local_trivial_connection(scaffold.atlas, i, frame) for i in range(atlas.n_charts)]
    return grassmann_extend(atlas, scaffold, glue_connections(partition, locals_))
