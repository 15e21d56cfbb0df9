import numpy as np
import pytest

from abundle.algebra import seminorm
from abundle.bundle import (
    BaseRegion,
    BundleAtlas,
    Chart,
    Section,
    hermitian_structure_by_reduction,
    make_bump_partition,
    phase_cocycle,
    trivial_cocycle,
)
from abundle.calculus import TangentVector
from abundle.connection import (
    frame_connection,
    glue_connections,
    grassmann_extend,
    leibniz_convergence,
    local_trivial_connection,
    sample_tangents,
    verify_additivity,
    verify_chart_consistency,
    verify_compatibility,
    verify_leibniz,
    verify_tangent_linearity,
    whitney_sum_atlas,
)
from abundle.errors import FrameUnavailable
from abundle.hermitian import standard_form
from abundle.pmodule import PModule, mixed_rank_idempotent

from strategies import N


@pytest.fixture(scope="module")
def line():
    charts = [Chart(np.zeros((N, 1)), 2.2)]
    base = BaseRegion.build(charts, 1.0, 0, 16, 0)
    atlas = BundleAtlas(base, PModule.free(N, 1), trivial_cocycle(1, 1))
    return atlas, make_bump_partition(base, 2.0)


@pytest.fixture(scope="module")
def two_chart():
    charts = [Chart(np.zeros((N, 1)), 1.3), Chart(np.ones((N, 1)), 1.3)]
    base = BaseRegion.build(charts, 1.08, 11, 12, 8)
    coc = phase_cocycle([[0.5, 0.8], [0.9, 0.3]], [[0.0, 0.2], [0.4, 0.1]])
    return base, coc, make_bump_partition(base, 1.2)


def col(fn):
    return lambda x: fn(x[:, 0])[:, None]


def tangent(rng, diagonal=False):
    h = rng.standard_normal((N, 1)) + 1j * rng.standard_normal((N, 1))
    k = h if diagonal else rng.standard_normal((N, 1)) + 1j * rng.standard_normal((N, 1))
    return TangentVector(h, k)


def test_local_connection_examples(line, rng):
    atlas, _ = line
    D = local_trivial_connection(atlas, 0)
    x = 0.5 * (rng.standard_normal((N, 1)) + 1j * rng.standard_normal((N, 1)))
    v = tangent(rng)
    const = Section(atlas, [lambda y: np.full((N, 1), 2 - 1j)])
    assert seminorm(D(const, x, v)) <= 1e-10
    ident = Section(atlas, [col(lambda z: z)])
    assert np.allclose(D(ident, x, v), v.h, atol=1e-8)
    conj = Section(atlas, [col(np.conj)])
    assert np.allclose(D(conj, x, v), np.conj(v.k), atol=1e-8)


def test_leibniz_cube_example(line, rng):
    atlas, _ = line
    D = local_trivial_connection(atlas, 0)
    x = 0.5 * (rng.standard_normal((N, 1)) + 1j * rng.standard_normal((N, 1)))
    v = tangent(rng, diagonal=True)
    xi = Section(atlas, [col(lambda z: z)])
    fxi = xi.scaled(lambda y: y[:, 0] ** 2)
    assert np.allclose(D(fxi, x, v), 3 * x ** 2 * v.h, atol=1e-7)
    pts = atlas.base.sample_plan.points[:6]
    assert verify_leibniz(D, xi, lambda y: y[:, 0] ** 2, pts).passed
    assert verify_leibniz(D, xi, lambda y: np.full(N, 1.5 + 2j), pts).passed
    assert not verify_leibniz(D.scaled(2.0), xi, lambda y: y[:, 0] ** 2, pts).passed


def test_compatibility_identity_section(line, rng):
    atlas, _ = line
    D = local_trivial_connection(atlas, 0)
    s = hermitian_structure_by_reduction(atlas, standard_form(atlas.fiber))
    xi = Section(atlas, [col(lambda z: z)])
    const = Section(atlas, [lambda y: np.full((N, 1), 1 + 1j)])
    pts = atlas.base.sample_plan.points[:6]
    rep = verify_compatibility(D, s, xi, xi, pts)
    assert rep.passed and rep.diagonal.residual <= 1e-6
    assert rep.generic.passed is None and rep.generic.residual > 1e-3
    rep = verify_compatibility(D, s, const, const, pts, diagonal_only=False)
    assert rep.passed


def test_single_chart_gluing_is_identity(line, rng):
    atlas, part = line
    D = local_trivial_connection(atlas, 0)
    G = glue_connections(part, [D])
    xi = Section(atlas, [col(lambda z: z ** 2 + np.conj(z))])
    x = atlas.base.sample_plan.points[3]
    v = tangent(rng)
    assert np.allclose(G(xi, x, v), D(xi, x, v), atol=1e-14)


def test_frame_unavailable(two_chart):
    base, coc, _ = two_chart
    atlas = BundleAtlas(base, PModule(mixed_rank_idempotent(N)), coc)
    with pytest.raises(FrameUnavailable):
        local_trivial_connection(atlas, 0)
    with pytest.raises(FrameUnavailable):
        local_trivial_connection(atlas, 0, [np.ones((N, 2))])


def test_glued_connection_properties(two_chart):
    base, coc, part = two_chart
    atlas = BundleAtlas(base, PModule.free(N, 2), coc)
    D = frame_connection(atlas, part)
    xi = Section.from_chart(atlas, 0, lambda x: np.stack([x[:, 0], np.conj(x[:, 0]) ** 2], -1))
    eta = Section.from_chart(atlas, 1, lambda x: np.stack([1 + x[:, 0] ** 2, x[:, 0] * np.conj(x[:, 0])], -1))
    f = lambda x: x[:, 0] ** 2 + 0.5 * np.conj(x[:, 0])
    pts = base.sample_plan.points[base.sample_plan.subset(8, 0)]
    assert verify_leibniz(D, xi, f, pts).passed
    assert 3 <= leibniz_convergence(D, xi, f, pts[:4]) <= 5
    assert verify_additivity(D, xi, eta, pts).passed
    assert verify_tangent_linearity(D, xi, pts).passed
    trans, trip = verify_chart_consistency(D, xi, pts)
    assert trans.passed and trip.passed
    s = hermitian_structure_by_reduction(atlas, standard_form(atlas.fiber))
    assert verify_compatibility(D, s, xi, eta, pts).passed


def test_grassmann_extension(two_chart, rng):
    base, coc, part = two_chart
    M = PModule(mixed_rank_idempotent(N))
    atlas = BundleAtlas(base, M, coc)
    D = frame_connection(atlas, part)
    xi = Section.from_chart(atlas, 0, lambda x: np.stack([x[:, 0], np.conj(x[:, 0]) ** 2], -1))
    pts = base.sample_plan.points[base.sample_plan.subset(6, 1)]
    for x in pts:
        for c in D.defined_at(x):
            out = D(xi, x, tangent(rng), c)
            assert seminorm(np.einsum("nij,nj->ni", M.p, out) - out) <= 1e-9
    const = Section.from_chart(atlas, 0, lambda x: np.full((N, 2), 1 - 2j))
    s = hermitian_structure_by_reduction(atlas, standard_form(M))
    assert verify_compatibility(D, s, xi, const, pts).passed
    assert verify_leibniz(D, xi, lambda y: y[:, 0] ** 2, pts).passed


def test_grassmann_constant_section(two_chart, rng):
    base, _, part = two_chart
    M = PModule(mixed_rank_idempotent(N))
    atlas = BundleAtlas(base, M, trivial_cocycle(2, 2))
    D = frame_connection(atlas, part)
    const = Section.from_chart(atlas, 0, lambda x: np.full((N, 2), 1 - 2j))
    for x in base.sample_plan.points[:6]:
        for c in D.defined_at(x):
            assert seminorm(D(const, x, tangent(rng), c)) <= 1e-8


def test_grassmann_on_free_fiber_is_identity(two_chart, rng):
    base, coc, part = two_chart
    atlas = BundleAtlas(base, PModule.free(N, 2), coc)
    scaffold = whitney_sum_atlas(atlas)
    locals_ = [local_trivial_connection(scaffold.atlas, i) for i in range(2)]
    ext = grassmann_extend(atlas, scaffold, glue_connections(part, locals_))
    direct = frame_connection(atlas, part)
    xi = Section.from_chart(atlas, 0, lambda x: np.stack([x[:, 0] ** 2, np.conj(x[:, 0])], -1))
    for x in base.sample_plan.points[:5]:
        v = tangent(rng)
        assert np.allclose(ext(xi, x, v), direct(xi, x, v), atol=1e-12)


def test_sample_tangents_twisted_probes(rng):
    vs = sample_tangents(rng, N, 1, count=8)
    assert len(vs) == 8
    assert all(np.max(np.abs(v.h)) <= 1 for v in vs[:6])
    diag = sample_tangents(rng, N, 1, count=8, diagonal=True)
    assert all(v.is_diagonal for v in diag)
