import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from abundle.calculus import (
    AMap,
    Polynomial,
    TangentVector,
    check_linearity_split,
    differential_LS,
    directional_derivative,
    symbolic_LS,
    tangent_apply,
)
from abundle.errors import DomainEscape

from strategies import N, complex_arrays

Z, ZB = sp.symbols("z zbar")


def sympy_split(terms, x, h):
    """Oracle: Wirtinger derivatives from sympy, z and zbar independent."""
    expr = sum(complex(c) * Z ** p * ZB ** q for c, p, q in terms)
    dz = sp.lambdify((Z, ZB), sp.diff(expr, Z), "numpy")
    dzb = sp.lambdify((Z, ZB), sp.diff(expr, ZB), "numpy")
    xs = x[:, 0]
    lin = np.broadcast_to(dz(xs, np.conj(xs)), xs.shape) * h[:, 0]
    skew = np.broadcast_to(dzb(xs, np.conj(xs)), xs.shape) * np.conj(h[:, 0])
    return lin, skew


terms_st = st.lists(
    st.tuples(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False),
              st.integers(0, 3), st.integers(0, 3)),
    min_size=1, max_size=4,
)


@given(terms_st, complex_arrays((N, 1)), complex_arrays((N, 1)))
def test_numeric_split_matches_sympy(terms, x, h):
    x, h = 0.5 * x, 0.5 * h
    poly = Polynomial([(c, (p,), (q,)) for c, p, q in terms])
    lin, skew = sympy_split([(c, p, q) for c, p, q in terms], x, h)
    num = differential_LS(poly, x, h)
    scale = max(1.0, np.max(np.abs(lin)), np.max(np.abs(skew)))
    assert np.max(np.abs(num.L - lin)) <= 1e-6 * scale
    assert np.max(np.abs(num.S - skew)) <= 1e-6 * scale
    sym = symbolic_LS(poly, x, h)
    assert np.allclose(sym.L, lin, atol=1e-12 * scale)
    assert np.allclose(sym.S, skew, atol=1e-12 * scale)


@pytest.mark.parametrize("powers,expect_L,expect_S", [
    ({(2, 0): 1}, lambda x, h: 2 * x * h, lambda x, h: 0 * x),
    ({(0, 1): 1}, lambda x, h: 0 * x, lambda x, h: np.conj(h)),
    ({(1, 1): 1}, lambda x, h: np.conj(x) * h, lambda x, h: x * np.conj(h)),
])
def test_three_symbolic_maps(rng, powers, expect_L, expect_S):
    poly = Polynomial.from_dict(powers)
    x = rng.standard_normal((N, 1)) + 1j * rng.standard_normal((N, 1))
    h = rng.standard_normal((N, 1)) + 1j * rng.standard_normal((N, 1))
    num = differential_LS(poly, x, h)
    assert np.max(np.abs(num.L - expect_L(x, h)[:, 0])) <= 1e-6
    assert np.max(np.abs(num.S - expect_S(x, h)[:, 0])) <= 1e-6


@given(terms_st, complex_arrays((N, 1)), complex_arrays((N, 1)),
       st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False))
def test_L_linear_S_skew_under_scalars(terms, x, h, a):
    poly = Polynomial([(c, (p,), (q,)) for c, p, q in terms])
    x, h = 0.3 * x, 0.3 * h
    # central differences are exact up to s^2 times third derivatives
    bound = sum(abs(c) * (1 + np.max(np.abs(x))) ** (p + q) for c, p, q in terms)
    bound *= ((1 + abs(a)) * (1 + np.max(np.abs(h)))) ** 3
    rep = check_linearity_split(poly, x, [h], [a], tol=1e-7 * bound)
    assert rep.passed, rep


def test_grid_mixing_map_is_not_A_linear(rng):
    # a shift along the grid is C-linear but not linear over non-constant scalars
    f = AMap(lambda x: np.roll(x[:, 0], 1))
    x = rng.standard_normal((N, 1)) + 0j
    a = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    assert check_linearity_split(f, x, [np.ones((N, 1))], [2 - 1j], tol=1e-8).passed
    assert not check_linearity_split(f, x, [np.ones((N, 1))], [a], tol=1e-6).passed


def test_tangent_apply_conventions(rng):
    x = rng.standard_normal((N, 1)) + 1j * rng.standard_normal((N, 1))
    h = rng.standard_normal((N, 1)) + 1j * rng.standard_normal((N, 1))
    k = rng.standard_normal((N, 1)) + 1j * rng.standard_normal((N, 1))
    ident = Polynomial.from_dict({(1, 0): 1})
    conj = Polynomial.from_dict({(0, 1): 1})
    assert np.allclose(tangent_apply(ident, x, TangentVector(h, k)), h[:, 0], atol=1e-8)
    assert np.allclose(tangent_apply(conj, x, TangentVector(h, k)), np.conj(k[:, 0]), atol=1e-8)
    # on the diagonal it is the plain directional derivative
    f = Polynomial.from_dict({(2, 1): 1, (0, 2): 0.3})
    assert np.allclose(tangent_apply(f, x, TangentVector.diagonal(h)),
                       directional_derivative(f, x, h), atol=1e-12)
    split = differential_LS(f, x, h)
    assert np.allclose(tangent_apply(f, x, TangentVector(h, h + 0)), split.L + split.S, atol=1e-8)


def test_tangent_action_is_twisted(rng):
    h = rng.standard_normal((N, 1)) + 1j
    k = rng.standard_normal((N, 1)) - 1j
    a = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    v = TangentVector(h, k).scaled(a)
    assert np.allclose(v.h, a[:, None] * h)
    assert np.allclose(v.k, np.conj(a)[:, None] * k)


def test_stencil_domain_escape():
    f = AMap(lambda x: x[:, 0], domain=lambda x: bool(np.all(np.abs(x) < 1)), name="disc")
    x = np.full((N, 1), 0.99999 + 0j)
    with pytest.raises(DomainEscape):
        directional_derivative(f, x, np.ones((N, 1)), step=1e-3)
    directional_derivative(f, np.zeros((N, 1)), np.ones((N, 1)))


def test_polynomial_json_round_trip():
    p = Polynomial([(1 + 2j, (2,), (1,)), (-0.5, (0,), (3,))])
    q = Polynomial.from_json(p.to_json())
    x = np.linspace(-1, 1, N)[:, None] * (1 + 0.5j)
    assert np.array_equal(p(x), q(x))
    with pytest.raises(ValueError):
        Polynomial([(1, (1, 0), (0,))])
    with pytest.raises(ValueError):
        Polynomial([(1, (-1,), (0,))])


def test_second_order_accuracy(rng):
    f = Polynomial.from_dict({(3, 0): 1, (1, 2): 1})
    x = rng.standard_normal((N, 1)) + 1j * rng.standard_normal((N, 1))
    h = rng.standard_normal((N, 1)) + 0j
    exact = symbolic_LS(f, x, h)
    exact = exact.L + exact.S
    e1 = np.max(np.abs(directional_derivative(f, x, h, 1e-2) - exact))
    e2 = np.max(np.abs(directional_derivative(f, x, h, 5e-3) - exact))
    assert 3.9 <= e1 / e2 <= 4.1
