import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from abundle.algebra import (
    AlgebraElement,
    GridSpec,
    from_pairs,
    invert,
    is_positive,
    seminorm,
    spectrum,
    sqrt_positive,
    star,
    to_pairs,
)
from abundle.errors import NotInvertible, NotPositive

from strategies import elements


@given(elements(), elements())
def test_star_is_conjugate_linear_involution(a, b):
    x, y = AlgebraElement(a), AlgebraElement(b)
    assert star(star(x)) == x
    assert np.allclose(star(x * y).values, (star(x) * star(y)).values)
    assert np.allclose(star(x + 2j * y).values, (star(x) - 2j * star(y)).values)


@given(elements(), elements())
def test_seminorm_is_cstar(a, b):
    x, y = AlgebraElement(a), AlgebraElement(b)
    assert seminorm(star(x) * x) == pytest.approx(seminorm(x) ** 2, rel=1e-12, abs=1e-12)
    assert seminorm(x * y) <= seminorm(x) * seminorm(y) * (1 + 1e-12) + 1e-300
    assert seminorm(star(x)) == seminorm(x)


@given(elements())
def test_spectrum_is_value_set(a):
    x = AlgebraElement(a)
    assert spectrum(x) == frozenset(complex(v) for v in a)
    # lambda is in the spectrum iff x - lambda is not invertible
    lam = complex(a[0])
    with pytest.raises(NotInvertible):
        invert(x - lam)


def test_positivity():
    g = GridSpec(4)
    assert is_positive(g.element([0, 1, 2, 3]))
    assert not is_positive(g.element([1, -1, 1, 1]))
    assert not is_positive(g.element([1, 1j, 1, 1]))
    assert is_positive(g.element([1, -1e-13, 1, 1]), tol=1e-12)
    with pytest.raises(ValueError):
        is_positive(g.one(), tol=-1)


@given(elements())
def test_sqrt_positive_squares_back(a):
    p = AlgebraElement(np.abs(a) ** 2)
    r = sqrt_positive(p)
    assert is_positive(r)
    assert seminorm(r * r - p) <= 1e-12 * max(1.0, seminorm(p))


def test_sqrt_of_non_positive_raises():
    with pytest.raises(NotPositive):
        sqrt_positive(GridSpec(3).element([1, -0.5, 2]))


@given(elements())
def test_invert_multiplies_back(a):
    a = np.where(np.abs(a) < 1e-3, 1.0, a)
    x = AlgebraElement(a)
    assert seminorm(invert(x) * x - 1) <= 1e-12


def test_invert_zero_entry():
    with pytest.raises(NotInvertible):
        invert(GridSpec(3).element([1, 0, 2]))


def test_pairs_round_trip(rng):
    x = GridSpec(5).random(rng)
    assert from_pairs(to_pairs(x)) == x


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(0)
    with pytest.raises(ValueError):
        GridSpec(3).element([1, 2])
    with pytest.raises(ValueError):
        GridSpec(3).one() + GridSpec(4).one()
