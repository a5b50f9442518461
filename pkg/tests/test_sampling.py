import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dampwave.errors import DomainError, ParameterError
from dampwave.grid import Grid
from dampwave.sampling import (
    KINDS,
    gaussian_profile,
    plateau_profile,
    sample_function,
    sample_profile,
    smooth_bump,
    smooth_cutoff,
)


def test_bump_and_cutoff_shapes():
    s = np.linspace(-2, 2, 401)
    b = smooth_bump(s)
    assert b.max() == 1.0 and np.all(b[np.abs(s) >= 1] == 0)
    c = smooth_cutoff(s)
    assert np.all(c[s <= 0] == 1) and np.all(c[s >= 1] == 0)
    assert np.all(np.diff(c) <= 0)


@given(st.integers(0, 500), st.sampled_from(KINDS), st.integers(1, 2))
def test_support_is_respected(seed, kind, d):
    g = Grid(d, 41 if d == 2 else 201, 4.0)
    f = sample_profile(seed, kind, 2.0, d).on(g)
    outside = g.radius > 2.0 + 1e-12
    assert np.all(f.data[:, outside] == 0)
    assert np.abs(f.data).max() > 0


@given(st.integers(0, 500), st.sampled_from(KINDS))
def test_same_seed_same_function(seed, kind):
    g = Grid(1, 101, 3.0)
    a = sample_profile(seed, kind, 2.0, 1).on(g).data
    b = sample_profile(seed, kind, 2.0, 1).on(g).data
    assert np.array_equal(a, b)


@given(st.integers(0, 500), st.integers(1, 3))
def test_odd_bump_is_exactly_odd(seed, d):
    g = Grid(d, {1: 101, 2: 31, 3: 15}[d], 3.0)
    p = sample_profile(seed, "odd_bump", 2.5, d)
    assert p.odd
    u = p.on(g).data
    flipped = u[(slice(None),) + (slice(None, None, -1),) * d]
    assert np.array_equal(u, -flipped)


def test_dilation_and_scaling():
    g = Grid(1, 201, 8.0)
    p = sample_profile(3, "bump", 2.0, 1)
    q = p.dilated(0.5, 3.0)
    assert q.support_radius == 4.0
    x = g.coords[0]
    np.testing.assert_allclose(q((x,)), 3.0 * p((0.5 * x,)))
    np.testing.assert_allclose(p.times(2.0).on(g).data, 2.0 * p.on(g).data)


def test_errors():
    with pytest.raises(ParameterError):
        sample_profile(0, "triangle", 1.0, 1)
    with pytest.raises(ParameterError):
        sample_profile(0, "bump", 0.0, 1)
    with pytest.raises(DomainError):
        sample_function(Grid(1, 21, 1.0), 0, "bump", 2.0)
    with pytest.raises(ParameterError):
        gaussian_profile(1, 1.0, cutoff=0.5)
    with pytest.raises(ParameterError):
        plateau_profile(1, 2.0, 1.0)


def test_gaussian_cutoff_is_close_to_gaussian():
    g = Grid(1, 401, 8.0)
    p = gaussian_profile(1, 1.0, cutoff=6.0).on(g).data[0]
    exact = np.exp(-g.coords[0] ** 2)
    assert np.abs(p - exact).max() < 1e-10
    assert np.all(p[np.abs(g.coords[0]) >= 6.0] == 0)


def test_plateau():
    g = Grid(1, 201, 4.0)
    v = plateau_profile(1, 1.0, 2.0).on(g).data[0]
    r = np.abs(g.coords[0])
    assert np.all(v[r <= 1] == 1) and np.all(v[r >= 2] == 0)
