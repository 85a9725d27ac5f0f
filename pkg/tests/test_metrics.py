import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from phasespace_ur.lca import RangeError, bits, circle, cyclic, line, zint
from phasespace_ur.metrics import (
    Distribution,
    MetricSpec,
    convolve_distributions,
    deviation,
    parse_metric,
    shift_distribution,
    spread,
    transport_distance,
)

SIDES = {
    "cyclic5-discrete": (cyclic(5).position, MetricSpec("discrete")),
    "cyclic6-cyclicabs": (cyclic(6).position, MetricSpec("cyclic-abs")),
    "bits3-hamming": (bits(3).position, MetricSpec("hamming")),
    "zint-abs": (zint(4).position, MetricSpec("abs")),
    "circle-arc": (circle(8).position, MetricSpec("arc")),
    "circle-chordal": (circle(8).position, MetricSpec("chordal")),
    "line-euclid": (line(8, 2.0).position, MetricSpec("euclidean")),
}


def _random_dist(side, rng, sparse=False):
    p = rng.random(side.size)
    if sparse:
        p[rng.random(side.size) < 0.5] = 0
        p[rng.integers(side.size)] += 0.1
    return Distribution(side, p / p.sum())


@pytest.mark.parametrize("key", sorted(SIDES))
def test_metric_axioms(key):
    side, m = SIDES[key]
    D = m.distance_matrix(side)
    assert np.all(np.diag(D) == 0)
    off = ~np.eye(side.size, dtype=bool)
    assert np.all(D[off] > 0)
    np.testing.assert_allclose(D, D.T, atol=1e-14)
    # triangle inequality over all triples
    assert np.all(D[:, None, :] <= D[:, :, None] + D[None, :, :] + 1e-12)


@pytest.mark.parametrize("key", sorted(SIDES))
def test_translation_invariance(key):
    side, m = SIDES[key]
    if not all(a.periodic for a in side.axes):
        pytest.skip("shifts leave the truncated range")
    D = m.distance_matrix(side)
    for j in range(side.size):
        t, _ = side.shift_indices(side.labels[j])
        np.testing.assert_allclose(D[np.ix_(t, t)], D, atol=1e-12)


def test_hamming_per_site():
    side = bits(3).position
    m = MetricSpec("hamming")
    i, j = side.index((0, 0, 0)), side.index((1, 0, 1))
    assert m.distance_matrix(side)[i, j] == pytest.approx(2 / 3)


def test_chordal_and_arc_values():
    side = circle(4).position
    assert MetricSpec("chordal").distance_from_zero(side)[2] == pytest.approx(2.0)
    assert MetricSpec("arc").distance_from_zero(side)[3] == pytest.approx(np.pi / 2)


def test_metric_parsing_and_validation():
    assert parse_metric("abs", "inf").is_inf
    assert parse_metric("cyclic_absolute", "2") == MetricSpec("cyclic-abs", 2.0)
    with pytest.raises(ValueError):
        MetricSpec("manhattan")
    with pytest.raises(ValueError):
        MetricSpec("abs", 0.5)
    with pytest.raises(ValueError):
        MetricSpec("chordal").check(cyclic(3).position)


def test_distribution_validation():
    side = cyclic(3).position
    with pytest.raises(ValueError):
        Distribution(side, [0.5, 0.5, 0.5])
    with pytest.raises(ValueError):
        Distribution(side, [1.5, -0.5, 0.0])
    d = Distribution(cyclic(4).momentum, [0.25] * 4)
    np.testing.assert_allclose(d.density, 1.0)


@pytest.mark.parametrize("d", [2, 3, 5, 8])
def test_spread_of_uniform_discrete(d):
    mu = Distribution.uniform(cyclic(d).position)
    assert spread(mu, MetricSpec("discrete")).value == pytest.approx(1 - 1 / d)


def test_spread_origin_wins_ties():
    mu = Distribution.uniform(cyclic(4).position)
    assert spread(mu, MetricSpec("discrete")).index == 0


def test_spread_finds_off_center_minimizer():
    side = cyclic(5).position
    mu = Distribution(side, [0.1, 0.1, 0.1, 0.6, 0.1])
    s = spread(mu, MetricSpec("discrete"))
    assert s.index == 3
    assert s.value == pytest.approx(0.4)


def test_spread_refines_between_grid_points():
    g = line(16, 4.0)
    side = g.position
    p = np.zeros(16)
    p[8], p[9] = 0.5, 0.5  # points 0 and h
    mu = Distribution(side, p)
    s = spread(mu, MetricSpec("abs", 2))
    h = side.axes[0].scale
    assert s.value == pytest.approx(h / 2, rel=1e-8)
    assert s.center == pytest.approx(h / 2, rel=1e-6)


def test_deviation_inf_exponent_is_support_radius():
    side = zint(5).position
    p = np.zeros(side.size)
    p[[3, 5, 9]] = [0.2, 0.5, 0.3]  # labels −2, 0, 4
    mu = Distribution(side, p)
    assert deviation(mu, 0, MetricSpec("abs", math.inf)) == 4
    assert spread(mu, MetricSpec("abs", math.inf)).value == 3


def _tv(a, b):
    return 1.0 - np.minimum(a, b).sum()


@given(st.integers(2, 8), st.integers(0, 2**31 - 1))
@settings(max_examples=40, deadline=None)
def test_transport_discrete_equals_total_variation(d, seed):
    rng = np.random.default_rng(seed)
    side = cyclic(d).position
    a, b = _random_dist(side, rng, True), _random_dist(side, rng, True)
    got = transport_distance(a, b, MetricSpec("discrete"))
    assert got == pytest.approx(_tv(a.probs, b.probs), abs=1e-9)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=40, deadline=None)
def test_transport_abs_line_equals_cdf_formula(seed):
    rng = np.random.default_rng(seed)
    side = zint(5).position
    a, b = _random_dist(side, rng, True), _random_dist(side, rng, True)
    ref = np.abs(np.cumsum(a.probs) - np.cumsum(b.probs)).sum()
    assert transport_distance(a, b, MetricSpec("abs")) == pytest.approx(ref, abs=1e-9)


@pytest.mark.parametrize("key", sorted(SIDES))
@pytest.mark.parametrize("alpha", [1.0, 2.0, math.inf])
def test_transport_triangle_inequality(key, alpha, rng):
    side, m0 = SIDES[key]
    m = MetricSpec(m0.kind, alpha)
    for _ in range(4):
        a, b, c = (_random_dist(side, rng, True) for _ in range(3))
        ab = transport_distance(a, b, m)
        bc = transport_distance(b, c, m)
        ac = transport_distance(a, c, m)
        assert ac <= ab + bc + 1e-8
        assert transport_distance(a, a, m) == pytest.approx(0, abs=1e-8)
        assert ab == pytest.approx(transport_distance(b, a, m), abs=1e-8)


def test_transport_from_point_is_deviation(rng):
    side, m = SIDES["cyclic6-cyclicabs"]
    m = MetricSpec(m.kind, 2.0)
    mu = _random_dist(side, rng)
    pt = Distribution.point(side, 2)
    assert transport_distance(pt, mu, m) == pytest.approx(deviation(mu, 2, m))
    # and via the LP after splitting the point mass in the other argument
    assert transport_distance(mu, pt, m) == pytest.approx(deviation(mu, 2, m))


def test_bottleneck_simple_case():
    side = zint(3).position
    a = Distribution(side, [0.5, 0, 0, 0, 0, 0, 0.5])  # labels −3, 3
    b = Distribution(side, [0, 0.5, 0, 0, 0, 0.5, 0])  # labels −2, 2
    assert transport_distance(a, b, MetricSpec("abs", math.inf)) == 1


def test_shift_and_convolve():
    side = cyclic(4).position
    mu = Distribution(side, [0.1, 0.2, 0.3, 0.4])
    np.testing.assert_allclose(shift_distribution(mu, 1).probs, [0.4, 0.1, 0.2, 0.3])
    delta = Distribution.point(side, 1)
    np.testing.assert_allclose(convolve_distributions(mu, delta).probs, [0.4, 0.1, 0.2, 0.3])
    uni = Distribution.uniform(side)
    np.testing.assert_allclose(convolve_distributions(mu, uni).probs, 0.25)


def test_truncated_shift_raises_and_convolution_warns():
    side = zint(2).position
    mu = Distribution.point(side, 2)
    with pytest.raises(RangeError):
        shift_distribution(mu, 1)
    spread_mu = Distribution(side, [0.2] * 5)
    with pytest.warns(UserWarning):
        convolve_distributions(spread_mu, Distribution.point(side, 1))


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=25, deadline=None)
def test_convolution_bound(seed):
    # transport distance between μ and μ∗ν never exceeds the deviation of ν from 0
    rng = np.random.default_rng(seed)
    side = cyclic(5).position
    m = MetricSpec("cyclic-abs", 1.5)
    mu, nu = _random_dist(side, rng), _random_dist(side, rng)
    conv = convolve_distributions(mu, nu)
    assert transport_distance(conv, mu, m) <= deviation(nu, 0, m) + 1e-9
