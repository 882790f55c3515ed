import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp
from scipy import integrate

from borel_laplace import (BorelSum, Dahlquist, DegenerateInput, PadeApproximant, PoleOnRay,
                           QuadraticGrowth, ZeroProblem, borel_sum, borel_transform,
                           default_degrees, evaluate_borel_sum, evaluate_borel_sum_derivative,
                           evaluate_truncated, gauss_laguerre_rule, generate_series,
                           pade_approximant)
from borel_laplace.summation import pade_columns


def dahlquist_series(lam, K, u0=1.0):
    return generate_series(Dahlquist(lam), 0.0, [u0], K)


# -- Borel transform --------------------------------------------------------

def test_borel_transform_of_exponential():
    lam = -0.7
    bc = borel_transform(dahlquist_series(lam, 4))[:, 0]
    np.testing.assert_allclose(bc, [lam, lam ** 2 / 2, lam ** 3 / 12, lam ** 4 / 144], rtol=1e-15)


def test_borel_transform_of_constant():
    bc = borel_transform(generate_series(ZeroProblem(), 0.0, [3.0], 2))
    np.testing.assert_array_equal(bc, np.zeros((2, 1)))


def test_borel_transform_of_geometric_series():
    bc = borel_transform(generate_series(QuadraticGrowth(), 0.0, [1.0], 5))[:, 0]
    np.testing.assert_allclose(bc, [1 / math.factorial(k) for k in range(5)], rtol=1e-15)


def test_default_degrees():
    assert default_degrees(10) == (4, 5)
    assert default_degrees(11) == (5, 5)
    assert default_degrees(4) == (1, 2)
    assert default_degrees(2) == (0, 1)


# -- Padé -------------------------------------------------------------------

def test_pade_of_exponential_borel_series():
    p = pade_approximant([1, 1 / 2, 1 / 12, 1 / 144], 1, 2)
    np.testing.assert_allclose(p.numer, [1, 7 / 24], rtol=1e-12)
    np.testing.assert_allclose(p.denom, [1, -5 / 24, 1 / 48], rtol=1e-12)
    assert (p.effective_Ka, p.effective_Kb) == (1, 2)


def test_pade_geometric_series():
    # the [1/1] solution is (1 + 0 x) / (1 - x); the vanishing a_1 is trimmed
    p = pade_approximant([1.0, 1.0, 1.0], 1, 1)
    np.testing.assert_allclose(p.denom, [1, -1], atol=1e-15)
    np.testing.assert_allclose(np.pad(p.numer, (0, 2 - len(p.numer))), [1, 0], atol=1e-15)
    x = np.linspace(-0.9, 0.9, 7)
    np.testing.assert_allclose(p(x), 1 / (1 - x), rtol=1e-14)


@pytest.mark.parametrize("Ka,Kb", [(0, 2), (1, 1), (2, 0)])
def test_pade_of_constant(Ka, Kb):
    p = pade_approximant([2.5, 0.0, 0.0], Ka, Kb)
    np.testing.assert_allclose(p(np.array([0.0, 1.0, 7.0])), 2.5, rtol=1e-15)
    assert p.effective_Kb == 0


def test_pade_degenerate_input():
    with pytest.raises(DegenerateInput):
        pade_approximant([0.0, 0.0, 0.0], 1, 1)
    z = pade_approximant([0.0, 0.0, 0.0], 1, 1, allow_zero=True)
    assert z(np.array(3.0)) == 0


def test_pade_argument_checks():
    with pytest.raises(ValueError):
        pade_approximant([1.0, 2.0], 1, 1)
    with pytest.raises(ValueError):
        pade_approximant([1.0, 2.0, 3.0], 1, 1, rcond=0)


def test_pade_reduces_degree_for_rational_input():
    # 1/(1 - x/2) expanded; a [2/2] request collapses to [0/1]
    c = 0.5 ** np.arange(5)
    p = pade_approximant(c, 2, 2)
    assert (p.effective_Ka, p.effective_Kb) == (0, 1)
    np.testing.assert_allclose(p.denom, [1, -0.5], rtol=1e-13)


def test_pade_complex_coefficients():
    lam = 0.3 + 1.1j
    c = np.array([lam ** (k + 1) / math.factorial(k) for k in range(8)])
    p = pade_approximant(c, 3, 4)
    np.testing.assert_allclose(p.taylor(7), c, rtol=1e-10, atol=1e-14)


def test_positive_real_poles():
    p = PadeApproximant(np.array([1.0]), np.array([1.0, -1.5, 0.5]))  # (1 - x)(1 - x/2)
    np.testing.assert_allclose(p.positive_real_poles(), [1.0, 2.0])
    q = PadeApproximant(np.array([1.0]), np.array([1.0, 0.0, 1.0]))  # poles at +-i
    assert len(q.positive_real_poles()) == 0


def test_pade_derivative_matches_finite_difference():
    p = pade_approximant([1, 1 / 2, 1 / 12, 1 / 144], 1, 2)
    x, h = 0.7, 1e-6
    fd = (p(np.array(x + h)) - p(np.array(x - h))) / (2 * h)
    assert p.derivative(np.array(x)) == pytest.approx(fd, rel=1e-8)


coeff_arrays = hnp.arrays(np.float64, st.integers(2, 12),
                          elements=st.floats(-10, 10, allow_nan=False, allow_infinity=False))


@given(c=coeff_arrays, split=st.floats(0, 1))
@settings(max_examples=300, deadline=None)
def test_pade_matching_property(c, split):
    if np.linalg.norm(c) < 1e-3:
        c = c + 1.0
    L = len(c) - 1
    Ka = int(round(split * L))
    Kb = L - Ka
    p = pade_approximant(c, Ka, Kb)
    assert p.denom[0] == 1
    order = p.effective_Ka + p.effective_Kb
    # linearised matching: denom * c - numer vanishes through ``order``
    defect = np.convolve(p.denom, c)[: order + 1]
    defect[: len(p.numer)] -= p.numer[: order + 1]
    bnorm = np.abs(p.denom).sum()
    assert np.all(np.abs(defect) <= 1e-10 * bnorm * np.abs(c).sum())
    if bnorm < 10:
        # re-expansion is only well conditioned for modest denominators
        err = np.abs(p.taylor(order) - c[: order + 1])
        assert np.all(err <= 1e-8 * np.abs(c).sum())


@given(c=hnp.arrays(np.float64, (9, 5), elements=st.floats(-5, 5)), Ka=st.integers(0, 8))
@settings(max_examples=60, deadline=None)
def test_pade_columns_matches_scalar_routine(c, Ka):
    Kb = 8 - Ka
    batch = pade_columns(c, Ka, Kb)
    for j, p in enumerate(batch):
        q = pade_approximant(c[:, j], Ka, Kb, allow_zero=True)
        assert (p.effective_Ka, p.effective_Kb) == (q.effective_Ka, q.effective_Kb)
        np.testing.assert_allclose(p.numer, q.numer, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(p.denom, q.denom, rtol=1e-9, atol=1e-12)


# -- quadrature -------------------------------------------------------------

def test_gauss_laguerre_one_point():
    r = gauss_laguerre_rule(1)
    np.testing.assert_allclose(r.nodes, [1.0])
    np.testing.assert_allclose(r.weights, [1.0])


def test_gauss_laguerre_two_points():
    r = gauss_laguerre_rule(2)
    s = math.sqrt(2)
    np.testing.assert_allclose(r.nodes, [2 - s, 2 + s], rtol=1e-15)
    np.testing.assert_allclose(r.weights, [(2 + s) / 4, (2 - s) / 4], rtol=1e-14)


def test_gauss_laguerre_20_fifth_moment():
    r = gauss_laguerre_rule(20)
    assert np.sum(r.weights * r.nodes ** 5) == pytest.approx(120.0, rel=1e-10)


def test_gauss_laguerre_agrees_with_numpy():
    for n in (5, 20, 60):
        x, w = np.polynomial.laguerre.laggauss(n)
        r = gauss_laguerre_rule(n)
        np.testing.assert_allclose(r.nodes, x, rtol=1e-12)
        big = w > 1e-200
        np.testing.assert_allclose(r.weights[big], w[big], rtol=1e-9)


@pytest.mark.parametrize("n", [1, 2, 7, 20, 50, 100])
def test_gauss_laguerre_invariants(n):
    r = gauss_laguerre_rule(n)
    assert np.all(r.nodes > 0) and np.all(np.diff(r.nodes) > 0)
    assert np.all(r.weights >= 0)
    assert r.weights.sum() == pytest.approx(1.0, abs=1e-12)


@given(n=st.integers(1, 30), data=st.data())
@settings(max_examples=80, deadline=None)
def test_quadrature_exactness_property(n, data):
    k = data.draw(st.integers(0, 2 * n - 1))
    r = gauss_laguerre_rule(n)
    moment = np.sum(r.weights * r.nodes ** k)
    assert moment == pytest.approx(math.factorial(k), rel=1e-10)


def test_gauss_laguerre_range():
    with pytest.raises(ValueError):
        gauss_laguerre_rule(0)
    with pytest.raises(ValueError):
        gauss_laguerre_rule(201)
    assert gauss_laguerre_rule(200).n_points == 200


# -- Borel sums -------------------------------------------------------------

def test_borel_sum_at_origin_returns_initial_state():
    s = generate_series(Dahlquist(-2.0), 1.5, [0.3], 10)
    bs = borel_sum(s, 5, 4, gauss_laguerre_rule(20))
    assert evaluate_borel_sum(bs, 1.5)[0] == 0.3


def laplace_oracle(P, tau):
    """``tau * int_0^inf P(tau x) exp(-x) dx`` by adaptive quadrature."""
    val, _ = integrate.quad(lambda x: float(P(np.array(tau * x))) * math.exp(-x), 0, np.inf,
                            epsabs=1e-14, epsrel=1e-13)
    return tau * val


def test_borel_sum_dahlquist_k4_matches_laplace_oracle():
    s = dahlquist_series(-1.0, 4)
    bs = borel_sum(s, 1, 2, gauss_laguerre_rule(20))
    val = evaluate_borel_sum(bs, 1.0)[0]
    assert val == pytest.approx(1 + laplace_oracle(bs.pades[0], 1.0), abs=1e-12)
    assert val == pytest.approx(math.exp(-1), abs=4e-3)


@pytest.mark.xfail(strict=True, reason="the exact [1/2] Borel sum at t=1 is 0.371616, "
                   "3.7e-3 away from exp(-1)")
def test_borel_sum_dahlquist_k4_within_2e3_of_exponential():
    bs = borel_sum(dahlquist_series(-1.0, 4), 1, 2, gauss_laguerre_rule(20))
    assert evaluate_borel_sum(bs, 1.0)[0] == pytest.approx(math.exp(-1), abs=2e-3)


def test_borel_sum_geometric_series():
    # [5/4] has no real pole; the Laplace integral of the continuation of
    # exp(xi) out to 0.5 * max node limits the accuracy to about 1e-3
    s = generate_series(QuadraticGrowth(), 0.0, [1.0], 10)
    bs = borel_sum(s, 5, 4, gauss_laguerre_rule(20))
    val = evaluate_borel_sum(bs, 0.5)[0]
    assert val == pytest.approx(1 + laplace_oracle(bs.pades[0], 0.5), abs=1e-5)
    assert val == pytest.approx(2.0, abs=2e-3)
    assert evaluate_borel_sum_derivative(bs, 0.5)[0] == pytest.approx(4.0, abs=5e-2)


@pytest.mark.xfail(strict=True, reason="Padé continuation of exp(xi) at K=10 bounds the error "
                   "near 1e-3, see the test above")
@pytest.mark.parametrize("Ka,Kb", [(4, 5), (5, 4)])
def test_borel_sum_geometric_series_within_1e6(Ka, Kb):
    s = generate_series(QuadraticGrowth(), 0.0, [1.0], 10)
    bs = borel_sum(s, Ka, Kb, gauss_laguerre_rule(20))
    assert bs.evaluate(0.5, check=False)[0] == pytest.approx(2.0, abs=1e-6)
    assert bs.derivative(0.5, check=False)[0] == pytest.approx(4.0, abs=1e-4)


def test_geometric_series_default_degrees_hit_pole_check():
    s = generate_series(QuadraticGrowth(), 0.0, [1.0], 10)
    bs = borel_sum(s, *default_degrees(10), gauss_laguerre_rule(20))
    assert bs.first_ray_pole() < 0.5 * bs.rule.nodes[-1]
    with pytest.raises(PoleOnRay):
        evaluate_borel_sum(bs, 0.5)


def test_borel_sum_derivative_examples():
    s = dahlquist_series(-1.0, 10)
    bs = borel_sum(s, 5, 4, gauss_laguerre_rule(20))
    assert evaluate_borel_sum_derivative(bs, 0.0)[0] == pytest.approx(-1.0, abs=1e-10)
    c = generate_series(ZeroProblem(), 0.0, [2.0], 6)
    cs = borel_sum(c, 2, 3, gauss_laguerre_rule(20))
    assert evaluate_borel_sum_derivative(cs, 0.8)[0] == 0
    assert evaluate_borel_sum(cs, 0.8)[0] == 2.0


def test_derivative_at_origin_equals_first_coefficient():
    s = generate_series(QuadraticGrowth(), 0.0, [0.7], 10)
    bs = borel_sum(s, 4, 5, gauss_laguerre_rule(20))
    assert evaluate_borel_sum_derivative(bs, 0.0)[0] == pytest.approx(s.coeffs[1, 0], rel=1e-10)


def test_derivative_matches_finite_difference():
    s = dahlquist_series(-3.0, 10)
    bs = borel_sum(s, 5, 4, gauss_laguerre_rule(20))
    t, h = 0.4, 1e-6
    fd = (evaluate_borel_sum(bs, t + h) - evaluate_borel_sum(bs, t - h)) / (2 * h)
    np.testing.assert_allclose(evaluate_borel_sum_derivative(bs, t), fd, rtol=1e-7)


def test_round_trip_inside_disc_of_convergence():
    s = dahlquist_series(-1.0, 10)
    bs = borel_sum(s, 5, 4, gauss_laguerre_rule(20))
    for t in (0.05, 0.1, 0.2):
        trunc = evaluate_truncated(s, t)[0]
        tail = t ** 11 / math.factorial(11)
        assert abs(evaluate_borel_sum(bs, t)[0] - trunc) <= 10 * tail + 1e-15


def test_pole_on_ray_raises():
    # [0/1] continuation of exp is 1 / (1 - xi), pole at xi = 1
    s = generate_series(QuadraticGrowth(), 0.0, [1.0], 2)
    bs = borel_sum(s, 0, 1, gauss_laguerre_rule(20))
    assert bs.first_ray_pole() == pytest.approx(1.0)
    evaluate_borel_sum(bs, 0.01)
    with pytest.raises(PoleOnRay):
        evaluate_borel_sum(bs, 0.5)


def test_backward_evaluation_rejected():
    bs = borel_sum(dahlquist_series(-1.0, 4), 1, 2, gauss_laguerre_rule(20))
    with pytest.raises(ValueError):
        evaluate_borel_sum(bs, -0.1)
    with pytest.raises(ValueError):
        evaluate_borel_sum_derivative(bs, -0.1)


def test_vector_series_components_are_independent():
    from borel_laplace import LotkaVolterra
    s = generate_series(LotkaVolterra(), 0.0, [2.0, 1.0], 10)
    bs = borel_sum(s, 5, 4, gauss_laguerre_rule(20))
    S, dS = bs.evaluate_many([0.1, 0.2])
    assert S.shape == dS.shape == (2, 2)
    for j in range(2):
        p = bs.pades[j]
        manual = s.coeffs[0, j] + 0.2 * np.sum(p(0.2 * bs.rule.nodes) * bs.rule.weights)
        assert S[1, j] == pytest.approx(manual, rel=1e-14)


def test_from_pades_pads_to_common_degree():
    pades = [PadeApproximant(np.array([1.0]), np.array([1.0])),
             PadeApproximant(np.array([1.0, 2.0]), np.array([1.0, 0.5, 0.1]))]
    bs = BorelSum.from_pades(0.0, np.array([1.0, 2.0]), pades, gauss_laguerre_rule(5))
    assert bs.numer.shape == (2, 2) and bs.denom.shape == (2, 3)


def test_balanced_pade_is_scale_invariant():
    # c_k(lam) = lam^(k+1) d_k, so P_lam(z) = lam P_1(lam z) exactly
    d = np.array([1 / (math.factorial(k) * math.factorial(k + 1)) for k in range(10)])
    ref = pade_approximant(d, 5, 4)
    assert (ref.effective_Ka, ref.effective_Kb) == (5, 4)
    lam = -0.2
    c = lam ** (np.arange(10) + 1) * d
    plain = pade_approximant(c, 5, 4)
    bal = pade_approximant(c, 5, 4, balance=True)
    assert plain.effective_Kb < 4
    assert (bal.effective_Ka, bal.effective_Kb) == (5, 4)
    z = np.linspace(-5, 5, 11)
    np.testing.assert_allclose(bal(z), lam * ref(lam * z), rtol=1e-9)


def test_balanced_columns_match_scalar():
    rng = np.random.default_rng(5)
    c = rng.standard_normal((8, 4)) * (0.1 ** np.arange(8))[:, None]
    cols = pade_columns(c, 3, 4, balance=True)
    for j, p in enumerate(cols):
        q = pade_approximant(c[:, j], 3, 4, balance=True)
        np.testing.assert_allclose(p.numer, q.numer, rtol=1e-10, atol=1e-14)
        np.testing.assert_allclose(p.denom, q.denom, rtol=1e-10, atol=1e-14)
