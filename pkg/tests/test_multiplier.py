import numpy as np
import pytest

from curveavg import (ConeChart, CurveSpec, CutoffSpec, DomainError, alpha_n,
                      beta_n, decay_profile, derivative_bound_check, mu_hat,
                      mu_hat_batch, multiplier_sample)


@pytest.fixture(scope="module")
def moment3():
    return CurveSpec.moment(3)


@pytest.fixture(scope="module")
def chi():
    return CutoffSpec(delta=0.9)


@pytest.fixture(scope="module")
def chart(moment3):
    return ConeChart(curve=moment3, aperture=0.95)


def test_alpha_2_is_the_fresnel_integral():
    # int_R e^{i v^2} dv = sqrt(pi/2) (1 + i), the classical Fresnel value
    want = np.sqrt(np.pi / 2) * (1 + 1j)
    assert alpha_n(2) == pytest.approx(want, rel=1e-14)


def test_alpha_3_frozen_value():
    # (2/3) Gamma(1/3) sin(pi/3), evaluated independently with math.gamma
    a = alpha_n(3)
    assert a.imag == 0.0
    assert a.real == pytest.approx(1.5466858841559796, rel=1e-15)


def test_alpha_4_modulus_and_phase():
    a = alpha_n(4)
    assert abs(a) == pytest.approx(1.8128049541109543, rel=1e-13)  # Gamma(1/4)/2
    assert np.angle(a) == pytest.approx(np.pi / 8, rel=1e-13)


def test_beta_n():
    assert beta_n(2) == 1 and beta_n(3) == 0 and beta_n(5) == 0


def test_mu_hat_at_zero_is_cutoff_mass(moment3, chi):
    # mu_hat_t(0) = integral of chi, for every t
    for t in (1.0, 1.7, 2.0):
        v = mu_hat(moment3, chi, t, np.zeros(3))
        assert v == pytest.approx(chi.integral, rel=1e-8)


def test_mu_hat_conjugate_symmetry(moment3, chi):
    xi = np.array([0.3, -2.0, 11.0])
    a = mu_hat(moment3, chi, 1.3, xi)
    b = mu_hat(moment3, chi, 1.3, -xi)
    assert b == pytest.approx(np.conj(a), rel=1e-12)


def test_mu_hat_batch_matches_scalar(moment3, chi):
    ts = [1.0, 1.5]
    xis = np.array([[0.0, 0.0, 40.0], [1.0, 3.0, 60.0]])
    grid = mu_hat_batch(moment3, chi, ts, xis)
    assert grid.shape == (2, 2)
    for i, t in enumerate(ts):
        for j in range(2):
            # scalar calls size their panel ladder per point, the batch
            # shares one ladder: agreement is at the quadrature tolerance
            assert grid[i, j] == pytest.approx(
                mu_hat(moment3, chi, t, xis[j]), rel=1e-8)


def test_mu_hat_time_guard(moment3, chi):
    with pytest.raises(DomainError):
        mu_hat(moment3, chi, 0.5, np.array([0.0, 0.0, 8.0]))
    with pytest.raises(DomainError):
        mu_hat(moment3, chi, 2.5, np.array([0.0, 0.0, 8.0]))


def test_decay_profile_on_cone_limit(moment3, chi):
    """|mu_hat_1(lambda e_3)| (1+lambda)^{1/3} -> |alpha_3| 6^{1/3} chi(0).

    2.810514770742616 was frozen from this quadrature at lambda = 2^21 and
    agrees with the stationary-phase closed form to 7 digits at 2^12.
    """
    rows = decay_profile(moment3, chi, 1.0, np.array([0.0, 0.0, 1.0]),
                         [2.0**k for k in range(6, 13)])
    vals = np.array([v for _, v in rows])
    assert vals[-1] == pytest.approx(2.810514770742616, rel=1e-3)
    # deviation from the limit shrinks monotonically along the dyadic ray
    dev = np.abs(vals - 2.810514770742616)
    assert np.all(np.diff(dev) < 0)


def test_decay_profile_off_cone_is_faster(moment3, chi):
    on = decay_profile(moment3, chi, 1.0, np.array([0.0, 0.0, 1.0]),
                       [64.0, 4096.0])
    off = decay_profile(moment3, chi, 1.0, np.array([1.0, 0.0, 0.0]),
                        [64.0, 4096.0])
    assert off[-1][1] < 0.05 * on[-1][1]     # e_1 is not a cone direction
    assert off[-1][1] < 0.2 * off[0][1]


def test_decay_profile_requires_unit_direction(moment3, chi):
    with pytest.raises(DomainError):
        decay_profile(moment3, chi, 1.0, np.array([0.0, 0.0, 2.0]), [64.0])


def test_multiplier_sample_converges_to_leading(moment3, chi, chart):
    lam = 2.0**12
    s = multiplier_sample(moment3, chi, chart, 1.0, np.array([0.0, 0.0, lam]))
    # m = e^{i t phi} mu_hat tracks `leading`, not the un-normalized reference:
    # the gap to the reference stays at the fixed factor (3!)^{1/3} = 1.817
    assert abs(s.m) * lam ** (1 / 3) == pytest.approx(2.8105, rel=5e-3)
    assert s.deficit_leading < 0.02 * abs(s.m)
    assert s.deficit > 0.4 * abs(s.m)


def test_multiplier_sample_deficit_shrinks(moment3, chi, chart):
    lams = [2.0**8, 2.0**10, 2.0**12]
    gaps = [multiplier_sample(moment3, chi, chart, 1.5,
                              np.array([0.0, 0.0, lam])).deficit_leading
            for lam in lams]
    assert gaps[2] < gaps[1] < gaps[0]


def test_derivative_bound_table(moment3, chi, chart):
    lam = 2.0**8
    rows = derivative_bound_check(moment3, chi, chart, 1.0,
                                  np.array([0.0, 0.0, lam]))
    # multi-indices |alpha| <= 2 in R^3: 1 + 3 + 6
    assert len(rows) == 10
    for alpha, value, bound, ratio in rows:
        assert len(alpha) == 3 and sum(alpha) <= 2
        assert bound == pytest.approx(lam ** (-(1 + sum(alpha)) / 3), rel=1e-12)
        assert ratio == pytest.approx(value / bound, rel=1e-12)
        assert np.isfinite(ratio) and ratio >= 0


def test_derivative_bound_needs_resolvable_lambda(moment3, chi, chart):
    with pytest.raises(DomainError):
        derivative_bound_check(moment3, chi, chart, 1.0,
                               np.array([0.0, 0.0, 16.0]))
