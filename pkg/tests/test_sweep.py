import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curveavg import (DomainError, RunConfig, SweepReport, concentration_check,
                      critical_exponent, expected_slopes, fit_slope,
                      orthogonality_check, piece_l2_lower, sharpness_sweep)
from curveavg.sweep import _trend_mostly_decreasing


# --- the critical exponent ----------------------------------------------------

def test_exponent_table_n3():
    # regimes: 1/n up to p=4, the interpolating piece to p=8, then 2/p
    table = {
        2: Fraction(1, 3),
        3: Fraction(1, 3),
        4: Fraction(1, 3),
        5: Fraction(3, 10),
        6: Fraction(5, 18),
        8: Fraction(1, 4),
        10: Fraction(1, 5),
        40: Fraction(1, 20),
    }
    for p, want in table.items():
        got = critical_exponent(p, 3)
        assert got == want and isinstance(got, Fraction)


def test_exponent_table_other_dimensions():
    assert critical_exponent(2, 2) == Fraction(1, 2)
    assert critical_exponent(8, 2) == Fraction(1, 4)
    assert critical_exponent(12, 4) == Fraction(1, 6)
    assert critical_exponent(4, 7) == Fraction(1, 7)


def test_exponent_pieces_agree_at_breakpoints():
    for n in range(2, 7):
        lo = Fraction(1, n)
        assert critical_exponent(4, n) == lo == (Fraction(1, 2) + Fraction(2, 4)) / n
        hi = 4 * (n - 1)
        assert critical_exponent(hi, n) == Fraction(2, hi) \
            == (Fraction(1, 2) + Fraction(2, hi)) / n


def test_exponent_float_and_infinite_p():
    assert critical_exponent(5.0, 3) == pytest.approx(0.3)
    assert isinstance(critical_exponent(5.0, 3), float)
    assert critical_exponent(np.inf, 3) == 0.0


def test_exponent_nonincreasing_in_p():
    sigma = [critical_exponent(p, 3) for p in np.linspace(2.0, 60.0, 200)]
    assert all(a >= b for a, b in zip(sigma, sigma[1:]))


def test_exponent_rejects_bad_arguments():
    with pytest.raises(DomainError):
        critical_exponent(1.5, 3)
    with pytest.raises(DomainError):
        critical_exponent(4, 1)
    with pytest.raises(DomainError):
        critical_exponent(4, 3.0)


def test_expected_slopes_are_consistent():
    for n in (3, 4):
        for p in (4.0, 6.0, 8.0, 12.0):
            s = expected_slopes(p, n)
            assert s["output"] - s["input"] == pytest.approx(s["quotient"], abs=1e-12)
            if 4 <= p <= 4 * (n - 1):   # middle regime: quotient = -sigma(p, n)
                assert s["quotient"] == pytest.approx(-float(critical_exponent(p, n)))


# --- slope fitting --------------------------------------------------------------

def test_fit_recovers_exact_power_law():
    pairs = [(lam, 0.7 * lam ** -0.31) for lam in (8.0, 16.0, 32.0, 64.0)]
    fit = fit_slope(pairs)
    assert fit.slope == pytest.approx(-0.31, abs=1e-12)
    assert 2 ** fit.intercept == pytest.approx(0.7, rel=1e-12)
    assert fit.max_residual < 1e-12


@settings(max_examples=25, deadline=None)
@given(slope=st.floats(-2, 2), scale=st.floats(0.01, 100))
def test_fit_roundtrip_property(slope, scale):
    lams = (4.0, 8.0, 16.0, 32.0, 64.0)
    fit = fit_slope([(lam, scale * lam ** slope) for lam in lams])
    assert fit.slope == pytest.approx(slope, abs=1e-9)


def test_fit_needs_three_points():
    with pytest.raises(DomainError, match="need >= 3"):
        fit_slope([(8.0, 1.0), (16.0, 0.5)])


def test_fit_rejects_nonpositive_values():
    with pytest.raises(DomainError):
        fit_slope([(8.0, 1.0), (16.0, 0.0), (32.0, 0.25)])


def test_trend_counter():
    assert _trend_mostly_decreasing([5.0, 4.0, 3.0])
    assert _trend_mostly_decreasing([5.0, 6.0, 4.0, 3.0])      # one inversion ok
    assert not _trend_mostly_decreasing([3.0, 4.0, 5.0])
    assert not _trend_mostly_decreasing([5.0, 6.0, 4.0, 5.0], allowed_inversions=1)


# --- a miniature sweep -----------------------------------------------------------

LOOSE = {"input": 1.0, "output": 1.0, "quotient": 1.0}


@pytest.fixture(scope="module")
def tiny_cfg():
    # small lambdas and coarse quadrature: structure checks only, the slopes
    # here are nowhere near asymptotic
    return RunConfig(n=3, rho=1.0, c0=0.7, delta=0.9, aperture=0.95,
                     grid_policy="windowed", oversample=2, time_nodes=5,
                     lambdas=(32.0, 45.0, 64.0), ps=(4.0,),
                     checks=("orthogonality", "slopes", "floor"),
                     piece_floor=0.2, epsilon=0.3)


@pytest.fixture(scope="module")
def tiny_report(tiny_cfg):
    return sharpness_sweep(tiny_cfg, jobs=1, slope_tols=LOOSE)


def test_sweep_requires_three_lambdas(tiny_cfg):
    from dataclasses import replace
    with pytest.raises(DomainError, match="3 lambda"):
        sharpness_sweep(replace(tiny_cfg, lambdas=(32.0, 64.0)))


def test_sweep_cell_structure(tiny_report):
    assert isinstance(tiny_report, SweepReport)
    assert [c["lam"] for c in tiny_report.cells] == [32.0, 45.0, 64.0]
    for c in tiny_report.cells:
        assert c["nnu"] == 2 * int(0.7 * c["lam"] ** (1 / 3)) + 1
        assert set(c["norms_in"]) == {2.0, 4.0}   # 2.0 always measured
        assert len(c["t_nodes_short"]) == 5
        assert len(c["piece_min_by_nu"]) == c["nnu"]
        assert len(c["piece_reference"]) == c["nnu"]
        assert c["runtime_s"] > 0


def test_sweep_quotient_is_norm_ratio(tiny_report):
    for c in tiny_report.cells:
        assert c["quotient"][4.0] == pytest.approx(
            c["out_short"][4.0] / c["norms_in"][4.0], rel=1e-12)


def test_sweep_orthogonality_defect_is_roundoff(tiny_report):
    assert max(c["defect"] for c in tiny_report.cells) <= 1e-12


def test_sweep_checks_pass_with_loose_bands(tiny_report):
    names = [c["name"] for c in tiny_report.checks]
    assert "orthogonality" in names and "piece-floor" in names
    assert any(name.startswith("slope/quotient") for name in names)
    assert tiny_report.passed


def test_sweep_report_serializes(tiny_report):
    d = tiny_report.to_dict()
    assert set(d["slopes"]) == {"4"}
    assert set(d["slopes"]["4"]) == {"input", "output", "quotient"}
    json.dumps(d)   # everything plain
    assert d["config"]["lambdas"] == [32.0, 45.0, 64.0]


def test_sweep_quotient_decreases_even_here(tiny_report):
    # the smoothing gain shows up well before the slopes settle
    q = [c["quotient"][4.0] for c in tiny_report.cells]
    assert tiny_report.quotient_monotone
    assert q[-1] < q[0]


def test_piece_lower_bound_report(tiny_cfg):
    rep = piece_l2_lower(tiny_cfg, 32.0)
    assert rep.lam == 32.0
    assert len(rep.min_by_nu) == len(rep.reference_by_nu) == 5
    assert rep.min_ratio == min(rep.min_by_nu) > 0.2
    assert all(r > 0 for r in rep.reference_by_nu)


def test_orthogonality_check_single_time(tiny_cfg):
    assert orthogonality_check(tiny_cfg, 32.0, 1.0) <= 1e-12


def test_concentration_check_is_a_fraction(tiny_cfg):
    frac = concentration_check(tiny_cfg, 32.0, 0.3, 1.0)
    assert 0.0 < frac < 1.0
