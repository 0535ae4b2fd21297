"""Acceptance suite: ten numbered criteria, one test each.

Criteria 6-9 read the cells of the pinned sweep configuration (see
conftest.ACCEPTANCE_CONFIG); criterion 10 compares its serial and parallel
artifacts. Criterion 8 is a faithful transcription of the concentration
requirement and currently fails at desk scale — see the README for the
measured numbers and the scaling analysis.
"""

import time
from fractions import Fraction

import numpy as np
import pytest

from curveavg import (ConeChart, CurveSpec, CutoffSpec, GridSpec,
                      SpectralField, SupportBall, alpha_n, apply_averaging,
                      critical_exponent, derivative_bound_check, direct_oracle,
                      mu_hat, multiplier_sample)

CURVE = CurveSpec.moment(3)
CHI = CutoffSpec(delta=0.9)
CHART = ConeChart(curve=CURVE, aperture=0.95)
E3 = np.array([0.0, 0.0, 1.0])


def test_criterion_01_exponent_table():
    # hand re-derivation of the staircase: 1/n up to p=4, the interpolating
    # branch up to p=4(n-1), then 2/p
    def staircase(p, n):
        if p <= 4:
            return Fraction(1, n)
        if p <= 4 * (n - 1):
            return (Fraction(1, 2) + Fraction(2) / p) / n
        return Fraction(2) / p

    pairs = [(p, n)
             for n in range(3, 8)
             for p in (Fraction(2), Fraction(5, 2), Fraction(3), Fraction(4),
                       Fraction(9, 2), Fraction(6), Fraction(15, 2),
                       Fraction(4 * (n - 1)), Fraction(4 * (n - 1) + 2),
                       Fraction(25))]
    assert len(set(pairs)) == 50
    for n in range(3, 8):
        assert (Fraction(4), n) in pairs and (Fraction(4 * (n - 1)), n) in pairs

    start = time.perf_counter()
    for p, n in pairs:
        got = critical_exponent(p, n)
        assert isinstance(got, Fraction)
        assert got == staircase(p, n), (p, n)
    assert time.perf_counter() - start < 1.0


def test_criterion_02_cone_closed_forms():
    start = time.perf_counter()
    worst = 0.0
    for tau in np.linspace(-0.25, 0.25, 100):
        closed = np.array([tau ** 2 / 2, tau, 1.0])
        xi, s = CHART.solve_gamma(tau)
        worst = max(worst, float(np.abs(xi - closed).max()), abs(s + tau),
                    abs(CHART.solve_theta(closed) + tau))
    assert worst <= 1e-10
    assert time.perf_counter() - start < 1.0


def test_criterion_03_multiplier_decay():
    # |mu_hat_1(lambda e_3)| * lambda^{1/3} -> |alpha_3| * (3!)^{1/3} * chi(0);
    # the limit was frozen from the quadrature oracle before this test existed
    LIMIT = 2.810514770742616
    assert LIMIT == pytest.approx(abs(alpha_n(3)) * 6.0 ** (1 / 3), rel=1e-12)
    assert CHI(0.0) == 1.0

    start = time.perf_counter()
    devs = []
    for k in range(6, 13):
        lam = float(2 ** k)
        scaled = abs(mu_hat(CURVE, CHI, 1.0, lam * E3)) * lam ** (1 / 3)
        devs.append(abs(scaled - LIMIT))
    assert devs[-1] <= 0.10 * LIMIT
    assert all(a > b for a, b in zip(devs, devs[1:])), devs
    assert time.perf_counter() - start < 60.0


def test_criterion_04_deficit_rate_and_derivative_table():
    start = time.perf_counter()
    for t in (1.0, 1.5, 2.0):
        seq = []
        for k in range(6, 13):
            lam = float(2 ** k)
            s = multiplier_sample(CURVE, CHI, CHART, t, lam * E3)
            seq.append(s.deficit * lam ** (1 / 3))
        assert max(seq) / min(seq) <= 3.0, (t, seq)

    # worst |d^alpha m| / bound ratio per lambda: bounded, and the increments
    # shrink (the sequence settles instead of trending up)
    worst = []
    for k in (6, 9, 12):
        rows = derivative_bound_check(CURVE, CHI, CHART, 1.5, float(2 ** k) * E3)
        assert all(sum(alpha) <= 2 for alpha, *_ in rows)
        worst.append(max(r[3] for r in rows))
    assert max(worst) <= 3.5
    assert worst[2] - worst[1] < worst[1] - worst[0]
    assert worst[2] / worst[0] <= 1.25
    assert time.perf_counter() - start < 300.0


def test_criterion_05_oracle_equivalence():
    start = time.perf_counter()
    window = GridSpec(n=3, L=2.0, N=32).window()
    dk = window.dk
    ks = [k for k in np.ndindex(7, 7, 7)
          if np.linalg.norm((np.array(k) - 3) * dk) <= 1.2 * 8.0]
    rng = np.random.default_rng(5)
    fhat = np.zeros(window.dims, dtype=complex)
    flats = []
    for k in ks:
        idx = tuple(np.array(k) - 3 - np.array(window.k0))
        fhat[idx] = rng.standard_normal() + 1j * rng.standard_normal()
        flats.append(np.ravel_multi_index(idx, window.dims))
    ball = SupportBall(nu=0, center=(0.0,) * 3, radius=1.2 * 8.0,
                       flat=np.array(sorted(flats), dtype=np.intp))
    f = SpectralField(window=window, fhat=fhat, support=(ball,))

    t = 1.5
    out = apply_averaging(f, CURVE, CHI, t)
    xs = np.arange(0, 32, 4) * (2.0 / 32)
    pts = np.stack(np.meshgrid(xs, xs, xs, indexing="ij"), -1).reshape(-1, 3)
    want = direct_oracle(f, CURVE, CHI, t, pts)

    flat = out.support_flat()
    coeffs = out.fhat.ravel()[flat] / out.L ** 3
    got = np.exp(1j * pts @ out.window.xi_of_flat(flat).T) @ coeffs
    rel = np.linalg.norm(got - want) / np.linalg.norm(want)
    assert rel <= 1e-3, rel
    assert time.perf_counter() - start < 120.0


def _cells(runs, lams):
    by_lam = {c["lam"]: c for c in runs["report"]["cells"]}
    return [by_lam[lam] for lam in lams]


def test_criterion_06_orthogonality(acceptance_runs):
    for cell in _cells(acceptance_runs, (32.0, 64.0, 128.0)):
        assert cell["defect"] <= 1e-10, cell["lam"]


def test_criterion_07_piece_lower_bound(acceptance_runs):
    # floor recorded from the first full run of the pinned config
    # (2026-08, measured min 1.2575 at lambda=32) and asserted since
    FLOOR = 1.0
    worst = min(c["piece_min"] for c in _cells(acceptance_runs,
                                               (32.0, 64.0, 128.0)))
    assert worst >= FLOOR, worst


def test_criterion_08_concentration(acceptance_runs):
    # Faithful transcription: >= 0.5 of the output's L^2 mass inside
    # B(0, lambda^{-(1-eps)/3}) at every short-window node. Known red at
    # this lambda range; the measured fractions are printed for the record.
    for cell in _cells(acceptance_runs, (64.0, 128.0)):
        fr = cell["fractions"]
        print(f"lambda={cell['lam']:g}: fractions "
              f"{min(fr):.4f}..{max(fr):.4f} over {len(fr)} nodes")
        assert max(fr) - min(fr) <= 0.15, cell["lam"]
        assert min(fr) >= 0.5, (cell["lam"], min(fr))


def test_criterion_09_scaling_slopes(acceptance_runs):
    assert acceptance_runs[1]["status"] == 0
    # expected slopes pinned by hand; tolerances 0.1 / 0.1 / 0.05
    expected = {
        "4": (Fraction(7, 6), Fraction(5, 6), Fraction(-1, 3)),
        "6": (Fraction(11, 9), Fraction(17, 18), Fraction(-5, 18)),
        "8": (Fraction(5, 4), Fraction(1), Fraction(-1, 4)),
    }
    slopes = acceptance_runs["report"]["slopes"]
    for key, (inp, outp, quot) in expected.items():
        assert abs(slopes[key]["input"]["slope"] - float(inp)) <= 0.1, key
        assert abs(slopes[key]["output"]["slope"] - float(outp)) <= 0.1, key
        assert abs(slopes[key]["quotient"]["slope"] - float(quot)) <= 0.05, key


def test_criterion_10_determinism(acceptance_runs):
    assert acceptance_runs[8]["status"] == 0

    def rows(path):
        lines = path.read_text(encoding="utf-8").splitlines()
        return lines[0], [line.split(",") for line in lines[1:]]

    for name in ("sweep.csv", "slopes.csv"):
        head1, rows1 = rows(acceptance_runs[1]["dir"] / name)
        head8, rows8 = rows(acceptance_runs[8]["dir"] / name)
        assert head1 == head8
        assert len(rows1) == len(rows8)
        for r1, r8 in zip(rows1, rows8):
            for a, b in zip(r1, r8):
                try:
                    fa, fb = float(a), float(b)
                except ValueError:
                    assert a == b
                else:
                    assert np.isclose(fa, fb, rtol=1e-12, atol=1e-15), (a, b)
