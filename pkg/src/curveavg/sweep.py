"""Scaling experiments: exponent table, lambda sweeps, and the quantitative checks.

A sweep builds the counterexample family at each dyadic lambda, applies the
average over the short time window [1, 1 + lambda^{-1/n}] (and the full [1,2]
window for the report), and fits log2-log2 slopes of the input norm, output
norm, and their quotient. The quotient slope is the sharpness payload: it
should track -(1/2 + 2/p)/n, the exponent that forces the critical smoothing
index sigma(p, n) = min{1/n, (1/n)(1/2 + 2/p), 2/p}.

Per-lambda diagnostics ride along: exact L^2 orthogonality across pieces
(disjoint lattice supports), the per-piece lower bound ||A_t f_nu||_2/||g_nu||_2
against its stationary-phase reference, and the concentration fraction of
||A_t f||_2^2 near the origin.

lambda cells are independent pure jobs; with jobs > 1 they run in separate
processes and merge in lambda order, so results are independent of the
parallelism degree.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

import numpy as np

from .averaging import TimeWindow, space_stats
from .config import RunConfig, chart_from, curve_from, cutoff_from
from .errors import DomainError, GeometryError
from .fields import CounterexampleSpec, GridSpec, build_f, windowed_lattice
from .multiplier import alpha_n, mu_hat_batch

__all__ = ["critical_exponent", "expected_slopes", "fit_slope", "SlopeFit",
           "PieceBoundReport", "SweepReport", "run_cell", "sharpness_sweep",
           "piece_l2_lower", "orthogonality_check", "concentration_check",
           "DEFAULT_SLOPE_TOLS"]

DEFAULT_SLOPE_TOLS = {"input": 0.1, "output": 0.1, "quotient": 0.05}


def critical_exponent(p, n):
    """The critical smoothing index min{1/n, (1/n)(1/2 + 2/p), 2/p}.

    Piecewise: 1/n on 2 <= p <= 4, (1/n)(1/2 + 2/p) on 4 <= p <= 4(n-1),
    2/p beyond; the pieces agree at both breakpoints. Exact Fractions come
    back for int/Fraction input, floats for float input.
    """
    if not isinstance(n, int) or n < 2:
        raise DomainError(f"dimension must be an integer >= 2, got {n}")
    if p != np.inf and p < 2:
        raise DomainError(f"p must be >= 2, got {p}")
    if isinstance(p, (int, Fraction)) and not isinstance(p, bool):
        p = Fraction(p)
        return min(Fraction(1, n), (Fraction(1, 2) + 2 / p) / n, 2 / p)
    if p == np.inf:
        return 0.0
    return min(1.0 / n, (0.5 + 2.0 / p) / n, 2.0 / p)


def expected_slopes(p, n):
    """Asymptotic log2-log2 slopes for the family: input norm, short-window
    output norm, and their quotient -(1/2 + 2/p)/n."""
    return {
        "input": (n + 1) / n - (n - 1) / (n * p),
        "output": 1 - 1 / p + 1 / (2 * n) - 1 / (n * p),
        "quotient": -(0.5 + 2 / p) / n,
    }


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    max_residual: float


def fit_slope(pairs):
    """Least squares on (log2 lambda, log2 value); returns a SlopeFit."""
    pairs = list(pairs)
    if len(pairs) < 3:
        raise DomainError(f"need >= 3 points for a slope fit, got {len(pairs)}")
    lams = np.array([float(a) for a, _ in pairs])
    vals = np.array([float(b) for _, b in pairs])
    if np.any(vals <= 0) or np.any(lams <= 0):
        raise DomainError("slope fits need positive lambdas and values")
    x, y = np.log2(lams), np.log2(vals)
    design = np.stack([x, np.ones_like(x)], axis=1)
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = float(np.abs(design @ np.array([slope, intercept]) - y).max())
    return SlopeFit(slope=float(slope), intercept=float(intercept), max_residual=resid)


def _cell_setup(cfg, lam):
    curve, cutoff, chart = curve_from(cfg), cutoff_from(cfg), chart_from(cfg)
    spec = CounterexampleSpec(lam=lam, chart=chart, cutoff=cutoff,
                              rho=cfg.rho, c0=cfg.c0)
    if cfg.grid_policy == "fixed":
        window = GridSpec.for_lambda(cfg.n, lam, rho=cfg.rho, L=cfg.box_side).window()
    else:
        window = windowed_lattice(spec, points_per_radius=cfg.points_per_radius)
    return curve, cutoff, spec, window


def run_cell(cfg, lam):
    """Every per-lambda measurement of the sweep, as one plain dict.

    Builds f once; multiplier samples on the declared support are batched over
    all time nodes of both windows. Short-window nodes carry the diagnostics
    (per-piece ratios, orthogonality defect, concentration fractions).
    """
    t0 = time.perf_counter()
    curve, cutoff, spec, window = _cell_setup(cfg, lam)
    f = build_f(spec, window)
    ps = tuple(sorted(set([2.0] + [float(p) for p in cfg.ps])))
    n = cfg.n

    sup = f.support_flat()
    sup_xi = window.xi_of_flat(sup)
    base = f.fhat.ravel()[sup]
    piece_idx = [np.searchsorted(sup, ball.flat) for ball in f.support]
    Ln = window.L ** n
    g_power = [float((np.abs(base[ix] / lam ** (1.0 / n)) ** 2).sum()) / Ln
               for ix in piece_idx]

    radius = lam ** (-(1.0 - cfg.epsilon) / n)
    if radius >= window.L / 2:
        raise GeometryError(
            f"concentration ball radius {radius:.4g} >= L/2 = {window.L / 2:.4g}")

    short = TimeWindow.short(lam, n, m=cfg.time_nodes)
    full = TimeWindow.full(m=cfg.time_nodes)
    mu_short = mu_hat_batch(curve, cutoff, short.nodes, sup_xi)
    mu_full = mu_hat_batch(curve, cutoff, full.nodes, sup_xi)

    norms_in, _ = space_stats(f, ps, oversample=cfg.oversample)

    def averaged(mu_row):
        out = np.zeros_like(f.fhat)
        out.ravel()[sup] = base * mu_row
        return f.with_fhat(out)

    piece_min = np.inf
    piece_table = []
    defect = 0.0
    fractions = []
    out_short = {p: [] for p in ps}
    for row in mu_short:
        coeff = base * row
        total = float((np.abs(coeff) ** 2).sum()) / Ln
        powers = [float((np.abs(coeff[ix]) ** 2).sum()) / Ln for ix in piece_idx]
        defect = max(defect, abs(sum(powers) - total) / total)
        ratios = [np.sqrt(pw / gp) for pw, gp in zip(powers, g_power)]
        piece_min = min(piece_min, min(ratios))
        piece_table.append(ratios)
        norms, frac = space_stats(averaged(row), ps, oversample=cfg.oversample,
                                  ball_radius=radius)
        fractions.append(frac)
        for p in ps:
            out_short[p].append(norms[p])
    out_full = {p: [] for p in ps}
    for row in mu_full:
        norms, _ = space_stats(averaged(row), ps, oversample=cfg.oversample)
        for p in ps:
            out_full[p].append(norms[p])

    # stationary-phase reference |alpha_n| c_{t,nu} at t = 1 per piece
    centers = np.array([ball.center for ball in f.support])
    theta = spec.chart.solve_theta_batch(centers)
    _, un = spec.chart.phi_un_batch(centers)
    ref = (abs(alpha_n(n)) * factorial(n) ** (1.0 / n) * cutoff(theta)
           * lam ** (1.0 / n) / un ** (1.0 / n))

    ws, wf = short.weights(), full.weights()
    return {
        "lam": float(lam),
        "nnu": len(f.support),
        "dims": list(window.dims),
        "norms_in": {p: norms_in[p] for p in ps},
        "out_short": {p: float((ws @ np.power(out_short[p], p)) ** (1 / p)) for p in ps},
        "out_full": {p: float((wf @ np.power(out_full[p], p)) ** (1 / p)) for p in ps},
        "quotient": {p: float((ws @ np.power(out_short[p], p)) ** (1 / p) / norms_in[p])
                     for p in ps},
        "piece_min": float(piece_min),
        "piece_min_by_nu": [float(min(col)) for col in zip(*piece_table)],
        "piece_reference": [float(v) for v in ref],
        "defect": float(defect),
        "fractions": [float(v) for v in fractions],
        "t_nodes_short": list(short.nodes),
        "runtime_s": time.perf_counter() - t0,
    }


def _cell_job(args):
    cfg, lam = args
    return run_cell(cfg, lam)


@dataclass
class SweepReport:
    n: int
    ps: tuple
    lambdas: tuple
    cells: list
    slopes: dict      # p -> {"input"/"output"/"quotient": SlopeFit}
    checks: list      # {"name", "passed", "detail"}
    config: dict
    quotient_monotone: bool = True

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks)

    def to_dict(self):
        def fit_dict(f):
            return {"slope": f.slope, "intercept": f.intercept,
                    "max_residual": f.max_residual}
        return {
            "n": self.n,
            "ps": list(self.ps),
            "lambdas": list(self.lambdas),
            "cells": self.cells,
            "slopes": {str(int(p)) if float(p).is_integer() else str(p):
                       {k: fit_dict(v) for k, v in fits.items()}
                       for p, fits in self.slopes.items()},
            "checks": self.checks,
            "quotient_monotone": self.quotient_monotone,
            "config": self.config,
        }


def _trend_mostly_decreasing(values, allowed_inversions=1):
    ups = sum(1 for a, b in zip(values, values[1:]) if b > a)
    return ups <= allowed_inversions


def sharpness_sweep(cfg, jobs=None, slope_tols=None):
    """Run the full lambda sweep and fit the three slopes per p.

    Checks (selected by cfg.checks) are evaluated here: 'orthogonality'
    (defect <= 1e-10 everywhere), 'slopes' (each fitted slope inside its
    tolerance band around the asymptotic exponent), 'floor' (per-piece ratio
    min >= cfg.piece_floor), 'concentration' (fraction >= 0.5 at every
    short-window node with window variation <= 0.15, for lambda >= 64).
    """
    if len(cfg.lambdas) < 3:
        raise DomainError(
            f"need >= 3 lambda values for slope fits, got {len(cfg.lambdas)}")
    jobs = cfg.jobs if jobs is None else int(jobs)
    lams = sorted(float(v) for v in cfg.lambdas)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(lams))) as pool:
            cells = list(pool.map(_cell_job, [(cfg, lam) for lam in lams]))
    else:
        cells = [run_cell(cfg, lam) for lam in lams]
    cells.sort(key=lambda c: c["lam"])

    tols = dict(DEFAULT_SLOPE_TOLS)
    if slope_tols:
        tols.update(slope_tols)

    slopes = {}
    for p in cfg.ps:
        p = float(p)
        fits = {
            "input": fit_slope([(c["lam"], c["norms_in"][p]) for c in cells]),
            "output": fit_slope([(c["lam"], c["out_short"][p]) for c in cells]),
            "quotient": fit_slope([(c["lam"], c["quotient"][p]) for c in cells]),
        }
        slopes[p] = fits

    checks = []
    if "orthogonality" in cfg.checks:
        worst = max(c["defect"] for c in cells)
        checks.append({"name": "orthogonality", "passed": bool(worst <= 1e-10),
                       "detail": f"max defect {worst:.3e} (limit 1e-10)"})
    if "slopes" in cfg.checks:
        for p, fits in slopes.items():
            want = expected_slopes(p, cfg.n)
            for which, fit in fits.items():
                gap = abs(fit.slope - want[which])
                checks.append({
                    "name": f"slope/{which}/p={p:g}",
                    "passed": bool(gap <= tols[which]),
                    "detail": (f"fitted {fit.slope:+.4f} vs expected "
                               f"{want[which]:+.4f} (gap {gap:.4f}, "
                               f"tol {tols[which]})")})
    if "floor" in cfg.checks and cfg.piece_floor > 0:
        worst = min(c["piece_min"] for c in cells)
        checks.append({"name": "piece-floor",
                       "passed": bool(worst >= cfg.piece_floor),
                       "detail": f"min piece ratio {worst:.4f} "
                                 f"(floor {cfg.piece_floor})"})
    if "concentration" in cfg.checks:
        for c in cells:
            if c["lam"] < 64:
                continue
            lo, hi = min(c["fractions"]), max(c["fractions"])
            checks.append({
                "name": f"concentration/lambda={c['lam']:g}",
                "passed": bool(lo >= 0.5 and (hi - lo) <= 0.15),
                "detail": f"fractions {lo:.4f}..{hi:.4f} "
                          "(need >= 0.5, variation <= 0.15)"})

    monotone = all(
        _trend_mostly_decreasing([c["quotient"][float(p)] for c in cells])
        for p in cfg.ps)
    return SweepReport(n=cfg.n, ps=tuple(float(p) for p in cfg.ps),
                       lambdas=tuple(lams), cells=cells, slopes=slopes,
                       checks=checks, config=cfg.echo(),
                       quotient_monotone=monotone)


@dataclass(frozen=True)
class PieceBoundReport:
    lam: float
    min_ratio: float
    min_by_nu: tuple
    reference_by_nu: tuple


def piece_l2_lower(cfg, lam):
    """min over nu and short-window nodes of ||A_t f_nu||_2 / ||g_nu||_2,
    with the per-piece stationary-phase reference constants."""
    cell = run_cell(cfg, lam)
    return PieceBoundReport(lam=float(lam), min_ratio=cell["piece_min"],
                            min_by_nu=tuple(cell["piece_min_by_nu"]),
                            reference_by_nu=tuple(cell["piece_reference"]))


def orthogonality_check(cfg, lam, t):
    """|sum_nu ||A_t f_nu||^2 - ||A_t f||^2| / sum_nu ||A_t f_nu||^2 at one t."""
    curve, cutoff, spec, window = _cell_setup(cfg, lam)
    f = build_f(spec, window)
    sup = f.support_flat()
    mu = mu_hat_batch(curve, cutoff, [t], window.xi_of_flat(sup))[0]
    coeff = f.fhat.ravel()[sup] * mu
    total = float((np.abs(coeff) ** 2).sum())
    parts = sum(float((np.abs(coeff[np.searchsorted(sup, ball.flat)]) ** 2).sum())
                for ball in f.support)
    return abs(parts - total) / parts


def concentration_check(cfg, lam, eps, t):
    """Mass fraction of ||A_t f||_2^2 inside B(0, lambda^{-(1-eps)/n})."""
    curve, cutoff, spec, window = _cell_setup(cfg, lam)
    radius = lam ** (-(1.0 - eps) / cfg.n)
    if radius >= window.L / 2:
        raise GeometryError(
            f"ball radius {radius:.4g} >= L/2 = {window.L / 2:.4g}")
    f = build_f(spec, window)
    sup = f.support_flat()
    mu = mu_hat_batch(curve, cutoff, [t], window.xi_of_flat(sup))[0]
    out = np.zeros_like(f.fhat)
    out.ravel()[sup] = f.fhat.ravel()[sup] * mu
    _, frac = space_stats(f.with_fhat(out), [2.0], oversample=cfg.oversample,
                          ball_radius=radius)
    return frac
