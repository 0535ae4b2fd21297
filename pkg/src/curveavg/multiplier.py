"""The averaging multiplier: oscillatory quadrature for mu_hat_t and its asymptotics.

Under the transform convention f_hat(xi) = integral f(x) e^{-i<x,xi>} dx, the
curve average acts as the Fourier multiplier

    mu_hat_t(xi) = integral chi(s) e^{-i t <gamma(s), xi>} ds ,

computed here by composite 16-point Gauss-Legendre panels with a panel count
proportional to the worst phase rate and a Richardson (panel-doubling) accuracy
check. On the cone the reduced multiplier m_t = e^{i t phi} mu_hat_t decays
exactly like (t u_n(xi))^{-1/n}; `multiplier_sample` packages the sample, the
reference constant alpha_n chi(theta) (t u_n)^{-1/n}, and the measured leading
term (which carries an extra (n!)^{1/n}: the constant alpha_n normalizes the
monic phase v^n while the curve's phase is s^n/n!).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, factorial, gamma as gamma_fn, pi, sin

import numpy as np

from .errors import DomainError, QuadratureError, ResolutionError

__all__ = ["alpha_n", "beta_n", "mu_hat", "mu_hat_batch", "decay_profile",
           "MultiplierSample", "multiplier_sample", "derivative_bound_check"]

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_MAX_PANELS = 1 << 15
_REL_TOL = 1e-9


def alpha_n(n):
    """The stationary-phase constant: integral over R of e^{i v^n} dv.

    (2/n)Gamma(1/n) sin((n-1)pi/(2n)) for odd n (real), (2/n)Gamma(1/n)
    e^{i pi/(2n)} for even n. Returned as complex in both cases.
    """
    if n < 2:
        raise DomainError(f"alpha_n needs n >= 2, got {n}")
    mag = (2.0 / n) * gamma_fn(1.0 / n)
    if n % 2:
        return complex(mag * sin((n - 1) * pi / (2 * n)), 0.0)
    return mag * np.exp(1j * pi / (2 * n))


def beta_n(n):
    """Logarithm coefficient in the multiplier error bound: beta_2 = 1, else 0."""
    if n < 2:
        raise DomainError(f"beta_n needs n >= 2, got {n}")
    return 1.0 if n == 2 else 0.0


def _panel_start(curve, cutoff, ts, xis):
    # >= 12 nodes per oscillation: the total phase sweep over supp chi is at
    # most t * max_s |<gamma'(s), xi>| * 2 delta.
    s_probe = np.linspace(-cutoff.delta, cutoff.delta, 33)
    rate = np.abs(curve.derivative(1, s_probe) @ xis.T).max()
    cycles = float(np.max(ts)) * rate * 2 * cutoff.delta / (2 * pi)
    return min(max(2, ceil(cycles * 12 / 16) + 1), _MAX_PANELS)


def _gl_values(curve, cutoff, ts, xis, panels):
    edges = np.linspace(-cutoff.delta, cutoff.delta, panels + 1)
    half = (edges[1] - edges[0]) / 2
    s = ((edges[:-1] + edges[1:]) / 2)[:, None] + half * _GL_NODES[None, :]
    s = s.ravel()
    weighted = cutoff(s) * np.tile(_GL_WEIGHTS * half, panels)
    out = np.empty((len(ts), len(xis)), dtype=complex)
    # chunk over xi to bound the (s-nodes x frequencies) phase matrix
    step = max(1, int(4e6 // max(s.size, 1)))
    for j in range(0, len(xis), step):
        phase = curve.derivative(0, s) @ xis[j:j + step].T
        for i, t in enumerate(ts):
            out[i, j:j + step] = weighted @ np.exp(-1j * t * phase)
    return out


def mu_hat_batch(curve, cutoff, ts, xis):
    """mu_hat_t(xi) on a (t, xi) product grid; shape (len(ts), len(xis)).

    One panel ladder is shared by the whole batch; refinement stops when the
    worst entry moves by less than 1e-9 of the batch magnitude.
    """
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    if np.any(ts < 1.0) or np.any(ts > 2.0):
        raise DomainError("t must lie in [1, 2]")
    panels = _panel_start(curve, cutoff, ts, xis)
    coarse = _gl_values(curve, cutoff, ts, xis, panels)
    while True:
        fine = _gl_values(curve, cutoff, ts, xis, 2 * panels)
        scale = max(float(np.abs(fine).max()), 1e-300)
        if float(np.abs(fine - coarse).max()) <= _REL_TOL * scale:
            return fine
        panels *= 2
        if panels > _MAX_PANELS:
            raise QuadratureError(
                f"oscillatory quadrature not converged at {panels} panels "
                f"(|xi| up to {np.linalg.norm(xis, axis=1).max():.3g})")
        coarse = fine


def mu_hat(curve, cutoff, t, xi):
    """Single-point mu_hat_t(xi)."""
    return complex(mu_hat_batch(curve, cutoff, [t], np.asarray(xi, float)[None])[0, 0])


def decay_profile(curve, cutoff, t, direction, lambdas):
    """[(lambda, |mu_hat_t(lambda * direction)| * (1+lambda)^{1/n})] along a ray.

    The normalization makes the sequence bounded; along cone directions it
    approaches |alpha_n| (n!)^{1/n} chi(theta) (t u_n(direction))^{-1/n}
    (measured asymptote), off the cone it decays to zero. The lambda = 0 entry
    is the cutoff integral.
    """
    direction = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(direction) - 1.0) > 1e-12:
        raise DomainError("direction must be a unit vector")
    lambdas = [float(v) for v in lambdas]
    xis = np.array([lam * direction for lam in lambdas])
    vals = mu_hat_batch(curve, cutoff, [t], xis)[0]
    n = curve.n
    return [(lam, float(abs(v)) * (1.0 + lam) ** (1.0 / n))
            for lam, v in zip(lambdas, vals)]


@dataclass(frozen=True)
class MultiplierSample:
    """One multiplier evaluation against its cone asymptotics.

    reference is alpha_n chi(theta(xi)) (t u_n(xi))^{-1/n} and deficit is
    |m - reference| exactly; leading additionally carries the (n!)^{1/n}
    phase-normalization factor (conjugated for even n under the e^{-i<x,xi>}
    convention) and is what m actually converges to.
    """

    xi: tuple
    t: float
    mu_hat: complex
    m: complex
    reference: complex
    deficit: float
    leading: complex
    deficit_leading: float


def multiplier_sample(curve, cutoff, chart, t, xi):
    xi = np.asarray(xi, dtype=float)
    theta = chart.solve_theta(xi)
    phi, un = (float(v[0]) for v in chart.phi_un_batch(xi[None]))
    if un <= 0.0:
        raise DomainError(f"u_n(xi) = {un:.3g} <= 0: not a moment-like direction")
    n = curve.n
    mh = mu_hat(curve, cutoff, t, xi)
    m = complex(np.exp(1j * t * phi) * mh)
    base = alpha_n(n)
    if n % 2 == 0:
        base = base.conjugate()
    scale = float(cutoff(theta)) * (t * un) ** (-1.0 / n)
    reference = complex(alpha_n(n) * scale)
    leading = complex(base * factorial(n) ** (1.0 / n) * scale)
    return MultiplierSample(
        xi=tuple(xi), t=float(t), mu_hat=mh, m=m,
        reference=reference, deficit=abs(m - reference),
        leading=leading, deficit_leading=abs(m - leading))


def _stencil(n, max_order):
    """Multi-indices |alpha| <= max_order and the offsets their stencils need."""
    alphas = [()]
    if max_order >= 1:
        alphas += [(i,) for i in range(n)]
    if max_order >= 2:
        alphas += [(i, j) for i in range(n) for j in range(i, n)]
    offsets = {(0,) * n}
    for a in alphas:
        if len(a) == 1:
            for sgn in (1, -1):
                off = [0] * n
                off[a[0]] = sgn
                offsets.add(tuple(off))
        elif len(a) == 2:
            i, j = a
            signs = [(1, 1), (1, -1), (-1, 1), (-1, -1)] if i != j else [(2, 0), (-2, 0)]
            for si, sj in signs:
                off = [0] * n
                off[i] += si
                off[j] += sj
                offsets.add(tuple(off))
    return alphas, sorted(offsets)


def derivative_bound_check(curve, cutoff, chart, t, xi, max_order=2, rho=0.25):
    """Finite-difference check that |d^alpha m_t| tracks lambda^{-1/n-|alpha|/n}.

    Central differences with step h = rho * lambda^{1/n} / 64 per axis; every
    stencil point is evaluated in one quadrature batch. Returns a list of
    (alpha, |d^alpha m_t|, bound, ratio) rows; the interesting assertion — the
    ratios carry no growth trend in lambda — belongs to the caller, since one
    lambda alone cannot show a trend.
    """
    if max_order > 2:
        raise DomainError("derivative table implemented for |alpha| <= 2")
    xi = np.asarray(xi, dtype=float)
    lam = float(np.linalg.norm(xi))
    if lam < 64.0:
        raise DomainError(f"|xi| = {lam:.3g} < 64: below the asymptotic window")
    n = curve.n
    h = rho * lam ** (1.0 / n) / 64.0
    if h <= lam * 1e-14:
        raise ResolutionError(f"difference step {h:.3g} underflows at |xi| = {lam:.3g}")

    alphas, offsets = _stencil(n, max_order)
    pts = np.array([xi + h * np.asarray(off, dtype=float) for off in offsets])
    phis, _ = chart.phi_un_batch(pts)
    vals = mu_hat_batch(curve, cutoff, [t], pts)[0] * np.exp(1j * t * phis)
    at = {off: vals[k] for k, off in enumerate(offsets)}
    eye = np.eye(n, dtype=int)

    rows = []
    for a in alphas:
        vec = [0] * n
        for i in a:
            vec[i] += 1
        if len(a) == 0:
            fd = abs(at[(0,) * n])
        elif len(a) == 1:
            i = a[0]
            fd = abs(at[tuple(eye[i])] - at[tuple(-eye[i])]) / (2 * h)
        elif a[0] == a[1]:
            i = a[0]
            fd = abs(at[tuple(2 * eye[i])] - 2 * at[(0,) * n]
                     + at[tuple(-2 * eye[i])]) / (2 * h) ** 2
        else:
            i, j = a
            fd = abs(at[tuple(eye[i] + eye[j])] - at[tuple(eye[i] - eye[j])]
                     - at[tuple(eye[j] - eye[i])]
                     + at[tuple(-eye[i] - eye[j])]) / (4 * h * h)
        bound = lam ** (-(1.0 + len(a)) / n)
        rows.append((tuple(vec), float(fd), bound, float(fd / bound)))
    return rows
