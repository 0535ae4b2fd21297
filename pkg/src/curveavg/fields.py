"""Frequency-side synthesis of the band-limited test family.

The family lives on a periodic box: frequency lattice xi_k = k * (2pi/L),
coefficients stored as plain f_hat(xi_k) values over a rectangular *window*
of lattice indices [k0, k0 + dims) — a full centered cube for the fixed-grid
policy, a tight box around the construction's support for the windowed policy.
Spatial values are f(x) = L^{-n} sum_k f_hat(xi_k) e^{i<xi_k, x>}.

The construction itself: centers xi^nu = lambda * Gamma(nu * lambda^{-1/n})
along the cone, one smooth bump of radius rho * lambda^{1/n} per center,
phase-corrected by e^{i phi}. Ball supports are pairwise disjoint by a hard
precondition, which is what makes the L^2 bookkeeping exact on the lattice.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bumps import radial_bump
from .errors import ApertureError, ConfigError, DomainError, GridError

__all__ = ["GridSpec", "LatticeWindow", "SupportBall", "SpectralField",
           "CounterexampleSpec", "frequency_centers", "windowed_lattice",
           "build_piece", "build_f"]


def _next_pow2(m):
    p = 1
    while p < m:
        p <<= 1
    return p


@dataclass(frozen=True)
class GridSpec:
    """Fixed-grid policy: N points per axis on a box of side L.

    The frequency lattice runs over integer multiples of 2pi/L with indices
    in [-N/2, N/2). The Nyquist rule N*pi/L >= 1.2*lambda + 2*rho*lambda^{1/n}
    keeps the construction's support representable (range, not resolution —
    at L = 2 the lattice spacing pi may still be coarser than the bumps; the
    windowed policy exists for that).
    """

    n: int
    L: float = 2.0
    N: int = 32

    def __post_init__(self):
        if self.N & (self.N - 1) or self.N <= 0:
            raise GridError(f"N must be a power of two, got {self.N}")
        if self.L <= 0:
            raise GridError("box side must be positive")

    @classmethod
    def for_lambda(cls, n, lam, rho=0.25, L=2.0):
        """Least power-of-two N with N*pi/L >= 1.2*lambda + 2*rho*lambda^{1/n}."""
        need = (1.2 * lam + 2 * rho * lam ** (1.0 / n)) * L / np.pi
        return cls(n=n, L=L, N=_next_pow2(int(np.ceil(need))))

    def window(self):
        return LatticeWindow(L=self.L, dims=(self.N,) * self.n,
                             k0=(-self.N // 2,) * self.n)


@dataclass(frozen=True)
class LatticeWindow:
    """A rectangular block of frequency-lattice indices."""

    L: float
    dims: tuple
    k0: tuple

    @property
    def dk(self):
        return 2 * np.pi / self.L

    @property
    def n(self):
        return len(self.dims)

    def xi_of_flat(self, flat):
        """Frequency vectors for flat indices into the window, shape (m, n)."""
        idx = np.stack(np.unravel_index(np.asarray(flat), self.dims), axis=-1)
        return (idx + np.asarray(self.k0)) * self.dk


@dataclass(frozen=True)
class SupportBall:
    nu: int
    center: tuple
    radius: float
    flat: np.ndarray  # flat window indices carrying this ball's coefficients


@dataclass(frozen=True)
class SpectralField:
    """Coefficients f_hat(xi_k) over a lattice window plus declared support."""

    window: LatticeWindow
    fhat: np.ndarray
    support: tuple  # of SupportBall

    def __post_init__(self):
        if tuple(self.fhat.shape) != tuple(self.window.dims):
            raise GridError("coefficient array does not match the window")

    @property
    def L(self):
        return self.window.L

    def support_flat(self):
        """All declared-support flat indices, sorted; disjointness makes this a union."""
        if not self.support:
            return np.zeros(0, dtype=np.intp)
        return np.sort(np.concatenate([b.flat for b in self.support]))

    def l2(self):
        """Exact torus L^2 norm via the frequency side: L^{-n} sum |f_hat|^2."""
        power = float((self.fhat.real ** 2 + self.fhat.imag ** 2).sum())
        return float(np.sqrt(power / self.L ** self.window.n))

    def values(self, oversample=1):
        """Spatial samples f(x_j), x_j = j * L / F per axis (F = oversample-padded dims).

        Dense — intended for small fixed grids and snapshots; the norm code in
        `averaging` streams instead of materializing this.
        """
        dims = self.window.dims
        F = tuple(_next_pow2(int(m * oversample)) for m in dims)
        buf = np.zeros(F, dtype=complex)
        buf[tuple(slice(0, m) for m in dims)] = self.fhat
        out = np.fft.ifftn(buf) * np.prod(F)
        # stored index m is lattice index k0+m: restore the base modulation
        for ax, (k0, f) in enumerate(zip(self.window.k0, F)):
            ramp = np.exp(2j * np.pi * k0 * np.arange(f) / f)
            out *= ramp.reshape([-1 if a == ax else 1 for a in range(len(F))])
        return out / self.L ** self.window.n

    def with_fhat(self, fhat, support=None):
        return SpectralField(window=self.window, fhat=fhat,
                             support=self.support if support is None else support)


@dataclass(frozen=True)
class CounterexampleSpec:
    """Free constants of the construction at one dyadic frequency scale."""

    lam: float
    chart: object   # ConeChart
    cutoff: object  # CutoffSpec
    rho: float = 0.25
    c0: float = 0.25

    def __post_init__(self):
        if self.lam <= 0:
            raise DomainError("lambda must be positive")
        if not 0.0 < self.rho < 1.0 + 1e-12:
            raise ConfigError([f"rho must lie in (0, 1], got {self.rho}"])
        if self.c0 <= 0:
            raise ConfigError([f"c0 must be positive, got {self.c0}"])

    @property
    def n(self):
        return self.chart.n

    @property
    def radius(self):
        return self.rho * self.lam ** (1.0 / self.n)

    def nu_values(self):
        m = int(np.floor(self.c0 * self.lam ** (1.0 / self.n) + 1e-9))
        return np.arange(-m, m + 1)


def frequency_centers(spec):
    """Ball centers lambda * Gamma(nu * lambda^{-1/n}), one per nu.

    Verifies the pairwise disjointness of the fattened balls
    B(xi^nu, (3/2) * rho * lambda^{1/n}); a failure means rho or c0 is too
    large for this lambda and is reported as a configuration error.
    """
    lam, n = spec.lam, spec.n
    taus = spec.nu_values() * lam ** (-1.0 / n)
    centers = np.array([lam * spec.chart.solve_gamma(t)[0] for t in taus])
    if len(centers) > 1:
        gaps = np.linalg.norm(np.diff(centers, axis=0), axis=1)
        need = 3.0 * spec.radius
        if gaps.min() <= need:
            raise ConfigError(
                [f"fattened frequency balls overlap at lambda={lam}: "
                 f"min center gap {gaps.min():.4g} <= {need:.4g}; "
                 f"reduce rho ({spec.rho}) or c0 ({spec.c0})"])
    return centers


def windowed_lattice(spec, points_per_radius=4, pad=8):
    """Construction-scaled lattice: spacing rho*lambda^{1/n}/points_per_radius.

    The window covers the union of support balls plus a guard margin, rounded
    up to powers of two per axis. The box side L = 2pi/spacing is then large
    compared to every spatial envelope the construction produces.
    """
    if points_per_radius < 2:
        raise GridError("need at least 2 lattice points per bump radius")
    h = spec.radius / points_per_radius
    centers = frequency_centers(spec)
    r = spec.radius + 2 * h
    lo = np.floor((centers.min(axis=0) - r) / h).astype(int) - 2
    hi = np.ceil((centers.max(axis=0) + r) / h).astype(int) + 2
    span = hi - lo + 1
    dims = tuple(int(_next_pow2(int(s) + pad)) for s in span)
    k0 = tuple(int(v) for v in lo - (np.asarray(dims) - span) // 2)
    return LatticeWindow(L=2 * np.pi / h, dims=dims, k0=k0)


def _piece_coefficients(spec, window, nu, center):
    """(flat indices, coefficient values) of one piece on the window."""
    lam, n, r = spec.lam, spec.n, spec.radius
    h = window.dk
    k0 = np.asarray(window.k0)
    lo = np.floor((center - r) / h).astype(int) - k0
    hi = np.ceil((center + r) / h).astype(int) - k0
    if np.any(lo < 0) or np.any(hi >= np.asarray(window.dims)):
        raise GridError(
            f"support ball of piece nu={nu} exits the lattice window "
            f"(need indices {lo + k0}..{hi + k0})")
    axes = [np.arange(lo[i], hi[i] + 1) for i in range(n)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    xi = (mesh + k0) * h
    prof = radial_bump("inner", np.linalg.norm(xi - center, axis=1) / r)
    keep = prof > 0.0
    xi, mesh, prof = xi[keep], mesh[keep], prof[keep]
    if xi.size and not np.all(spec.chart.in_cone(xi)):
        raise ApertureError(
            f"support ball of piece nu={nu} exits the cone aperture "
            f"c={spec.chart.aperture}; widen the aperture or shrink rho")
    flat = np.ravel_multi_index(tuple(mesh.T), window.dims).astype(np.intp)
    if xi.size:
        phi, _ = spec.chart.phi_un_batch(xi)
        vals = lam ** (1.0 / n) * np.exp(1j * phi) * prof
    else:
        vals = np.zeros(0, dtype=complex)
    return flat, vals


def build_piece(spec, window, nu):
    """One piece f_nu: coefficients lambda^{1/n} e^{i phi} eta(|xi - xi^nu|/r)."""
    centers = frequency_centers(spec)
    nus = spec.nu_values()
    where = np.nonzero(nus == nu)[0]
    if not where.size:
        raise DomainError(f"nu={nu} outside the center range {nus[0]}..{nus[-1]}")
    center = centers[where[0]]
    flat, vals = _piece_coefficients(spec, window, nu, center)
    fhat = np.zeros(window.dims, dtype=complex)
    fhat.ravel()[flat] = vals
    ball = SupportBall(nu=int(nu), center=tuple(center), radius=spec.radius, flat=flat)
    return SpectralField(window=window, fhat=fhat, support=(ball,))


def build_f(spec, window):
    """The full family f = sum_nu f_nu on a shared window."""
    centers = frequency_centers(spec)
    fhat = np.zeros(window.dims, dtype=complex)
    balls = []
    for nu, center in zip(spec.nu_values(), centers):
        flat, vals = _piece_coefficients(spec, window, nu, center)
        fhat.ravel()[flat] += vals
        balls.append(SupportBall(nu=int(nu), center=tuple(center),
                                 radius=spec.radius, flat=flat))
    return SpectralField(window=window, fhat=fhat, support=tuple(balls))
