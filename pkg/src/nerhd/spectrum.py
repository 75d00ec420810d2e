"""Fourier symbol of the linear perturbation system and its spectrum.

For a one-dimensional bundle the symbol acts in the entropy frame,

    Phi(i xi) = -(A0_t)^{-1} (L_t + i xi A1_t + xi^2 B_t),

and strict dissipativity means max Re lambda(Phi) < 0 for every xi != 0,
with the uniform envelope -c xi^2/(1+xi^2).  For d >= 2 the same formula is
evaluated in the symmetrized frame along a chosen direction, where the
transverse shear branch sits exactly on the imaginary axis and the envelope
constant degenerates to zero.  Linear initial-value problems on periodic
grids are propagated mode-by-mode with a stacked matrix exponential.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import ConfigError, DimensionError, DomainError
from .linearize import MatrixBundle, _unit_omega

__all__ = [
    "SymbolEvaluation",
    "SpectralCurve",
    "symbol",
    "spectral_curve",
    "semigroup_action",
    "linear_evolve",
    "mode_wavenumbers",
    "l2_norm",
    "h_seminorm",
]

#: |fitted_c| below this is reported as an exact zero (decoupled family)
C_FLOOR = 1e-10

#: eigenvalues closer than this (relative) form one continuation cluster
CLUSTER_TOL = 1e-9


class _AmbiguousMatch(Exception):
    def __init__(self, xi):
        self.xi = xi


@dataclass(frozen=True)
class SymbolEvaluation:
    xi: float
    Phi: np.ndarray
    eigenvalues: np.ndarray  # sorted by descending real part
    spectral_gap: float  # max Re lambda


@dataclass(frozen=True)
class SpectralCurve:
    xis: np.ndarray
    gaps: np.ndarray
    fitted_c: float
    branch_table: tuple | None  # per branch: (lambda(0), d^2 Re lambda / d xi^2 coefficient)
    branches: np.ndarray | None  # (4, len(xis)) continued eigenvalues
    continuation_error: str | None


def _frame(bundle: MatrixBundle, omega=None):
    if bundle.dim == 1:
        return bundle.A0_t, bundle.A1_t, bundle.L_t, bundle.B_t
    omega = _unit_omega(omega, bundle.dim)
    return bundle.A0_bar, bundle.A_bar_of(omega), bundle.L_bar, bundle.B_bar_of(omega)


def _phi(A0inv, A1, L, B, xi):
    return -A0inv @ (L + 1j * xi * A1 + xi * xi * B)


def symbol(bundle: MatrixBundle, xi: float, omega=None) -> SymbolEvaluation:
    """Evaluate Phi(i xi) and its spectrum."""
    A0, A1, L, B = _frame(bundle, omega)
    Phi = _phi(np.linalg.inv(A0), A1, L, B, float(xi))
    lam = np.linalg.eigvals(Phi)
    lam = lam[np.argsort(-lam.real)]
    return SymbolEvaluation(xi=float(xi), Phi=Phi, eigenvalues=lam, spectral_gap=float(lam[0].real))


def _match(prev: np.ndarray, new: np.ndarray):
    """Optimal eigenvalue pairing; returns `new` permuted onto `prev`."""
    cost = np.abs(prev[:, None] - new[None, :])
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    perm = np.empty(prev.size, dtype=int)
    perm[rows] = cols
    return new[perm], cost[rows, cols]


def _ambiguous(prev: np.ndarray, movement: np.ndarray, cluster_tol: float) -> bool:
    """Matching is safe when each eigenvalue moved much less than its
    distance to the nearest *distinct* eigenvalue.  Eigenvalues closer than
    cluster_tol form one numerical cluster whose internal labels are
    interchangeable (branch points), so they never block acceptance, and
    sub-resolution movements are always safe."""
    dist = np.abs(prev[:, None] - prev[None, :])
    dist[dist <= cluster_tol] = np.inf  # same cluster (includes the diagonal)
    nearest_other = dist.min(axis=1)
    return bool(np.any((movement > 0.5 * nearest_other) & (movement > cluster_tol)))


def spectral_curve(bundle: MatrixBundle, xi_grid=None, omega=None) -> SpectralCurve:
    """Spectral gap along a wavenumber grid plus branch continuation.

    The certified envelope constant is the grid minimum of
    (-gap)(1+xi^2)/xi^2, not a least-squares fit; branch continuation from
    xi = 0 uses optimal nearest matching with adaptive step refinement near
    suspected crossings, and reports (rather than raises) a
    ContinuationError message if matching stays ambiguous.
    """
    if xi_grid is None:
        xi_grid = np.geomspace(1e-3, 1e3, 400)
    xi_grid = np.asarray(xi_grid, dtype=float)
    if xi_grid.size < 200 or xi_grid.min() > 1e-3 or xi_grid.max() < 1e3:
        raise ConfigError("wavenumber grid must span [1e-3, 1e3] with at least 200 points")
    if np.any(np.diff(xi_grid) <= 0.0) or xi_grid[0] <= 0.0:
        raise ConfigError("wavenumber grid must be positive and increasing")

    A0, A1, L, B = _frame(bundle, omega)
    A0inv = np.linalg.inv(A0)
    n = A0.shape[0]

    gaps = np.empty(xi_grid.size)
    branches = np.empty((n, xi_grid.size), dtype=complex)
    cont_error = None

    lam0 = np.linalg.eigvals(_phi(A0inv, A1, L, B, 0.0))
    lam0 = lam0[np.argsort(-lam0.real)]

    def eig_at(x):
        return np.linalg.eigvals(_phi(A0inv, A1, L, B, x))

    def continue_to(lam_prev, x_from, x_to, depth=0):
        """Continuation of lam_prev (at x_from) to x_to, bisecting steps
        whose optimal matching could swap distinct branches."""
        lam_new, movement = _match(lam_prev, eig_at(x_to))
        tol = CLUSTER_TOL * max(1.0, float(np.abs(lam_prev).max()))
        if not _ambiguous(lam_prev, movement, tol):
            return lam_new
        if depth >= 60:
            raise _AmbiguousMatch(x_to)
        mid = 0.5 * (x_from + x_to)
        lam_mid = continue_to(lam_prev, x_from, mid, depth + 1)
        return continue_to(lam_mid, mid, x_to, depth + 1)

    prev = lam0.copy()
    prev_xi = 0.0
    for i, xi in enumerate(xi_grid):
        if cont_error is None:
            try:
                prev = continue_to(prev, prev_xi, xi)
            except _AmbiguousMatch as amb:
                cont_error = f"branch matching ambiguous near xi = {amb.xi:.6g} after refinement"
                prev, _ = _match(prev, eig_at(xi))
        else:
            prev, _ = _match(prev, eig_at(xi))
        prev_xi = xi
        branches[:, i] = prev
        gaps[i] = float(prev.real.max())

    env = (-gaps) * (1.0 + xi_grid**2) / xi_grid**2
    fitted_c = float(env.min())
    if abs(fitted_c) < C_FLOOR:
        fitted_c = 0.0

    branch_table = None
    if cont_error is None:
        small = xi_grid <= 3e-2
        if np.any(small):
            xs = xi_grid[small]
            table = []
            for j in range(n):
                re = branches[j, small].real - lam0[j].real
                a = float(np.sum(re * xs**2) / np.sum(xs**4))
                table.append((complex(lam0[j]), a))
            branch_table = tuple(table)

    return SpectralCurve(
        xis=xi_grid,
        gaps=gaps,
        fitted_c=fitted_c,
        branch_table=branch_table,
        branches=branches,
        continuation_error=cont_error,
    )


def semigroup_action(bundle: MatrixBundle, xi: float, t: float, v, omega=None) -> np.ndarray:
    """e^{t Phi(i xi)} v by scaling-and-squaring."""
    if t < 0.0:
        raise ConfigError("semigroup time must be nonnegative")
    A0, A1, L, B = _frame(bundle, omega)
    Phi = _phi(np.linalg.inv(A0), A1, L, B, float(xi))
    return scipy.linalg.expm(t * Phi) @ np.asarray(v, dtype=complex)


def mode_wavenumbers(n_cells: int, length: float) -> np.ndarray:
    """Wavenumbers of the real FFT modes on a periodic grid."""
    return 2.0 * np.pi * np.fft.rfftfreq(n_cells, d=length / n_cells)


M_PERP_DIR = np.array([0.0, 0.0, 1.0, -1.0]) / np.sqrt(2.0)


def linear_evolve(
    bundle: MatrixBundle,
    z0: np.ndarray,
    times,
    length: float,
    weight: str = "none",
    project: str = "none",
) -> np.ndarray:
    """Propagate the linear system on a periodic grid, mode by mode.

    times may be a scalar or an increasing sequence; the mode stack is
    propagated sequentially between requested outputs with one stacked
    matrix exponential per interval.  weight="a0_inverse" applies
    (A0_t)^{-1} to the initial data (the source-term decay statements are
    about e^{t Phi} (A0)^{-1} h); project="m_perp" projects the data onto
    the span of (0,0,1,-1).
    """
    if bundle.dim != 1:
        raise DimensionError("linear evolution is implemented on 1D bundles")
    z0 = np.asarray(z0, dtype=float)
    if z0.ndim != 2 or z0.shape[1] != 4:
        raise DomainError(f"expected an (N, 4) field, got {z0.shape}")
    N = z0.shape[0]
    if N & (N - 1) != 0:
        raise DomainError(f"grid size must be a power of two, got {N}")
    if not (length > 0.0):
        raise DomainError("domain length must be positive")
    if weight not in ("none", "a0_inverse"):
        raise ConfigError(f"unknown weight {weight!r}")
    if project not in ("none", "m_perp"):
        raise ConfigError(f"unknown projection {project!r}")

    scalar = np.isscalar(times)
    ts = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(ts < 0.0) or np.any(np.diff(ts) < 0.0):
        raise ConfigError("output times must be nonnegative and nondecreasing")

    data = z0
    if project == "m_perp":
        data = np.outer(data @ M_PERP_DIR, M_PERP_DIR)
    modes = np.fft.rfft(data, axis=0)
    if weight == "a0_inverse":
        modes = modes @ np.linalg.inv(bundle.A0_t).T

    xis = mode_wavenumbers(N, length)
    A0inv = np.linalg.inv(bundle.A0_t)
    Phis = np.empty((xis.size, 4, 4), dtype=complex)
    for m, xi in enumerate(xis):
        Phis[m] = _phi(A0inv, bundle.A1_t, bundle.L_t, bundle.B_t, xi)

    out = np.empty((ts.size, N, 4))
    t_prev = 0.0
    for k, t in enumerate(ts):
        dt = t - t_prev
        if dt > 0.0:
            E = scipy.linalg.expm(dt * Phis)
            modes = np.einsum("mij,mj->mi", E, modes)
            t_prev = t
        out[k] = np.fft.irfft(modes, n=N, axis=0)
    return out[0] if scalar else out


def l2_norm(field: np.ndarray, length: float) -> float:
    """Discrete L2 norm of an (N, c) periodic field."""
    N = field.shape[0]
    return float(np.sqrt(np.sum(field * field) * (length / N)))


def h_seminorm(field: np.ndarray, length: float, order: int) -> float:
    """Spectral H^order seminorm of an (N, c) periodic field."""
    N = field.shape[0]
    xis = mode_wavenumbers(N, length)
    fh = np.fft.rfft(field, axis=0)
    w = np.ones(xis.size)
    w[1:-1] = 2.0  # rfft folding
    if N % 2 == 1:
        w[-1] = 2.0
    power = (np.abs(fh) ** 2).sum(axis=1)
    return float(np.sqrt((w * xis ** (2 * order) * power).sum() * length) / N)
