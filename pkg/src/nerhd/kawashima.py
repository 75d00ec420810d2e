"""Genuine coupling decisions and compensating matrices.

A symmetric hyperbolic-parabolic-relaxation family is genuinely coupled
when no unit vector in ker(L_bar) ∩ ker(B_bar(omega)) is a generalized
eigenvector of the pencil (A_bar(omega), A0_bar).  Coupling is equivalent
to strict dissipativity of the Fourier symbol, to the existence of a
compensating matrix K with K A0 skew-symmetric and [K A]^s + B + L > 0,
and to a uniform eigenvalue bound -c xi^2/(1+xi^2); the spectrum module
checks the latter two numerically.

The decision procedure here is eigenspace/kernel intersection via principal
angles, exact up to eigensolver tolerance.  In one space dimension the
system is genuinely coupled for every admissible state; in two or three it
never is, and `multi_d_witness` returns the explicit failing direction (a
transverse shear mode riding along the flow).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize

from .errors import DimensionError, NumericalError, SearchFailure
from .linearize import MatrixBundle, _unit_omega

__all__ = [
    "Witness",
    "CouplingVerdict",
    "CompensatingMatrix",
    "MultiDWitness",
    "kernel_intersection_basis",
    "coupling_decision",
    "genuine_coupling",
    "compensating_matrix",
    "multi_d_witness",
]

CLUSTER_TOL = 1e-9
ANGLE_TOL = 1e-10


@dataclass(frozen=True)
class Witness:
    """Unit kernel vector psi with mu A0_bar psi + A_bar(omega) psi = 0."""

    psi: np.ndarray
    mu: float
    omega: np.ndarray


@dataclass(frozen=True)
class CouplingVerdict:
    coupled: bool
    witness: Witness | None
    kernel_basis: np.ndarray  # (n, k), orthonormal columns
    residual: float  # witness pencil residual, or the margin when coupled


@dataclass(frozen=True)
class CompensatingMatrix:
    K: np.ndarray
    lambda_min: float  # smallest eigenvalue of [K A1_t]^s + B_t + L_t
    skew_residual: float  # ||K A0_t + (K A0_t)^T||_F


@dataclass(frozen=True)
class MultiDWitness:
    psi: np.ndarray
    omega: np.ndarray
    mu: float
    residual: float


def kernel_intersection_basis(L_bar: np.ndarray, B_bar: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (columns) of ker(L_bar) ∩ ker(B_bar)."""
    stacked = np.vstack([L_bar, B_bar])
    scale = np.linalg.norm(stacked)
    _, sv, vt = np.linalg.svd(stacked)
    k = int(np.sum(sv <= tol * max(scale, 1.0)))
    if k == 0:
        return np.zeros((L_bar.shape[0], 0))
    return vt[-k:].T


def coupling_decision(
    A0_bar: np.ndarray,
    A_bar: np.ndarray,
    L_bar: np.ndarray,
    B_bar: np.ndarray,
    omega: np.ndarray,
    cluster_tol: float = CLUSTER_TOL,
    angle_tol: float = ANGLE_TOL,
) -> CouplingVerdict:
    """Decide coupling for explicit symmetric matrices.

    Exposed separately from `genuine_coupling` so doctored matrix families
    (hand-decoupled entries) can be tested without building a full bundle.
    """
    n = A0_bar.shape[0]
    P = kernel_intersection_basis(L_bar, B_bar)
    if P.shape[1] == 0:
        return CouplingVerdict(True, None, P, np.inf)

    try:
        mus, X = scipy.linalg.eigh(A_bar, A0_bar)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as exc:  # pragma: no cover
        raise NumericalError(f"generalized eigensolve failed: {exc}") from exc
    if not np.all(np.isfinite(mus)):
        raise NumericalError("pencil eigenvalues are not finite; A0_bar not positive definite?")

    # cluster eigenvalues that coincide to tolerance
    radius = max(1.0, float(np.abs(mus).max()))
    clusters = []
    start = 0
    for i in range(1, n + 1):
        if i == n or mus[i] - mus[i - 1] > cluster_tol * radius:
            clusters.append(slice(start, i))
            start = i

    margin = np.inf
    for sl in clusters:
        E = X[:, sl]
        Qe, _ = np.linalg.qr(E)
        # principal angles between the eigenspace and the kernel subspace
        sv = np.linalg.svd(Qe.T @ P, compute_uv=False)
        # an eigenpair A x = mu_i A0 x rides the pencil mu A0 + A at
        # mu = -mu_i
        mu = -float(np.mean(mus[sl]))
        if sv.max() > 1.0 - angle_tol:
            # intersecting direction, taken from the kernel side so the
            # witness lies in ker(L_bar) ∩ ker(B_bar) exactly
            U, _, Vt = np.linalg.svd(Qe.T @ P)
            psi = P @ Vt[0]
            psi = psi / np.linalg.norm(psi)
            res = float(np.linalg.norm(mu * (A0_bar @ psi) + A_bar @ psi))
            return CouplingVerdict(False, Witness(psi=psi, mu=mu, omega=omega), P, res)
        # distance-to-failure margin for this cluster
        s = np.linalg.svd(mu * (A0_bar @ P) + A_bar @ P, compute_uv=False)
        margin = min(margin, float(s.min()))

    return CouplingVerdict(True, None, P, margin)


def genuine_coupling(bundle: MatrixBundle, omega=None) -> CouplingVerdict:
    """Coupling verdict for one propagation direction of a bundle."""
    omega = _unit_omega(omega, bundle.dim)
    return coupling_decision(
        bundle.A0_bar,
        bundle.A_bar_of(omega),
        bundle.L_bar,
        bundle.B_bar_of(omega),
        omega,
    )


def _skew_from_params(y: np.ndarray) -> np.ndarray:
    Y = np.zeros((4, 4))
    Y[0, 1], Y[0, 2], Y[0, 3] = y[0], y[1], y[2]
    Y[1, 2], Y[1, 3] = y[3], y[4]
    Y[2, 3] = y[5]
    return Y - Y.T


def compensating_matrix(
    bundle: MatrixBundle,
    n_starts: int = 16,
    budget: int = 10_000,
    seed: int = 0,
) -> CompensatingMatrix:
    """Search for K with K A0_t skew and [K A1_t]^s + B_t + L_t > 0.

    K = Y (A0_t)^{-1} with Y skew makes the skew constraint exact by
    construction, leaving the 6 entries of Y free.  The smallest eigenvalue
    of the symmetrized dissipation matrix is maximized by derivative-free
    local search from random starts.  K is normalized to unit Frobenius
    norm inside the objective rather than after the search: rescaling a
    found K upward can destroy positivity (the B + L part does not scale
    with it), whereas the constrained search on the unit sphere reports a
    directly usable representative.
    """
    if bundle.dim != 1:
        raise DimensionError("compensating matrices are one-dimensional objects here")
    A0t, A1t, Lt, Bt = bundle.A0_t, bundle.A1_t, bundle.L_t, bundle.B_t
    A0inv = np.linalg.inv(A0t)
    BL = Bt + Lt

    def K_of(y):
        K = _skew_from_params(y) @ A0inv
        nrm = np.linalg.norm(K)
        if nrm == 0.0:
            return None
        return K / nrm

    def lam_min(K):
        M = 0.5 * ((K @ A1t) + (K @ A1t).T) + BL
        return float(np.linalg.eigvalsh(M)[0])

    def neg_obj(y):
        K = K_of(y)
        if K is None:
            return 1e9
        return -lam_min(K)

    rng = np.random.default_rng(seed)
    best_val = -np.inf
    best_y = None
    for _ in range(n_starts):
        y0 = rng.standard_normal(6)
        res = scipy.optimize.minimize(
            neg_obj,
            y0,
            method="Nelder-Mead",
            options={"maxfev": budget, "xatol": 1e-12, "fatol": 1e-14},
        )
        if -res.fun > best_val:
            best_val = -res.fun
            best_y = res.x
        if best_val > 0.0:
            break
    # polish the winner
    if best_y is not None:
        res = scipy.optimize.minimize(
            neg_obj,
            best_y,
            method="Nelder-Mead",
            options={"maxfev": budget, "xatol": 1e-14, "fatol": 1e-16},
        )
        if -res.fun > best_val:
            best_val = -res.fun
            best_y = res.x

    if best_y is None or best_val <= 0.0:
        raise SearchFailure(
            f"no compensating matrix found (best lambda_min {best_val:.3e}); "
            "the family is likely not genuinely coupled"
        )
    K = K_of(best_y)
    skew = np.linalg.norm(K @ A0t + (K @ A0t).T)
    return CompensatingMatrix(K=K, lambda_min=lam_min(K), skew_residual=float(skew))


def multi_d_witness(bundle: MatrixBundle, omega=None) -> MultiDWitness:
    """Explicit failure of genuine coupling for d >= 2.

    The transverse shear direction psi = (0, e_d, 0, 0) is annihilated by
    L_bar and B_bar, and rides the pencil with mu = -u_bar . omega for any
    unit omega orthogonal to e_d; the default omega is the first axis.
    """
    d = bundle.dim
    if d < 2:
        raise DimensionError("the transverse witness construction needs d >= 2")
    if omega is None:
        omega = np.zeros(d)
        omega[0] = 1.0
    omega = _unit_omega(omega, d)
    if abs(omega[d - 1]) > 1e-12:
        raise DimensionError("witness direction requires omega with zero last component")
    n = d + 3
    psi = np.zeros(n)
    psi[d] = 1.0  # last velocity slot
    mu = -float(np.dot(bundle.eq.u_bar, omega))
    residual = float(np.linalg.norm(mu * (bundle.A0_bar @ psi) + bundle.A_bar_of(omega) @ psi))
    return MultiDWitness(psi=psi, omega=omega, mu=mu, residual=residual)
