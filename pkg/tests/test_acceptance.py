"""Release gate: one end-to-end check per headline claim of the package.

Each test covers one numbered claim, asserts the stated tolerances, and
enforces its runtime budget.  Golden matrix entries were hand-substituted
from the printed coefficient formulas at the canonical ideal-gas state
(R=1, gamma=5/3, rho=1, u=0, theta=1, eta=1, sigma_a=sigma_s=1); decay
targets come from the dissipativity analysis of the linearized system.
"""

import time

import numpy as np
import pytest
from scipy.linalg import expm

from nerhd import harness
from nerhd import solver1d as s1
from nerhd.eos import IdealGas, eval_eos, identity_residuals
from nerhd.kawashima import compensating_matrix, genuine_coupling, multi_d_witness
from nerhd.linearize import (
    EquilibriumState,
    asymmetry,
    build_bundle,
    entropy_frame,
    equilibrium_state,
    symmetrize,
    z_transform,
)
from nerhd.spectrum import l2_norm, linear_evolve, spectral_curve, symbol

from test_eos import corrected_gas

GAS = IdealGas()
CANON = equilibrium_state(1.0, 0.0, 1.0, 1.0, 1.0)


def random_weyl_state(rng, d=1):
    rho = rng.uniform(0.3, 3.0)
    u = rng.uniform(-1.5, 1.5, size=d)
    theta = rng.uniform(0.4, 2.5)
    sa = rng.uniform(0.2, 4.0)
    ss = rng.uniform(0.2, 4.0)
    return equilibrium_state(rho, tuple(u) if d > 1 else float(u[0]),
                             theta, sa, ss)


def _done(n, label, t0, limit):
    elapsed = time.perf_counter() - t0
    assert elapsed < limit, f"criterion {n} overran: {elapsed:.1f}s >= {limit}s"
    print(f"criterion {n} PASS: {label} ({elapsed:.1f}s < {limit:.0f}s)")


# --------------------------------------------------------------- 1


def test_criterion_1_matrix_fidelity():
    t0 = time.perf_counter()
    b = build_bundle(GAS, CANON)
    tol = 1e-12

    golden = {
        "A0": np.diag([1.0, 1.0, 1.5, 1.0]),
        "A1": np.array([[0.0, 1.0, 0.0, 0.0],
                        [1.0, 0.0, 1.0, 1.0 / 3.0],
                        [0.0, 1.0, 0.0, 0.0],
                        [0.0, 4.0 / 3.0, 0.0, 0.0]]),
        "L": np.array([[0.0, 0.0, 0.0, 0.0],
                       [0.0, 0.0, 0.0, 0.0],
                       [0.0, 0.0, 4.0, -1.0],
                       [0.0, 0.0, -4.0, 1.0]]),
        "B": np.diag([0.0, 0.0, 0.0, 1.0 / 3.0]),
        "S": np.diag([1.0, 1.0, 1.0, 0.25]),
        "L_bar": np.array([[0.0, 0.0, 0.0, 0.0],
                           [0.0, 0.0, 0.0, 0.0],
                           [0.0, 0.0, 4.0, -1.0],
                           [0.0, 0.0, -1.0, 0.25]]),
        "A0_t": np.array([[1.0, 0.0, 1.5, 0.0],
                          [0.0, 1.0, 0.0, 0.0],
                          [1.5, 0.0, 3.75, 0.0],
                          [0.0, 0.0, 0.0, 4.0]]),
        "A1_t": np.array([[0.0, 1.0, 0.0, 0.0],
                          [1.0, 0.0, 2.5, 4.0 / 3.0],
                          [0.0, 2.5, 0.0, 0.0],
                          [0.0, 4.0 / 3.0, 0.0, 0.0]]),
        "L_t": np.array([[0.0, 0.0, 0.0, 0.0],
                         [0.0, 0.0, 0.0, 0.0],
                         [0.0, 0.0, 4.0, -4.0],
                         [0.0, 0.0, -4.0, 4.0]]),
        "B_t": np.diag([0.0, 0.0, 0.0, 4.0 / 3.0]),
    }
    actual = {
        "A0": b.A0, "A1": b.A_of(None), "L": b.L, "B": b.B_of(None),
        "S": b.S, "L_bar": b.L_bar, "A0_t": b.A0_t, "A1_t": b.A1_t,
        "L_t": b.L_t, "B_t": b.B_t,
    }
    for name, M in golden.items():
        assert np.max(np.abs(actual[name] - M)) <= tol, name
    assert asymmetry(b.A1_t) <= tol

    # off the manifold the entropy-frame flux loses symmetry, linearly
    asyms = []
    for delta in (1e-3, 2e-3):
        eq = EquilibriumState(1.0, (0.0,), 1.0, 1.0 + delta, 1.0, 1.0)
        _, A1t, _, _, _ = entropy_frame(GAS, eq, check=False)
        asyms.append(asymmetry(A1t))
    assert asyms[0] > 0.0
    assert asyms[1] / asyms[0] == pytest.approx(2.0, rel=0.05)

    _done(1, "golden matrices to 1e-12, off-manifold asymmetry linear", t0, 1.0)


# --------------------------------------------------------------- 2


def test_criterion_2_coupling_verdicts():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)

    assert genuine_coupling(build_bundle(GAS, CANON)).coupled
    for _ in range(20):
        eq = random_weyl_state(rng)
        assert genuine_coupling(build_bundle(GAS, eq)).coupled

    for d in (2, 3):
        eq = random_weyl_state(rng, d=d)
        b = build_bundle(GAS, eq)
        verdict = genuine_coupling(b)
        assert not verdict.coupled
        w = multi_d_witness(b)
        assert w.residual <= 1e-10
        assert abs(w.mu + np.dot(eq.u_bar, w.omega)) <= 1e-10

    _done(2, "1D coupled on 20 random states; d=2,3 witnesses", t0, 5.0)


# --------------------------------------------------------------- 3


def test_criterion_3_compensating_matrix():
    t0 = time.perf_counter()

    def success(comp):
        return comp.skew_residual <= 1e-10 and comp.lambda_min > 0.0

    comp = compensating_matrix(build_bundle(GAS, CANON))
    assert success(comp)

    rng = np.random.default_rng(42)
    failures = []
    hits = 0
    for i in range(20):
        b = build_bundle(GAS, random_weyl_state(rng))
        comp = compensating_matrix(b)
        if success(comp):
            hits += 1
        else:
            failures.append(b)
    assert hits >= 18
    for b in failures:
        comp = compensating_matrix(b, n_starts=32, budget=20_000)
        assert success(comp)

    _done(3, f"canonical + {hits}/20 random states at first budget", t0, 60.0)


# --------------------------------------------------------------- 4


def test_criterion_4_spectral_bound():
    t0 = time.perf_counter()
    curve = spectral_curve(build_bundle(GAS, CANON))

    assert curve.xis.size == 400
    assert curve.fitted_c > 0.0
    weight = curve.xis ** 2 / (1.0 + curve.xis ** 2)
    assert np.all(curve.gaps <= -curve.fitted_c * weight + 1e-15)

    assert curve.continuation_error is None
    table = curve.branch_table
    assert table is not None and len(table) == 4
    vanishing = [e for e in table if abs(e[0].real) <= 1e-10]
    damped = [e for e in table if e[0].real < -1e-10]
    assert len(vanishing) == 3
    assert all(a < 0.0 for _, a in vanishing)
    assert len(damped) == 1

    _done(4, f"c = {curve.fitted_c:.4f} > 0; 3 quadratic + 1 damped branch",
          t0, 10.0)


# --------------------------------------------------------------- 5


def test_criterion_5_pointwise_semigroup_bound():
    t0 = time.perf_counter()
    b = build_bundle(GAS, CANON)
    k = 0.9 * spectral_curve(b).fitted_c
    assert k > 0.0

    def sup_constant(xis, ts):
        best = 0.0
        for xi in xis:
            Phi = symbol(b, xi).Phi
            w = xi * xi / (1.0 + xi * xi)
            for t in ts:
                nrm = np.linalg.norm(expm(Phi * t), 2)
                best = max(best, nrm * np.exp(k * w * t))
        return best

    C = sup_constant(np.geomspace(1e-3, 1e3, 40),
                     [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0])
    # the envelope constant must stay modest: transient growth is bounded
    assert C <= 10.0
    # and the same (C, k) pair must hold on a grid it was not fitted on
    C_check = sup_constant(np.geomspace(2e-3, 5e2, 37), [0.7, 3.0, 15.0, 35.0])
    assert C_check <= 1.05 * C

    _done(5, f"(C, k) = ({C:.3f}, {k:.4f}) bounds every sample", t0, 30.0)


# --------------------------------------------------------------- 6


def test_criterion_6_linear_decay_rates():
    t0 = time.perf_counter()
    base = dict(n_cells=2 ** 16, length=4000.0, width=1.0, t_max=1e4)

    rep = harness.linear_decay_experiment(
        harness.ExperimentConfig(kind="linear-decay", **base))
    slope_l2 = rep.slopes["l2"][0]
    slope_h1 = rep.slopes["h1"][0]
    assert abs(slope_l2 + 0.25) <= 0.05
    assert abs(slope_h1 + 0.75) <= 0.05

    rep_perp = harness.linear_decay_experiment(
        harness.ExperimentConfig(kind="mperp-decay", **base))
    slope_perp = rep_perp.slopes["l2"][0]
    assert abs(slope_perp + 0.75) <= 0.05

    _done(6, f"slopes {slope_l2:+.3f} / {slope_h1:+.3f} / {slope_perp:+.3f}",
          t0, 120.0)


# --------------------------------------------------------------- 7


def test_criterion_7_nonlinear_decay():
    t0 = time.perf_counter()
    rep = harness.nonlinear_decay_experiment(
        harness.ExperimentConfig(kind="nonlinear-decay"))

    # completion without a raise is the positivity certificate: the solver
    # aborts on any nonpositive density, temperature or radiation energy
    assert rep.error is None
    slope = rep.slopes["l2"][0]
    assert -0.45 <= slope <= -0.15
    assert rep.info["mass_drift"] <= 1e-10
    # initial momentum is zero, so the drift is measured absolutely
    assert rep.info["momentum_drift"] <= 1e-10
    assert rep.info["energy_drift"] <= 1e-8
    assert rep.info["entropy_warnings"] == 0

    _done(7, f"L2 exponent {slope:+.3f}; conserved totals hold", t0, 600.0)


# --------------------------------------------------------------- 8


def test_criterion_8_linear_nonlinear_consistency():
    t0 = time.perf_counter()
    b = build_bundle(GAS, CANON)
    N, L = 2 ** 12, 400.0

    def end_z(eps, t_end):
        cfg = s1.SimConfig(n_cells=N, length=L, t_final=t_end, cfl=0.8)
        f = s1.init_perturbation(cfg, amplitude=eps, width=5.0)
        z0 = z_transform(GAS, CANON, f.V, f.dx).z
        traj = s1.run(f, cfg)
        return z0, z_transform(GAS, CANON, traj.field.V, f.dx).z

    times = (10.0, 25.0, 50.0)
    finals = {}
    for t_end in times:
        z0, finals[t_end] = end_z(1e-6, t_end)
    zlin = linear_evolve(b, z0, np.array(times), L)
    worst = max(
        l2_norm(finals[t_end] - zlin[i], L) / l2_norm(zlin[i], L)
        for i, t_end in enumerate(times)
    )
    assert worst <= 1e-2

    # the deviation from a same-discretization tiny-amplitude reference
    # isolates the quadratic remainder, which halves with the amplitude
    _, z_half = end_z(5e-7, 50.0)
    _, z_ref = end_z(1e-8, 50.0)
    dev_full = l2_norm(finals[50.0] - 100.0 * z_ref, L)
    dev_half = l2_norm(z_half - 50.0 * z_ref, L)
    assert 1.7 < dev_full / dev_half < 2.3

    _done(8, f"max relative deviation {worst:.2e}; halving ratio "
             f"{dev_full / dev_half:.2f}", t0, 300.0)


# --------------------------------------------------------------- 9


def test_criterion_9_property_suites():
    t0 = time.perf_counter()

    # thermodynamic identities on random points spanning four decades
    rng = np.random.default_rng(3)
    for model, n_pts in ((GAS, 1000), (corrected_gas(), 200)):
        for _ in range(n_pts):
            rho = 10.0 ** rng.uniform(-2.0, 2.0)
            theta = 10.0 ** rng.uniform(-2.0, 2.0)
            res = identity_residuals(eval_eos(model, rho, theta))
            assert max(res.values()) <= 1e-8

    # the nonlinear remainder stays in M-perp exactly on live snapshots
    cfg = s1.SimConfig(n_cells=256, length=50.0, t_final=5.0, out_interval=1.0)
    f = s1.init_perturbation(cfg, amplitude=5e-2, width=4.0,
                             components=(1.0, 0.5, 0.5, 0.0))
    snaps = []
    s1.run(f.copy(), cfg, observer=lambda fld, rec: snaps.append(fld.copy()))
    assert len(snaps) >= 5
    for snap in snaps:
        q = z_transform(GAS, CANON, snap.V, snap.dx).q_tilde
        defect = np.abs(q[:, 0]) + np.abs(q[:, 1]) + np.abs(q[:, 2] + q[:, 3])
        assert np.max(defect) == 0.0

    # byte-identical reruns: solver march and spectral scan
    again = s1.run(f.copy(), cfg)
    first = s1.run(f.copy(), cfg)
    assert first.field.V.tobytes() == again.field.V.tobytes()
    c1 = spectral_curve(build_bundle(GAS, CANON))
    c2 = spectral_curve(build_bundle(GAS, CANON))
    assert c1.gaps.tobytes() == c2.gaps.tobytes()
    assert c1.fitted_c == c2.fitted_c

    _done(9, "identities to 1e-8; exact M-perp membership; determinism",
          t0, 60.0)
