"""Equations of state and the admissibility hypotheses.

Every other layer of the package sits on top of an EosModel: a fluid
pressure/energy/entropy law satisfying p > 0, p_rho > 0, p_theta > 0,
e_theta > 0 together with the first-law identities

    e_rho = (p - theta p_theta) / rho**2,
    s_rho = -p_theta / rho**2,
    s_theta = e_theta / theta.

This script evaluates the ideal gas at a few states, shows the identity
residuals, runs the hypothesis checker over a sample grid, and
demonstrates how a defective model is caught.
"""

import numpy as np

from nerhd import (
    AnalyticEos,
    HypothesisViolation,
    IdealGas,
    check_weyl_hypotheses,
    eval_eos,
    identity_residuals,
    theta_from_energy,
)

gas = IdealGas()

print("== pointwise evaluation ==")
for rho, theta in [(1.0, 1.0), (0.1, 3.0), (5.0, 0.2)]:
    tp = eval_eos(gas, rho, theta)
    res = identity_residuals(tp)
    print(f"rho={rho:4.1f} theta={theta:4.1f}  p={tp.p:8.4f}  e={tp.e:8.4f}"
          f"  s={tp.s:+8.4f}  max identity residual={max(res.values()):.2e}")

print()
print("== hypothesis sweep over a 5x5 decade grid ==")
grid = np.logspace(-2, 2, 5)
report = check_weyl_hypotheses(gas, [(r, t) for r in grid for t in grid])
print(f"passed={report.passed}  points={report.n_points}"
      f"  worst violation={report.worst_violation:.2e}")

print()
print("== temperature inversion from internal energy ==")
theta = theta_from_energy(gas, rho=2.0, e=gas.e(2.0, 1.7))
print(f"recovered theta = {theta:.15f}  (target 1.7)")

print()
print("== a broken model is rejected ==")
# pressure decreasing in density violates p_rho > 0
bad = AnalyticEos(
    p_fn=lambda rho, theta: theta / (1.0 + rho),
    e_fn=lambda rho, theta: 1.5 * theta,
    s_fn=lambda rho, theta: np.log(theta ** 1.5 / rho),
)
try:
    eval_eos(bad, 1.0, 1.0)
except HypothesisViolation as exc:
    print(f"caught: {exc}")

report = check_weyl_hypotheses(bad, [(1.0, 1.0)])
print(f"checker verdict: passed={report.passed}"
      f"  worst={report.worst_name} ({report.worst_violation:.2e})")
