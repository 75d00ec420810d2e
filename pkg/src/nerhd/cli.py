"""Command line front end.

One executable, eight subcommands: eos-check, assemble, coupling,
spectrum, linear-decay, simulate, decay, report.  Every subcommand takes
an optional JSON config (--config), writes its artifacts under --out and
communicates through the exit code:

    0  success / all verdicts pass
    2  a verdict failed (model rejected, decay rate off target, ...)
    3  numerical failure (positivity loss, CFL cascade, stalled Newton)
    4  bad config (unreadable file, unknown keys, inadmissible state)
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, NerhdError
from .eos import IdealGas, check_weyl_hypotheses, eos_from_dict, eos_to_dict
from .linearize import build_bundle, equilibrium_state
from .kawashima import compensating_matrix, genuine_coupling
from .spectrum import spectral_curve, symbol
from . import solver1d
from . import harness

__all__ = ["main"]


def _jsonable(obj):
    """Recursively convert numpy containers/scalars for json.dump."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(_jsonable(payload), indent=2) + "\n")


def _csv_text(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def _emit(args, out_dir: Path, stem: str, payload, csv_text: str | None) -> None:
    """Write the artifact pair and echo the --format flavor to stdout."""
    _write_json(out_dir / f"{stem}.json", payload)
    if csv_text is not None:
        (out_dir / f"{stem}.csv").write_text(csv_text)
    if args.format == "csv" and csv_text is not None:
        sys.stdout.write(csv_text)
    else:
        print(json.dumps(_jsonable(payload), indent=2))


def _take(cfg: dict, allowed, context: str) -> dict:
    unknown = sorted(set(cfg) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown {context} config keys: {', '.join(unknown)}")
    return cfg


def _read_config(path):
    if path is None:
        return None
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc


_STATE_KEYS = ("eos", "rho_bar", "u_bar", "theta_bar", "sigma_a", "sigma_s")


def _build_state(cfg: dict):
    """Equilibrium + EOS from the shared config fields; bad values -> ConfigError."""
    try:
        model = eos_from_dict(cfg["eos"]) if "eos" in cfg else IdealGas()
        u_bar = cfg.get("u_bar", 0.0)
        if isinstance(u_bar, list):
            u_bar = tuple(float(c) for c in u_bar)
        eq = equilibrium_state(
            cfg.get("rho_bar", 1.0),
            u_bar,
            cfg.get("theta_bar", 1.0),
            cfg.get("sigma_a", 1.0),
            cfg.get("sigma_s", 1.0),
        )
    except ConfigError:
        raise
    except NerhdError as exc:
        raise ConfigError(f"inadmissible state in config: {exc}") from exc
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed state config: {exc}") from exc
    return model, eq


def _experiment(cfg, args, default_kind: str) -> harness.ExperimentConfig:
    data = dict(cfg or {})
    data.setdefault("kind", default_kind)
    if args.seed is not None:
        data["seed"] = args.seed
    return harness.experiment_from_dict(data)


def _decay_report_payload(report: harness.DecayReport) -> dict:
    return {
        "name": report.name,
        "kind": report.kind,
        "times": report.times,
        "norms": report.norms,
        "fit_window": list(report.fit_window),
        "slopes": {
            name: {"exponent": pair[0], "stderr": pair[1]}
            for name, pair in report.slopes.items()
        },
        "targets": report.targets,
        "designated": report.designated,
        "target_exponent": report.target_exponent,
        "tolerance": report.tolerance,
        "verdict": report.verdict,
        "error": report.error,
        "info": report.info,
    }


# ---------------------------------------------------------------------------
# subcommand handlers


def _cmd_eos_check(args, cfg, out_dir: Path) -> int:
    cfg = _take(dict(cfg or {}), ("eos", "sample"), "eos-check")
    try:
        model = eos_from_dict(cfg["eos"]) if "eos" in cfg else IdealGas()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed eos config: {exc}") from exc
    if "sample" in cfg:
        try:
            sample = [(float(r), float(t)) for r, t in cfg["sample"]]
        except (TypeError, ValueError) as exc:
            raise ConfigError("sample must be a list of [rho, theta] pairs") from exc
        if any(not (r > 0.0 and t > 0.0) for r, t in sample):
            raise ConfigError("sample points must have positive rho and theta")
    else:
        grid = np.logspace(-2.0, 2.0, 5)
        sample = [(r, t) for r in grid for t in grid]
    report = check_weyl_hypotheses(model, sample)
    payload = {
        "eos": eos_to_dict(model),
        "passed": report.passed,
        "worst_violation": report.worst_violation,
        "worst_name": report.worst_name,
        "n_points": report.n_points,
    }
    _emit(args, out_dir, "eos_check", payload, None)
    return 0 if report.passed else 2


def _matrix_table(bundle, omega):
    table = {
        "A0": bundle.A0,
        "A1": bundle.A_of(omega),
        "L": bundle.L,
        "B": bundle.B_of(omega),
        "S": bundle.S,
        "A0_bar": bundle.A0_bar,
        "A1_bar": bundle.A_bar_of(omega),
        "L_bar": bundle.L_bar,
        "B_bar": bundle.B_bar_of(omega),
    }
    if bundle.dim == 1:
        table.update({
            "A0_t": bundle.A0_t,
            "A1_t": bundle.A1_t,
            "L_t": bundle.L_t,
            "B_t": bundle.B_t,
            "hessian": bundle.hessian,
        })
    return table


def _cmd_assemble(args, cfg, out_dir: Path) -> int:
    cfg = _take(dict(cfg or {}), _STATE_KEYS + ("matrix", "omega"), "assemble")
    model, eq = _build_state(cfg)
    bundle = build_bundle(model, eq)
    omega = cfg.get("omega")
    if omega is not None:
        omega = np.asarray(omega, dtype=float)
    table = _matrix_table(bundle, omega)
    name = cfg.get("matrix")
    if name is not None:
        if name not in table:
            raise ConfigError(
                f"unknown matrix {name!r}; available: {', '.join(sorted(table))}")
        M = table[name]
        header = [f"c{j}" for j in range(M.shape[1])]
        _emit(args, out_dir, "assemble", {name: M}, _csv_text(header, M))
        return 0
    payload = {
        "eos": eos_to_dict(model),
        "state": {
            "rho_bar": eq.rho_bar, "u_bar": eq.v_bar(),
            "theta_bar": eq.theta_bar, "eta_bar": eq.eta_bar,
            "sigma_a": eq.sigma_a, "sigma_s": eq.sigma_s, "dim": eq.d,
        },
        "matrices": table,
    }
    _emit(args, out_dir, "assemble", payload, None)
    return 0


def _cmd_coupling(args, cfg, out_dir: Path) -> int:
    cfg = _take(dict(cfg or {}), _STATE_KEYS + ("omega",), "coupling")
    model, eq = _build_state(cfg)
    bundle = build_bundle(model, eq)
    omega = cfg.get("omega")
    if omega is not None:
        omega = np.asarray(omega, dtype=float)
    verdict = genuine_coupling(bundle, omega)
    payload = {
        "coupled": verdict.coupled,
        "witness": None,
        "residual": verdict.residual,
        "K": None,
        "lambda_min": None,
    }
    if verdict.witness is not None:
        payload["witness"] = {
            "psi": verdict.witness.psi,
            "mu": verdict.witness.mu,
            "omega": verdict.witness.omega,
        }
    if verdict.coupled and bundle.dim == 1:
        comp = compensating_matrix(bundle, seed=args.seed or 0)
        payload["K"] = comp.K
        payload["lambda_min"] = comp.lambda_min
    _emit(args, out_dir, "coupling", payload, None)
    return 0 if verdict.coupled else 2


def _cmd_spectrum(args, cfg, out_dir: Path) -> int:
    cfg = _take(dict(cfg or {}),
                _STATE_KEYS + ("xi_min", "xi_max", "n_points"), "spectrum")
    model, eq = _build_state(cfg)
    bundle = build_bundle(model, eq)
    xi_grid = None
    if {"xi_min", "xi_max", "n_points"} & set(cfg):
        xi_grid = np.geomspace(cfg.get("xi_min", 1e-3), cfg.get("xi_max", 1e3),
                               int(cfg.get("n_points", 400)))
    curve = spectral_curve(bundle, xi_grid=xi_grid)
    if curve.branches is not None:
        lams = curve.branches.T  # (n_xi, 4)
    else:
        lams = np.array([symbol(bundle, xi).eigenvalues for xi in curve.xis])
    header = (["xi"] + [f"re_lambda_{j}" for j in range(1, 5)]
              + [f"im_lambda_{j}" for j in range(1, 5)] + ["gap"])
    rows = [
        [xi, *lams[i].real, *lams[i].imag, curve.gaps[i]]
        for i, xi in enumerate(curve.xis)
    ]
    branch_table = None
    if curve.branch_table is not None:
        branch_table = [
            None if entry is None else {
                "re_lambda0": entry[0].real,
                "im_lambda0": entry[0].imag,
                "curvature": entry[1],
            }
            for entry in curve.branch_table
        ]
    payload = {
        "fitted_c": curve.fitted_c,
        "branch_table": branch_table,
        "continuation_error": curve.continuation_error,
    }
    _emit(args, out_dir, "spectrum", payload, _csv_text(header, rows))
    return 0


def _cmd_linear_decay(args, cfg, out_dir: Path) -> int:
    config = _experiment(cfg, args, "linear-decay")
    if config.kind not in ("linear-decay", "mperp-decay"):
        raise ConfigError("linear-decay accepts kinds linear-decay and mperp-decay")
    report = harness.linear_decay_experiment(config)
    order = [n for n in ("l2", "h1", "h2", "h3") if n in report.norms]
    order += sorted(set(report.norms) - set(order))
    names = {"l2": "l2_norm", "h1": "h1_seminorm",
             "h2": "h2_seminorm", "h3": "h3_seminorm"}
    header = ["t"] + [names.get(n, n) for n in order]
    rows = [
        [t] + [report.norms[n][i] for n in order]
        for i, t in enumerate(report.times)
    ]
    slope, stderr = report.slopes[report.designated]
    payload = {
        "slope": slope,
        "slope_ci": [slope - 1.96 * stderr, slope + 1.96 * stderr],
        "report": _decay_report_payload(report),
    }
    _emit(args, out_dir, "linear_decay", payload, _csv_text(header, rows))
    return 0 if report.verdict else 2


_SIM_KEYS = _STATE_KEYS + (
    "n_cells", "length", "cfl", "t_final", "bc", "hyperbolic_scheme",
    "relaxation", "diffusion", "newton_tol", "newton_max_iter",
    "out_interval", "dt_fixed", "s_order",
    "amplitude", "width", "shape", "components",
    "checkpoint_in", "checkpoint_in_format",
    "checkpoint_out", "checkpoint_out_format",
)

_TRAJ_COLUMNS = ("t", "mass", "momentum", "energy", "entropy",
                 "l2", "h1", "h2", "h3", "P_plus_norm")


def _trajectory_rows(traj: solver1d.Trajectory):
    rows = []
    for t, rec in zip(traj.times, traj.records):
        h = rec["h_seminorms"]
        rows.append([t, rec["mass"], rec["momentum"], rec["total_energy"],
                     rec["entropy_total"], rec["l2"], h[0], h[1], h[2],
                     rec["P_plus_norm"]])
    return rows


def _cmd_simulate(args, cfg, out_dir: Path) -> int:
    cfg = _take(dict(cfg or {}), _SIM_KEYS, "simulate")
    model, eq = _build_state(cfg)
    sim_kw = {
        k: cfg[k] for k in (
            "n_cells", "length", "cfl", "t_final", "bc", "hyperbolic_scheme",
            "relaxation", "diffusion", "newton_tol", "newton_max_iter",
            "out_interval", "dt_fixed", "s_order") if k in cfg
    }
    if sim_kw.get("s_order", 3) < 3:
        raise ConfigError("trajectory output needs s_order >= 3")
    try:
        config = solver1d.SimConfig(eos=model, eq=eq, **sim_kw)
    except TypeError as exc:
        raise ConfigError(f"malformed solver config: {exc}") from exc
    if "checkpoint_in" in cfg:
        field = solver1d.load_checkpoint(
            cfg["checkpoint_in"], cfg.get("checkpoint_in_format", "binary"))
    else:
        init_kw = {k: cfg[k] for k in ("amplitude", "width", "shape")
                   if k in cfg}
        if "components" in cfg:
            init_kw["components"] = tuple(cfg["components"])
        try:
            field = solver1d.init_perturbation(config, **init_kw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed initial data config: {exc}") from exc
    traj = solver1d.run(field, config)
    if "checkpoint_out" in cfg:
        solver1d.save_checkpoint(traj.field, cfg["checkpoint_out"],
                                 cfg.get("checkpoint_out_format", "binary"))
    csv_text = _csv_text(_TRAJ_COLUMNS, _trajectory_rows(traj))
    (out_dir / "trajectory.csv").write_text(csv_text)
    payload = {
        "t_final": traj.field.t,
        "n_steps": traj.n_steps,
        "entropy_warnings": traj.entropy_warnings,
        "records": len(traj.records),
    }
    _write_json(out_dir / "simulate.json", payload)
    if args.format == "csv":
        sys.stdout.write(csv_text)
    else:
        print(json.dumps(_jsonable(payload), indent=2))
    return 0


def _cmd_decay(args, cfg, out_dir: Path) -> int:
    config = _experiment(cfg, args, "nonlinear-decay")
    if config.kind != "nonlinear-decay":
        raise ConfigError("decay runs nonlinear-decay experiments; "
                          "use linear-decay for the spectral kinds")
    report = harness.nonlinear_decay_experiment(config)
    payload = _decay_report_payload(report)
    _emit(args, out_dir, "decay", payload, harness.decay_csv(report))
    if report.error is not None:
        print(f"numerical failure: {report.error}", file=sys.stderr)
        return 3
    return 0 if report.verdict else 2


def _default_suite():
    mk = harness.ExperimentConfig
    linear = dict(n_cells=2 ** 16, length=4000.0, width=1.0, t_max=1e4)
    return [
        mk(kind="linear-decay", name="linear-generic", **linear),
        mk(kind="mperp-decay", name="linear-mperp", **linear),
        mk(kind="coupling-sweep", name="coupling-1d", dim=1),
        mk(kind="coupling-sweep", name="coupling-2d", dim=2),
        mk(kind="spectrum-scan", name="spectrum-scan"),
        mk(kind="nonlinear-decay", name="nonlinear-decay"),
    ]


def _cmd_report(args, cfg, out_dir: Path) -> int:
    if cfg is None:
        configs = _default_suite()
        if args.seed is not None:
            configs = [harness.experiment_from_dict(
                {**harness.experiment_to_dict(c), "seed": args.seed})
                for c in configs]
    else:
        if isinstance(cfg, dict):
            cfg = cfg.get("experiments", None)
        if not isinstance(cfg, list):
            raise ConfigError("report config must be a list of experiment "
                              "objects or {\"experiments\": [...]}")
        configs = [_experiment(entry, args, "nonlinear-decay") for entry in cfg]
    report = harness.full_report(configs)
    _write_json(out_dir / "report.json", report)
    markdown = harness.render_markdown(report)
    (out_dir / "report.md").write_text(markdown)
    print(markdown)
    return 0 if report["all_pass"] else 2


_HANDLERS = {
    "eos-check": _cmd_eos_check,
    "assemble": _cmd_assemble,
    "coupling": _cmd_coupling,
    "spectrum": _cmd_spectrum,
    "linear-decay": _cmd_linear_decay,
    "simulate": _cmd_simulate,
    "decay": _cmd_decay,
    "report": _cmd_report,
}

_HELP = {
    "eos-check": "verify admissibility hypotheses and identities for an EOS",
    "assemble": "print linearization matrices or the full bundle",
    "coupling": "genuine-coupling verdict and compensating matrix",
    "spectrum": "Fourier-symbol eigenvalue curves and gap envelope",
    "linear-decay": "pseudo-spectral decay-rate experiment",
    "simulate": "nonlinear solver run with trajectory output",
    "decay": "nonlinear decay-rate experiment",
    "report": "run an experiment suite and write the claim table",
}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="path.json",
                        help="JSON config file")
    common.add_argument("--out", metavar="dir", default=".",
                        help="output directory (default: current)")
    common.add_argument("--seed", type=int, default=None,
                        help="override the experiment seed")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="stdout flavor where both exist")
    parser = argparse.ArgumentParser(
        prog="nerhd",
        description="non-equilibrium radiation hydrodynamics toolbox",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _HANDLERS:
        sub.add_parser(name, parents=[common], help=_HELP[name])
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 0 for --help, 2 for usage errors; remap the latter
        # to the bad-config code so 2 stays reserved for verdict failures.
        return 0 if exc.code in (0, None) else 4
    try:
        cfg = _read_config(args.config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        return _HANDLERS[args.command](args, cfg, out_dir)
    except ConfigError as exc:
        print(f"bad config: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"bad config: {exc}", file=sys.stderr)
        return 4
    except NerhdError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
