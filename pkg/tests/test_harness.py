"""Tests for decay fitting and the experiment harness."""

import numpy as np
import pytest

from nerhd import harness as hz
from nerhd.errors import ConfigError, DomainError, InsufficientData


# ------------------------------------------------------------ fit_decay


def test_fit_exact_power_law():
    t = np.linspace(0.0, 300.0, 400)
    slope, stderr = hz.fit_decay(t, (1 + t) ** -0.25, (50.0, 300.0))
    assert slope == pytest.approx(-0.25, abs=1e-12)
    assert stderr < 1e-12


def test_fit_perturbed_power_law():
    t = np.linspace(0.0, 300.0, 400)
    v = 5.0 * (1 + t) ** -0.75 * (1 + 0.01 * np.sin(np.log(1 + t)))
    slope, stderr = hz.fit_decay(t, v, (50.0, 300.0))
    assert slope == pytest.approx(-0.75, abs=0.01)
    assert stderr < 0.01


def test_fit_constant_series_and_scale_invariance():
    t = np.linspace(0.0, 300.0, 200)
    slope, _ = hz.fit_decay(t, np.full_like(t, 3.7), (50.0, 300.0))
    assert slope == pytest.approx(0.0, abs=1e-12)
    base, _ = hz.fit_decay(t, (1 + t) ** -0.5, (50.0, 300.0))
    scaled, _ = hz.fit_decay(t, 2.5e8 * (1 + t) ** -0.5, (50.0, 300.0))
    assert scaled == pytest.approx(base, abs=1e-12)


def test_fit_window_and_validation():
    t = np.linspace(0.0, 100.0, 200)
    v = (1 + t) ** -0.25
    with pytest.raises(InsufficientData):
        hz.fit_decay(t, v, (99.0, 100.0))
    neg = v.copy()
    neg[150] = -1.0
    with pytest.raises(DomainError):
        hz.fit_decay(t, neg, (50.0, 100.0))
    with pytest.raises(DomainError):
        hz.fit_decay(t, v[:-1], (0.0, 100.0))
    # samples outside the window must not influence the slope
    spoiled = v.copy()
    spoiled[t < 40.0] = 17.0
    slope, _ = hz.fit_decay(t, spoiled, (50.0, 100.0))
    assert slope == pytest.approx(-0.25, abs=1e-12)


# ------------------------------------------------------------- configs


def test_experiment_config_validation_and_roundtrip():
    with pytest.raises(ConfigError):
        hz.ExperimentConfig(kind="warp-drive")
    cfg = hz.ExperimentConfig(kind="linear-decay", n_cells=512, width=1.5)
    assert cfg.name == "linear-decay"
    data = hz.experiment_to_dict(cfg)
    back = hz.experiment_from_dict(data)
    assert back == cfg
    with pytest.raises(ConfigError):
        hz.experiment_from_dict({"kind": "linear-decay", "bogus_field": 1})
    with pytest.raises(ConfigError):
        hz.experiment_from_dict([1, 2, 3])


# --------------------------------------------------------- experiments


@pytest.fixture(scope="module")
def small_linear_report():
    cfg = hz.ExperimentConfig(kind="linear-decay", n_cells=2**12,
                              length=1000.0, width=1.0, t_max=2e3)
    return cfg, hz.linear_decay_experiment(cfg)


def test_linear_decay_small(small_linear_report):
    _, rep = small_linear_report
    assert rep.slopes["l2"][0] == pytest.approx(-0.25, abs=0.05)
    assert rep.slopes["h1"][0] == pytest.approx(-0.75, abs=0.05)
    assert rep.verdict
    assert rep.fit_window[0] == 50.0


def test_mperp_decay_small():
    cfg = hz.ExperimentConfig(kind="mperp-decay", n_cells=2**12,
                              length=1000.0, width=1.0, t_max=2e3)
    rep = hz.linear_decay_experiment(cfg)
    assert rep.slopes["l2"][0] == pytest.approx(-0.75, abs=0.05)
    assert rep.verdict


def test_linear_experiment_rejects_wrong_kind():
    with pytest.raises(ConfigError):
        hz.linear_decay_experiment(hz.ExperimentConfig(kind="nonlinear-decay"))


def test_nonlinear_decay_small_run():
    # short, coarse run: no decay verdict expected, but bookkeeping and
    # conservation info must be present and sane
    cfg = hz.ExperimentConfig(kind="nonlinear-decay", n_cells=512,
                              length=200.0, t_final=60.0, width=2.0,
                              fit_t_min=10.0, out_interval=1.0)
    rep = hz.nonlinear_decay_experiment(cfg)
    assert rep.error is None
    assert set(rep.norms) == {"l2", "h1", "h2", "h3"}
    assert rep.times[0] == 0.0
    assert rep.info["mass_drift"] < 1e-12
    assert rep.info["momentum_drift"] < 1e-12
    assert rep.info["energy_drift"] < 1e-12
    assert rep.info["entropy_warnings"] == 0
    assert "l2" in rep.slopes
    # window stays inside the wrap-around horizon
    assert rep.fit_window[1] <= rep.info["horizon"] + 1e-12


def test_nonlinear_rate_independent_of_amplitude():
    # small-data regime: the fitted exponent must not depend on epsilon
    base = dict(kind="nonlinear-decay", n_cells=2**12, length=500.0,
                t_final=120.0, width=2.0, fit_t_min=20.0, out_interval=1.0)
    ra = hz.nonlinear_decay_experiment(hz.ExperimentConfig(**base, amplitude=1e-2))
    rb = hz.nonlinear_decay_experiment(hz.ExperimentConfig(**base, amplitude=1e-3))
    sa, ea = ra.slopes["l2"]
    sb, eb = rb.slopes["l2"]
    assert abs(sa - sb) <= 2.0 * max(ea, eb)


def test_nonlinear_decay_reports_positivity_failure():
    cfg = hz.ExperimentConfig(kind="nonlinear-decay", n_cells=128,
                              length=20.0, t_final=2.0, amplitude=6.0,
                              width=1.0, components=(0.0, 1.0, 0.0, 0.0))
    rep = hz.nonlinear_decay_experiment(cfg)
    assert not rep.verdict
    assert rep.error is not None
    assert "PositivityLoss" in rep.error


def test_coupling_sweep_both_dimensions():
    one = hz.coupling_sweep_experiment(
        hz.ExperimentConfig(kind="coupling-sweep", dim=1, n_states=6, seed=2))
    two = hz.coupling_sweep_experiment(
        hz.ExperimentConfig(kind="coupling-sweep", dim=2, n_states=4, seed=2))
    assert one["verdict"] and two["verdict"]
    assert "coupled" in one["claim"]
    assert "not genuinely coupled" in two["claim"]


def test_spectrum_scan_verdict():
    row = hz.spectrum_scan_experiment(hz.ExperimentConfig(kind="spectrum-scan"))
    assert row["verdict"]
    assert "c = " in row["measured"]


# -------------------------------------------------------------- report


def test_full_report_and_markdown(small_linear_report):
    cfg, rep = small_linear_report
    sweep = hz.ExperimentConfig(kind="coupling-sweep", dim=2, n_states=3,
                                seed=9, name="planar-sweep")
    doc = hz.full_report([cfg, sweep])
    assert doc["all_pass"]
    assert [row["name"] for row in doc["experiments"]] == [
        "linear-decay", "planar-sweep"]
    md = hz.render_markdown(doc)
    assert "| planar-sweep |" in md
    assert "all claims pass" in md


def test_full_report_empty():
    doc = hz.full_report([])
    assert doc == {"experiments": [], "all_pass": True}


def test_decay_csv_deterministic(small_linear_report):
    cfg, rep = small_linear_report
    again = hz.linear_decay_experiment(cfg)
    assert hz.decay_csv(rep) == hz.decay_csv(again)
    header = hz.decay_csv(rep).splitlines()[0]
    assert header == "t,h1,l2"
