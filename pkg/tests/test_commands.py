import json

import numpy as np
import pandas as pd
import pytest

from app.main import main
from app.services.channel_model import exponential_correlation
from app.utils.matrix_io import write_complex_matrix


def _config(tmp_path, document, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(document))
    return str(path)


def _run(command, config_path, out_dir, *extra):
    return main([command, "--config", config_path, "--out", str(out_dir), "--log-level", "WARNING", *extra])


SCENARIO = {"M": 4, "N": 4, "L": 8, "snr_db": 10.0}


def test_emi_sweep(tmp_path):
    config = _config(tmp_path, {"scenario": SCENARIO, "sweep": {"L": [4, 8, 16, 32]}})
    assert _run("emi", config, tmp_path / "out") == 0
    frame = pd.read_csv(tmp_path / "out" / "emi.csv")
    assert list(frame["L"]) == [4, 8, 16, 32]
    np.testing.assert_allclose(frame["emi_bits"], frame["emi_nats"] / np.log(2.0), rtol=1e-10)
    assert np.all(np.diff(frame["emi_nats"]) > 0)
    assert ((frame["eta"] > 0.0) & (frame["eta"] < 1.0)).all()
    assert np.all(np.diff(frame["eta"]) > 0)
    assert np.all(frame["snr_db"] == pytest.approx(10.0))


def test_emi_efficiency_stays_in_unit_interval(tmp_path):
    scenario = {"M": 4, "N": 4, "L": 4, "snr_db": 20.0}
    config = _config(tmp_path, {"scenario": scenario, "sweep": {"L": [2, 4, 64, 1024]}})
    assert _run("emi", config, tmp_path / "out") == 0
    frame = pd.read_csv(tmp_path / "out" / "emi.csv")
    assert ((frame["eta"] > 0.0) & (frame["eta"] < 1.0)).all()
    np.testing.assert_allclose(frame["emi_inf_bits"], frame["emi_inf_bits"][0], rtol=1e-12)


@pytest.mark.parametrize(
    "scenario",
    [
        {"M": 16, "N": 4, "L": 8, "snr_db": 10.0},
        {**SCENARIO, "correlation": {"mu_R2": 0.5}},
    ],
)
def test_emi_efficiency_blank_without_rayleigh_limit(tmp_path, caplog, scenario):
    config = _config(tmp_path, {"scenario": scenario, "sweep": {"L": [8, 64]}})
    assert _run("emi", config, tmp_path / "out") == 0
    frame = pd.read_csv(tmp_path / "out" / "emi.csv")
    assert frame[["emi_inf_bits", "eta", "var_inf_nats2"]].isna().all().all()
    assert frame["emi_nats"].notna().all()
    assert "written as NaN" in caplog.text


def test_emi_solver_failure_exits_with_convergence_code(tmp_path, stalled_solver):
    config = _config(tmp_path, {"scenario": SCENARIO})
    assert _run("emi", config, tmp_path / "out") == 4


def test_emi_power_axis(tmp_path):
    scenario = {key: value for key, value in SCENARIO.items() if key != "snr_db"}
    scenario["budget"] = {"sigma2_dBm": -80.0, "C0_dB": -30.0, "d_bs_irs": 10.0, "d_irs_ue": 5.0}
    config = _config(tmp_path, {"scenario": scenario, "sweep": {"power_dbm": [0.0, 10.0, 20.0]}})
    assert _run("emi", config, tmp_path / "out") == 0
    frame = pd.read_csv(tmp_path / "out" / "emi.csv")
    np.testing.assert_allclose(np.diff(frame["snr_db"]), [10.0, 10.0], rtol=1e-9)


def test_gnuplot_series(tmp_path):
    config = _config(tmp_path, {"scenario": SCENARIO, "sweep": {"L": [4, 8]}})
    assert _run("emi", config, tmp_path / "out", "--gnuplot") == 0
    lines = (tmp_path / "out" / "emi_emi_bits.dat").read_text().splitlines()
    assert lines[0] == "# L emi_bits"
    assert len(lines) == 3


def test_outage_without_thresholds_is_header_only(tmp_path):
    config = _config(tmp_path, {"scenario": SCENARIO})
    assert _run("outage", config, tmp_path / "out", "--units", "bits") == 0
    text = (tmp_path / "out" / "outage.csv").read_text()
    assert text == (
        "snr_db,rate_threshold_bits,p_out_theory,p_out_theory_large_l,"
        "p_out_mc,mc_ci_low,mc_ci_high,mc_low_count\n"
    )


def _outage_document():
    return {
        "scenario": {**SCENARIO, "correlation": {"mu_R1": 0.5, "mu_T1": 0.5, "mu_R2": 0.5, "mu_T2": 0.5}},
        "sweep": {"snr_db": [5.0, 10.0], "rate_bits": [4.0, 8.0], "p_out": [0.01, 0.1]},
        "mc": {"seed": 123, "samples": 2000, "streams": 2},
    }


def test_outage_theory_and_monte_carlo(tmp_path):
    config = _config(tmp_path, _outage_document())
    assert _run("outage", config, tmp_path / "out", "--units", "nats") == 0
    frame = pd.read_csv(tmp_path / "out" / "outage.csv")
    assert len(frame) == 4
    np.testing.assert_allclose(frame["rate_threshold_nats"], [4 * np.log(2), 8 * np.log(2)] * 2, rtol=1e-10)
    assert frame["p_out_mc"].between(0, 1).all()
    assert (frame["mc_ci_low"] <= frame["p_out_mc"]).all() and (frame["p_out_mc"] <= frame["mc_ci_high"]).all()
    # Outage falls as SNR rises at a fixed rate
    assert frame["p_out_theory"][2] < frame["p_out_theory"][0]

    rates = pd.read_csv(tmp_path / "out" / "outage_rate.csv")
    assert list(rates.columns) == ["snr_db", "p_out", "rate_nats"]
    assert len(rates) == 4
    assert rates["rate_nats"][0] < rates["rate_nats"][1]


def test_outage_runs_are_byte_identical(tmp_path):
    config = _config(tmp_path, _outage_document())
    assert _run("outage", config, tmp_path / "a", "--threads", "1") == 0
    assert _run("outage", config, tmp_path / "b", "--threads", "4") == 0
    assert (tmp_path / "a" / "outage.csv").read_bytes() == (tmp_path / "b" / "outage.csv").read_bytes()


def test_seed_flag_changes_monte_carlo(tmp_path):
    config = _config(tmp_path, _outage_document())
    assert _run("outage", config, tmp_path / "a") == 0
    assert _run("outage", config, tmp_path / "b", "--seed", "124") == 0
    first = pd.read_csv(tmp_path / "a" / "outage.csv")
    second = pd.read_csv(tmp_path / "b" / "outage.csv")
    np.testing.assert_array_equal(first["p_out_theory"], second["p_out_theory"])
    assert not np.array_equal(first["p_out_mc"], second["p_out_mc"])


def test_optimize_writes_trajectory_and_phases(tmp_path):
    document = {
        "scenario": {
            **SCENARIO,
            "correlation": {"mu_R1": 0.8, "mu_T1": 0.8, "mu_R2": 0.8, "mu_T2": 0.8},
            "theta_init": "ramp",
            "rate_bits": 6.0,
        },
        "sweep": {"mu_transceiver": [0.0, 0.5]},
        "optimizer": {"alpha0": 0.05, "max_outer": 5},
    }
    config = _config(tmp_path, document)
    assert _run("optimize", config, tmp_path / "out") == 0
    trajectory = pd.read_csv(tmp_path / "out" / "optimize.csv")
    assert list(trajectory.columns) == ["iteration", "p_out_theory", "p_out_theory_small_l"]
    assert np.all(np.diff(trajectory["p_out_theory"]) <= 0)

    theta = np.loadtxt(tmp_path / "out" / "theta_rad.txt")
    assert theta.shape == (8,)
    assert np.all((theta >= 0) & (theta < 2 * np.pi))

    sweep = pd.read_csv(tmp_path / "out" / "correlation_sweep.csv")
    assert list(sweep["mu"]) == [0.0, 0.5]
    assert (sweep["p_out_optimized"] <= sweep["p_out_initial"]).all()


def test_transceiver_correlation_raises_optimized_outage(tmp_path):
    document = {
        "scenario": {
            "M": 4, "N": 4, "L": 16, "snr_db": 10.0,
            "correlation": {"mu_T1": 0.5, "mu_R2": 0.5},
            "theta_init": "ramp",
            "rate_bits": 8.0,
        },
        "sweep": {"mu_transceiver": [0.0, 0.3, 0.6, 0.9]},
        "optimizer": {"alpha0": 0.05, "max_outer": 10},
    }
    config = _config(tmp_path, document)
    assert _run("optimize", config, tmp_path / "out") == 0
    sweep = pd.read_csv(tmp_path / "out" / "correlation_sweep.csv")
    assert list(sweep["mu"]) == [0.0, 0.3, 0.6, 0.9]
    assert (sweep["p_out_optimized"] <= sweep["p_out_initial"]).all()
    assert np.all(np.diff(sweep["p_out_optimized"]) >= 0)


def test_optimize_needs_optimizer_block(tmp_path):
    config = _config(tmp_path, {"scenario": {**SCENARIO, "rate_bits": 6.0}})
    assert _run("optimize", config, tmp_path / "out") == 2


def test_dmt_endpoints_always_reported(tmp_path):
    document = {
        "scenario": {
            "M": 4, "N": 4, "L": 2, "snr_db": 10.0,
            "correlation": {"mu_R1": 0.5, "mu_T1": 0.5, "mu_R2": 0.5, "mu_T2": 0.5},
        },
        "sweep": {"m": [0.5, 1.0]},
    }
    config = _config(tmp_path, document)
    assert _run("dmt", config, tmp_path / "out") == 0
    frame = pd.read_csv(tmp_path / "out" / "dmt.csv")
    assert list(frame["m"]) == [0.0, 0.5, 1.0, 2.0]
    assert frame["d_theorem5"].iloc[-1] == 0.0
    assert (frame["d_theorem5"] >= 0).all()
    np.testing.assert_allclose(frame["d_theorem5"][1:3], frame["d_numeric_slope"][1:3], rtol=0.02)


def test_size_targets_deduplicated(tmp_path):
    document = {"scenario": {"M": 20, "N": 20, "L": 20}, "sweep": {"snr_db": [10.0], "eta": [0.95, 0.9, 0.9]}}
    config = _config(tmp_path, document)
    assert _run("size", config, tmp_path / "out") == 0
    frame = pd.read_csv(tmp_path / "out" / "size.csv")
    assert list(frame["eta"]) == [0.9, 0.95]
    assert frame["reachable"].all()
    assert 1.5 <= frame["L_min"][1] / frame["L_min"][0] <= 2.5


def test_size_needs_targets(tmp_path):
    config = _config(tmp_path, {"scenario": SCENARIO})
    assert _run("size", config, tmp_path / "out") == 2


def test_mc_validate_report(tmp_path):
    document = {"scenario": {"M": 4, "N": 4, "L": 4, "snr_db": 10.0}, "mc": {"seed": 5, "samples": 3000}}
    config = _config(tmp_path, document)
    assert _run("mc-validate", config, tmp_path / "out", "--units", "bits") == 0
    frame = pd.read_csv(tmp_path / "out" / "mc_validate.csv")
    assert list(frame.columns) == [
        "quantity", "threshold_bits", "theory", "empirical", "ci_low", "ci_high", "passed",
    ]
    assert frame["threshold_bits"].notna().sum() == 3
    assert list(frame["quantity"]) == ["mean_bits", "var_nats2", "p_out", "p_out", "p_out", "ks_distance"]
    assert frame["passed"].dtype == bool


def test_mc_validate_needs_mc_block(tmp_path):
    config = _config(tmp_path, {"scenario": SCENARIO})
    assert _run("mc-validate", config, tmp_path / "out") == 2


def test_correlation_side_file_matches_exponential_model(tmp_path):
    write_complex_matrix(exponential_correlation(4, 0.5), tmp_path / "R1.txt")
    by_file = {"scenario": {**SCENARIO, "correlation": {"R1_file": "R1.txt"}}}
    by_mu = {"scenario": {**SCENARIO, "correlation": {"mu_R1": 0.5}}}
    assert _run("emi", _config(tmp_path, by_file, "file.json"), tmp_path / "a") == 0
    assert _run("emi", _config(tmp_path, by_mu, "mu.json"), tmp_path / "b") == 0
    assert (tmp_path / "a" / "emi.csv").read_bytes() == (tmp_path / "b" / "emi.csv").read_bytes()


def test_side_file_with_wrong_shape(tmp_path):
    write_complex_matrix(np.eye(3), tmp_path / "R1.txt")
    config = _config(tmp_path, {"scenario": {**SCENARIO, "correlation": {"R1_file": "R1.txt"}}})
    assert _run("emi", config, tmp_path / "out") == 2


def test_explicit_phases_from_file(tmp_path):
    np.savetxt(tmp_path / "theta.txt", np.linspace(0.0, 3.0, 8))
    document = {"scenario": {**SCENARIO, "theta_init": "file", "theta_file": "theta.txt"}}
    assert _run("emi", _config(tmp_path, document), tmp_path / "out") == 0


@pytest.mark.parametrize(
    "document",
    [
        {"scenario": {**SCENARIO, "colour": "red"}},
        {"scenario": {**SCENARIO, "L": 0}},
        {"scenario": {**SCENARIO, "theta_init": "explicit", "theta": [0.0, 1.0]}},
        {"scenario": SCENARIO, "sweep": {"snr_db": [0.0], "power_dbm": [10.0]}},
        {"scenario": SCENARIO, "sweep": {"eta": [1.2]}},
        {"sweep": {"L": [4]}},
    ],
)
def test_invalid_configs_exit_with_config_code(tmp_path, document):
    assert _run("emi", _config(tmp_path, document), tmp_path / "out") == 2


def test_malformed_json_and_missing_file(tmp_path, caplog):
    path = tmp_path / "broken.json"
    path.write_text('{"scenario": {"M": 4,}')
    assert _run("emi", str(path), tmp_path / "out") == 2
    assert "broken.json:1:" in caplog.text
    assert _run("emi", str(tmp_path / "absent.json"), tmp_path / "out") == 2


def test_seed_outside_range(tmp_path):
    config = _config(tmp_path, _outage_document())
    assert _run("outage", config, tmp_path / "out", "--seed", "-1") == 2
