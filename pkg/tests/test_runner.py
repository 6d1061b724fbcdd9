import json
import math

import numpy as np
import pytest

from qqqsim.errors import ConfigError, InvalidParameterError
from qqqsim.hilbert import DIM, basis_state
from qqqsim.runner import (
    addressable_params,
    parse_grid,
    parse_protocol_config,
    run_config,
    run_protocol,
    simulated_unitary,
    sweep_config,
)
from qqqsim.protocols import ghz_direct_protocol, ideal_ccz

from conftest import CONFIG_DIR, load_config

TWO_PI = 2 * math.pi


# ---------------------------------------------------------------------------
# config parsing

def test_unknown_keys_rejected():
    cfg = load_config("fig4_ccz.json")
    cfg["omega_typo"] = 3
    with pytest.raises(ConfigError, match="omega_typo"):
        parse_protocol_config(cfg, base_dir=CONFIG_DIR)


def test_unknown_kind_rejected():
    with pytest.raises(ConfigError, match="kind"):
        parse_protocol_config({"kind": "teleport"}, base_dir=CONFIG_DIR)


def test_missing_spin_rejected():
    with pytest.raises(ConfigError, match="spin"):
        parse_protocol_config({"kind": "ccz"}, base_dir=CONFIG_DIR)


def test_non_numeric_value_rejected():
    cfg = load_config("fig4_ccz.json")
    cfg["omega1_MHz"] = "six"
    with pytest.raises(ConfigError, match="omega1_MHz"):
        parse_protocol_config(cfg, base_dir=CONFIG_DIR)


def test_defaults_applied():
    cfg = {"kind": "ccz", "spin": "spin_offresonant.json"}
    proto, collapse, options, n_points = parse_protocol_config(cfg, CONFIG_DIR)
    assert proto.kind == "ccz"
    assert collapse is None
    assert options.carrier_mode == "rwa"
    assert n_points == 401
    # default drive amplitude 6 MHz -> duration 1/6 us
    assert proto.total_duration() == pytest.approx(1e-6 / 6.0, rel=1e-12)


def test_collapse_entry_parsing():
    cfg = {"kind": "ccz", "spin": "spin_offresonant.json",
           "collapse": {"T1_us": 10.0, "T2_us": 12.0}}
    _, collapse, _, _ = parse_protocol_config(cfg, CONFIG_DIR)
    assert collapse.T1 == pytest.approx(10e-6)
    assert collapse.T2 == pytest.approx(12e-6)
    cfg["collapse"] = {"T1_us": 1.0, "T2_us": 50.0}  # T2 > 2 T1
    with pytest.raises(ConfigError):
        parse_protocol_config(cfg, CONFIG_DIR)
    cfg["collapse"] = {"T1_us": 1.0, "gamma": 2.0}
    with pytest.raises(ConfigError):
        parse_protocol_config(cfg, CONFIG_DIR)


def test_n_points_validation():
    cfg = {"kind": "ccz", "spin": "spin_offresonant.json", "n_points": 1}
    with pytest.raises(ConfigError, match="n_points"):
        parse_protocol_config(cfg, CONFIG_DIR)
    cfg["n_points"] = 10.5
    with pytest.raises(ConfigError):
        parse_protocol_config(cfg, CONFIG_DIR)


def test_cswap_full_requires_stage2():
    cfg = {"kind": "cswap_full", "spin": "spin_resonant_swap.json"}
    with pytest.raises(ConfigError, match="spin_stage2"):
        parse_protocol_config(cfg, CONFIG_DIR)


def test_ghz_direct_accepts_inline_coupling():
    proto, _, _, _ = parse_protocol_config({"kind": "ghz_direct", "J_MHz": 10.0})
    assert proto.kind == "ghz_direct"
    with pytest.raises(ConfigError, match="J_MHz"):
        parse_protocol_config({"kind": "ghz_direct"})


def test_initial_override_recomputes_target():
    cfg = {"kind": "ccz", "spin": "spin_offresonant.json", "initial": "u0u"}
    proto, _, _, _ = parse_protocol_config(cfg, CONFIG_DIR)
    assert np.abs(proto.target - ideal_ccz() @ basis_state("u0u")).max() < 1e-14


def test_initial_amplitude_map():
    cfg = {"kind": "ccz", "spin": "spin_offresonant.json",
           "initial": {"d0d": [1.0, 0.0], "u0u": [0.0, 1.0]}}
    proto, _, _, _ = parse_protocol_config(cfg, CONFIG_DIR)
    assert abs(np.linalg.norm(proto.initial) - 1.0) < 1e-12
    assert proto.initial[0] == pytest.approx(1 / math.sqrt(2))
    cfg["initial"] = {"d0d": [0.0, 0.0]}
    with pytest.raises(ConfigError, match="zero norm"):
        parse_protocol_config(cfg, CONFIG_DIR)
    cfg["initial"] = {"d0d": 1.0}
    with pytest.raises(ConfigError):
        parse_protocol_config(cfg, CONFIG_DIR)


def test_spin_inline_object():
    with open(CONFIG_DIR + "/spin_offresonant.json") as fh:
        spin = json.load(fh)
    proto, _, _, _ = parse_protocol_config({"kind": "ccz", "spin": spin},
                                           base_dir="/nonexistent")
    assert proto.kind == "ccz"


# ---------------------------------------------------------------------------
# execution

def test_run_protocol_rejects_stateless_options():
    from qqqsim.dynamics import IntegratorOptions
    proto = ghz_direct_protocol(TWO_PI * 10e6)
    with pytest.raises(InvalidParameterError):
        run_protocol(proto, options=IntegratorOptions(store_states=False))


def test_trajectory_grid_covers_duration():
    proto = ghz_direct_protocol(TWO_PI * 10e6)
    res = run_protocol(proto, n_points=21)
    t = res.trajectory.times
    assert t[0] == 0.0
    assert t[-1] == pytest.approx(proto.total_duration(), rel=1e-12)
    assert np.all(np.diff(t) > 0)


def test_fidelity_column_starts_at_initial_overlap():
    proto = ghz_direct_protocol(TWO_PI * 10e6)
    res = run_protocol(proto, n_points=21)
    fid = res.trajectory.fidelity
    assert fid is not None
    assert fid[0] == pytest.approx(abs(np.vdot(proto.target, proto.initial))**2,
                                   abs=1e-12)
    assert fid[-1] > 1 - 1e-9


def test_simulated_unitary_is_unitary():
    proto = ghz_direct_protocol(TWO_PI * 10e6)
    U = simulated_unitary(proto)
    assert np.abs(U @ U.conj().T - np.eye(DIM)).max() < 1e-8


def test_report_fields_for_shipped_gate_config():
    cfg = load_config("fig4_ccz.json")
    cfg["n_points"] = 21
    res = run_config(cfg, base_dir=CONFIG_DIR, want_report=True)
    rep = res.report
    assert rep.state_fidelity is not None and rep.state_fidelity > 0.98
    assert rep.process_fidelity is not None
    assert 0.0 <= rep.leakage < 0.02
    assert abs(sum(rep.per_state.values()) - 1.0) < 1e-6


def test_open_run_skips_process_fidelity():
    cfg = load_config("fig4_ccz.json")
    cfg["n_points"] = 11
    cfg["collapse"] = {"T1_us": 31.0, "T2_us": 35.0}
    res = run_config(cfg, base_dir=CONFIG_DIR, want_report=True)
    assert res.report.process_fidelity is None
    assert res.report.state_fidelity is not None


# ---------------------------------------------------------------------------
# grids and sweeps

def test_parse_grid_forms():
    g = parse_grid("0:1:5")
    assert np.allclose(g, np.linspace(0, 1, 5))
    assert parse_grid("0:2pi:3")[-1] == pytest.approx(2 * math.pi)
    assert parse_grid("0.5pi:pi:2")[0] == pytest.approx(0.5 * math.pi)
    assert parse_grid("3:3:1").tolist() == [3.0]


def test_parse_grid_errors():
    for bad in ("0:1", "a:1:5", "0:1:x", "0:1:0"):
        with pytest.raises(ConfigError):
            parse_grid(bad)


def test_sweep_rejects_non_sweepable():
    cfg = load_config("fig4_ccz.json")
    with pytest.raises(ConfigError, match="addressable"):
        sweep_config(cfg, "kind", [1.0], base_dir=CONFIG_DIR)
    with pytest.raises(ConfigError, match="addressable"):
        sweep_config(cfg, "frequency", [1.0], base_dir=CONFIG_DIR)
    assert "omega1_MHz" in addressable_params(cfg)


def test_sweep_runs_and_orders_results():
    cfg = {"kind": "ghz_direct", "J_MHz": 10.0, "n_points": 9}
    sw = sweep_config(cfg, "J_MHz", [5.0, 10.0])
    assert sw.parameter == "J_MHz"
    assert sw.values == [5.0, 10.0]
    assert "fidelity" in sw.observables
    for o in sw.observables:
        assert len(sw.results[o]) == 2
    assert all(f > 1 - 1e-9 for f in sw.results["fidelity"])
    assert sw.errors == {}


def test_sweep_records_per_point_failures():
    cfg = {"kind": "ghz_direct", "J_MHz": 10.0, "n_points": 9}
    sw = sweep_config(cfg, "m", [1.0, 2.0])
    assert 2.0 in sw.errors  # even m is infeasible
    assert sw.results["fidelity"][1] is None
    assert sw.results["fidelity"][0] is not None


def test_sweep_deterministic(tmp_path):
    cfg = {"kind": "ghz_direct", "J_MHz": 10.0, "n_points": 9}
    a = sweep_config(cfg, "J_MHz", [8.0, 12.0])
    b = sweep_config(cfg, "J_MHz", [8.0, 12.0])
    pa, pb = tmp_path / "a.csv", tmp_path / "b.csv"
    a.to_csv(pa)
    b.to_csv(pb)
    assert pa.read_bytes() == pb.read_bytes()
