"""Render one image per shipped-config CSV.

These tests regenerate small, fast versions of the shipped trajectory and
sweep CSVs through the simulator command line, then render each with the
plot scripts.  They are skipped when the simulator package is not
installed; the rendering logic itself is covered by test_render.py.
"""

import json
import math
import os

import pytest

qqqsim_cli = pytest.importorskip("qqqsim.cli")

from qqqplots.cli import main_sweep, main_traj

CONFIG_DIR = os.path.join(os.path.dirname(__file__), "..", "..", "configs")

TRAJ_CONFIGS = ["fig3a_stirap.json", "fig3b_dissociation.json",
                "fig4_ccz.json", "fig4b_cswap.json", "fig5_holonomic.json"]


@pytest.mark.parametrize("name", TRAJ_CONFIGS)
def test_render_shipped_trajectory(tmp_path, name):
    with open(os.path.join(CONFIG_DIR, name)) as fh:
        cfg = json.load(fh)
    cfg["n_points"] = 25
    for key in ("spin", "spin_stage2"):
        if isinstance(cfg.get(key), str):
            cfg[key] = os.path.abspath(os.path.join(CONFIG_DIR, cfg[key]))
    cfg_path = tmp_path / name
    cfg_path.write_text(json.dumps(cfg))
    csv = tmp_path / (name + ".csv")
    # closed system: plotting does not depend on the decay channels and
    # the state-vector run is much faster
    assert qqqsim_cli.main(["simulate", str(cfg_path), "--out", str(csv),
                            "--collapse", "none"]) == 0
    img = tmp_path / (name + ".png")
    assert main_traj([str(csv), "-o", str(img)]) == 0
    assert img.stat().st_size > 0


def test_render_theta_sweep_with_theory(tmp_path):
    with open(os.path.join(CONFIG_DIR, "fig6_theta_sweep.json")) as fh:
        cfg = json.load(fh)
    cfg["n_points"] = 9
    if isinstance(cfg.get("spin"), str):
        cfg["spin"] = os.path.abspath(os.path.join(CONFIG_DIR, cfg["spin"]))
    cfg_path = tmp_path / "fig6.json"
    cfg_path.write_text(json.dumps(cfg))
    csv = tmp_path / "fig6.csv"
    assert qqqsim_cli.main(["sweep", str(cfg_path), "--param", "theta_rad",
                            "--grid", "0:pi:7", "--out", str(csv)]) == 0
    img = tmp_path / "fig6.svg"
    assert main_sweep([str(csv), "-o", str(img),
                       "--theory", "cos2,sin2"]) == 0
    assert img.stat().st_size > 0
