import math

import pytest

from qqqplots import PlotError, plot_sweep, plot_trajectory
from qqqplots.cli import main_sweep, main_traj

TRAJ_HEADER = ("t_ns,p_d0d,p_d0u,p_d1d,p_d1u,p_d2d,p_d2u,"
               "p_u0d,p_u0u,p_u1d,p_u1u,p_u2d,p_u2u,fidelity")


def make_traj_csv(path, envelope=False):
    header = TRAJ_HEADER + (",env_M01" if envelope else "")
    lines = [header]
    for k in range(6):
        t = 10.0 * k
        pops = [0.0] * 12
        pops[0] = 1.0 - 0.1 * k
        pops[7] = 0.1 * k
        row = [f"{t:.9g}"] + [f"{p:.9g}" for p in pops] + ["0.5"]
        if envelope:
            row.append(f"{math.sin(0.1 * k):.9g}")
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")
    return str(path)


def make_sweep_csv(path, observables=("p_u0u", "p_u2u"), n=9):
    lines = ["param,value,observable,result"]
    for name in observables:
        for k in range(n):
            theta = math.pi * k / (n - 1)
            val = math.cos(theta)**2 if name == "p_u0u" else math.sin(theta)**2
            lines.append(f"theta_rad,{theta:.9g},{name},{val:.9g}")
    path.write_text("\n".join(lines) + "\n")
    return str(path)


# ---------------------------------------------------------------------------
# trajectory plots

def test_plot_trajectory_renders(tmp_path):
    csv = make_traj_csv(tmp_path / "traj.csv")
    out = tmp_path / "traj.png"
    plot_trajectory(csv, out)
    assert out.exists() and out.stat().st_size > 0


def test_plot_trajectory_single_column(tmp_path):
    csv = make_traj_csv(tmp_path / "traj.csv")
    out = tmp_path / "one.png"
    plot_trajectory(csv, out, columns=["p_u0u"])
    assert out.exists()


def test_plot_trajectory_envelope_secondary_axis(tmp_path):
    csv = make_traj_csv(tmp_path / "traj.csv", envelope=True)
    out = tmp_path / "env.svg"
    plot_trajectory(csv, out)
    text = out.read_text()
    assert "svg" in text  # vector output rendered


def test_plot_trajectory_missing_column_lists_headers(tmp_path):
    csv = make_traj_csv(tmp_path / "traj.csv")
    out = tmp_path / "x.png"
    with pytest.raises(PlotError) as err:
        plot_trajectory(csv, out, columns=["p_q9q"])
    assert "p_q9q" in str(err.value)
    assert "t_ns" in str(err.value)  # available headers listed
    assert not out.exists()


def test_plot_trajectory_empty_file(tmp_path):
    csv = tmp_path / "empty.csv"
    csv.write_text("")
    out = tmp_path / "x.png"
    with pytest.raises(PlotError, match="empty"):
        plot_trajectory(str(csv), out)
    assert not out.exists()


def test_plot_trajectory_header_only(tmp_path):
    csv = tmp_path / "hdr.csv"
    csv.write_text(TRAJ_HEADER + "\n")
    with pytest.raises(PlotError, match="no data rows"):
        plot_trajectory(str(csv), tmp_path / "x.png")


# ---------------------------------------------------------------------------
# sweep plots

def test_plot_sweep_with_theory(tmp_path):
    csv = make_sweep_csv(tmp_path / "sweep.csv")
    out = tmp_path / "sweep.png"
    plot_sweep(csv, out, theory=("cos2", "sin2"))
    assert out.exists() and out.stat().st_size > 0


def test_plot_sweep_without_theory(tmp_path):
    csv = make_sweep_csv(tmp_path / "sweep.csv", observables=("fidelity",))
    out = tmp_path / "plain.png"
    plot_sweep(csv, out)
    assert out.exists()


def test_plot_sweep_skips_nan_points(tmp_path):
    csv = tmp_path / "sweep.csv"
    csv.write_text("param,value,observable,result\n"
                   "m,1,fidelity,0.5\n"
                   "m,2,fidelity,nan\n")
    out = tmp_path / "nan.png"
    plot_sweep(str(csv), out)
    assert out.exists()


def test_plot_sweep_unknown_theory(tmp_path):
    csv = make_sweep_csv(tmp_path / "sweep.csv")
    with pytest.raises(PlotError, match="cos2"):
        plot_sweep(csv, tmp_path / "x.png", theory=("tan2",))


def test_plot_sweep_wrong_schema_lists_headers(tmp_path):
    csv = make_traj_csv(tmp_path / "traj.csv")
    with pytest.raises(PlotError) as err:
        plot_sweep(csv, tmp_path / "x.png")
    assert "observable" in str(err.value)
    assert "p_d0d" in str(err.value)


# ---------------------------------------------------------------------------
# command-line wrappers

def test_cli_traj(tmp_path, capsys):
    csv = make_traj_csv(tmp_path / "traj.csv")
    out = tmp_path / "traj.png"
    assert main_traj([csv, "-o", str(out), "--columns", "p_d0d,p_u0u"]) == 0
    assert out.exists()
    assert main_traj([csv, "-o", str(tmp_path / "y.png"),
                      "--columns", "nope"]) == 2
    assert "available" in capsys.readouterr().err


def test_cli_sweep(tmp_path, capsys):
    csv = make_sweep_csv(tmp_path / "sweep.csv")
    out = tmp_path / "sweep.png"
    assert main_sweep([csv, "-o", str(out), "--theory", "cos2,sin2"]) == 0
    assert out.exists()
    assert main_sweep(["/nonexistent.csv", "-o", str(out)]) == 2
    assert "error" in capsys.readouterr().err
