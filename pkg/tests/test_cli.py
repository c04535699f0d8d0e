import json
import math

from nonideal_tpm.cli import run_cli

BETA_S = 1.0 / 30.0


def write_config(path, **extra):
    data = {
        "system": {"e_s": 1.0, "beta_s": BETA_S},
        "pointer": {"n_qubits": 3, "e_p": 0.1, "ratio": 1},
        "process": {"kind": "rabi", "theta": math.pi},
    }
    data.update(extra)
    path.write_text(json.dumps(data))
    return path


def test_run_to_stdout(tmp_path, capsys):
    cfg = write_config(tmp_path / "one.json")
    assert run_cli(["run", str(cfg)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[-2] == "theta,ratio,w_ideal,w_nonid,deviation"
    theta, ratio, w, w_non, dev = map(float, out[-1].split(","))
    assert abs(dev / w - 0.49875) < 5e-4


def test_run_output_is_byte_identical(tmp_path):
    cfg = write_config(tmp_path / "one.json")
    assert run_cli(["run", str(cfg), "--out", str(tmp_path / "a")]) == 0
    assert run_cli(["run", str(cfg), "--out", str(tmp_path / "b")]) == 0
    assert (tmp_path / "a" / "one.csv").read_bytes() == (tmp_path / "b" / "one.csv").read_bytes()


def test_run_writes_config_csv_path(tmp_path):
    cfg = write_config(tmp_path / "one.json", outputs={"csv": "result.csv"})
    assert run_cli(["run", str(cfg)]) == 0
    assert (tmp_path / "result.csv").exists()


def test_malformed_json_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"system": {"e_s": 1.0,,}}')
    assert run_cli(["run", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "bad.json:1:24:" in err


def test_invalid_config_exits_1(tmp_path, capsys):
    cfg = write_config(tmp_path / "grid.json", process={"kind": "rabi", "thetas": [0.1, 0.2]})
    assert run_cli(["run", str(cfg)]) == 1
    assert "single" in capsys.readouterr().err
    assert run_cli(["mc", str(cfg)]) == 1


def test_usage_errors_exit_1(capsys):
    assert run_cli(["figure", "fig9"]) == 1
    assert run_cli(["sweep"]) == 1
    assert run_cli(["verify", "--seed", "-3"]) == 1


def test_sweep_parallel_identical(tmp_path):
    cfg = write_config(
        tmp_path / "grid.json",
        pointer={"n_qubits": 3, "e_p": 0.1, "ratios": [1, 300, 750]},
        process={"kind": "rabi", "theta_grid": {"start": 0, "stop": 6.283185307179586, "num": 21}},
    )
    assert run_cli(["sweep", str(cfg), "--out", str(tmp_path / "s")]) == 0
    assert run_cli(["sweep", str(cfg), "--out", str(tmp_path / "p"), "--parallel", "3"]) == 0
    serial = (tmp_path / "s" / "grid.csv").read_bytes()
    assert serial == (tmp_path / "p" / "grid.csv").read_bytes()
    assert len(serial.decode().splitlines()) == 4 + 63


def test_figure_fig2(tmp_path, capsys):
    assert run_cli(["figure", "fig2", "--out", str(tmp_path)]) == 0
    rows = [line.split(",") for line in (tmp_path / "fig2.csv").read_text().splitlines() if not line.startswith("#")]
    assert rows[0] == ["theta", "ratio", "w_ideal", "w_nonid", "deviation"]
    hit = [r for r in rows[1:] if float(r[0]) == math.pi and float(r[1]) == 1.0]
    assert len(hit) == 1
    assert abs(float(hit[0][4]) / float(hit[0][2]) - 0.49875) < 5e-4
    assert "FAIL" not in capsys.readouterr().err


def test_figure_rerun_overwrites(tmp_path):
    assert run_cli(["figure", "figA3", "--out", str(tmp_path)]) == 0
    first = (tmp_path / "figA3.csv").read_bytes()
    assert run_cli(["figure", "figA3", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "figA3.csv").read_bytes() == first
    assert sorted(p.name for p in tmp_path.iterdir()) == ["figA3.csv"]


def test_mc_command(tmp_path, capsys):
    cfg = write_config(tmp_path / "mc.json", mc={"samples": 200000, "seed": 11})
    assert run_cli(["mc", str(cfg)]) == 0
    first = capsys.readouterr().out
    assert run_cli(["mc", str(cfg)]) == 0
    assert capsys.readouterr().out == first
    assert run_cli(["mc", str(cfg), "--seed", "12"]) == 0
    assert capsys.readouterr().out != first


def test_verify_quick_exits_0(capsys):
    assert run_cli(["verify", "--quick"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out
    assert "checks passed" in out
