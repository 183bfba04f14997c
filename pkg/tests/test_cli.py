import json

import numpy as np
import pandas as pd
import pytest

from app.main import run
from backend.cs_x_transform import table_digest

BELL = [[0.5, 0, 0, 0.5], [0, 0, 0, 0], [0, 0, 0, 0], [0.5, 0, 0, 0.5]]


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for name in ("FLICKER_TOL", "FLICKER_UNITS", "FLICKER_THREADS", "FLICKER_SEED", "FLICKER_LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)


def as_pairs(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def from_pairs(grid):
    pairs = np.array(grid, dtype=float)
    return pairs[..., 0] + 1j * pairs[..., 1]


def write_state(tmp_path, m, name="state.json"):
    path = tmp_path / name
    path.write_text(json.dumps({"matrix": as_pairs(m)}), encoding="utf-8")
    return str(path)


def test_discord_of_bell_state(tmp_path, capsys):
    assert run(["discord", "--input", write_state(tmp_path, BELL)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["q_value"] == pytest.approx(1.0, abs=1e-12)
    assert out["unit"] == "bits"
    assert out["method"] == "piecewise"


def test_oracle_method_agrees(tmp_path, capsys):
    assert run(["--units", "nats", "discord", "--input", write_state(tmp_path, BELL),
                "--method", "oracle"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["q_value"] == pytest.approx(np.log(2.0), abs=1e-9)
    assert out["method"] == "oracle"


def test_invalid_state_exits_with_domain_error(tmp_path, capsys):
    bad = np.diag([0.6, 0.6, -0.1, -0.1]).tolist()
    assert run(["discord", "--input", write_state(tmp_path, bad)]) == 1
    assert "NotPSD" in capsys.readouterr().err


def test_general_state_needs_the_oracle(tmp_path, capsys):
    m = np.eye(4) / 4
    m[0, 1] = m[1, 0] = 0.05
    assert run(["discord", "--input", write_state(tmp_path, m.tolist())]) == 1
    assert "NotX" in capsys.readouterr().err


def test_usage_errors_exit_with_two(tmp_path):
    assert run(["discord", "--bogus"]) == 2
    assert run(["discord", "--input", str(tmp_path / "missing.json")]) == 2
    assert run(["discord", "--input", write_state(tmp_path, [[1, 0], [0, 0]])]) == 2


def test_config_line_goes_to_stderr(tmp_path, capsys):
    run(["--tol", "1e-9", "discord", "--input", write_state(tmp_path, BELL)])
    err = capsys.readouterr().err
    assert "config: tol=1e-09 units=bits" in err


def test_bad_environment_is_a_config_error(monkeypatch, capsys):
    monkeypatch.setenv("FLICKER_THREADS", "many")
    assert run(["nanopore-limit", "--beta", "1"]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_cs2x_round_trip(tmp_path, capsys):
    assert run(["cs2x", "--input", write_state(tmp_path, BELL), "--inverse"]) == 0
    cs = json.loads(capsys.readouterr().out)
    back_path = write_state(tmp_path, from_pairs(cs["matrix"]), name="cs.json")
    assert run(["cs2x", "--input", back_path]) == 0
    back = json.loads(capsys.readouterr().out)
    np.testing.assert_allclose(from_pairs(back["matrix"]), BELL, atol=1e-15)


def test_nanopore_csv(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    assert run(["nanopore", "--N", "10", "--beta", "1", "--steps", "5", "--out", str(out)]) == 0
    df = pd.read_csv(out)
    assert list(df.columns) == ["alpha_t", "q0_bits", "q_pi2_bits", "q_theta_bits", "q_bits", "theta_opt"]
    assert len(df) == 5
    assert "0.78539816339744828" in out.read_text()
    assert df["q_bits"].iloc[0] == pytest.approx(0.0, abs=1e-12)


def test_nanopore_sweep_is_deterministic(capsys):
    args = ["--threads", "2", "nanopore", "--N", "6", "--beta", "0.5", "--steps", "7"]
    assert run(args) == 0
    first = capsys.readouterr().out
    assert run(args) == 0
    assert capsys.readouterr().out == first


def test_crossings_output(capsys):
    assert run(["nanopore-crossings", "--N", "10", "--beta", "1"]) == 0
    roots = json.loads(capsys.readouterr().out)
    assert roots == pytest.approx([0.98486, 2.15673], abs=1e-4)
    assert run(["nanopore-crossings", "--N", "11", "--beta", "1"]) == 1
    assert "NoSignChange" in capsys.readouterr().err


def test_limit_output(capsys):
    assert run(["nanopore-limit", "--beta", "1"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(0.0083358, abs=1e-7)


def test_scond_and_spectrum_csv(tmp_path, capsys):
    assert run(["nanopore-scond", "--N", "10", "--beta", "1", "--t", "0.6", "--points", "11"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "theta,s_cond" and len(lines) == 12
    out = tmp_path / "spectrum.csv"
    assert run(["nanopore-spectrum", "--N", "10", "--beta", "1", "--samples", "64",
                "--harmonics", "8", "--out", str(out)]) == 0
    assert list(pd.read_csv(out)["harmonic"]) == list(range(9))


def test_version_names_the_table_digest(capsys):
    assert run(["--version"]) == 0
    assert capsys.readouterr().out == f"discord-flicker 1.0.0 cs2x-table sha256:{table_digest()}\n"


def test_scond_time_flag_is_not_taken_for_a_global_option(capsys):
    assert run(["nanopore-scond", "--N", "10", "--beta", "1.0", "--t", "0.98486", "--points", "91"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 92
    values = [float(line.split(",")[1]) for line in lines[1:]]
    assert max(values) - min(values) <= 1e-4


def test_options_must_be_spelled_out():
    assert run(["--thr", "2", "nanopore-limit", "--beta", "1"]) == 2
    assert run(["nanopore-limit", "--be", "1"]) == 2


def test_state_file_takes_complex_entry_pairs(tmp_path, capsys):
    bell = np.array(BELL, dtype=complex)
    bell[0, 3], bell[3, 0] = 0.5j, -0.5j
    assert run(["discord", "--input", write_state(tmp_path, bell)]) == 0
    assert json.loads(capsys.readouterr().out)["q_value"] == pytest.approx(1.0, abs=1e-12)


def test_state_file_rejects_split_grids(tmp_path):
    path = tmp_path / "split.json"
    path.write_text(json.dumps({"real": BELL}), encoding="utf-8")
    assert run(["discord", "--input", str(path)]) == 2
