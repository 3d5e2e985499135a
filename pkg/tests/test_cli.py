import json

import pytest
from click.testing import CliRunner

from dsclab.cli import main

BASE = """
[problem]
encoders = ["1"]
lossless = ["1"]
y_alphabet = 2
letter_joint = [["9/20", "1/20"], ["1/20", "9/20"]]

[problem.x_alphabets]
1 = 2

[code.1]
g_rows = 3

[simulate]
n_list = [4]
trials = 150
seed = 3
decoder = "map"

[region]
mode = "rit"

[spectrum]
target = ["x_1"]
given = ["y"]
kind = "sup_entropy_rate"
epsilon_tail = 0.25
n_list = [2, 4]
"""


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "side.toml"
    path.write_text(BASE)
    return str(path)


def test_simulate_csv_stdout(runner, config_path):
    result = runner.invoke(main, ["simulate", config_path])
    assert result.exit_code == 0, result.output
    lines = result.output.splitlines()
    assert lines[0] == "n,rates,decoder,error,half_width,exact,feasible,margin,note"
    assert lines[1].startswith("4,1:R=0.75,map,")


def test_simulate_json_stdout(runner, config_path):
    result = runner.invoke(main, ["simulate", config_path, "--format", "json"])
    assert result.exit_code == 0
    body = json.loads(result.output)
    assert body["columns"][0] == "n"
    assert body["rows"][0]["n"] == 4


def test_simulate_out_file_reruns_identical(runner, config_path, tmp_path):
    first = tmp_path / "a.csv"
    second = tmp_path / "b.csv"
    assert runner.invoke(main, ["simulate", config_path,
                                "--out", str(first)]).exit_code == 0
    assert runner.invoke(main, ["simulate", config_path,
                                "--out", str(second)]).exit_code == 0
    assert first.read_bytes() == second.read_bytes()
    seeded = tmp_path / "c.csv"
    assert runner.invoke(main, ["simulate", config_path, "--seed", "11",
                                "--out", str(seeded)]).exit_code == 0
    assert seeded.read_bytes() != first.read_bytes()


def test_simulate_trial_log_file(runner, config_path, tmp_path):
    log = tmp_path / "trials.csv"
    result = runner.invoke(main, ["simulate", config_path,
                                  "--trial-log", str(log)])
    assert result.exit_code == 0
    lines = log.read_text().splitlines()
    assert lines[0] == "n,rates,trial,seed,status,distortions,failure"
    assert len(lines) == 151


def test_simulate_guard_note_exits_nonzero(runner, tmp_path):
    text = BASE.replace("[code.1]\ng_rows = 3\n", "")
    path = tmp_path / "broken.toml"
    path.write_text(text)
    result = runner.invoke(main, ["simulate", str(path)])
    assert result.exit_code == 1
    assert "skipped:" in result.output


def test_simulate_missing_config_file(runner):
    result = runner.invoke(main, ["simulate", "/nonexistent/x.toml"])
    assert result.exit_code == 2


def test_region_csv(runner, config_path):
    result = runner.invoke(main, ["region", config_path])
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[0] == "R_1,b"
    coeff, b = lines[1].split(",")
    assert coeff == "1"
    assert abs(float(b) - 0.4689955935892812) < 1e-12


def test_region_point_membership(runner, tmp_path):
    text = BASE.replace('mode = "rit"', 'mode = "rit"\npoint = { R_1 = 0.6 }')
    path = tmp_path / "pt.toml"
    path.write_text(text)
    result = runner.invoke(main, ["region", str(path), "--format", "json"])
    assert result.exit_code == 0, result.output
    body = json.loads(result.output)
    assert body["member"] is True
    csv_result = runner.invoke(main, ["region", str(path)])
    assert csv_result.output.splitlines()[0] == "row,slack,member"
    assert csv_result.output.splitlines()[1].endswith(",True")


def test_region_invalid_mode_is_cli_error(runner, tmp_path):
    text = BASE.replace('mode = "rit"', 'mode = "outer"')
    path = tmp_path / "bad.toml"
    path.write_text(text)
    result = runner.invoke(main, ["region", str(path)])
    assert result.exit_code == 1
    assert "Error" in result.output


def test_verify_identity_scope(runner):
    result = runner.invoke(main, ["verify", "--scope", "identity"])
    assert result.exit_code == 0
    assert result.output.splitlines()[0].startswith("lemma,instance")


def test_verify_json_format(runner):
    result = runner.invoke(main, ["verify", "--scope", "decision",
                                  "--format", "json"])
    assert result.exit_code == 0
    body = json.loads(result.output)
    assert body["failures"] == 0
    assert len(body["reports"]) == 100


def test_spectrum_csv(runner, config_path):
    result = runner.invoke(main, ["spectrum", config_path])
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[0] == "n,estimate"
    assert lines[1].startswith("2,") and lines[2].startswith("4,")
    float(lines[1].split(",")[1])


def test_spectrum_json(runner, config_path):
    result = runner.invoke(main, ["spectrum", config_path, "--format", "json"])
    body = json.loads(result.output)
    assert body["kind"] == "sup_entropy_rate"
    assert body["exact"] is True
