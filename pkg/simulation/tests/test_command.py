import io
import json

import pytest
from django.core.management import CommandError, call_command


@pytest.fixture
def config_file(tmp_path, small_config):
    path = tmp_path / "sweep.json"
    path.write_text(small_config.model_dump_json())
    return path


def _simulate(*args):
    out = io.StringIO()
    call_command("simulate", *[str(a) for a in args], stdout=out)
    return out.getvalue()


def test_power_sweep_writes_csv(tmp_path, config_file):
    out = tmp_path / "results" / "power.csv"
    _simulate("power-sweep", "--config", config_file, "--out", out, "--workers", 1, "--backend", "local", "--arch", "bd")
    lines = out.read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("sweep_value,architecture,trial")
    # 2 sweep values x 1 architecture x 3 trials
    assert len(lines) == 1 + 6
    assert all(line.split(",")[1] == "bd" for line in lines[1:])


def test_overrides_and_summary(tmp_path, config_file):
    out = tmp_path / "power.csv"
    summary = tmp_path / "summary.csv"
    _simulate(
        "power-sweep", "--config", config_file, "--out", out, "--summary", summary,
        "--trials", 2, "--seed", 5, "--power-rule", "kkt", "--workers", 1,
    )
    assert len(out.read_text(encoding="utf-8").splitlines()) == 1 + 2 * 2 * 2
    rows = summary.read_text(encoding="utf-8").splitlines()
    assert rows[0] == "sweep_value,architecture,trials,mean_se_bits,stddev_se_bits,stderr_se_bits"
    assert len(rows) == 1 + 4


def test_one_file_per_series(tmp_path, small_config):
    cfg = small_config.model_copy(update={"fixed": small_config.fixed.model_copy(update={"I_th_list": [0.01, 0.1]})})
    path = tmp_path / "sweep.json"
    path.write_text(cfg.model_dump_json())
    _simulate("power-sweep", "--config", path, "--out", tmp_path / "fig.csv", "--trials", 1, "--workers", 1)
    assert (tmp_path / "fig_ith0.01w.csv").exists()
    assert (tmp_path / "fig_ith0.1w.csv").exists()


def test_rerun_is_byte_identical(tmp_path, config_file):
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    _simulate("power-sweep", "--config", config_file, "--out", first, "--workers", 1)
    _simulate("power-sweep", "--config", config_file, "--out", second, "--workers", 2)
    assert first.read_bytes() == second.read_bytes()


def test_single_dumps_json(config_file):
    report = json.loads(_simulate("single", "--config", config_file, "--trial", 1))
    assert report["trial"] == 1
    assert set(report["architectures"]) == {"bd", "d"}


def test_invalid_config_fails(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"sweep": "power-sweep", "sweep_values": []}')
    with pytest.raises(CommandError):
        _simulate("power-sweep", "--config", path)


def test_wrong_sweep_kind(config_file):
    with pytest.raises(CommandError):
        _simulate("ith-sweep", "--config", config_file)


def test_unwritable_output(tmp_path, config_file):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(CommandError):
        _simulate("power-sweep", "--config", config_file, "--out", blocker / "x.csv", "--trials", 1, "--workers", 1)
