import csv
import json

import pytest

from pseudomodes.cli import CSV_COLUMNS, ConfigError, RunConfig, load_config, main, worker_count


def _write(tmp_path, text, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


GAMMA2 = """
potential: {name: poly_like, params: {gamma: 2}}
regime: real-axis
mode: plain
n: 2
path: {lam_min: 1e2, lam_max: 1e5, num: 8}
cutoff: {eps1: 1.6}
fit: {field: sigma}
output: {termdump: true}
"""


def test_run_writes_artifacts_and_is_deterministic(tmp_path):
    cfg = _write(tmp_path, GAMMA2)
    assert main(["run", cfg, "--out", str(tmp_path / "a"), "--workers", "4"]) == 0
    assert main(["run", cfg, "--out", str(tmp_path / "b"), "--workers", "1"]) == 0
    a = (tmp_path / "a" / "reports.csv").read_bytes()
    assert a == (tmp_path / "b" / "reports.csv").read_bytes()
    rows = list(csv.DictReader((tmp_path / "a" / "reports.csv").open()))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert len(rows) == 8
    fit = json.loads((tmp_path / "a" / "fit.json").read_text())
    assert fit["schema_version"] == 1
    assert {"slope", "intercept", "fit_residual", "points_used", "transient_dropped"} <= set(fit)
    assert -1.65 <= fit["slope"] <= -1.35
    assert (tmp_path / "a" / "termdump.txt").read_text().startswith("r_2:")


def test_sgn_ignore_w_slope(tmp_path):
    cfg = _write(
        tmp_path,
        """
potential: {name: sgn_imag_split}
mode: ignore-W
n: 1
path: {lam_min: 1e2, lam_max: 1e5, num: 8}
cutoff: {eps2: 1.0}
""",
    )
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 0
    fit = json.loads((tmp_path / "o" / "fit.json").read_text())
    assert -0.35 <= fit["slope"] <= -0.15


def test_oracle_columns(tmp_path):
    cfg = _write(
        tmp_path,
        """
potential: {name: poly_like, params: {gamma: 2}}
path: {lambdas: [100, 200]}
cutoff: {eps1: 1.6}
oracle: {enabled: true}
""",
    )
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 0
    rows = list(csv.DictReader((tmp_path / "o" / "reports.csv").open()))
    for r in rows:
        assert abs(float(r["oracle_ratio"]) - float(r["ratio"])) <= 1e-3 * float(r["ratio"])
        assert r["floor_limited"] == "false"


@pytest.mark.parametrize(
    "text",
    [
        "potential: {name: poly_like}\npath: {lambdas: []}\n",
        "potential: {name: poly_like}\npath: {lam_min: 1, lam_max: 2}\nbogus: 1\n",
        "potential: {name: poly_like}\npath: {lam_min: 1, lam_max: 2, typo: 3}\n",
        "potential: {name: nope}\npath: {lam_min: 1, lam_max: 2}\n",
        "potential: {name: poly_like}\npath: {}\n",
        "potential: {name: poly_like}\nmode: ignore-W\npath: {lambdas: [100]}\n",
        "potential: {name: poly_like}\nmollify: {alpha_zero: 2}\npath: {lambdas: [100]}\n",
        "[not, a, mapping]\n",
    ],
)
def test_config_errors_exit_2(tmp_path, text, capsys):
    assert main(["run", _write(tmp_path, text), "--out", str(tmp_path / "o")]) == 2
    assert "config error" in capsys.readouterr().err


def test_missing_file_exit_2(tmp_path):
    assert main(["run", str(tmp_path / "missing.yaml")]) == 2


def test_numerical_error_names_lambda(tmp_path, capsys):
    cfg = _write(tmp_path, "potential: {name: cosh_sinh}\npath: {lambdas: [0.001]}\n")
    assert main(["run", cfg, "--out", str(tmp_path / "o")]) == 3
    assert "lambda=0.001" in capsys.readouterr().err


def test_json_config(tmp_path):
    p = _write(tmp_path, json.dumps({"potential": {"name": "poly_like"}, "path": {"lambdas": [100.0]}}), "c.json")
    cfg = load_config(p)
    assert cfg.regime == "real-axis" and cfg.n == 2


def test_exponent_floats_parse(tmp_path):
    cfg = load_config(_write(tmp_path, "potential: {name: poly_like}\npath: {lambdas: [1e2, 2.5e3]}\n"))
    assert cfg.path["lambdas"] == [100.0, 2500.0]


def test_from_dict_rejects_unknown():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"potential": {"name": "x", "extra": 1}, "path": {}})


def test_worker_count(monkeypatch):
    monkeypatch.setenv("PSEUDOMODES_WORKERS", "3")
    assert worker_count() == 3
    assert worker_count(5) == 5
    monkeypatch.setenv("PSEUDOMODES_WORKERS", "many")
    with pytest.raises(ConfigError):
        worker_count()


def test_verify_and_dump(capsys):
    assert main(["verify", "unknown"]) == 2
    assert main(["verify", "symbolic"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 2
    assert main(["dump-terms", "--n", "0"]) == 0
    assert capsys.readouterr().out.strip() == "-1/2i * V^(1) * (lam-V)^(-1/2)"
    assert main(["dump-terms", "--n", "-1"]) == 2
