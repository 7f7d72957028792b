import json
import math
import subprocess
import sys

import numpy as np
import pytest

from pointer_decoherence import ConfigurationError, MeasurementConfig, decoherence_factor
from pointer_decoherence.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from pointer_decoherence.sweep import REGISTRY, SweepConfig, emit, load_config, read_csv, render_csv, run_sweep

GENERIC = """
[scenario]
kind = generic
eigenvalues = 1, -0.4, 0.3
pre = 0.6, 0.5j, 0.3-0.2j
post = 0.2, 0.7, -0.4j

[parameters]
g = 0.8
t = 1
m = 1.2
sigma = 0.9

[sweep]
parameter = t
start = 0
stop = 3
samples = 7

[output]
quantities = F, F_min, re_AT, im_AT, dx, dp, dx_AT_form, dp_AT_form, near_weak, near_strong
path = out.csv
"""

SG = """
[scenario]
kind = stern-gerlach
theta1 = 0.5235987755982988
delta1 = 0.3
theta2 = 1.0471975511965976
delta2 = 1.2

[parameters]
f = 0.5
t = 1

[sweep]
parameter = t
start = 0.1
stop = 2
samples = 4

[output]
quantities = F, F_sg_printed, dx, dx_sg_printed, dp, dp_sg_printed, F_oracle, dx_oracle, dp_oracle
oracle = on
path = sg.csv
"""


@pytest.fixture
def generic_ini(tmp_path):
    p = tmp_path / "generic.ini"
    p.write_text(GENERIC.replace("out.csv", str(tmp_path / "out.csv")))
    return p


@pytest.fixture
def sg_ini(tmp_path):
    p = tmp_path / "sg.ini"
    p.write_text(SG.replace("sg.csv", str(tmp_path / "sg.csv")))
    return p


def test_registry_entries_are_documented():
    for name, q in REGISTRY.items():
        assert q.description, name
        assert q.scenario in (None, "generic", "stern-gerlach")
    for required in ("F", "re_AT", "im_AT", "dx", "dp", "expectation", "conditional", "re_weak", "im_weak"):
        assert required in REGISTRY


def test_every_quantity_evaluates(tmp_path):
    for scenario, text in (("generic", GENERIC), ("stern-gerlach", SG)):
        names = [n for n, q in REGISTRY.items() if q.scenario in (None, scenario)]
        p = tmp_path / "all.ini"
        p.write_text(text)
        cfg = load_config(p, [f"output.quantities={','.join(names)}", "output.oracle=on", "sweep.samples=2", "sweep.start=0.5"])
        rows, summary = run_sweep(cfg, write=False)
        assert summary["failed_rows"] == 0, rows
        for row in rows:
            for n in names:
                assert row[n] is not None and math.isfinite(row[n]), n


def test_generic_sweep_values(generic_ini, tmp_path):
    rows, summary = run_sweep(load_config(generic_ini))
    assert [r["t"] for r in rows] == pytest.approx(np.linspace(0, 3, 7))
    for r in rows:
        assert r["dx"] == pytest.approx(r["dx_AT_form"], abs=1e-10)
        assert r["dp"] == pytest.approx(r["dp_AT_form"], abs=1e-10)
    assert rows[0]["near_weak"] == 1.0
    cfg = MeasurementConfig(0.8, 3.0, 1.2, 0.9)
    assert rows[-1]["F_min"] == pytest.approx(decoherence_factor(cfg, 1.0, -0.4), rel=1e-12)
    assert summary["rows"] == 7 and summary["metadata"]["units"] == "hbar=1"
    assert (tmp_path / "out.csv.summary.json").exists()


def test_csv_round_trip_is_lossless(generic_ini, tmp_path):
    rows, _ = run_sweep(load_config(generic_ini))
    back = read_csv(tmp_path / "out.csv")
    assert len(back) == len(rows)
    for a, b in zip(rows, back):
        for k, v in a.items():
            if k != "error":
                assert b[k] == v


def test_deterministic_and_worker_independent(generic_ini):
    serial, _ = run_sweep(load_config(generic_ini, workers=1), write=False)
    again, _ = run_sweep(load_config(generic_ini, workers=1), write=False)
    parallel, _ = run_sweep(load_config(generic_ini, workers=3), write=False)
    assert render_csv(serial) == render_csv(again) == render_csv(parallel)


def test_sg_oracle_sweep(sg_ini):
    rows, summary = run_sweep(load_config(sg_ini))
    for r in rows:
        assert r["F"] == pytest.approx(r["F_sg_printed"], rel=1e-12)
        assert r["dx"] == pytest.approx(r["dx_sg_printed"], abs=1e-10)
        assert r["dx"] == pytest.approx(r["dx_oracle"], abs=1e-8)
    assert max(summary["max_oracle_deviation"].values()) < 1e-8


def test_precedence(generic_ini, monkeypatch):
    monkeypatch.setenv("POINTER_DECOHERENCE_WORKERS", "4")
    assert load_config(generic_ini).workers == 4
    assert load_config(generic_ini, ["output.workers=2"]).workers == 2
    assert load_config(generic_ini, ["output.workers=2"], workers=5).workers == 5
    cfg = load_config(generic_ini, ["parameters.g=0.1", "output.format=json"], fmt="csv", out="x.csv")
    assert cfg.parameters["g"] == 0.1 and cfg.format == "csv" and cfg.path == "x.csv"


@pytest.mark.parametrize(
    "override",
    [
        "sweep.samples=0",
        "sweep.parameter=hbar",
        "output.quantities=nonsense",
        "output.quantities=F_oracle",
        "output.quantities=beta_sq",
        "scenario.pre=1, 0",
        "parameters.m=-1",
        "sweep.spacing=log",
        "bogus.key=1",
        "output.colour=red",
    ],
)
def test_config_errors(generic_ini, override):
    with pytest.raises(ConfigurationError):
        load_config(generic_ini, [override])


def test_empty_emit_refused(tmp_path):
    with pytest.raises(ConfigurationError):
        emit("csv", [], {}, tmp_path / "x.csv")


def test_json_output_has_metadata(generic_ini, tmp_path):
    out = tmp_path / "o.json"
    assert main(["sweep", "--config", str(generic_ini), "--format", "json", "--out", str(out)]) == EXIT_OK
    doc = json.loads(out.read_text())
    assert doc["metadata"]["units"] == "hbar=1"
    assert doc["metadata"]["config"]["sweep_parameter"] == "t"
    assert len(doc["rows"]) == 7


def test_failed_rows_are_reported_not_fatal(tmp_path):
    p = tmp_path / "ann.ini"
    p.write_text(
        "[scenario]\nkind = generic\neigenvalues = 1, -1\npre = 1, 0\npost = 0, 1\n"
        "[sweep]\nparameter = t\nstart = 0.5\nstop = 1\nsamples = 2\n"
        f"[output]\nquantities = F, dx\npath = {tmp_path / 'a.csv'}\n"
    )
    rows, summary = run_sweep(load_config(p))
    assert summary["failed_rows"] == 2
    assert all(r["dx"] is None and "PostSelectionAnnihilationError" in r["error"] for r in rows)
    assert all(r["F"] is not None for r in rows)


def test_exit_codes(generic_ini, tmp_path, capsys):
    assert main(["sweep", "--config", str(tmp_path / "missing.ini")]) == EXIT_CONFIG
    assert main(["sweep", "--config", str(generic_ini), "--set", "sweep.samples=0"]) == EXIT_CONFIG
    assert main(["sweep", "--config", str(generic_ini), "--out", str(tmp_path / "no" / "dir.csv")]) == EXIT_IO
    assert main(["sweep", "--config", str(generic_ini), "--set", "parameters.g=60", "--set", "sweep.stop=30",
                 "--set", "output.quantities=F_oracle", "--set", "output.oracle=on"]) == EXIT_OK


def test_console_entry_point(generic_ini, tmp_path):
    out = tmp_path / "cli.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "pointer_decoherence.cli", "sweep", "--config", str(generic_ini), "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert "wrote 7 rows" in proc.stdout
    assert out.exists()
