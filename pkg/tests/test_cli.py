from __future__ import annotations

import csv
import io
import json
import subprocess
import sys

import pytest

from multicurve.cli import CONFIG_ENV, CONFIG_SCHEMA, parse_grid, run
from multicurve.errors import InputError
from multicurve.marketdata import load_artifact, load_quotes


def _rows(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    p = {k: str(d / v) for k, v in {
        "quotes": "quotes.csv", "curves": "curves.json", "single": "single.json", "boot": "boot.json",
        "sabr": "sabr.json", "sabr_report": "sabr_report.json", "model": "model.json", "mmg_report": "mmg_report.json",
    }.items()}
    p["dir"] = d
    assert run(["scenario", "--out", p["quotes"]]) == 0
    assert run(["bootstrap", "--quotes", p["quotes"], "--out-curves", p["curves"], "--report", p["boot"],
                "--single-out", p["single"]]) == 0
    assert run(["calibrate", "sabr", "--quotes", p["quotes"], "--curves", p["curves"], "--out", p["sabr"],
                "--report", p["sabr_report"], "--no-cms"]) == 0
    assert run(["calibrate", "mmg", "--quotes", p["quotes"], "--curves", p["curves"], "--out", p["model"],
                "--report", p["mmg_report"], "--scenarios", "1", "--factors", "1",
                "--expiries", "5", "--tenors", "5"]) == 0
    return p


def test_pipeline_artifacts(work):
    assert len(load_quotes(work["quotes"])) > 100
    assert load_artifact(work["curves"]).mode.name == "MULTI_CURVE"
    boot = json.loads(open(work["boot"]).read())
    assert "schema" in boot
    surface = load_artifact(work["sabr"])
    assert all(s.beta == 0.5 for s in surface.slices.values())
    assert load_artifact(work["model"]).scenarios[0].q == 1


def test_price_irs(work, capsys):
    assert run(["price", "irs", "--curves", work["curves"], "--start", "2y", "--length", "5y"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows[0]["tenor"] == "6m" and float(rows[0]["start"]) == 2.0 and float(rows[0]["end"]) == 7.0
    assert 0.0 < float(rows[0]["rate"]) < 0.1


def test_price_irs_quotes_reprice(work, capsys):
    assert run(["price", "irs", "--curves", work["curves"], "--quotes", work["quotes"]]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows and max(abs(float(r["error_bp"])) for r in rows) < 1e-4


def test_price_single_mode_warns(work, capsys):
    assert run(["price", "irs", "--curves", work["curves"], "--length", "5y", "--mode", "single"]) == 0
    assert "--single-curves" in capsys.readouterr().err
    assert run(["price", "irs", "--curves", work["curves"], "--length", "5y", "--mode", "single",
                "--single-curves", work["single"]]) == 0
    assert capsys.readouterr().err == ""


def test_price_basis_and_fra(work, capsys):
    assert run(["price", "basis", "--curves", work["curves"], "--length", "10y"]) == 0
    assert float(_rows(capsys.readouterr().out)[0]["rate"]) > 0
    assert run(["price", "fra", "--curves", work["curves"], "--start", "1y", "--length", "6m"]) == 0
    plain = float(_rows(capsys.readouterr().out)[0]["rate"])
    assert run(["price", "fra", "--curves", work["curves"], "--start", "1y", "--length", "6m",
                "--convexity", "gaussian", "--model", work["model"]]) == 0
    adj = float(_rows(capsys.readouterr().out)[0]["rate"])
    assert abs(adj - plain) < 1e-3
    assert run(["price", "fra", "--curves", work["curves"], "--length", "6m", "--convexity", "gaussian"]) == 1


def test_price_swaption_methods(work, capsys):
    base = ["price", "swaption", "--curves", work["curves"], "--expiry", "5y", "--tenor", "5"]
    assert run(base + ["--vol", "0.2"]) == 0
    black = _rows(capsys.readouterr().out)[0]
    assert float(black["price"]) > 0 and float(black["black_vol"]) == 0.2
    assert run(base + ["--sabr", work["sabr"]]) == 0
    atm = next(q.vol for q in load_quotes(work["quotes"]).swaption_quotes() if q.id == "SWO5Y5Y+0")
    assert float(_rows(capsys.readouterr().out)[0]["black_vol"]) == pytest.approx(atm, abs=1e-6)
    assert run(base + ["--method", "mmg", "--model", work["model"]]) == 0
    quad = _rows(capsys.readouterr().out)[0]
    assert run(base + ["--method", "mmg-mc", "--model", work["model"], "--paths", "20000"]) == 0
    mc = _rows(capsys.readouterr().out)[0]
    assert abs(float(mc["price"]) - float(quad["price"])) < 4 * float(mc["stderr"])
    assert run(base) == 1  # Black needs a vol


def test_price_swaption_quotes(work, capsys):
    assert run(["price", "swaption", "--curves", work["curves"], "--quotes", work["quotes"], "--sabr", work["sabr"]]) == 0
    assert len(_rows(capsys.readouterr().out)) == len(load_quotes(work["quotes"]).swaption_quotes())


def test_price_cms(work, capsys):
    assert run(["price", "cms", "--curves", work["curves"], "--sabr", work["sabr"], "--quotes", work["quotes"]]) == 0
    rows = _rows(capsys.readouterr().out)
    # the quotes carry the reference surface's beta, which the smile-only fit reproduces
    assert rows and max(abs(float(r["model_bp"]) - float(r["market_bp"])) for r in rows) < 0.05
    assert run(["price", "cms", "--curves", work["curves"], "--maturity", "5", "--index", "10",
                "--method", "mmg", "--model", work["model"]]) == 0
    assert float(_rows(capsys.readouterr().out)[0]["model_bp"]) > 0
    assert run(["price", "cms", "--curves", work["curves"], "--maturity", "5", "--index", "10"]) == 1


def test_price_spread_option(work, capsys):
    assert run(["price", "cms-spread-option", "--curves", work["curves"], "--sabr", work["sabr"],
                "--quotes", work["quotes"]]) == 0
    rows = _rows(capsys.readouterr().out)
    assert rows and all(float(r["rho"]) == pytest.approx(0.8, abs=1e-3) for r in rows)
    assert run(["price", "cms-spread-option", "--curves", work["curves"], "--sabr", work["sabr"],
                "--expiry", "2", "--tenor-b", "10", "--tenor-c", "2", "--strike", "0.005", "--rho", "0.5"]) == 0
    assert float(_rows(capsys.readouterr().out)[0]["model"]) > 0
    assert run(["price", "cms-spread-option", "--curves", work["curves"], "--sabr", work["sabr"], "--expiry", "2"]) == 1


def test_simulate_deterministic_across_threads(work):
    outs = []
    for threads in ("1", "3", "1"):
        out = work["dir"] / f"sim{len(outs)}.csv"
        paths = work["dir"] / f"paths{len(outs)}.csv"
        assert run(["simulate", "--model", work["model"], "--grid", "0:5:1", "--out", str(out), "--paths", "3000",
                    "--block-size", "1000", "--threads", threads, "--paths-out", str(paths)]) == 0
        outs.append((out.read_bytes(), paths.read_bytes()))
    assert outs[0] == outs[1] == outs[2]
    rows = _rows(outs[0][0].decode())
    assert [float(r["time"]) for r in rows] == [0.0, 1.0, 2.0, 3.0, 4.0, 5.0]
    assert all(abs(float(r["z_score"])) < 4 for r in rows)


def test_mmg_mc_deterministic(work, capsys):
    args = ["price", "swaption", "--curves", work["curves"], "--expiry", "2", "--tenor", "5",
            "--method", "mmg-mc", "--model", work["model"], "--paths", "5000", "--block-size", "1024"]
    assert run(args + ["--threads", "1"]) == 0
    a = capsys.readouterr().out
    assert run(args + ["--threads", "2"]) == 0
    assert capsys.readouterr().out == a


@pytest.mark.parametrize("figure", ["FWD_CURVES", "FWD_SWAP_GRID", "SWAPTION_GRID", "CMS_CURVES", "SPREAD_OPTIONS", "MMG_CALIB"])
def test_report_figures(work, figure):
    out = work["dir"] / f"{figure}.csv"
    assert run(["report", "--figure", figure, "--out", str(out), "--quotes", work["quotes"], "--curves", work["curves"],
                "--single-curves", work["single"], "--sabr", work["sabr"], "--calibration", work["mmg_report"]]) == 0
    assert len(_rows(out.read_text())) > 0


def test_report_cms_bid_ask(work):
    out = work["dir"] / "cms.csv"
    assert run(["report", "--figure", "cms_curves", "--out", str(out), "--quotes", work["quotes"],
                "--curves", work["curves"], "--sabr", work["sabr"]]) == 0
    for r in _rows(out.read_text()):
        assert float(r["bid_bp"]) <= float(r["market_bp"]) <= float(r["ask_bp"])


def test_report_zero_spread_grid(tmp_path):
    q, c, out = tmp_path / "q.csv", tmp_path / "c.json", tmp_path / "g.csv"
    assert run(["scenario", "--zero-spreads", "--no-options", "--out", str(q)]) == 0
    assert run(["bootstrap", "--quotes", str(q), "--out-curves", str(c)]) == 0
    assert run(["report", "--figure", "FWD_SWAP_GRID", "--out", str(out), "--quotes", str(q), "--curves", str(c)]) == 0
    rows = _rows(out.read_text())
    assert rows and max(abs(float(r[k])) for r in rows for k in ("single_bp", "multi_bp")) < 1e-6


def test_scenario_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.json"
    assert run(["scenario", "--out", str(a), "--spread", "6m=0.005"]) == 0
    assert run(["scenario", "--out", str(b), "--spread", "6m=0.005"]) == 0
    assert [r.to_dict() for r in load_quotes(a).rows] == [r.to_dict() for r in load_quotes(b).rows]
    assert run(["scenario", "--out", str(a), "--spread", "6m"]) == 1


@pytest.mark.parametrize("argv", [
    [],
    ["price"],
    ["frobnicate"],
    ["bootstrap", "--quotes", "x.csv"],
    ["calibrate", "sabr", "--quotes", "x.csv", "--out", "y.json"],
    ["price", "irs", "--curves", "c.json", "--tenor", "5x", "--length", "1y"],
])
def test_usage_errors(argv, capsys):
    assert run(argv) == 1
    err = capsys.readouterr().err
    assert "usage:" in err and "error:" in err


def test_missing_file(tmp_path, capsys):
    assert run(["bootstrap", "--quotes", str(tmp_path / "none.csv"), "--out-curves", str(tmp_path / "c.json")]) == 1
    assert "none.csv" in capsys.readouterr().err


def test_help_exits_zero(capsys):
    assert run(["--help"]) == 0
    assert "bootstrap" in capsys.readouterr().out


def test_config_precedence(work, tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"schema": CONFIG_SCHEMA, "options": {
        "price": {"length": "5y"}, "price irs": {"start": "1y", "tenor": "3m"}}}))
    base = ["price", "irs", "--curves", work["curves"]]
    assert run(["--config", str(cfg)] + base) == 0
    r = _rows(capsys.readouterr().out)[0]
    assert (float(r["start"]), float(r["end"]), r["tenor"]) == (1.0, 6.0, "3m")
    # command line beats the config file
    assert run(["--config", str(cfg)] + base + ["--start", "2y"]) == 0
    r = _rows(capsys.readouterr().out)[0]
    assert (float(r["start"]), float(r["end"]), r["tenor"]) == (2.0, 7.0, "3m")
    monkeypatch.setenv(CONFIG_ENV, str(cfg))
    assert run(base) == 0
    assert _rows(capsys.readouterr().out)[0]["tenor"] == "3m"


@pytest.mark.parametrize("doc, message", [
    ({"schema": "other"}, "schema"),
    ({"schema": CONFIG_SCHEMA, "options": {"price irs": {"bogus": 1}}}, "unknown option"),
    ({"schema": CONFIG_SCHEMA, "options": {"price irs": {"mode": "hybrid"}}}, "not one of"),
])
def test_config_errors(work, tmp_path, capsys, doc, message):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(doc))
    assert run(["--config", str(cfg), "price", "irs", "--curves", work["curves"], "--length", "1y"]) == 1
    assert message in capsys.readouterr().err


def test_parse_grid():
    assert list(parse_grid("0:1:0.5")) == [0.0, 0.5, 1.0]
    assert list(parse_grid("0.5, 2")) == [0.5, 2.0]
    with pytest.raises((InputError, ValueError)):
        parse_grid("a:b")


def test_console_script(work):
    proc = subprocess.run([sys.executable, "-m", "multicurve.cli", "price", "irs", "--curves", work["curves"],
                           "--length", "2y"], capture_output=True, text=True, timeout=120)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.startswith("start,end,tenor,rate")
    proc = subprocess.run([sys.executable, "-m", "multicurve.cli", "price", "irs"], capture_output=True, text=True)
    assert proc.returncode == 1
