import csv
import io
import json
import math
import subprocess
import sys
from importlib import resources

import jsonschema
import numpy as np
import pytest

from golden_cases import CASES, GOLDEN_DIR, suffix
from oracles import mp_state
from pdmsqueeze import cli
from pdmsqueeze import pdm_model as pm
from pdmsqueeze.pdm_model import ModelParams

GOLDEN_RTOL = 1e-12
GOLDEN_ATOL = 1e-15


@pytest.fixture(scope="module")
def schema():
    text = resources.files("pdmsqueeze").joinpath("schemas/output.schema.json").read_text()
    return json.loads(text)


@pytest.fixture(autouse=True)
def _no_env_config(monkeypatch):
    monkeypatch.delenv(cli.CONFIG_ENV, raising=False)


def run(args, capsys):
    code = cli.main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def parse_csv(text):
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            k, _, v = line[2:].partition(": ")
            meta[k] = v
        else:
            body.append(line)
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    return meta, rows[0], [[float(v) for v in r] for r in rows[1:]]


def _close(a, b):
    if isinstance(a, float) and math.isnan(a):
        return isinstance(b, float) and math.isnan(b)
    return a == pytest.approx(b, rel=GOLDEN_RTOL, abs=GOLDEN_ATOL)


class TestGolden:
    @pytest.mark.parametrize("name", sorted(CASES))
    def test_matches_golden(self, name):
        args = CASES[name]
        got = cli.run_to_bytes(args).decode()
        want = (GOLDEN_DIR / (name + suffix(args))).read_text()
        if suffix(args) == ".json":
            g, w = json.loads(got), json.loads(want)
            assert g["columns"] == w["columns"] and g["metadata"].keys() == w["metadata"].keys()
            for rg, rw in zip(g["rows"], w["rows"], strict=True):
                assert all(_close(x, y) for x, y in zip(rg, rw, strict=True))
            return
        mg, hg, rg = parse_csv(got)
        mw, hw, rw = parse_csv(want)
        assert hg == hw and mg.keys() == mw.keys()
        for k in mg:
            try:
                assert _close(float(mg[k]), float(mw[k]))
            except ValueError:
                assert mg[k] == mw[k]
        assert len(rg) == len(rw)
        for a, b in zip(rg, rw):
            assert all(_close(x, y) for x, y in zip(a, b, strict=True))

    def test_state_golden_against_multiprecision(self):
        _, _, rows = parse_csv((GOLDEN_DIR / "state_fixture.csv").read_text())
        c = pm.derive_constants(ModelParams(alpha=0.1))
        ref = mp_state(c.a, c.b, 0.8, 0.2, len(rows) - 1)
        got = np.array([r[1] + 1j * r[2] for r in rows])
        assert np.max(np.abs(got - np.array(ref))) < 1e-13

    @pytest.mark.parametrize("name", sorted(CASES))
    def test_byte_identical_reruns(self, name):
        assert cli.run_to_bytes(CASES[name]) == cli.run_to_bytes(CASES[name])


class TestSpectrum:
    def test_undeformed_row(self, capsys):
        code, out, _ = run(["spectrum", "--alpha", "0", "--nmax", "5"], capsys)
        assert code == 0
        _, header, rows = parse_csv(out)
        assert header == ["n", "E_n", "e_n", "rho_log_n"]
        assert rows[3][1] == 3.5

    def test_ground_energy(self, capsys):
        _, out, _ = run(["spectrum", "--alpha", "0.1", "--nmax", "3"], capsys)
        assert parse_csv(out)[2][0][1] == pytest.approx(0.52562461, abs=5e-9)

    def test_e_column(self, capsys):
        _, out, _ = run(["spectrum", "--alpha", "0.3", "--nmax", "12"], capsys)
        meta, _, rows = parse_csv(out)
        a, b = float(meta["a"]), float(meta["b"])
        for r in rows:
            assert r[2] == pytest.approx(r[0] * (a * r[0] + b), rel=1e-15)

    def test_full_precision_text(self, capsys):
        _, out, _ = run(["spectrum", "--alpha", "0.1", "--nmax", "2"], capsys)
        assert "0.52562460986251969" in out


class TestState:
    def test_vacuum(self, capsys):
        _, out, _ = run(["state", "--z-re", "0", "--gamma", "0", "--nmax", "6"], capsys)
        _, _, rows = parse_csv(out)
        assert rows[0][3] == 1.0 and all(r[3] == 0 for r in rows[1:])

    def test_probability_column(self, capsys):
        _, out, _ = run(["state", "--z-re", "1.1", "--z-im", "-0.4", "--gamma", "0.3"], capsys)
        meta, _, rows = parse_csv(out)
        assert abs(math.fsum(r[3] for r in rows) - 1) <= 1e-12
        assert meta["converged"] == "true" and meta["method"] == "recurrence"
        assert {"log_norm", "tail_weight"} <= meta.keys()

    def test_nonconvergence_exit(self, capsys):
        code, _, err = run(["state", "--alpha", "0", "--z-re", "1", "--gamma", "1.2"], capsys)
        assert code == cli.EXIT_NONCONVERGED and "n_max=512" in err

    def test_closed_method_label(self, capsys):
        _, out, _ = run(["state", "--method", "closed", "--nmax", "10"], capsys)
        assert parse_csv(out)[0]["method"] == "closed_form"

    def test_hermite_needs_undeformed(self, capsys):
        code, _, err = run(["state", "--method", "hermite"], capsys)
        assert code == cli.EXIT_INPUT and "a == 0" in err


class TestObservables:
    def test_gamma_scan_vacuum_row(self, capsys):
        _, out, _ = run(["observables", "--alpha", "0", "--z-re", "0",
                         "--scan", "gamma:0:0.5:3"], capsys)
        _, header, rows = parse_csv(out)
        assert header[0] == "gamma"
        assert rows[0][header.index("dxdp")] == pytest.approx(0.5, abs=1e-12)

    def test_direct_factored_columns(self, capsys):
        _, out, _ = run(["observables", "--scan", "z_re:-1:1.5:6", "--gamma", "0.4"], capsys)
        _, header, rows = parse_csv(out)
        i, j = header.index("dxdp"), header.index("dxdp_factored")
        assert all(abs(r[i] - r[j]) <= 1e-10 for r in rows)

    def test_scan_order_matches_serial(self):
        args = cli.build_parser().parse_args(["observables", "--scan", "t:0:3:5"])
        cfg = cli.resolve_config(args, environ={})
        rows = cli.cmd_observables(cfg).rows
        serial = [cli._observable_row(cfg, "t", v) for v in cfg.scan.values()]
        assert rows == serial

    def test_time_scan_keeps_moduli(self, capsys):
        _, out, _ = run(["observables", "--scan", "t:0:4:5"], capsys)
        _, header, rows = parse_csv(out)
        k = header.index("mean_n")
        assert max(r[k] for r in rows) - min(r[k] for r in rows) < 1e-14

    def test_vacuum_mandel_is_nan(self, capsys):
        _, out, _ = run(["observables", "--z-re", "0", "--gamma", "0", "--format", "json"], capsys)
        doc = json.loads(out)
        assert doc["rows"][0][doc["columns"].index("mandel_q")] is None


class TestDensity:
    def test_alpha_zero_rejected(self, capsys):
        code, _, _ = run(["density", "--alpha", "0"], capsys)
        assert code == cli.EXIT_INPUT

    def test_vacuum_profile(self, capsys):
        _, out, _ = run(["density", "--z-re", "0", "--gamma", "0", "--x-grid", "-3:3:7"], capsys)
        _, _, rows = parse_csv(out)
        c = pm.derive_constants(ModelParams(alpha=0.1))
        for r in rows:
            assert r[1] == pytest.approx(pm.eigenfunction_x(c, 0, r[0]) ** 2, rel=1e-12)

    def test_integrals(self, capsys):
        _, out, _ = run(["density", "--t-list", "0,2.5,7", "--x-grid", "-1:1:3"], capsys)
        meta, header, _ = parse_csv(out)
        vals = [float(v) for k, v in meta.items() if k.startswith("integral_t=")]
        assert len(vals) == 3 and len(header) == 4
        assert all(abs(v - 1) < 1e-6 for v in vals)
        assert max(vals) - min(vals) < 1e-12


class TestConfig:
    def test_precedence(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("# fixture\nalpha = 0.3\nnmax = 7\nz-re = 0.1  # trailing\n")
        _, out, _ = run(["state", "--config", str(cfg), "--nmax", "5"], capsys)
        meta, _, rows = parse_csv(out)
        assert float(meta["alpha"]) == 0.3 and float(meta["z_re"]) == 0.1
        assert len(rows) == 6

    def test_env_var(self, tmp_path, capsys, monkeypatch):
        cfg = tmp_path / "env.cfg"
        cfg.write_text("alpha = 0.25\nformat = json\n")
        monkeypatch.setenv(cli.CONFIG_ENV, str(cfg))
        _, out, _ = run(["spectrum", "--nmax", "2"], capsys)
        assert json.loads(out)["metadata"]["alpha"] == 0.25

    def test_adaptive_flag_overrides_file(self, tmp_path, capsys):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("nmax = 7\n")
        _, out, _ = run(["state", "--config", str(cfg), "--adaptive"], capsys)
        assert parse_csv(out)[0]["nmax"] == "adaptive"

    @pytest.mark.parametrize("text", ["bogus = 1\n", "alpha 0.1\n", "alpha = x\n", "method = nope\n"])
    def test_bad_file(self, tmp_path, capsys, text):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(text)
        assert run(["spectrum", "--config", str(cfg)], capsys)[0] == cli.EXIT_INPUT

    def test_missing_file(self, capsys):
        assert run(["spectrum", "--config", "/nonexistent/x.cfg"], capsys)[0] == cli.EXIT_INPUT


class TestBadInput:
    @pytest.mark.parametrize("args", [
        ["observables", "--scan", "gamma:1:0:5"],
        ["observables", "--scan", "gamma:0:1:1"],
        ["observables", "--scan", "mass:0:1:3"],
        ["observables", "--scan", "gamma:0:1"],
        ["state", "--scan", "gamma:0:1:3"],
        ["density", "--x-grid", "5:-5:10"],
        ["density", "--t-list", "a,b"],
        ["state", "--gamma", "-0.2"],
        ["state", "--hbar", "0"],
        ["state", "--nmax", "100000"],
        ["spectrum", "--format", "xml"],
        ["frobnicate"],
    ])
    def test_exit_2(self, args, capsys):
        assert run(args, capsys)[0] == cli.EXIT_INPUT


class TestJsonSchema:
    @pytest.mark.parametrize("args", [
        ["spectrum"], ["state"], ["observables", "--scan", "gamma:0:0.4:3"],
        ["density", "--x-grid", "-2:2:5"], ["observables", "--z-re", "0", "--gamma", "0"],
    ])
    def test_outputs_validate(self, args, schema, capsys):
        _, out, _ = run(args + ["--format", "json"], capsys)
        jsonschema.validate(json.loads(out), schema)

    def test_validate_report(self, schema, tmp_path, capsys):
        path = tmp_path / "report.json"
        run(["validate", "--out", str(path)], capsys)
        jsonschema.validate(json.loads(path.read_text()), schema)


@pytest.fixture(scope="module")
def default_run():
    buf = io.StringIO()
    old, sys.stdout = sys.stdout, buf
    try:
        code = cli.main(["validate", "--format", "json"])
    finally:
        sys.stdout = old
    text = buf.getvalue()
    return code, text, json.loads(text[text.index("\n{") + 1:])


class TestValidate:
    def test_only_known_unattainable_fails(self, default_run):
        code, _, doc = default_run
        failed = [c["name"] for c in doc["checks"] if c["status"] == "FAIL"]
        # the alpha -> 0 spectrum bound cannot be met at alpha = 1e-8; see README
        assert failed == ["spectrum_limit"]
        assert code == cli.EXIT_VALIDATION and doc["passed"] is False

    def test_lines_and_table(self, default_run):
        _, text, doc = default_run
        for c in doc["checks"]:
            assert f"{c['status']:4s}  {c['name']}:" in text
        assert "closed form vs recurrence" in text
        cmp = next(c for c in doc["checks"] if c["name"] == "closed_form_comparison")
        assert cmp["status"] == "INFO" and len(cmp["data"]["reports"]) == 9
        assert all(r["max_deviation"] > 0 for r in cmp["data"]["reports"])

    def test_fault_injection(self, capsys):
        code, out, _ = run(["validate", "--inject-fault"], capsys)
        assert code == cli.EXIT_VALIDATION
        assert "FAIL  normalization:" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pdmsqueeze", "spectrum", "--nmax", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and proc.stdout.startswith("# pdm-squeeze output format 1")


def test_version(capsys):
    assert run(["--version"], capsys)[0] == 0
