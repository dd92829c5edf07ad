import csv
import io
import json
import os
import subprocess
import sys

import pytest

from bos_spectra import __version__, cli
from bos_spectra.routes import ReliabilityError


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def csv_rows(text):
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_eigenpoly(capsys):
    code, out, _ = run(capsys, "eigenpoly", "--n", "3")
    assert code == 0
    assert "s^3 - 3 s^2 + 3/2 s" in out
    assert "[PASS] <f_1, f_3> = 0" in out


def test_eigenpoly_csv_coefficients(capsys):
    code, out, _ = run(capsys, "eigenpoly", "--n", "3", "--format", "csv")
    rows = csv_rows(out)
    assert [r["coefficient"] for r in rows] == ["3/2", "-3", "1"]


@pytest.mark.parametrize(
    "argv,field",
    [
        (["spectrum", "--eps", "1.5"], "eps"),
        (["spectrum", "--eps", "0.2", "--nodes", "10"], "nodes"),
        (["spectrum", "--eps", "0.2", "--route", "magic"], "route"),
        (["spectrum", "--eps", "0.2", "0.1"], "eps"),
        (["spectrum", "--eps", "abc"], "eps"),
        (["converge", "--eps", "0.1", "0.2"], "eps"),
        (["hsnorm", "--eps", "0.2", "--hs-tol", "-1"], "hs_tol"),
        (["spectrum", "--eps", "0.2", "--format", "xml"], "format"),
        (["audit", "--eps", "0.2", "--grid", "1"], "grid"),
    ],
)
def test_config_rejection(capsys, argv, field):
    code, out, err = run(capsys, *argv)
    assert code == cli.EXIT_CONFIG
    assert f"'{field}'" in err
    assert out == ""


def test_unknown_flag_exits_with_config_status(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["spectrum", "--bogus"])
    assert info.value.code == cli.EXIT_CONFIG


def test_validation_before_compute(monkeypatch, capsys):
    called = []
    monkeypatch.setattr(cli, "route_nystrom", lambda *a, **k: called.append(1))
    code, _, _ = run(capsys, "spectrum", "--eps", "0.2", "--n-max", "500")
    assert code == cli.EXIT_CONFIG and not called


def test_spectrum_both_table(capsys):
    code, out, _ = run(capsys, "spectrum", "--eps", "0.1", "--n-max", "5", "--route", "both", "--format", "csv")
    assert code == 0
    rows = csv_rows(out)
    assert list(rows[0]) == list(cli.COMPARISON_COLUMNS)
    assert len(rows) == 5 and all(r["agree"] == "true" for r in rows)
    assert float(rows[0]["lambda_fourier"]) == pytest.approx(1.009679, abs=1e-6)
    assert f"# bos_spectra {__version__}" in out
    assert '# config eps=[0.1]' in out


def test_spectrum_columns_and_limit(capsys):
    code, out, _ = run(capsys, "spectrum", "--limit", "--n-max", "4", "--nodes", "200", "--format", "csv")
    assert code == 0
    rows = csv_rows(out)
    assert list(rows[0]) == list(cli.SPECTRUM_COLUMNS)
    for k, r in enumerate(rows, start=1):
        assert abs(float(r["gap_to_n"])) < 1e-6
        assert float(r["mu"]) == pytest.approx(1 - 1 / k, abs=1e-9)


def test_json_document(capsys):
    code, out, _ = run(capsys, "spectrum", "--eps", "0.2", "--n-max", "3", "--nodes", "160", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["schema_version"] == cli.SCHEMA_VERSION
    assert doc["artifact_version"] == __version__
    assert doc["config"]["eps"] == [0.2] and doc["config"]["nodes"] == 160
    assert [r["n"] for r in doc["rows"]] == [1, 2, 3]
    assert doc["error"] is None


def test_shortfall_exit(capsys):
    code, out, _ = run(capsys, "spectrum", "--eps", "0.5", "--route", "fourier", "--max-trunc", "64", "--format", "json")
    assert code == cli.EXIT_SHORTFALL
    assert json.loads(out)["exit_status"] == cli.EXIT_SHORTFALL


def test_route_errors_are_serialized(monkeypatch, capsys):
    def boom(*a, **k):
        raise ReliabilityError("not resolved")

    monkeypatch.setattr(cli, "route_nystrom", boom)
    code, out, _ = run(capsys, "spectrum", "--eps", "0.2", "--format", "json")
    assert code == cli.EXIT_SHORTFALL
    assert "not resolved" in json.loads(out)["error"]

    def crash(*a, **k):
        raise RuntimeError("bad")

    monkeypatch.setattr(cli, "route_nystrom", crash)
    code, out, _ = run(capsys, "spectrum", "--eps", "0.2", "--format", "csv")
    assert code == cli.EXIT_ERROR and "# error RuntimeError: bad" in out


def test_deterministic_files(tmp_path, capsys):
    p = tmp_path / "a.csv"
    blobs = []
    for _ in range(2):
        assert cli.main(["spectrum", "--eps", "0.2", "--n-max", "3", "--nodes", "160", "--format", "csv", "-o", str(p)]) == 0
        blobs.append(p.read_bytes())
    assert blobs[0] == blobs[1]
    assert os.listdir(tmp_path) == ["a.csv"]
    capsys.readouterr()


def test_output_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "out"))
    assert cli.main(["eigenpoly", "--n", "4", "--format", "json"]) == 0
    target = tmp_path / "out" / "eigenpoly.json"
    assert json.loads(target.read_text())["summary"]["polynomial"].startswith("s^4")
    assert os.listdir(tmp_path / "out") == ["eigenpoly.json"]
    capsys.readouterr()


def test_atomic_write_failure_leaves_nothing(tmp_path, monkeypatch):
    def fail(src, dst):
        raise OSError("disk full")

    monkeypatch.setattr(os, "replace", fail)
    with pytest.raises(OSError):
        cli.atomic_write(str(tmp_path / "x.csv"), "data")
    assert os.listdir(tmp_path) == []


def test_hsnorm_limit(capsys):
    code, out, _ = run(capsys, "hsnorm", "--limit", "--format", "json")
    rows = {r["quantity"]: r for r in json.loads(out)["rows"]}
    assert code == 0
    assert rows["hs_norm_sq_limit"]["value"] == pytest.approx(1.644934, abs=1e-4)
    assert rows["weighted_integral"]["value"] <= 5
    assert rows["dominating_integral"]["value"] <= 5


def test_hsnorm_eps_list(capsys):
    code, out, _ = run(capsys, "hsnorm", "--eps", "0.4,0.2", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["checks"]["hs_decreasing"]


def test_audit(capsys):
    code, out, _ = run(capsys, "audit", "--eps", "0.3", "--format", "json")
    rows = json.loads(out)["rows"]
    assert code == 0
    assert rows[0]["check"] == "difference_bound" and rows[0]["margin"] <= 0
    assert all(r["passed"] for r in rows)


def test_converge_single_eps(capsys):
    code, out, _ = run(capsys, "converge", "--eps", "0.2", "--n-max", "2", "--no-hs", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert any("extrapolation" in n for n in doc["notes"])
    assert len(doc["rows"]) == 2


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest", "--format", "csv")
    assert code == 0
    assert all(r["passed"] == "true" for r in csv_rows(out))


def test_module_entry_point():
    r = subprocess.run(
        [sys.executable, "-m", "bos_spectra.cli", "eigenpoly", "--n", "2"], capture_output=True, text=True, check=False
    )
    assert r.returncode == 0 and "s^2 - s" in r.stdout
