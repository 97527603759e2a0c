import csv
import json
from pathlib import Path

import numpy as np
import pytest

from lifshitz_audit.cli import main
from lifshitz_audit.fitting import OpticalDataset, write_dataset
from lifshitz_audit.models import load_model, make_model

MODELS = Path(__file__).resolve().parents[1] / "scripts" / "models"
POSITIVE = str(MODELS / "lorentz_positive.json")
NEGATIVE = str(MODELS / "cm_negative_window.json")
HE = ["--atom", "1.383,4.878e16", "--alpha-unit", "au"]


def read_csv(path):
    lines = Path(path).read_text().splitlines(keepends=True)
    assert all(line.endswith("\n") for line in lines)
    body = [line for line in lines if not line.startswith("#")]
    return list(csv.DictReader(body))


def test_validate_positive(tmp_path):
    out = tmp_path / "audit.json"
    assert main(["validate", "--model", POSITIVE, "--t-delta", "0.5",
                 "--points-per-decade", "32", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["physical"]
    assert doc["reports"][0]["numeric_negative_intervals"] == []
    assert doc["settings"]["points_per_decade"] == 32
    rows = read_csv(tmp_path / "audit_curve.csv")
    assert len(rows) == 400 and float(rows[0]["eps_im"]) > 0


def test_validate_negative(tmp_path):
    out = tmp_path / "audit.json"
    assert main(["validate", "--model", NEGATIVE, "--points-per-decade", "32",
                 "--out", str(out)]) == 2
    rep = json.loads(out.read_text())["reports"][0]
    assert rep["sufficient_all_terms"]
    assert rep["numeric_negative_intervals"][0][0] == 0.0
    assert rep["eps_poles_upper_half_plane"] == []


def test_validate_header_records_settings(tmp_path):
    out = tmp_path / "a.json"
    curve = tmp_path / "c.csv"
    main(["validate", "--model", POSITIVE, "--t-delta", "0", "--kk-points", "1e15",
          "--points-per-decade", "16", "--out", str(out), "--curve-out", str(curve),
          "--curve-points", "5"])
    head = curve.read_text().splitlines()[:2]
    assert head[0].startswith("# lifshitz-audit") and "points_per_decade=16" in head[1]


def test_regimes_silicon_lattice(tmp_path):
    out = tmp_path / "r.csv"
    assert main(["regimes", "--z-min", "5.45e-10", "--out", str(out)]) == 0
    (row,) = read_csv(out)
    assert row["continuum"] == "false" and row["alt_short"] == "true"
    assert "continuum violated" in row["notes"]


def test_regimes_sweep(tmp_path):
    out = tmp_path / "r.csv"
    main(["regimes", "--z-min", "1e-9", "--z-max", "1e-4", "--points", "11",
          "--temperature", "293", "--material", "5.45e-10,3e-7", "--out", str(out)])
    rows = read_csv(out)
    assert len(rows) == 11
    assert not any(r["short"] == r["long"] == "true" for r in rows)


def test_eval_real_and_imag(tmp_path):
    out = tmp_path / "e.csv"
    assert main(["eval", "--model", POSITIVE, "--points", "7", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert list(rows[0]) == ["omega_rad_s", "eps_re", "eps_im"]
    assert "," not in rows[0]["eps_re"].replace(".", "")
    main(["eval", "--model", POSITIVE, "--xi", "1e14,1e15", "--out", str(out)])
    rows = read_csv(out)
    assert float(rows[0]["eps"]) > float(rows[1]["eps"]) > 1


def test_potential_csv(tmp_path):
    out = tmp_path / "u.csv"
    assert main(["potential", *HE, "--plate", "ideal_metal", "--z-min", "1e-9",
                 "--z-max", "1e-6", "--points", "4", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 4
    for r in rows:
        z, u = float(r["z_m"]), float(r["U_J"])
        assert u < 0
        assert float(r["z3U_Jm3"]) == pytest.approx(u * z**3)


def test_coefficients_json(tmp_path):
    out = tmp_path / "c.json"
    assert main(["coefficients", *HE, "--model", POSITIVE, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["c3"] > 0 and doc["c4"] > 0 and doc["flags"] == []
    assert set(doc["error_bounds"]) == {"c3", "c4"}


def test_coefficients_flag_unphysical(tmp_path):
    out = tmp_path / "c.json"
    main(["coefficients", *HE, "--model", NEGATIVE, "--out", str(out)])
    assert json.loads(out.read_text())["flags"] == ["unphysical_input"]


def test_sensitivity_json(tmp_path):
    out = tmp_path / "s.json"
    assert main(["sensitivity", *HE, "--model", NEGATIVE, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["c3_kk_clamped"] > doc["c3_kk_raw"]


def test_fit_round_trip(tmp_path):
    true = make_model("lorentz_dirac", [(3.0, 2e15, 2e14, 0.0), (1.0, 6e15, 5e14, 0.0)])
    data = tmp_path / "d.csv"
    write_dataset(OpticalDataset.from_model(true, np.geomspace(1e14, 2e16, 120)), data)
    out = tmp_path / "fit.json"
    assert main(["fit", "--data", str(data), "--starts", "2", "--seed", "5",
                 "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["fit_metadata"]["positivity_certified"]
    fit = load_model(out)
    out2 = tmp_path / "fit2.json"
    from lifshitz_audit.models import dump_model

    dump_model(fit, out2, doc["fit_metadata"])
    assert load_model(out2) == fit
    assert out2.read_text() == out.read_text()


def test_malformed_model(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "lorentz_dirac",\n "terms_fit": [}')
    assert main(["validate", "--model", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err


def test_malformed_dataset(tmp_path, capsys):
    data = tmp_path / "d.csv"
    data.write_text("omega_rad_s,eps_re,eps_im,weight\n1e15,1,2,1\n2e15,1,oops,1\n")
    assert main(["fit", "--data", str(data)]) == 1
    assert "field eps_im" in capsys.readouterr().err


def test_missing_file():
    assert main(["eval", "--model", "/nonexistent.json"]) == 1


def test_usage_error_exit_one():
    with pytest.raises(SystemExit) as info:
        main(["validate", "--bogus"])
    assert info.value.code == 1


def test_strict_rejects_extrapolation():
    assert main(["eval", "--model", NEGATIVE, "--t-delta", "0.5", "--strict", "--points", "3"]) == 1
