import csv
import json

import jsonschema
import numpy as np
import pytest

from adpglars import data_io
from adpglars.data_io import diagnostics, load_csv, load_prostate, load_prostate_full, read_report, write_report
from adpglars.errors import CorruptBundle, EmptyFile, MissingColumn, NonNumericCell
from adpglars.model_selection import SearchGrid
from adpglars.simulation import SimulationConfig, SimulationReport, default_specs, run_replications

from oracles import vif_bruteforce

PAPER_VIF = [3.09, 2.97, 2.47, 2.05, 1.95, 1.37, 1.36, 1.32]


@pytest.fixture(scope="module")
def small_report():
    names = ["adpLARS-LASSO", "adpLARS-EN", "adpLARS-rd"]
    cfg = SimulationConfig(n_replicates=3, rho_collinearity=0.5)
    return run_replications(cfg, default_specs(names), {n: SearchGrid((0.5, 1.0), (0.3,)) for n in names}, workers=1)


def test_load_toy(tmp_path):
    f = tmp_path / "toy.csv"
    f.write_text("a,y,b\n1,2,3\n4,5,6\n7.5,8,-9e-1\n")
    ds = load_csv(f, "y")
    assert ds.column_names == ("a", "b")
    np.testing.assert_array_equal(ds.X_raw, [[1, 3], [4, 6], [7.5, -0.9]])
    np.testing.assert_array_equal(ds.y_raw, [2, 5, 8])


def test_load_tab(tmp_path):
    f = tmp_path / "toy.tsv"
    f.write_text("a\ty\n1\t2\n3\t4\n")
    assert load_csv(f, "y", delimiter="\t").X_raw.tolist() == [[1.0], [3.0]]


def test_load_errors(tmp_path):
    f = tmp_path / "t.csv"
    f.write_text("a,b\n1,2\n")
    with pytest.raises(MissingColumn) as ei:
        load_csv(f, "y")
    assert ei.value.column == "y"
    f.write_text("a,y\n1,2\n3,oops\n")
    with pytest.raises(NonNumericCell) as ei:
        load_csv(f, "y")
    assert (ei.value.row, ei.value.column) == (2, "y")
    f.write_text("a,y\n1,2\n,4\n")
    with pytest.raises(NonNumericCell):
        load_csv(f, "y")
    f.write_text("")
    with pytest.raises(EmptyFile):
        load_csv(f, "y")
    f.write_text("a,y\n")
    with pytest.raises(EmptyFile):
        load_csv(f, "y")


def test_prostate_csv_shape():
    ds = load_csv(data_io.prostate_path(), "lpsa", drop_columns=("train",))
    assert (ds.n, ds.p) == (97, 8)
    assert ds.column_names == data_io.PROSTATE_PREDICTORS


def test_prostate_split():
    train, test = load_prostate()
    assert (train.n, test.n) == (67, 30)
    a, b = load_prostate(split_seed=5)
    c, d = load_prostate(split_seed=5)
    np.testing.assert_array_equal(a.X_raw, c.X_raw)
    assert (a.n, b.n) == (67, 30)
    e, _ = load_prostate(split_seed=6)
    assert not np.array_equal(a.X_raw, e.X_raw)


def test_prostate_checksum(monkeypatch):
    real = data_io._bundle_bytes
    monkeypatch.setattr(data_io, "_bundle_bytes", lambda name: real(name) + b"\n")
    with pytest.raises(CorruptBundle):
        load_prostate()


def test_prostate_diagnostics():
    ds, _ = load_prostate_full()
    diag = diagnostics(ds)
    assert np.max(np.abs(np.sort(diag.vif)[::-1] - PAPER_VIF)) <= 0.05
    np.testing.assert_allclose(diag.vif, vif_bruteforce(ds.X_raw), rtol=1e-9)
    assert diag.condition_numbers["raw"] == pytest.approx(243, abs=1)
    assert diag.condition_number >= 1


def test_diagnostics_orthonormal_and_duplicate():
    rng = np.random.default_rng(0)
    Z = rng.standard_normal((50, 4))
    Z -= Z.mean(axis=0)
    Q, _ = np.linalg.qr(Z)
    diag = diagnostics(Q)
    np.testing.assert_allclose(diag.vif, 1.0, atol=1e-9)
    assert diag.condition_number == pytest.approx(1.0, abs=1e-9)
    dup = np.column_stack([Z, Z[:, 0]])
    assert np.isinf(diagnostics(dup).vif[0]) and np.isinf(diagnostics(dup).vif[-1])
    assert data_io.diagnostics_to_dict(diagnostics(dup))["vif"][0] is None


def test_report_csv_layout(tmp_path, small_report):
    med, rep = write_report(small_report, "csv", tmp_path, "sim")
    rows = list(csv.reader(open(med)))
    assert rows[0] == ["Algorithm", "RMSE", "(k,d)", "alpha", "t", "Selected variables"]
    assert [r[0] for r in rows[1:]] == small_report.algorithms
    assert rows[1][2] == "--"
    assert all(len(r[1].split(".")[1]) == 5 for r in rows[1:])
    back = data_io.read_replicates_csv(rep)
    for a in small_report.algorithms:
        np.testing.assert_array_equal(back[a], small_report.figure_data()[a])


def test_report_json_round_trip(tmp_path, small_report):
    (js,) = write_report(small_report, "json", tmp_path, "sim")
    doc = json.loads(js.read_text())
    jsonschema.validate(doc, data_io.report_schema())
    back = read_report(js)
    assert data_io.report_to_dict(back) == data_io.report_to_dict(small_report)
    for a in small_report.algorithms:
        for r0, r1 in zip(small_report.results[a], back.results[a]):
            assert r0.rmse == r1.rmse and r0.estimator == r1.estimator
            np.testing.assert_array_equal(r0.coef, r1.coef)


def test_empty_report_header_only(tmp_path):
    empty = SimulationReport(algorithms=[], results={}, meta={"kind": "simulation"})
    med, rep = write_report(empty, "csv", tmp_path, "e")
    assert med.read_text().count("\n") == 1 and rep.read_text().count("\n") == 1
    (js,) = write_report(empty, "json", tmp_path, "e")
    jsonschema.validate(json.loads(js.read_text()), data_io.report_schema())


def test_svg_and_tukey(tmp_path, small_report):
    q1, med, q3, lo, hi, out = data_io.tukey_box([1, 2, 3, 4, 5, 6, 7, 8, 100])
    assert (q1, med, q3) == (3.0, 5.0, 7.0)
    assert hi == 8 and list(out) == [100]
    files = write_report(small_report, "csv", tmp_path, "sim", svg=True)
    svg = files[-1].read_text()
    assert svg.startswith("<svg") and svg.count("<rect") == len(small_report.algorithms)


def test_bad_format(tmp_path, small_report):
    with pytest.raises(ValueError):
        write_report(small_report, "xml", tmp_path)
