"""CSV ingestion, the bundled prostate data, collinearity diagnostics and
report serialization.

Report files for a prefix ``P``:

* ``P_medians.csv``: one row per algorithm (Algorithm, RMSE, (k,d), alpha, t,
  Selected variables), numbers printed with 5 decimals.
* ``P_replicates.csv``: long format ``algorithm, replicate, rmse``.
* ``P.json``: everything at full precision; layout in ``data/report.schema.json``.
"""
import csv
from dataclasses import dataclass, field
import hashlib
from importlib import resources
import json
import math
from pathlib import Path
from typing import Dict

import numpy as np

from .errors import CorruptBundle, DataError, EmptyFile, MissingColumn, NonNumericCell
from .estimators import EstimatorKind, EstimatorSpec
from .model_selection import Dataset, EvaluationResult

PROSTATE_FILE = "prostate.csv"
PROSTATE_SHA256 = "8216de68e36f37779cfd860ec5d6aa6ad93ac8c74d9990d23f3e70f290b503c4"
PROSTATE_PREDICTORS = ("lcavol", "lweight", "age", "lbph", "svi", "lcp", "gleason", "pgg45")
PROSTATE_RESPONSE = "lpsa"
PROSTATE_SPLIT_COLUMN = "train"
PROSTATE_N_TRAIN = 67

SCHEMA_VERSION = 1
MEDIAN_HEADER = ("Algorithm", "RMSE", "(k,d)", "alpha", "t", "Selected variables")
REPLICATE_HEADER = ("algorithm", "replicate", "rmse")
R2_SINGULAR = 1.0 - 1e-12


@dataclass(frozen=True)
class TabularDataset:
    column_names: tuple
    X_raw: np.ndarray
    y_raw: np.ndarray
    response_name: str
    provenance: str = ""

    def __post_init__(self):
        X = np.asarray(self.X_raw, dtype=float)
        y = np.asarray(self.y_raw, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[1] != len(self.column_names):
            raise DataError(f"inconsistent shapes: X {X.shape}, y {y.shape}, {len(self.column_names)} names")
        object.__setattr__(self, "column_names", tuple(self.column_names))
        object.__setattr__(self, "X_raw", X)
        object.__setattr__(self, "y_raw", y)

    @property
    def n(self):
        return self.X_raw.shape[0]

    @property
    def p(self):
        return self.X_raw.shape[1]

    def to_dataset(self):
        return Dataset(self.X_raw, self.y_raw)

    def subset(self, rows, provenance=None):
        rows = np.asarray(rows)
        return TabularDataset(
            self.column_names,
            self.X_raw[rows],
            self.y_raw[rows],
            self.response_name,
            self.provenance if provenance is None else provenance,
        )


def _parse_cell(text, row, column, path):
    try:
        val = float(text)
    except ValueError:
        raise NonNumericCell(row, column, text, path) from None
    if not math.isfinite(val):
        raise NonNumericCell(row, column, text, path)
    return val


def load_csv(path, response_column, delimiter=",", drop_columns=()):
    """Read a headed numeric CSV.

    Parameters
    ----------
    path : str or Path
    response_column : str
        Name of the response; every other column (minus ``drop_columns``)
        becomes a predictor, in file order.
    delimiter : str
        ``","`` by default; pass ``"\\t"`` for TSV.
    drop_columns : sequence of str
        Columns to ignore entirely (e.g. a split indicator).

    Row numbers in errors are 1-based data rows (the header is row 0).
    Empty cells count as non-numeric: missing values are rejected.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyFile(f"{path} is empty") from None
        header = [h.strip() for h in header]
        if not any(header):
            raise EmptyFile(f"{path} has an empty header")
        for name in list(drop_columns) + [response_column]:
            if name not in header:
                raise MissingColumn(name, path)
        keep = [i for i, h in enumerate(header) if h not in drop_columns and h != response_column]
        yi = header.index(response_column)
        X, y = [], []
        for rnum, rec in enumerate(reader, start=1):
            if not rec or all(not cell.strip() for cell in rec):
                continue
            if len(rec) != len(header):
                raise DataError(f"{path}: row {rnum} has {len(rec)} fields, header has {len(header)}")
            X.append([_parse_cell(rec[i].strip(), rnum, header[i], path) for i in keep])
            y.append(_parse_cell(rec[yi].strip(), rnum, response_column, path))
    if not y:
        raise EmptyFile(f"{path} has a header but no data rows")
    return TabularDataset(
        column_names=tuple(header[i] for i in keep),
        X_raw=np.array(X, dtype=float).reshape(len(y), len(keep)),
        y_raw=np.array(y, dtype=float),
        response_name=response_column,
        provenance=str(path),
    )


def _bundle_bytes(name):
    return resources.files("adpglars").joinpath("data", name).read_bytes()


def prostate_path():
    return resources.files("adpglars").joinpath("data", PROSTATE_FILE)


def load_prostate_full():
    """All 97 rows plus the shipped train indicator."""
    raw = _bundle_bytes(PROSTATE_FILE)
    digest = hashlib.sha256(raw).hexdigest()
    if digest != PROSTATE_SHA256:
        raise CorruptBundle(f"prostate bundle checksum mismatch: {digest}")
    with resources.as_file(prostate_path()) as p:
        ds = load_csv(p, PROSTATE_RESPONSE, drop_columns=(PROSTATE_SPLIT_COLUMN,))
        with open(p, newline="") as fh:
            flags = [row[PROSTATE_SPLIT_COLUMN].strip() == "T" for row in csv.DictReader(fh)]
    ds = TabularDataset(ds.column_names, ds.X_raw, ds.y_raw, ds.response_name, "bundled prostate.csv")
    return ds, np.array(flags, dtype=bool)


def load_prostate(split_seed=None):
    """(train, test) TabularDatasets.

    With no seed the shipped train indicator gives the canonical 67/30
    split; otherwise 67 rows are drawn at random with ``split_seed``.
    """
    ds, flags = load_prostate_full()
    if split_seed is None:
        train_rows = np.flatnonzero(flags)
    else:
        rng = np.random.default_rng(int(split_seed))
        train_rows = np.sort(rng.permutation(ds.n)[:PROSTATE_N_TRAIN])
    test_mask = np.ones(ds.n, dtype=bool)
    test_mask[train_rows] = False
    return ds.subset(train_rows), ds.subset(np.flatnonzero(test_mask))


def split_dataset(ds, train_frac, seed):
    """Seeded random hold-out split of a TabularDataset."""
    if not 0.0 < train_frac < 1.0:
        raise ValueError(f"train fraction must lie in (0, 1), got {train_frac}")
    n_train = int(round(train_frac * ds.n))
    if n_train < 2 or n_train >= ds.n:
        raise DataError(f"train fraction {train_frac} leaves {n_train} of {ds.n} rows for training")
    rng = np.random.default_rng(int(seed))
    perm = rng.permutation(ds.n)
    return ds.subset(np.sort(perm[:n_train])), ds.subset(np.sort(perm[n_train:]))


@dataclass
class Diagnostics:
    """VIF per column and the condition number of the standardized design.

    ``condition_numbers`` holds the other scalings; the prostate figure of
    about 243 corresponds to ``"raw"``.
    """

    vif: np.ndarray
    condition_number: float
    condition_numbers: Dict[str, float] = field(default_factory=dict)
    column_names: tuple = ()


def _cond(M):
    s = np.linalg.svd(M, compute_uv=False)
    return float(s[0] / s[-1]) if s[-1] > 0 else math.inf


def diagnostics(dataset):
    """VIF from regressing each column on the rest (with intercept) and
    condition numbers under several scalings. Exact collinearity gives
    ``inf`` for the affected VIFs."""
    if isinstance(dataset, (TabularDataset, Dataset)):
        X = dataset.X_raw if isinstance(dataset, TabularDataset) else dataset.X
        names = dataset.column_names if isinstance(dataset, TabularDataset) else ()
    else:
        X, names = np.asarray(dataset, dtype=float), ()
    n, p = X.shape
    Xc = X - X.mean(axis=0)
    sds = np.sqrt((Xc**2).mean(axis=0))
    if np.any(sds <= 0):
        raise DataError("constant column; diagnostics need a standardizable design")
    Xs = Xc / sds
    vif = np.empty(p)
    for j in range(p):
        others = np.delete(Xs, j, axis=1)
        if others.shape[1] == 0:
            vif[j] = 1.0
            continue
        coef, *_ = np.linalg.lstsq(others, Xs[:, j], rcond=None)
        resid = Xs[:, j] - others @ coef
        r2 = 1.0 - (resid @ resid) / (Xs[:, j] @ Xs[:, j])
        vif[j] = math.inf if r2 >= R2_SINGULAR else 1.0 / (1.0 - r2)
    conds = {
        "raw": _cond(X),
        "raw_squared": _cond(X) ** 2,
        "centered": _cond(Xc),
        "standardized": _cond(Xs),
        "standardized_squared": _cond(Xs) ** 2,
    }
    return Diagnostics(vif=vif, condition_number=conds["standardized"], condition_numbers=conds, column_names=tuple(names))


def diagnostics_to_dict(diag):
    def num(v):
        return None if not math.isfinite(v) else float(v)

    return {
        "columns": list(diag.column_names),
        "vif": [num(v) for v in diag.vif],
        "condition_number": num(diag.condition_number),
        "condition_numbers": {k: num(v) for k, v in diag.condition_numbers.items()},
    }


# ---------------------------------------------------------------- reports


def _fmt(x):
    return "--" if x is None else f"{x:.5f}"


def _spec_to_dict(spec):
    return {"kind": spec.kind.value, "k": spec.k, "d": spec.d, "h": spec.h, "h_threshold": spec.h_threshold}


def _spec_from_dict(d):
    return EstimatorSpec(EstimatorKind(d["kind"]), k=d["k"], d=d["d"], h=d["h"], h_threshold=d["h_threshold"])


def _result_to_dict(r):
    if r is None:
        return None
    return {
        "rmse": r.rmse,
        "alpha": r.chosen_alpha,
        "shrinkage": r.chosen_shrinkage,
        "t": r.chosen_t,
        "selected": r.n_selected,
        "estimator": _spec_to_dict(r.estimator),
        "coef": [float(c) for c in r.coef] if r.coef is not None else None,
        "intercept": r.intercept,
    }


def _result_from_dict(d):
    if d is None:
        return None
    return EvaluationResult(
        rmse=d["rmse"],
        chosen_alpha=d["alpha"],
        chosen_shrinkage=d["shrinkage"],
        chosen_t=d["t"],
        n_selected=d["selected"],
        estimator=_spec_from_dict(d["estimator"]),
        coef=None if d["coef"] is None else np.array(d["coef"], dtype=float),
        intercept=d["intercept"],
    )


def report_to_dict(report):
    medians = [
        {
            "algorithm": m.algorithm,
            "rmse": m.rmse,
            "shrinkage": m.shrinkage,
            "alpha": m.alpha,
            "t": m.t,
            "selected": m.selected,
            "replicate": m.replicate,
        }
        for m in report.medians()
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "meta": dict(report.meta),
        "algorithms": list(report.algorithms),
        "medians": medians,
        "results": {a: [_result_to_dict(r) for r in report.results[a]] for a in report.algorithms},
    }


def report_from_dict(doc):
    from .simulation import SimulationReport

    if doc.get("schema_version") != SCHEMA_VERSION:
        raise DataError(f"unsupported report schema version {doc.get('schema_version')!r}")
    algs = list(doc["algorithms"])
    results = {a: [_result_from_dict(r) for r in doc["results"][a]] for a in algs}
    return SimulationReport(algorithms=algs, results=results, meta=dict(doc["meta"]))


def median_rows(report):
    """Table rows as strings, in the column order of MEDIAN_HEADER."""
    return [
        [m.algorithm, _fmt(m.rmse), _fmt(m.shrinkage), _fmt(m.alpha), _fmt(m.t), str(m.selected)]
        for m in report.medians()
    ]


def write_report(report, fmt, out_dir, prefix="report", svg=False):
    """Write ``report`` under ``out_dir`` and return the written paths.

    ``fmt`` is ``"csv"`` (medians + long-format replicates) or ``"json"``.
    ``svg=True`` adds ``<prefix>_boxplot.svg``.
    """
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown report format {fmt!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "csv":
        med = out / f"{prefix}_medians.csv"
        with open(med, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(MEDIAN_HEADER)
            w.writerows(median_rows(report))
        rep = out / f"{prefix}_replicates.csv"
        with open(rep, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(REPLICATE_HEADER)
            for a in report.algorithms:
                for i, r in enumerate(report.results[a]):
                    if r is not None:
                        w.writerow([a, i, repr(float(r.rmse))])
        written += [med, rep]
    else:
        js = out / f"{prefix}.json"
        with open(js, "w") as fh:
            json.dump(report_to_dict(report), fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")
        written.append(js)
    if svg:
        sv = out / f"{prefix}_boxplot.svg"
        sv.write_text(boxplot_svg(report.figure_data(), title=prefix))
        written.append(sv)
    return written


def read_report(path):
    with open(path) as fh:
        return report_from_dict(json.load(fh))


def read_replicates_csv(path):
    """Algorithm -> rmse array from a long-format replicates file."""
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.setdefault(row["algorithm"], []).append((int(row["replicate"]), float(row["rmse"])))
    return {a: np.array([v for _, v in sorted(rows)]) for a, rows in out.items()}


def report_schema():
    return json.loads(_bundle_bytes("report.schema.json"))


def tukey_box(values):
    """(q1, median, q3, lower whisker, upper whisker, outliers), whiskers at
    the most extreme data within 1.5 IQR of the box."""
    v = np.sort(np.asarray(values, dtype=float))
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    iqr = q3 - q1
    inside = v[(v >= q1 - 1.5 * iqr) & (v <= q3 + 1.5 * iqr)]
    lo, hi = float(inside.min()), float(inside.max())
    outliers = v[(v < lo) | (v > hi)]
    return float(q1), float(med), float(q3), lo, hi, outliers


def boxplot_svg(figure_data, title="", width=640, height=360):
    """Minimal SVG box plot, one box per algorithm."""
    names = [a for a, v in figure_data.items() if len(v)]
    pad_l, pad_r, pad_t, pad_b = 50, 10, 30, 90
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="10">',
        f'<text x="{width / 2:.1f}" y="16" text-anchor="middle" font-size="12">{_xml(title)}</text>',
    ]
    if names:
        allv = np.concatenate([np.asarray(figure_data[a], dtype=float) for a in names])
        lo, hi = float(allv.min()), float(allv.max())
        if hi == lo:
            lo, hi = lo - 0.5, hi + 0.5
        span = hi - lo
        lo, hi = lo - 0.05 * span, hi + 0.05 * span
        plot_h = height - pad_t - pad_b
        slot = (width - pad_l - pad_r) / len(names)

        def ypix(v):
            return pad_t + plot_h * (hi - v) / (hi - lo)

        parts.append(f'<line x1="{pad_l}" y1="{pad_t}" x2="{pad_l}" y2="{pad_t + plot_h}" stroke="black"/>')
        for tick in np.linspace(lo, hi, 5):
            y = ypix(tick)
            parts.append(f'<text x="{pad_l - 4}" y="{y + 3:.1f}" text-anchor="end">{tick:.3f}</text>')
        for i, a in enumerate(names):
            q1, med, q3, wlo, whi, outl = tukey_box(figure_data[a])
            cx = pad_l + slot * (i + 0.5)
            bw = slot * 0.5
            parts.append(f'<line x1="{cx:.1f}" y1="{ypix(whi):.1f}" x2="{cx:.1f}" y2="{ypix(q3):.1f}" stroke="black"/>')
            parts.append(f'<line x1="{cx:.1f}" y1="{ypix(q1):.1f}" x2="{cx:.1f}" y2="{ypix(wlo):.1f}" stroke="black"/>')
            for wv in (wlo, whi):
                parts.append(
                    f'<line x1="{cx - bw / 4:.1f}" y1="{ypix(wv):.1f}" x2="{cx + bw / 4:.1f}" y2="{ypix(wv):.1f}" stroke="black"/>'
                )
            parts.append(
                f'<rect x="{cx - bw / 2:.1f}" y="{ypix(q3):.1f}" width="{bw:.1f}" height="{ypix(q1) - ypix(q3):.1f}" '
                f'fill="#cfe0f3" stroke="black"/>'
            )
            parts.append(f'<line x1="{cx - bw / 2:.1f}" y1="{ypix(med):.1f}" x2="{cx + bw / 2:.1f}" y2="{ypix(med):.1f}" stroke="black" stroke-width="2"/>')
            for o in outl:
                parts.append(f'<circle cx="{cx:.1f}" cy="{ypix(o):.1f}" r="2" fill="none" stroke="black"/>')
            ly = pad_t + plot_h + 12
            parts.append(
                f'<text x="{cx:.1f}" y="{ly}" text-anchor="end" transform="rotate(-40 {cx:.1f} {ly})">{_xml(a)}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _xml(s):
    return str(s).replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


# ---------------------------------------------------------------- paths


def path_table(path, column_names=None):
    """Breakpoint rows: step, event, variable, rho, t, nonzero."""
    names = column_names or [f"x{j}" for j in range(path.beta_scaled.shape[1])]
    rows = []
    for i in range(len(path)):
        ev = path.event(i)
        rows.append(
            {
                "step": i,
                "event": ev.kind.value,
                "variable": "" if ev.variable is None else names[ev.variable],
                "rho": float(path.rhos[i]),
                "t": float(path.t_values[i]),
                "nonzero": int(np.count_nonzero(path.beta_scaled[i])),
            }
        )
    return rows


def write_path(path, fmt, out_dir, prefix="fit", column_names=None):
    """Breakpoint table plus final coefficients (adaptive and original
    scale, intercept)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = list(column_names or [f"x{j}" for j in range(path.beta_scaled.shape[1])])
    rows = path_table(path, names)
    adaptive = path.final_beta_adaptive
    coef, icpt = path.final_beta_original
    if fmt == "json":
        doc = {
            "estimator": _spec_to_dict(path.spec),
            "alpha": path.weights.alpha,
            "converged": bool(path.converged),
            "breakpoints": rows,
            "columns": names,
            "coef_adaptive": [float(v) for v in adaptive],
            "coef_original": [float(v) for v in coef],
            "intercept": icpt,
        }
        js = out / f"{prefix}.json"
        with open(js, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")
        return [js]
    bp = out / f"{prefix}_path.csv"
    with open(bp, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "event", "variable", "rho", "t", "nonzero"])
        for r in rows:
            w.writerow([r["step"], r["event"], r["variable"], f"{r['rho']:.5f}", f"{r['t']:.5f}", r["nonzero"]])
    cf = out / f"{prefix}_coef.csv"
    with open(cf, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["term", "adaptive", "original"])
        w.writerow(["(intercept)", "", repr(float(icpt))])
        for nm, a, o in zip(names, adaptive, coef):
            w.writerow([nm, repr(float(a)), repr(float(o))])
    return [bp, cf]
