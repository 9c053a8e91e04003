"""Acceptance criteria, one test per criterion.

Every test prints a single ``[criterion N] PASS|FAIL|FLAG`` line with the
measured quantities. Tolerances are fixed; nothing here is tuned to the
results.
"""
import time
import warnings

import numpy as np
import pytest

from adpglars.cli import main as cli_main
from adpglars.data_io import diagnostics, load_prostate, load_prostate_full
from adpglars.estimators import EstimatorKind as K, EstimatorSpec, full_transform, restricted_transform, selector
from adpglars.glars_path import run_path, scale_columns, standardize
from adpglars.model_selection import SearchGrid, grid_search_cv
from adpglars.simulation import SimulationConfig, default_specs, run_replications

from oracles import orthogonal_lasso_knots, weighted_lasso_cd

ALGOS = list(default_specs())
PAPER_VIF = [3.09, 2.97, 2.47, 2.05, 1.95, 1.37, 1.36, 1.32]

SIM_RHOS = (0.5, 0.7, 0.9)
SIM_RMSE_BAND = (2.5, 4.5)
SIM_SPREAD_MAX = 0.5
SIM_SELECTED_BAND = (10, 20)
SIM_RUNTIME_S = 300.0
ORDER_SEEDS = 5
ORDER_WITHIN = 0.03
ORDER_NEEDED = 3
PROSTATE_RMSE_BAND = (0.65, 0.95)
PROSTATE_SELECTED_BAND = (6, 8)


@pytest.fixture
def verdict(capsys):
    def emit(n, ok, detail, flag_only=False):
        tag = "PASS" if ok else ("FLAG" if flag_only else "FAIL")
        with capsys.disabled():
            print(f"\n[criterion {n}] {tag}: {detail}")
        if flag_only:
            if not ok:
                warnings.warn(f"criterion {n} flagged: {detail}", UserWarning)
            return
        assert ok, detail

    return emit


def _instance(rng, n, p):
    X = rng.standard_normal((n, p)) + 0.4 * rng.standard_normal((n, 1))
    y = X @ (rng.standard_normal(p) * (rng.uniform(size=p) < 0.7)) + 0.5 * rng.standard_normal(n)
    return X, y


def _identity_specs(q):
    return [
        EstimatorSpec(K.RE, k=0.0),
        EstimatorSpec(K.AURE, k=0.0),
        EstimatorSpec(K.LE, d=1.0),
        EstimatorSpec(K.AULE, d=1.0),
        EstimatorSpec(K.PCRE, h=q),
        EstimatorSpec(K.RK, k=0.0, h=q),
        EstimatorSpec(K.RD, d=1.0, h=q),
    ]


def test_criterion_1_reduction_identities(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    worst = 0.0
    for _ in range(100):
        p = int(rng.integers(2, 9))
        X, _ = _instance(rng, 30, p)
        g = X.T @ X
        q = int(rng.integers(1, p + 1))
        idx = rng.permutation(p)[:q]
        E = selector(idx, p)
        for spec in _identity_specs(p):
            worst = max(worst, np.abs(full_transform(spec, g) - np.eye(p)).max())
        for spec in _identity_specs(q):
            worst = max(worst, np.abs(restricted_transform(spec, E, g) - E).max())
        h = int(rng.integers(1, p + 1))
        P = full_transform(EstimatorSpec(K.PCRE, h=h), g)
        worst = max(worst, np.abs(P @ P - P).max())
        hq = int(rng.integers(1, q + 1))
        core = E.T @ restricted_transform(EstimatorSpec(K.PCRE, h=hq), E, g)
        worst = max(worst, np.abs(core @ core - core).max())
        for kind in K:
            spec = EstimatorSpec(kind, k=0.3, d=0.6, h=h if kind.uses_components else None)
            G = restricted_transform(spec, np.eye(p), g)
            worst = max(worst, np.abs(G - full_transform(spec, g)).max())
            Gq = restricted_transform(EstimatorSpec(kind, k=0.3, d=0.6), E, g)
            if Gq.shape != (p, q):
                worst = np.inf
    elapsed = time.perf_counter() - t0
    verdict(1, worst <= 1e-10 and elapsed < 10, f"max identity error {worst:.2e} (tol 1e-10), {elapsed:.2f} s (< 10 s)")


def _oracle_instances():
    rng = np.random.default_rng(202)
    return [_instance(rng, 10, 5) for _ in range(50)]


def test_criterion_2_coordinate_descent_oracle(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    for X, y in _oracle_instances():
        std = standardize(X, y)
        path = run_path(std, EstimatorSpec(K.OLSE), alpha=1.0)
        xs = scale_columns(std.X_std, path.weights)
        lam_max = np.max(np.abs(xs.T @ std.y_centered))
        for frac in (0.9, 0.6, 0.35, 0.15, 0.03):
            b = weighted_lasso_cd(xs, std.y_centered, frac * lam_max)
            got = path.coefficients_at(np.abs(b).sum()) * path.weights.w
            worst = max(worst, np.abs(got - b).max())
    elapsed = time.perf_counter() - t0
    verdict(2, worst <= 1e-6 and elapsed < 30, f"max |path - CD| {worst:.2e} (tol 1e-6), {elapsed:.2f} s (< 30 s)")


def test_criterion_3_equal_correlation(verdict):
    worst = 0.0
    for X, y in _oracle_instances():
        std = standardize(X, y)
        path = run_path(std, EstimatorSpec(K.OLSE), alpha=1.0)
        xs = scale_columns(std.X_std, path.weights)
        for i in range(len(path)):
            c = np.abs(xs.T @ (std.y_centered - xs @ path.beta_scaled[i]))
            act = list(path.active_set(i).indices)
            worst = max(worst, np.abs(c[act] - c.max()).max())
    verdict(3, worst <= 1e-8, f"max active |corr| gap {worst:.2e} (tol 1e-8)")


def test_criterion_4_orthonormal_closed_form(verdict):
    rng = np.random.default_rng(303)
    worst = 0.0
    knots_ok = True
    for _ in range(20):
        n, p = 30, int(rng.integers(2, 8))
        Z = rng.standard_normal((n, p))
        Z -= Z.mean(axis=0)
        X = np.linalg.qr(Z)[0] * np.sqrt(n)
        y = X @ rng.standard_normal(p) + rng.standard_normal(n)
        std = standardize(X, y)
        path = run_path(std, EstimatorSpec(K.OLSE), alpha=1.0)
        xs = scale_columns(std.X_std, path.weights)
        _, betas = orthogonal_lasso_knots(xs.T @ std.y_centered, np.diag(xs.T @ xs))
        if betas.shape != path.beta_scaled.shape:
            knots_ok = False
            continue
        worst = max(worst, np.abs(betas - path.beta_scaled).max())
        worst = max(worst, np.abs(np.abs(betas).sum(axis=1) - path.t_values).max())
    verdict(4, knots_ok and worst <= 1e-8, f"knot count match {knots_ok}, max error {worst:.2e} (tol 1e-8)")


@pytest.fixture(scope="module")
def simulation_runs():
    reports, elapsed = {}, 0.0
    for rho in SIM_RHOS:
        t0 = time.perf_counter()
        reports[rho] = run_replications(SimulationConfig(rho_collinearity=rho))
        elapsed += time.perf_counter() - t0
    return reports, elapsed


def test_criterion_5_simulation_bands(verdict, simulation_runs):
    reports, elapsed = simulation_runs
    ok = elapsed < SIM_RUNTIME_S
    parts = []
    for rho, rep in reports.items():
        med = {m.algorithm: m for m in rep.medians()}
        vals = np.array([med[a].rmse for a in ALGOS])
        sel = np.array([med[a].selected for a in ALGOS])
        in_band = np.all((vals >= SIM_RMSE_BAND[0]) & (vals <= SIM_RMSE_BAND[1]))
        spread = vals.max() - vals.min()
        sel_ok = np.all((sel >= SIM_SELECTED_BAND[0]) & (sel <= SIM_SELECTED_BAND[1]))
        ok = ok and in_band and spread < SIM_SPREAD_MAX and sel_ok and rep.failures == 0
        parts.append(
            f"rho={rho}: rmse {vals.min():.3f}..{vals.max():.3f} in {SIM_RMSE_BAND}={in_band}, "
            f"spread {spread:.3f} (<{SIM_SPREAD_MAX}), selected {sel.min()}..{sel.max()} in {SIM_SELECTED_BAND}={sel_ok}"
        )
    verdict(5, ok, "; ".join(parts) + f"; {elapsed:.0f} s (< {SIM_RUNTIME_S:.0f} s)")


def test_criterion_6_rd_ordering(verdict, simulation_runs):
    reports, _ = simulation_runs
    base = SimulationConfig().seed
    hits, notes = 0, []
    for s in range(ORDER_SEEDS):
        rep = reports[0.9] if s == 0 else run_replications(SimulationConfig(rho_collinearity=0.9, seed=base + s))
        med = {m.algorithm: m.rmse for m in rep.medians()}
        best = min(med.values())
        rel = med["adpLARS-rd"] / best - 1.0
        hits += rel <= ORDER_WITHIN
        notes.append(f"{rel * 100:.2f}%")
    verdict(6, hits >= ORDER_NEEDED, f"rd within 3% of best in {hits}/{ORDER_SEEDS} seeds ({', '.join(notes)})", flag_only=True)


def test_criterion_7_prostate(verdict):
    t0 = time.perf_counter()
    train, test = load_prostate()
    tr, te = train.to_dataset(), test.to_dataset()
    rows = []
    ok = True
    for name, spec in default_specs().items():
        r = grid_search_cv(tr, te, spec, SearchGrid.default(spec.kind))
        ok = ok and PROSTATE_RMSE_BAND[0] <= r.rmse <= PROSTATE_RMSE_BAND[1]
        ok = ok and PROSTATE_SELECTED_BAND[0] <= r.n_selected <= PROSTATE_SELECTED_BAND[1]
        rows.append(f"{name} {r.rmse:.4f}/{r.n_selected}")
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 60
    verdict(
        7, ok,
        f"rmse/selected: {', '.join(rows)}; bands rmse {PROSTATE_RMSE_BAND}, selected {PROSTATE_SELECTED_BAND}; {elapsed:.1f} s (< 60 s)",
    )


def test_criterion_8_prostate_vif(verdict):
    ds, _ = load_prostate_full()
    vif = np.sort(diagnostics(ds).vif)[::-1]
    dev = np.abs(vif - np.array(PAPER_VIF)).max()
    verdict(8, dev <= 0.05, f"VIF {np.round(vif, 3).tolist()}, max deviation {dev:.3f} (tol 0.05)")


def test_criterion_9_determinism(verdict, tmp_path):
    args = ["simulate", "--rho", "0.5", "0.9", "--replicates", "3", "--seed", "777"]
    same = True
    for fmt in ("csv", "json"):
        for d in ("a", "b"):
            assert cli_main(args + ["--format", fmt, "--out", str(tmp_path / d)]) == 0
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    for name in files:
        same = same and (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    verdict(9, same and len(files) == 6, f"{len(files)} report files compared byte-for-byte, identical={same}")
