"""Compare the numba kernels against the pure-numpy fallback.

Each backend runs in its own interpreter (``GLARS_JIT`` is read at import),
timing a batch of grid-search paths on simulated data. The script also checks
that both backends give the same coefficients.

    python benchmarks/bench_backends.py --paths 200
"""
import argparse
import json
import os
import subprocess
import sys
import time


def _worker(n_paths, rho):
    import numpy as np
    import warnings

    from adpglars import backend_name
    from adpglars.errors import NonConvergenceWarning
    from adpglars.estimators import EstimatorKind, EstimatorSpec
    from adpglars.glars_path import run_path, standardize
    from adpglars.simulation import SimulationConfig, make_replicate

    warnings.simplefilter("ignore", NonConvergenceWarning)
    train, _ = make_replicate(SimulationConfig(rho_collinearity=rho), 0)
    std = standardize(train.X, train.y)
    kinds = list(EstimatorKind)
    jobs = [(EstimatorSpec(kinds[i % 8], k=0.5, d=0.5), 0.1 + 0.9 * ((i // 8) % 10) / 9) for i in range(n_paths)]
    # warm-up (includes compilation for numba)
    t0 = time.perf_counter()
    run_path(std, jobs[0][0], jobs[0][1])
    warm = time.perf_counter() - t0
    t0 = time.perf_counter()
    checksum = 0.0
    finals = []
    for spec, alpha in jobs:
        path = run_path(std, spec, alpha)
        finals.append(path.final_beta_scaled)
        checksum += float(np.abs(path.beta_scaled).sum())
    elapsed = time.perf_counter() - t0
    print(json.dumps({
        "backend": backend_name(),
        "paths": n_paths,
        "first_call_s": warm,
        "total_s": elapsed,
        "per_path_ms": 1e3 * elapsed / n_paths,
        "checksum": checksum,
        "finals": np.array(finals[:16]).tolist(),
    }))


def _run(flag, n_paths, rho):
    env = {**os.environ, "GLARS_JIT": flag}
    out = subprocess.run(
        [sys.executable, __file__, "--worker", "--paths", str(n_paths), "--rho", str(rho)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=200)
    ap.add_argument("--rho", type=float, default=0.9)
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)
    if args.worker:
        _worker(args.paths, args.rho)
        return 0
    import numpy as np

    jit = _run("1", args.paths, args.rho)
    ref = _run("0", args.paths, args.rho)
    diff = float(np.max(np.abs(np.array(jit["finals"]) - np.array(ref["finals"]))))
    for r in (jit, ref):
        print(f"{r['backend']:>6}: {r['paths']} paths in {r['total_s']:.3f} s "
              f"({r['per_path_ms']:.3f} ms/path, first call {r['first_call_s']:.2f} s)")
    print(f"speedup: {ref['total_s'] / jit['total_s']:.1f}x   max |final coef diff|: {diff:.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
