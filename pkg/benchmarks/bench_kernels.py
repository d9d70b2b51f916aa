"""Side-by-side timing of the numba kernels and their numpy fallbacks.

Each hot kernel runs the same workload through both forms; the script
verifies the outputs agree, then reports best-of-N wall times and the
speedup of the compiled path. When numba is unavailable (or disabled via
SPOOFGUARD_NO_NUMBA=1) the loop variants execute as plain Python, so the
workloads are scaled down to keep the run short.

Usage: python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from spoofguard._accel import NUMBA_ENABLED
from spoofguard._kernels import (
    _gmm_log_resp_loops,
    _gmm_log_resp_numpy,
    _svm_dcd_epoch_loops,
    _svm_dcd_epoch_numpy,
    _wpt_analysis_batch_loops,
    _wpt_analysis_batch_numpy,
)
from spoofguard.transforms import WaveletPacketTree

REPEATS = 5


def best_of(fn, repeats=REPEATS):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def bench_wpt(rng, scale):
    tree = WaveletPacketTree()
    frames = rng.standard_normal((int(2000 * scale) or 8, 256))
    args = (frames, tree.low_pass, tree.high_pass, tree.depth,
            tree.gather_map)
    agree = np.allclose(_wpt_analysis_batch_loops(*args),
                        _wpt_analysis_batch_numpy(*args),
                        rtol=0, atol=1e-12)
    return ("wpt_analysis_batch", f"{frames.shape[0]}x256 frames, depth 6",
            best_of(lambda: _wpt_analysis_batch_loops(*args)),
            best_of(lambda: _wpt_analysis_batch_numpy(*args)), agree)


def bench_gmm(rng, scale):
    n, d, c = int(20000 * scale) or 50, 36, 64
    x = rng.standard_normal((n, d))
    means = rng.standard_normal((c, d))
    inv_var = 1.0 / rng.uniform(0.5, 2.0, size=(c, d))
    log_w = np.log(np.full(c, 1.0 / c))
    log_norm = 0.5 * np.log(inv_var / (2.0 * np.pi)).sum(axis=1)
    args = (x, log_w, means, inv_var, log_norm)
    ga, la = _gmm_log_resp_loops(*args)
    gb, lb = _gmm_log_resp_numpy(*args)
    agree = (np.allclose(ga, gb, rtol=0, atol=1e-12)
             and np.allclose(la, lb, rtol=0, atol=1e-9))
    return ("gmm_log_resp", f"{n} frames, {c} components, dim {d}",
            best_of(lambda: _gmm_log_resp_loops(*args)),
            best_of(lambda: _gmm_log_resp_numpy(*args)), agree)


def bench_svm(rng, scale):
    n, d = int(4000 * scale) or 40, 401
    xa = rng.standard_normal((n, d))
    y = np.where(rng.uniform(size=n) < 0.5, 1.0, -1.0)
    qdiag = (xa ** 2).sum(axis=1)
    cost = np.full(n, 1.0)
    order = rng.permutation(n)

    def run(fn):
        alpha = np.zeros(n)
        w = np.zeros(d)
        fn(xa, y, qdiag, cost, alpha, w, order)
        return alpha, w

    aa, wa = run(_svm_dcd_epoch_loops)
    ab, wb = run(_svm_dcd_epoch_numpy)
    agree = (np.allclose(aa, ab, rtol=0, atol=1e-12)
             and np.allclose(wa, wb, rtol=0, atol=1e-12))
    return ("svm_dcd_epoch", f"one epoch, {n} vectors, dim {d}",
            best_of(lambda: run(_svm_dcd_epoch_loops)),
            best_of(lambda: run(_svm_dcd_epoch_numpy)), agree)


def main():
    rng = np.random.default_rng(0)
    scale = 1.0 if NUMBA_ENABLED else 0.01
    label = "numba" if NUMBA_ENABLED else "python loops"
    print(f"loop kernels: {label}"
          + ("" if NUMBA_ENABLED else "  (workloads scaled to 1%)"))
    if NUMBA_ENABLED:
        # Warm-up: trigger JIT compilation outside the timed region.
        tiny = np.random.default_rng(1)
        bench_wpt(tiny, 0.004)
        bench_gmm(tiny, 0.0025)
        bench_svm(tiny, 0.01)

    rows = [bench_wpt(rng, scale), bench_gmm(rng, scale),
            bench_svm(rng, scale)]
    print(f"{'kernel':<20} {'workload':<37} {label:>12} {'numpy':>10} "
          f"{'speedup':>8}  agree")
    for name, workload, t_loops, t_numpy, agree in rows:
        print(f"{name:<20} {workload:<37} {t_loops:>11.4f}s "
              f"{t_numpy:>9.4f}s {t_numpy / t_loops:>7.1f}x  "
              f"{'yes' if agree else 'NO'}")
        if not agree:
            raise SystemExit(f"{name}: kernel paths disagree")


if __name__ == "__main__":
    main()
