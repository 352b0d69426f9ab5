"""Compare the compiled and pure-Python kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints the best wall time per kernel and backend, the speed-up, and the
largest disagreement between backends.
"""

import argparse
import time

import numpy as np

from socialgaze import kernels


def _inputs(rng):
    n = 20000
    scores = rng.random(n).round(3)  # rounding creates ties
    labels = (rng.random(n) < 0.3).astype(np.int8)
    centers = rng.random((400, 2)) * 0.9 + 0.05
    boxes = np.concatenate([centers - 0.04, centers + 0.04], axis=1)
    points = rng.random((5000, 2))
    return {
        "ap_sweep": lambda b: kernels.ap_sweep(scores, labels, int(labels.sum()) + 50, backend=b),
        "roc_auc": lambda b: kernels.roc_auc(scores, labels, backend=b),
        "containing_box": lambda b: kernels.containing_box(points, boxes, backend=b),
        "iou_matrix": lambda b: kernels.iou_matrix(boxes, boxes[:200], backend=b),
    }


def _best(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    backends = kernels.available_backends()
    print(f"active backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    if "cython" not in backends:
        print("compiled extension not built; only the fallback is timed")
    cases = _inputs(np.random.default_rng(args.seed))
    print(f"{'kernel':<16}" + "".join(f"{b + ' [ms]':>16}" for b in backends) + f"{'speed-up':>10}{'max diff':>12}")
    for name, fn in cases.items():
        times, outs = {}, {}
        for b in backends:
            times[b], outs[b] = _best(lambda: fn(b), args.repeat)
        row = f"{name:<16}" + "".join(f"{times[b] * 1e3:>16.3f}" for b in backends)
        if len(backends) == 2:
            diff = float(np.max(np.abs(np.asarray(outs["python"], float) - np.asarray(outs["cython"], float))))
            row += f"{times['python'] / times['cython']:>9.1f}x{diff:>12.2e}"
        print(row)


if __name__ == "__main__":
    main()
