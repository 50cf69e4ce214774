"""Throughput comparison of the compiled and pure-Python sampling kernels.

Runs the fused simulate-and-extract batch kernel on a weighted triangle
under a fixed horizon and reports paths/s and events/s for each backend
(the pure backend gets a proportionally smaller batch). Outputs are
checked to be bit-for-bit identical on a common prefix before timing.

Usage: python benchmarks/bench_kernels.py [-n 200000] [--sigma 2.5]
"""

import argparse
import time

import numpy as np

from jumpdensity import build_graph
from jumpdensity._kernels import _pykernels

try:
    from jumpdensity._kernels import _ckernels
except ImportError:
    _ckernels = None


def make_outputs(n, nv, ne):
    return dict(
        ell=np.empty((n, nv)), k=np.empty((n, ne), np.int64),
        parent=np.empty((n, nv), np.int32), final=np.empty(n, np.int32),
        horizon=np.empty(n), nev=np.empty(n, np.int64))


def run(mod, csr, sigma, seed, n):
    nv, ne = len(csr[3]), len(csr[2])
    out = make_outputs(n, nv, ne)
    t0 = time.perf_counter()
    mod.stats_batch(csr, 0, 0, sigma, -1, seed, 0, n, 10**7,
                    out["ell"], out["k"], out["parent"], out["final"],
                    out["horizon"], out["nev"])
    dt = time.perf_counter() - t0
    return out, dt


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=200_000,
                    help="paths for the compiled backend")
    ap.add_argument("--sigma", type=float, default=2.5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    g = build_graph(["a", "b", "c"],
                    [("a", "b", 1.0), ("b", "c", 1.3), ("a", "c", 0.7)])
    csr = (g.indptr, g.nbr, g.wts, g.rates)

    n_py = max(1000, args.n // 50)
    out_py, dt_py = run(_pykernels, csr, args.sigma, args.seed, n_py)
    ev_py = int(out_py["nev"].sum())
    print("python : %8d paths  %9.3fs  %10.0f paths/s  %11.0f events/s"
          % (n_py, dt_py, n_py / dt_py, ev_py / dt_py))

    if _ckernels is None:
        print("compiled kernels not built; nothing to compare")
        return

    out_c, dt_c = run(_ckernels, csr, args.sigma, args.seed, args.n)
    ev_c = int(out_c["nev"].sum())
    print("c      : %8d paths  %9.3fs  %10.0f paths/s  %11.0f events/s"
          % (args.n, dt_c, args.n / dt_c, ev_c / dt_c))
    print("speedup: %.1fx (per path)" % ((n_py / dt_py) ** -1 * (args.n / dt_c)))

    for key in out_py:
        same = np.array_equal(out_py[key][:min(n_py, args.n)],
                              out_c[key][:min(n_py, args.n)])
        assert same, "backend outputs differ on %s" % key
    print("outputs identical on the common prefix of %d paths"
          % min(n_py, args.n))


if __name__ == "__main__":
    main()
