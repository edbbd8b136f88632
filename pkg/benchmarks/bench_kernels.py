"""Compare the numba and pure-numpy kernels.

Each backend runs in a fresh interpreter because the backend is fixed at
import time by ``STEIN_DMC_NO_NUMBA``.

    python3 benchmarks/bench_kernels.py [--sizes 100,200,300,400,500] [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import numpy as np
from stein_dmc._accel import HAS_NUMBA
from stein_dmc.prob_core import JointPmf
from stein_dmc.typicality import Box, marginal_box_logprob
from stein_dmc.kernels import ipf

sizes, repeat = json.loads(sys.argv[1]), int(sys.argv[2])
P = JointPmf([[0.3, 0.2], [0.2, 0.3]])
Q = JointPmf([[0.1, 0.2], [0.2, 0.5]])
marginal_box_logprob(Q, 10, [Box.typical(P.u, 10, 0.1)], [Box.typical(P.v, 10, 0.1)])  # warm-up
out = {"numba": HAS_NUMBA, "box": {}, "ipf": None}
for n in sizes:
    ub, vb = [Box.typical(P.u, n, 0.05)], [Box.typical(P.v, n, 0.05)]
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        marginal_box_logprob(Q, n, ub, vb)
        best = min(best, time.perf_counter() - t)
    out["box"][n] = best
rng = np.random.default_rng(0)
q = rng.dirichlet(np.ones(64)).reshape(8, 8) + 1e-3
q /= q.sum()
a, b = rng.dirichlet(np.ones(8)), rng.dirichlet(np.ones(8))
ipf(q, a, b)
best = float("inf")
for _ in range(repeat):
    t = time.perf_counter()
    ipf(q, a, b, tol=1e-12)
    best = min(best, time.perf_counter() - t)
out["ipf"] = best
print(json.dumps(out))
"""


def run(sizes, repeat, disable):
    env = dict(os.environ)
    env.pop("STEIN_DMC_NO_NUMBA", None)
    if disable:
        env["STEIN_DMC_NO_NUMBA"] = "1"
    res = subprocess.run([sys.executable, "-c", CHILD, json.dumps(sizes), str(repeat)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="100,200,300,400,500")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    nb = run(sizes, args.repeat, disable=False)
    np_ = run(sizes, args.repeat, disable=True)
    if not nb["numba"]:
        print("numba is not installed; both columns use numpy")
    print(f"{'kernel':<28}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for n in sizes:
        a, b = nb["box"][str(n)], np_["box"][str(n)]
        print(f"{'box events, 2x2, n=' + str(n):<28}{a:>12.4f}{b:>12.4f}{b / a:>9.1f}x")
    a, b = nb["ipf"], np_["ipf"]
    print(f"{'IPF 8x8, tol 1e-12':<28}{a:>12.6f}{b:>12.6f}{b / a:>9.1f}x")


if __name__ == "__main__":
    main()
