"""Convergence sweep over random tables.

    python scripts/convergence_sweep.py --count 500 --max-side 8 --ratio 1e3
"""

import argparse
import collections
import time

import numpy as np

from taco.layout import LayoutParams, optimize
from taco.mesh import check_topology, concave_count
from taco.table import Table, normalize


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--count", type=int, default=200)
    ap.add_argument("--max-side", type=int, default=8)
    ap.add_argument("--ratio", type=float, default=1e3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tol", type=float, default=0.01)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    p = LayoutParams(tolerance=args.tol)
    errors, seconds, iters, concave = [], [], [], 0
    reasons = collections.Counter()
    broken = 0
    for _ in range(args.count):
        m, n = rng.integers(1, args.max_side + 1, size=2)
        t = Table(values=np.exp(rng.uniform(0, np.log(args.ratio), size=(m, n))))
        start = time.perf_counter()
        r = optimize(normalize(t), p)
        seconds.append(time.perf_counter() - start)
        errors.append(r.max_relative_area_error)
        iters.append(r.iterations)
        reasons[r.stop_reason or "exact"] += 1
        broken += bool(check_topology(r.mesh))
        concave += concave_count(r.mesh)

    q = lambda xs: " ".join(f"{v:.3g}" for v in np.quantile(xs, [0.5, 0.9, 0.99, 1.0]))
    print(f"tables {args.count}  sides 1..{args.max_side}  ratio <= {args.ratio:g}")
    print(f"stop reasons       {dict(reasons)}")
    print(f"error  p50/90/99/max  {q(errors)}")
    print(f"time s p50/90/99/max  {q(seconds)}")
    print(f"iters  p50/90/99/max  {q(iters)}")
    print(f"topology violations {broken}, concave cells {concave}")


if __name__ == "__main__":
    main()
