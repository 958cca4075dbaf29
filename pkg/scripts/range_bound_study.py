"""How large is the visible effect of doubling the smallest cell?

Sweeps the smallest value of an otherwise fixed table and prints its
normalized fraction, the range check status and the DoubleMin probe result.
The verdict flips to Confuser once the fraction drops below 1/(w*h).

    python scripts/range_bound_study.py --size 500
"""

import argparse

import numpy as np

from taco.algebra import Alpha, run_probe
from taco.guidance import check_range
from taco.layout import LayoutParams
from taco.table import Table, normalize


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--size", type=float, default=500.0, help="square canvas side in pixels")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    base = rng.uniform(50, 150, size=(5, 5))
    lp = LayoutParams(w=args.size, h=args.size)
    print(f"{'min value':>10} {'fraction':>10} {'range':>6} {'delta px2':>10} {'verdict':>12}")
    for small in np.geomspace(10, 1e-5, 13):
        values = base.copy()
        values[2, 2] = small
        t = Table(values=values)
        status = check_range(normalize(t), args.size, args.size)
        r = run_probe(t, Alpha.double_min(), lp)
        print(f"{small:10.3g} {status.min_fraction:10.3g} {status.status:>6} {r.max_cell_area_delta_px2:10.3g} {r.verdict:>12}")
    print(f"bound 1/(w*h) = {1 / args.size**2:.3g}")


if __name__ == "__main__":
    main()
