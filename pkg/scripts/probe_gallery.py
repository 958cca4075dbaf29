"""Run the standard probe battery on a few small tables and draw each probe.

Writes one SVG per (table, probe) pair with the original layout on the left
and the transformed one on the right, plus a verdict summary.

    python scripts/probe_gallery.py --out gallery
"""

import argparse
import json
from pathlib import Path

import numpy as np

from taco.algebra import apply_alpha, run_suite
from taco.layout import LayoutParams, optimize
from taco.render import RenderSpec, _document, render_group
from taco.table import Table, normalize

TABLES = {
    # nominal rows: regions, ordinal columns: years
    "migration": Table(
        values=[[120, 135, 160, 150], [80, 60, 75, 90], [40, 55, 52, 70], [200, 180, 210, 240]],
        row_labels=("north", "south", "east", "west"),
        col_labels=("2019", "2020", "2021", "2022"),
        row_kind="nominal",
    ),
    "visitors": Table(
        values=[[98, 110, 205, 330, 420, 470], [105, 120, 215, 350, 440, 490], [110, 126, 230, 362, 455, 505]],
        row_labels=("y1", "y2", "y3"),
        col_labels=("Jan", "Feb", "Mar", "Apr", "May", "Jun"),
    ),
    # rows of 7: a lone outlier among n cells reaches at most z = (n-1)/sqrt(n)
    "outlier": Table(values=np.array([[10, 11, 10, 12, 11, 10, 12], [10, 12, 55, 11, 10, 11, 12], [11, 10, 12, 10, 11, 12, 10]], float)),
}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", default="gallery")
    ap.add_argument("--suite-seed", type=int, default=0)
    ap.add_argument("--jitter", type=float, default=0.05)
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lp = LayoutParams(w=300, h=300, jitter=args.jitter, seed=1)
    spec = RenderSpec(color="blues", labels="values", margin=30)
    summary = {}
    for name, t in TABLES.items():
        suite = run_suite(t, lp, suite_seed=args.suite_seed)
        summary[name] = suite.summary()
        left = optimize(normalize(t), lp).mesh
        for r in suite.reports:
            after = apply_alpha(t, r.alpha)
            seed = r.alpha.params[0] if r.alpha.kind == "seed" else lp.seed
            right = optimize(normalize(after), LayoutParams(w=300, h=300, jitter=args.jitter, seed=seed)).mesh
            body = "\n".join(
                [
                    render_group(left, t, spec, 30, 40, title="before"),
                    render_group(right, after, spec, 390, 40, title=f"{r.alpha.label()}: {r.verdict}"),
                ]
            )
            (out / f"{name}-{r.alpha.kind}.svg").write_text(_document(720, 380, body))
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    print(json.dumps(summary, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
