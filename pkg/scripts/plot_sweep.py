#!/usr/bin/env python3
"""Plot a sweep CSV: estimator MSE curves vs r with both bounds overlaid.

    python scripts/plot_sweep.py results/desk.csv [out.png]

Log-scale vertical axis; one panel per sample size; the constrained
bound is drawn only where it differs from the CRB.
"""

import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main() -> int:
    if len(sys.argv) < 2:
        print(__doc__)
        return 2
    path = sys.argv[1]
    out = sys.argv[2] if len(sys.argv) > 2 else path.rsplit(".", 1)[0] + ".png"

    est = defaultdict(list)
    bnd = defaultdict(list)
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            n = int(row["n"])
            if row["kind"] == "estimate":
                est[(n, row["estimator"])].append((float(row["r"]), float(row["mse_hat"])))
            else:
                bnd[n].append((float(row["r"]), float(row["sigma2_cr"]), float(row["eps2_ms"])))

    sizes = sorted({key[0] for key in est})
    fig, axes = plt.subplots(1, len(sizes), figsize=(5.2 * len(sizes), 4.2), squeeze=False)
    for ax, n in zip(axes[0], sizes):
        for name, style in (("r1", "o-"), ("r2", "s-"), ("r3", "d-")):
            pts = sorted(est.get((n, name), []))
            if pts:
                ax.semilogy(
                    [p[0] for p in pts],
                    [max(p[1], 1e-12) for p in pts],
                    style,
                    ms=3,
                    lw=1,
                    label=name,
                )
        curve = sorted(bnd.get(n, []))
        if curve:
            r = [p[0] for p in curve]
            cr = [p[1] for p in curve]
            ax.semilogy(r, cr, "k--", lw=1.2, label="CRB")
            distinct = [(x, m) for x, c, m in curve if (c - m) > 1e-9 * c]
            if distinct:
                ax.semilogy(
                    [p[0] for p in distinct],
                    [p[1] for p in distinct],
                    "k:",
                    lw=1.6,
                    label="constrained MSE bound",
                )
        ax.set_title(f"n = {n}")
        ax.set_xlabel("r")
        ax.set_ylabel("mean-square error")
        ax.grid(True, which="both", alpha=0.25)
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
