"""Render a decay CSV (from the `nerhd decay` or `nerhd linear-decay`
subcommands, or `decay_csv`) as a log-log plot with reference slopes.

Usage:
    python3 demos/plot_decay.py decay.csv [out.png]

The first column must be t; every other column is drawn as a curve.
Reference lines with slopes -1/4 and -3/4 are anchored to the first
curve's value at the start of its final decade.
"""

import sys

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main(argv):
    if not 1 <= len(argv) <= 2:
        print(__doc__)
        return 1
    path = argv[0]
    out = argv[1] if len(argv) == 2 else "decay.png"

    rows = [line.split(",") for line in open(path).read().splitlines()]
    header, body = rows[0], np.array(rows[1:], dtype=float)
    t = body[:, 0]

    fig, ax = plt.subplots(figsize=(7, 5))
    for j, name in enumerate(header[1:], start=1):
        ax.loglog(1.0 + t, body[:, j], marker=".", lw=1.2, label=name)

    # anchor reference slopes on the first curve at t0 = max(t)/10
    i0 = np.searchsorted(t, t.max() / 10.0)
    base_t, base_v = 1.0 + t[i0], body[i0, 1]
    span = (1.0 + t[i0:]) / base_t
    for slope, style in ((-0.25, "--"), (-0.75, ":")):
        ax.loglog(1.0 + t[i0:], base_v * span ** slope, style, color="gray",
                  lw=1.0, label=f"slope {slope:+.2f}")

    ax.set_xlabel("1 + t")
    ax.set_ylabel("norm")
    ax.set_title(path)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.25)
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
