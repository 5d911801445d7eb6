"""Plot CSV output of ``thermo scaling`` or ``thermo robustness``.

    thermo scaling --n-min 2 --n-max 10 --output scaling.csv
    python scripts/plot_scaling.py scaling.csv --out scaling.png

Needs matplotlib, which the package itself does not depend on.
"""
import argparse
import csv
import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_rows(path):
    with open(path) as fh:
        body = "".join(line for line in fh if not line.startswith("#"))
    return list(csv.DictReader(io.StringIO(body)))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("csv", nargs="+")
    ap.add_argument("--out", default="scaling.png")
    args = ap.parse_args()
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for path in args.csv:
        rows = read_rows(path)
        if "sigma" in rows[0]:
            for sigma in sorted({r["sigma"] for r in rows}, key=float):
                sel = [r for r in rows if r["sigma"] == sigma]
                ns = [int(r["n"]) for r in sel]
                ax.plot(ns, [float(r["mean_per_level"]) * n for r, n in zip(sel, ns)], "o-",
                        label=f"{path}, sigma={sigma}")
        else:
            ax.plot([int(r["N"]) for r in rows], [float(r["fi"]) for r in rows], "o-", label=path)
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("optimal FI rate")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)


if __name__ == "__main__":
    main()
