"""Throughput smoke harness: synthesize a chain, invert it, report rows/sec.

The report path writes a delimited CSV and, optionally, a matplotlib figure
next to it.  No benchmark numbers are pinned anywhere; this exists to verify
that large batches complete with flat per-row memory and to measure local
hardware.
"""

import sys
import time
from typing import Optional

import numpy as np

from .batch import batch_iv, batch_price
from .models import Model


def synthetic_chain(rows: int, seed: int = 0):
    """Seeded random BSM contracts with known sigma, plus their prices."""
    rng = np.random.default_rng(seed)
    flag = np.where(rng.random(rows) < 0.5, "c", "p")
    S = np.full(rows, 100.0)
    K = S * np.exp(rng.uniform(-0.6, 0.6, rows))
    t = rng.uniform(0.1, 2.0, rows)
    r = rng.uniform(-0.01, 0.05, rows)
    q = rng.uniform(0.0, 0.03, rows)
    sigma = rng.uniform(0.1, 0.8, rows)
    priced = batch_price(Model.BLACK_SCHOLES_MERTON, list(flag), S, K, t, r,
                         q, sigma=sigma)
    return flag, S, K, t, r, q, sigma, priced["price"]


def run_bench(rows: int, method: str = "halley",
              output: Optional[str] = None, figure: Optional[str] = None,
              seed: int = 0) -> int:
    flag, S, K, t, r, q, sigma, price = synthetic_chain(rows, seed)
    start = time.perf_counter()
    table = batch_iv(Model.BLACK_SCHOLES_MERTON, method, list(flag), S, K,
                     t, r, price=price, q=q)
    elapsed = time.perf_counter() - start
    ok = sum(1 for s in table["status"]
             if s in ("converged", "fell_back_to_bisection"))
    rps = rows / elapsed if elapsed > 0 else float("inf")
    text = ("rows,method,seconds,rows_per_sec,converged\n"
            f"{rows},{method},{elapsed!r},{rps!r},{ok}\n")
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if figure:
        _write_figure(figure, rows, method, rps)
    return 0


def _write_figure(path: str, rows: int, method: str, rps: float) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar([method], [rps], color="#4878d0", width=0.5)
    ax.set_ylabel("rows / sec")
    ax.set_title(f"batch IV throughput ({rows:,} rows)")
    ax.grid(axis="y", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
