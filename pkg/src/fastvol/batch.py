"""Batched entry points: broadcasting, flag parsing, validation, deterministic
chunked data-parallel execution, and columnar output.

Every batch operation is a row-wise application of the scalar modules, so
batch results are bit-for-bit identical to scalar calls and independent of
the worker count.  Workers process disjoint contiguous chunks; the count is
capped by the ``FASTVOL_THREADS`` environment variable (1 forces serial).
"""

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Union

import numpy as np

from . import greeks as greeks_mod
from . import lbr as lbr_mod
from . import solver as solver_mod
from .errors import DomainError, StepFunctionEdge
from .models import Model, PricingInputs, parse_flag
from .pricing import price_black76, price_bsm

ENV_THREADS = "FASTVOL_THREADS"
MIN_CHUNK = 1024

INPUT_COLUMNS = ("flag", "underlying", "strike", "t", "r", "q", "sigma", "price")
GREEK_COLUMNS = ("delta", "gamma", "theta", "rho", "vega")


class BatchError(Exception):
    """Pre-kernel batch rejection; ``index`` is the first offending row."""

    def __init__(self, kind: str, index: int, detail: str):
        self.kind = kind
        self.index = index
        self.detail = detail
        super().__init__(f"{kind} at row {index}: {detail}")


@dataclass
class ChainTable:
    """Columnar batch of contracts; all columns share one length."""

    columns: Dict[str, np.ndarray]

    def __post_init__(self):
        lengths = {c.shape[0] for c in self.columns.values()}
        if len(lengths) > 1:
            raise BatchError("ShapeMismatch", 0,
                             f"column lengths differ: {sorted(lengths)}")

    @property
    def length(self) -> int:
        for col in self.columns.values():
            return col.shape[0]
        return 0

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]


def broadcast(lengths: Sequence[int]) -> int:
    """Common batch length under scalar-extends-to-N rules."""
    n = max(lengths, default=1)
    if 0 in lengths:
        # empty columns force an empty batch; scalars broadcast down to it
        n = 0
    for i, length in enumerate(lengths):
        if length not in (1, n):
            raise BatchError("ShapeMismatch", i,
                             f"length {length} incompatible with batch size {n}")
    return n


def parse_flags(flags: Union[str, Sequence[str]]) -> np.ndarray:
    """Case-insensitive 'c'/'p' parsing; a scalar string broadcasts to N=1."""
    if isinstance(flags, str):
        flags = [flags]
    out = np.empty(len(flags), dtype=np.int8)
    for i, f in enumerate(flags):
        try:
            out[i] = parse_flag(f)
        except DomainError as exc:
            raise BatchError("BadFlag", i, str(exc)) from exc
    return out


def _as_column(values, n: int, name: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if arr.ndim != 1:
        raise BatchError("ShapeMismatch", 0, f"column {name} is not 1-D")
    if arr.shape[0] == 1 and n != 1:
        arr = np.broadcast_to(arr, (n,))
    if arr.shape[0] != n:
        raise BatchError(
            "ShapeMismatch", 0,
            f"column {name} has length {arr.shape[0]}, expected {n}")
    return arr


def validate(table: Dict[str, np.ndarray]) -> None:
    """Finiteness and domain-sign checks; runs before any numeric kernel."""
    for name, col in table.items():
        if col.dtype.kind != "f":
            continue
        bad = np.flatnonzero(~np.isfinite(col))
        if bad.size:
            raise BatchError("NonFiniteInput", int(bad[0]),
                             f"column {name} is not finite")
    for name in ("underlying", "strike"):
        if name in table:
            bad = np.flatnonzero(~(table[name] > 0.0))
            if bad.size:
                raise BatchError("DomainError", int(bad[0]),
                                 f"column {name} must be positive")
    for name in ("t", "sigma"):
        if name in table:
            bad = np.flatnonzero(table[name] < 0.0)
            if bad.size:
                raise BatchError("DomainError", int(bad[0]),
                                 f"column {name} must be >= 0")


def _assemble(model: Model, flag, underlying, strike, t, r, q=0.0,
              sigma=None, price=None) -> Dict[str, np.ndarray]:
    theta = parse_flags(flag)
    raw = {"underlying": underlying, "strike": strike, "t": t, "r": r, "q": q}
    if sigma is not None:
        raw["sigma"] = sigma
    if price is not None:
        raw["price"] = price
    lengths = [theta.shape[0]] + [
        np.atleast_1d(np.asarray(v, dtype=np.float64)).shape[0]
        for v in raw.values()]
    n = broadcast(lengths)
    table = {"flag": theta if theta.shape[0] == n
             else np.broadcast_to(theta, (n,))}
    for name, values in raw.items():
        table[name] = _as_column(values, n, name)
    validate(table)
    if model is not Model.BLACK_SCHOLES_MERTON and np.any(table["q"] != 0.0):
        idx = int(np.flatnonzero(table["q"] != 0.0)[0])
        raise BatchError("DomainError", idx,
                         f"model {model.value} does not accept a dividend yield")
    return table


def worker_count() -> int:
    env = os.environ.get(ENV_THREADS)
    if env is not None:
        try:
            w = int(env)
        except ValueError as exc:
            raise BatchError("DomainError", 0,
                             f"{ENV_THREADS} must be a positive integer") from exc
        if w < 1:
            raise BatchError("DomainError", 0,
                             f"{ENV_THREADS} must be a positive integer")
        return w
    return os.cpu_count() or 1


def _run_chunked(fill: Callable[[int, int], None], n: int) -> None:
    """Run ``fill(start, stop)`` over contiguous chunks; deterministic for
    any worker count because chunks are disjoint and row-pure."""
    if n == 0:
        return
    w = worker_count()
    chunk = max(MIN_CHUNK, -(-n // (4 * w)))
    if w == 1 or n <= chunk:
        fill(0, n)
        return
    spans = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    with ThreadPoolExecutor(max_workers=w) as pool:
        list(pool.map(lambda span: fill(*span), spans))


def batch_price(model: Model, flag, underlying, strike, t, r, q=0.0,
                sigma=None) -> ChainTable:
    """Price every row; returns the input columns plus ``price``."""
    table = _assemble(model, flag, underlying, strike, t, r, q, sigma=sigma)
    if "sigma" not in table:
        raise BatchError("DomainError", 0, "batch_price requires sigma")
    n = table["flag"].shape[0]
    out = np.empty(n, dtype=np.float64)
    th, un, k = table["flag"], table["underlying"], table["strike"]
    tt, rr, qq, sg = table["t"], table["r"], table["q"], table["sigma"]
    is_b76 = model is Model.BLACK76

    def fill(start: int, stop: int) -> None:
        for i in range(start, stop):
            if is_b76:
                out[i] = price_black76(int(th[i]), un[i], k[i], tt[i], rr[i], sg[i])
            else:
                out[i] = price_bsm(int(th[i]), un[i], k[i], tt[i], rr[i], qq[i], sg[i])

    _run_chunked(fill, n)
    cols = dict(table)
    cols["price"] = out
    return ChainTable(cols)


def batch_iv(model: Model, method: str, flag, underlying, strike, t, r,
             price=None, q=0.0) -> ChainTable:
    """Invert the price column row by row.  Failed rows carry NaN plus an
    in-band status; neighbors are unaffected."""
    if method not in ("halley", "lbr"):
        raise BatchError("DomainError", 0, f"unknown IV method {method!r}")
    table = _assemble(model, flag, underlying, strike, t, r, q, price=price)
    if "price" not in table:
        raise BatchError("DomainError", 0, "batch_iv requires price")
    n = table["flag"].shape[0]
    iv = np.empty(n, dtype=np.float64)
    status = np.empty(n, dtype=object)
    th, un, k = table["flag"], table["underlying"], table["strike"]
    tt, rr, qq, px = table["t"], table["r"], table["q"], table["price"]
    is_b76 = model is Model.BLACK76
    use_lbr = method == "lbr"

    def fill(start: int, stop: int) -> None:
        for i in range(start, stop):
            if use_lbr:
                if is_b76:
                    F = un[i]
                else:
                    F = un[i] * math.exp((rr[i] - qq[i]) * tt[i])
                if tt[i] > 0.0:
                    res = lbr_mod.implied_vol_lbr(px[i], int(th[i]), F, k[i],
                                                  tt[i], rr[i])
                else:
                    res = solver_mod.SolverResult(
                        float("nan"), 0,
                        solver_mod.SolverStatus.BELOW_INTRINSIC, float("nan"))
            else:
                res = solver_mod.implied_vol_halley(
                    px[i], int(th[i]), model, un[i], k[i], tt[i], rr[i], qq[i])
            iv[i] = res.sigma if res.status.ok else float("nan")
            status[i] = res.status.value

    _run_chunked(fill, n)
    cols = dict(table)
    cols["iv"] = iv
    cols["status"] = status
    return ChainTable(cols)


def batch_greeks(model: Model, flag, underlying, strike, t, r, q=0.0,
                 sigma=None) -> ChainTable:
    """All five Greeks per row; kink rows (t=0 or sigma=0) carry NaNs plus a
    ``step_function_edge`` status."""
    table = _assemble(model, flag, underlying, strike, t, r, q, sigma=sigma)
    if "sigma" not in table:
        raise BatchError("DomainError", 0, "batch_greeks requires sigma")
    n = table["flag"].shape[0]
    outs = {name: np.empty(n, dtype=np.float64) for name in GREEK_COLUMNS}
    status = np.empty(n, dtype=object)
    th, un, k = table["flag"], table["underlying"], table["strike"]
    tt, rr, qq, sg = table["t"], table["r"], table["q"], table["sigma"]

    def fill(start: int, stop: int) -> None:
        for i in range(start, stop):
            inputs = PricingInputs(model, un[i], k[i], tt[i], rr[i], qq[i], sg[i])
            try:
                rec = greeks_mod.all_greeks(int(th[i]), inputs)
                for name, value in zip(GREEK_COLUMNS, rec.as_tuple()):
                    outs[name][i] = value
                status[i] = "ok"
            except StepFunctionEdge:
                for name in GREEK_COLUMNS:
                    outs[name][i] = float("nan")
                status[i] = "step_function_edge"

    _run_chunked(fill, n)
    cols = dict(table)
    cols.update(outs)
    cols["status"] = status
    return ChainTable(cols)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _cell_text(value) -> str:
    if isinstance(value, (float, np.floating)):
        return repr(float(value))     # shortest round-trip rendering
    if isinstance(value, (np.int8, np.integer, int)):
        return "c" if int(value) > 0 else "p"
    return str(value)


def format_output(table: ChainTable, fmt: str = "csv") -> str:
    """Serialize a table to csv, json, or a plain aligned listing."""
    names = list(table.columns)
    n = table.length
    if fmt == "csv":
        lines = [",".join(names)]
        for i in range(n):
            lines.append(",".join(_cell_text(table[c][i]) for c in names))
        return "\n".join(lines) + "\n"
    if fmt == "json":
        obj = {}
        for name in names:
            col = table[name]
            if col.dtype.kind == "f":
                obj[name] = [None if not math.isfinite(v) else float(v)
                             for v in col]
            elif name == "flag":
                obj[name] = ["c" if v > 0 else "p" for v in col]
            else:
                obj[name] = [str(v) for v in col]
        return json.dumps(obj)
    if fmt == "plain":
        cells = [[_plain_text(table[c][i]) for c in names] for i in range(n)]
        widths = [max([len(name)] + [len(row[j]) for row in cells])
                  for j, name in enumerate(names)]
        lines = ["  ".join(name.ljust(widths[j])
                           for j, name in enumerate(names))]
        for row in cells:
            lines.append("  ".join(cell.ljust(widths[j])
                                   for j, cell in enumerate(row)))
        return "\n".join(lines) + "\n"
    raise BatchError("DomainError", 0, f"unknown output format {fmt!r}")


def _plain_text(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.8g}"
    if isinstance(value, (np.int8, np.integer, int)):
        return "c" if int(value) > 0 else "p"
    return str(value)
