"""``vol`` command line tool: single-contract pricing / IV / Greeks and CSV
option-chain processing.

Exit codes: 0 success, 1 data error (message names the offending row or
column), 2 usage error.  Results go to stdout (or --output); diagnostics go
to stderr.
"""

import argparse
import csv
import sys
from typing import Dict, List, Optional

import numpy as np

from . import batch as batch_mod
from .batch import BatchError, ChainTable, format_output
from .errors import DomainError, StepFunctionEdge
from .models import Model

CHAIN_COLUMNS = ("flag", "S", "F", "K", "t", "r", "q", "sigma", "price")


class DataError(Exception):
    pass


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vol",
        description="European option pricing, implied volatility, and Greeks")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_contract_args(p, with_sigma: bool, with_price: bool):
        p.add_argument("--model", required=True,
                       choices=["black", "bs", "bsm"])
        p.add_argument("--flag", required=True)
        p.add_argument("--s", type=float, help="spot (bs/bsm models)")
        p.add_argument("--f", type=float, help="forward (black model)")
        p.add_argument("--k", type=float, required=True)
        p.add_argument("--t", type=float, required=True)
        p.add_argument("--r", type=float, required=True)
        p.add_argument("--q", type=float, default=0.0)
        if with_sigma:
            p.add_argument("--sigma", type=float, required=True)
        if with_price:
            p.add_argument("--price", type=float, required=True)
        p.add_argument("--format", default="plain",
                       choices=["plain", "csv", "json"])
        p.add_argument("--output")

    p_price = sub.add_parser("price", help="price one contract")
    add_contract_args(p_price, with_sigma=True, with_price=False)

    p_iv = sub.add_parser("iv", help="implied volatility of one quote")
    add_contract_args(p_iv, with_sigma=False, with_price=True)
    p_iv.add_argument("--method", default="halley", choices=["halley", "lbr"])

    p_greeks = sub.add_parser("greeks", help="all five Greeks of one contract")
    add_contract_args(p_greeks, with_sigma=True, with_price=False)

    p_chain = sub.add_parser("chain", help="process a CSV option chain")
    p_chain.add_argument("--input", required=True)
    p_chain.add_argument("--output")
    p_chain.add_argument("--compute", default="price",
                         help="comma list drawn from price,iv,greeks")
    p_chain.add_argument("--model", required=True,
                         choices=["black", "bs", "bsm"])
    p_chain.add_argument("--method", default="halley",
                         choices=["halley", "lbr"])
    p_chain.add_argument("--format", default="csv", choices=["csv", "json"])

    p_bench = sub.add_parser("bench", help="IV throughput smoke benchmark")
    p_bench.add_argument("--rows", type=int, default=100000)
    p_bench.add_argument("--method", default="halley",
                         choices=["halley", "lbr"])
    p_bench.add_argument("--output", help="CSV report path (default stdout)")
    p_bench.add_argument("--figure", help="write a throughput figure (png)")
    p_bench.add_argument("--seed", type=int, default=0)
    return parser


def _underlying(args, model: Model) -> float:
    if model is Model.BLACK76:
        if args.f is None or args.s is not None:
            raise DataError("model black takes --f (forward), not --s")
        return args.f
    if args.s is None or args.f is not None:
        raise DataError(f"model {args.model} takes --s (spot), not --f")
    return args.s


def _check_q(args, model: Model) -> float:
    if model is not Model.BLACK_SCHOLES_MERTON and args.q != 0.0:
        raise DataError(f"model {args.model} does not accept --q")
    return args.q


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _single(args) -> int:
    model = Model.parse(args.model)
    under = _underlying(args, model)
    q = _check_q(args, model)
    if args.subcommand == "price":
        table = batch_mod.batch_price(model, args.flag, under, args.k,
                                      args.t, args.r, q, sigma=args.sigma)
        value_cols = ["price"]
    elif args.subcommand == "iv":
        table = batch_mod.batch_iv(model, args.method, args.flag, under,
                                   args.k, args.t, args.r,
                                   price=args.price, q=q)
        if table["status"][0] not in ("converged", "fell_back_to_bisection"):
            raise DataError(f"iv solve failed: {table['status'][0]}")
        value_cols = ["iv"]
    else:
        table = batch_mod.batch_greeks(model, args.flag, under, args.k,
                                       args.t, args.r, q, sigma=args.sigma)
        if table["status"][0] != "ok":
            raise DataError(f"greeks failed: {table['status'][0]}")
        value_cols = list(batch_mod.GREEK_COLUMNS)
    if args.format == "plain":
        if len(value_cols) == 1:
            text = f"{float(table[value_cols[0]][0]):.8f}\n"
        else:
            text = "".join(f"{c} {float(table[c][0]):.8f}\n"
                           for c in value_cols)
    else:
        text = format_output(table, args.format)
    _emit(text, args.output)
    return 0


def _read_chain(path: str) -> Dict[str, List[str]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise DataError(f"{path}: empty file (header required)")
            rows = list(reader)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}")
    for name in header:
        if name not in CHAIN_COLUMNS:
            raise DataError(f"{path}: unknown column {name!r}")
    if "S" in header and "F" in header:
        raise DataError(f"{path}: columns S and F are mutually exclusive")
    cols: Dict[str, List[str]] = {name: [] for name in header}
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise DataError(f"{path}: row {i} has {len(row)} cells, "
                            f"expected {len(header)}")
        for name, cell in zip(header, row):
            cols[name].append(cell)
    return cols


def _numeric(cols: Dict[str, List[str]], name: str) -> np.ndarray:
    out = np.empty(len(cols[name]), dtype=np.float64)
    for i, cell in enumerate(cols[name]):
        try:
            out[i] = float(cell)
        except ValueError:
            raise DataError(f"row {i}, column {name}: not a number: {cell!r}")
    return out


def _chain(args) -> int:
    model = Model.parse(args.model)
    compute = [c.strip() for c in args.compute.split(",") if c.strip()]
    for c in compute:
        if c not in ("price", "iv", "greeks"):
            raise DataError(f"unknown --compute item {c!r}")
    cols = _read_chain(args.input)
    n = len(next(iter(cols.values()))) if cols else 0

    if "flag" not in cols:
        raise DataError("missing required column: flag")
    need_under = "F" if model is Model.BLACK76 else "S"
    if need_under not in cols:
        raise DataError(f"missing required column: {need_under}")
    for name in ("K", "t", "r"):
        if name not in cols:
            raise DataError(f"missing required column: {name}")
    if "q" in cols and model is not Model.BLACK_SCHOLES_MERTON:
        raise DataError(f"model {args.model} does not accept a q column")

    flag = cols["flag"] if n else []
    under = _numeric(cols, need_under)
    strike = _numeric(cols, "K")
    t = _numeric(cols, "t")
    r = _numeric(cols, "r")
    q = _numeric(cols, "q") if "q" in cols else np.zeros(n)
    sigma = _numeric(cols, "sigma") if "sigma" in cols else None
    price = _numeric(cols, "price") if "price" in cols else None

    if n == 0:
        # Header-only input: emit the same header-only shape.
        out_names = [name for name in cols]
        extra = []
        for c in compute:
            if c == "price" and "price" not in cols:
                extra.append("price")
            if c == "iv":
                extra.extend(["iv", "status"])
            if c == "greeks":
                extra.extend(list(batch_mod.GREEK_COLUMNS))
        text = ",".join(out_names + extra) + "\n"
        if args.format == "json":
            text = format_output(ChainTable(
                {name: np.empty(0) for name in out_names + extra}), "json")
        _emit(text, args.output)
        return 0

    try:
        result_cols: Dict[str, np.ndarray] = {}
        base = dict(flag=flag, underlying=under, strike=strike, t=t, r=r, q=q)
        if "price" in compute:
            if sigma is None:
                raise DataError("--compute price requires a sigma column")
            table = batch_mod.batch_price(model, sigma=sigma, **base)
            price = table["price"]
            result_cols["price"] = table["price"]
        if "iv" in compute:
            if price is None:
                raise DataError("--compute iv requires a price column "
                                "(or --compute price,iv)")
            table = batch_mod.batch_iv(model, args.method, price=price, **base)
            result_cols["iv"] = table["iv"]
            result_cols["status"] = table["status"]
        if "greeks" in compute:
            if sigma is None:
                raise DataError("--compute greeks requires a sigma column")
            table = batch_mod.batch_greeks(model, sigma=sigma, **base)
            for name in batch_mod.GREEK_COLUMNS:
                result_cols[name] = table[name]
            if "iv" not in compute:
                result_cols["status"] = table["status"]
    except BatchError as exc:
        raise DataError(str(exc))

    out: Dict[str, np.ndarray] = {}
    parsed = {"flag": np.array([1 if f in ("c", "C") else -1 for f in flag],
                               dtype=np.int8),
              need_under: under, "K": strike, "t": t, "r": r}
    for name in cols:
        if name == "q":
            out["q"] = q
        elif name == "sigma":
            out["sigma"] = sigma
        elif name == "price" and "price" not in result_cols:
            out["price"] = price
        elif name in parsed:
            out[name] = parsed[name]
    for name, col in result_cols.items():
        out[name] = col
    text = format_output(ChainTable(out), args.format)
    _emit(text, args.output)
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.subcommand in ("price", "iv", "greeks"):
            return _single(args)
        if args.subcommand == "chain":
            return _chain(args)
        from .bench import run_bench
        return run_bench(args.rows, args.method, args.output, args.figure,
                         args.seed)
    except (DataError, BatchError, DomainError, StepFunctionEdge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
