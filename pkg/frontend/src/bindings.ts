/**
 * Columnar bindings over the `vol chain` CLI.
 *
 * Input buffers are read-only from the caller's point of view: rows are
 * rendered to a temporary CSV, the engine is invoked as a child process,
 * and its CSV output is parsed back into fresh Float64Arrays. Because both
 * sides use shortest-round-trip decimal rendering, values cross the text
 * boundary bit-for-bit.
 */

import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import {
  ENV_THREADS,
  GREEK_COLUMNS,
  IvMethod,
  Model,
} from "./constants.js";
import {
  broadcastLength,
  columnAt,
  flagAt,
  formatDouble,
  numericColumn,
  parseCsv,
  stringColumn,
} from "./marshal.js";

export interface BatchInput {
  /** One ASCII 'c' or 'p' byte per row. */
  flag: Uint8Array;
  underlying: Float64Array;
  strike: Float64Array;
  t: Float64Array;
  r: Float64Array;
  /** Continuous dividend yield; only valid with model "bsm". */
  q?: Float64Array;
}

export interface RunOptions {
  /** Worker count forwarded to the engine via FASTVOL_THREADS. */
  threads?: number;
  /** Engine executable; defaults to `vol` on PATH. */
  executable?: string;
}

export interface IvResult {
  iv: Float64Array;
  status: string[];
}

export interface GreeksResult {
  delta: Float64Array;
  gamma: Float64Array;
  theta: Float64Array;
  rho: Float64Array;
  vega: Float64Array;
  status: string[];
}

function batchSize(input: BatchInput, extra: Float64Array): number {
  const lengths = [
    input.flag.length,
    input.underlying.length,
    input.strike.length,
    input.t.length,
    input.r.length,
    extra.length,
  ];
  if (input.q) lengths.push(input.q.length);
  return broadcastLength(lengths);
}

function renderCsv(
  model: Model,
  input: BatchInput,
  extraName: "sigma" | "price",
  extra: Float64Array,
  n: number,
): string {
  const underName = model === "black" ? "F" : "S";
  const header = ["flag", underName, "K", "t", "r"];
  if (input.q) header.push("q");
  header.push(extraName);
  const lines = [header.join(",")];
  for (let i = 0; i < n; i++) {
    const cells = [
      flagAt(input.flag, i),
      formatDouble(columnAt(input.underlying, i)),
      formatDouble(columnAt(input.strike, i)),
      formatDouble(columnAt(input.t, i)),
      formatDouble(columnAt(input.r, i)),
    ];
    if (input.q) cells.push(formatDouble(columnAt(input.q, i)));
    cells.push(formatDouble(columnAt(extra, i)));
    lines.push(cells.join(","));
  }
  return lines.join("\n") + "\n";
}

function runChain(
  model: Model,
  csvText: string,
  compute: string,
  method: IvMethod,
  options: RunOptions,
): string {
  const dir = mkdtempSync(join(tmpdir(), "fastvol-"));
  try {
    const inPath = join(dir, "in.csv");
    const outPath = join(dir, "out.csv");
    writeFileSync(inPath, csvText);
    const env = { ...process.env };
    if (options.threads !== undefined) {
      env[ENV_THREADS] = String(options.threads);
    }
    const proc = spawnSync(
      options.executable ?? "vol",
      [
        "chain",
        "--input", inPath,
        "--output", outPath,
        "--model", model,
        "--method", method,
        "--compute", compute,
      ],
      { env, encoding: "utf8" },
    );
    if (proc.error) {
      throw proc.error;
    }
    if (proc.status !== 0) {
      const message = (proc.stderr ?? "").trim() ||
        `vol exited with status ${proc.status}`;
      throw new Error(message);
    }
    return readFileSync(outPath, "utf8");
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

/** Price a batch of contracts; returns one double per row. */
export function batchPrice(
  model: Model,
  input: BatchInput,
  sigma: Float64Array,
  options: RunOptions = {},
): Float64Array {
  const n = batchSize(input, sigma);
  if (n === 0) return new Float64Array(0);
  const csvText = renderCsv(model, input, "sigma", sigma, n);
  const out = runChain(model, csvText, "price", "halley", options);
  return numericColumn(parseCsv(out), "price");
}

/** Invert a batch of quotes; NaN iv rows carry an error status. */
export function batchIv(
  model: Model,
  input: BatchInput,
  price: Float64Array,
  method: IvMethod = "halley",
  options: RunOptions = {},
): IvResult {
  const n = batchSize(input, price);
  if (n === 0) return { iv: new Float64Array(0), status: [] };
  const csvText = renderCsv(model, input, "price", price, n);
  const out = runChain(model, csvText, "iv", method, options);
  const table = parseCsv(out);
  return {
    iv: numericColumn(table, "iv"),
    status: stringColumn(table, "status"),
  };
}

/** All five Greeks for a batch of contracts. */
export function batchGreeks(
  model: Model,
  input: BatchInput,
  sigma: Float64Array,
  options: RunOptions = {},
): GreeksResult {
  const n = batchSize(input, sigma);
  if (n === 0) {
    return {
      delta: new Float64Array(0),
      gamma: new Float64Array(0),
      theta: new Float64Array(0),
      rho: new Float64Array(0),
      vega: new Float64Array(0),
      status: [],
    };
  }
  const csvText = renderCsv(model, input, "sigma", sigma, n);
  const out = runChain(model, csvText, "greeks", "halley", options);
  const table = parseCsv(out);
  const [delta, gamma, theta, rho, vega] =
    GREEK_COLUMNS.map((name) => numericColumn(table, name));
  return {
    delta, gamma, theta, rho, vega,
    status: stringColumn(table, "status"),
  };
}
