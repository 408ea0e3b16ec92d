import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import {
  BatchInput,
  FLAG_CALL,
  FLAG_PUT,
  IV_OK_STATUSES,
  batchGreeks,
  batchIv,
  batchPrice,
} from "../src/index.js";

function bits(a: Float64Array): BigUint64Array {
  return new BigUint64Array(a.buffer, a.byteOffset, a.length);
}

function expectBitIdentical(a: Float64Array, b: Float64Array): void {
  expect(a.length).toBe(b.length);
  const ba = bits(a);
  const bb = bits(b);
  for (let i = 0; i < ba.length; i++) {
    expect(ba[i], `row ${i}`).toBe(bb[i]);
  }
}

/** Deterministic 64-bit PRNG (splitmix64) for reproducible fixtures. */
function makeRng(seed: bigint): () => number {
  let state = seed;
  return () => {
    state = (state + 0x9e3779b97f4a7c15n) & 0xffffffffffffffffn;
    let z = state;
    z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & 0xffffffffffffffffn;
    z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & 0xffffffffffffffffn;
    z = z ^ (z >> 31n);
    return Number(z >> 11n) / 9007199254740992;
  };
}

interface Fixture {
  input: BatchInput;
  sigma: Float64Array;
}

function makeFixture(n: number): Fixture {
  const rng = makeRng(20240817n);
  const flag = new Uint8Array(n);
  const underlying = new Float64Array(n);
  const strike = new Float64Array(n);
  const t = new Float64Array(n);
  const r = new Float64Array(n);
  const sigma = new Float64Array(n);
  for (let i = 0; i < n; i++) {
    flag[i] = rng() < 0.5 ? FLAG_CALL : FLAG_PUT;
    underlying[i] = 50 + 100 * rng();
    t[i] = 0.05 + 2.0 * rng();
    r[i] = -0.01 + 0.06 * rng();
    sigma[i] = 0.08 + 0.7 * rng();
    const x = (2 * rng() - 1) *
      Math.min(2.0 * sigma[i] * Math.sqrt(t[i]), 0.4);
    strike[i] = underlying[i] * Math.exp(-x);
  }
  return { input: { flag, underlying, strike, t, r }, sigma };
}

function snapshotInput(input: BatchInput, extra: Float64Array): Uint8Array[] {
  return [
    input.flag.slice(0),
    new Uint8Array(input.underlying.buffer.slice(0)),
    new Uint8Array(input.strike.buffer.slice(0)),
    new Uint8Array(input.t.buffer.slice(0)),
    new Uint8Array(input.r.buffer.slice(0)),
    new Uint8Array(extra.buffer.slice(0)),
  ];
}

function expectUnmutated(
  input: BatchInput, extra: Float64Array, snap: Uint8Array[]): void {
  const now = [
    input.flag.slice(0),
    new Uint8Array(input.underlying.buffer.slice(0)),
    new Uint8Array(input.strike.buffer.slice(0)),
    new Uint8Array(input.t.buffer.slice(0)),
    new Uint8Array(input.r.buffer.slice(0)),
    new Uint8Array(extra.buffer.slice(0)),
  ];
  for (let b = 0; b < snap.length; b++) {
    expect(Buffer.compare(Buffer.from(now[b]), Buffer.from(snap[b]))).toBe(0);
  }
}

describe("single-listing round trip", () => {
  const input: BatchInput = {
    flag: Uint8Array.from([FLAG_CALL, FLAG_CALL, FLAG_PUT]),
    underlying: Float64Array.of(100),
    strike: Float64Array.of(95, 100, 105),
    t: Float64Array.of(0.5),
    r: Float64Array.of(0.03),
  };
  const sigma = Float64Array.of(0.2, 0.2, 0.2);

  it("prices then recovers sigma with both methods", () => {
    const prices = batchPrice("bs", input, sigma);
    expect(prices.length).toBe(3);
    for (const method of ["halley", "lbr"] as const) {
      const { iv, status } = batchIv("bs", input, prices, method);
      for (let i = 0; i < 3; i++) {
        expect(IV_OK_STATUSES.has(status[i])).toBe(true);
        expect(Math.abs(iv[i] - 0.2)).toBeLessThan(1e-8);
      }
    }
  });

  it("computes Greeks with ok statuses", () => {
    const g = batchGreeks("bs", input, sigma);
    for (let i = 0; i < 3; i++) {
      expect(g.status[i]).toBe("ok");
      expect(g.gamma[i]).toBeGreaterThan(0);
      expect(g.vega[i]).toBeGreaterThan(0);
    }
    expect(g.delta[0]).toBeGreaterThan(g.delta[1]);
    expect(g.delta[2]).toBeLessThan(0);
  });

  it("broadcasts length-1 columns against full columns", () => {
    const full: BatchInput = {
      flag: Uint8Array.from([FLAG_CALL, FLAG_CALL, FLAG_PUT]),
      underlying: Float64Array.of(100, 100, 100),
      strike: Float64Array.of(95, 100, 105),
      t: Float64Array.of(0.5, 0.5, 0.5),
      r: Float64Array.of(0.03, 0.03, 0.03),
    };
    expectBitIdentical(
      batchPrice("bs", input, sigma),
      batchPrice("bs", full, sigma));
  });
});

describe("edge cases and errors", () => {
  it("returns empty outputs for an empty batch", () => {
    const empty: BatchInput = {
      flag: new Uint8Array(0),
      underlying: Float64Array.of(100),
      strike: Float64Array.of(100),
      t: Float64Array.of(1),
      r: Float64Array.of(0),
    };
    expect(batchPrice("bs", empty, Float64Array.of(0.2)).length).toBe(0);
    const iv = batchIv("bs", empty, Float64Array.of(5));
    expect(iv.iv.length).toBe(0);
    expect(iv.status.length).toBe(0);
    const g = batchGreeks("bs", empty, Float64Array.of(0.2));
    expect(g.delta.length).toBe(0);
    expect(g.status.length).toBe(0);
  });

  it("surfaces the engine's bad-flag message naming the row", () => {
    const bad: BatchInput = {
      flag: Uint8Array.from(["x".charCodeAt(0)]),
      underlying: Float64Array.of(100),
      strike: Float64Array.of(100),
      t: Float64Array.of(1),
      r: Float64Array.of(0),
    };
    expect(() => batchPrice("bs", bad, Float64Array.of(0.2)))
      .toThrowError(/row 0/);
  });

  it("rejects incompatible buffer lengths", () => {
    const bad: BatchInput = {
      flag: Uint8Array.from([FLAG_CALL, FLAG_CALL]),
      underlying: Float64Array.of(100, 100, 100),
      strike: Float64Array.of(100),
      t: Float64Array.of(1),
      r: Float64Array.of(0),
    };
    expect(() => batchPrice("bs", bad, Float64Array.of(0.2)))
      .toThrowError(RangeError);
  });

  it("rejects non-finite values before invoking the engine", () => {
    const bad: BatchInput = {
      flag: Uint8Array.from([FLAG_CALL]),
      underlying: Float64Array.of(NaN),
      strike: Float64Array.of(100),
      t: Float64Array.of(1),
      r: Float64Array.of(0),
    };
    expect(() => batchPrice("bs", bad, Float64Array.of(0.2)))
      .toThrowError(RangeError);
  });

  it("surfaces the engine's model/q mismatch error", () => {
    const withQ: BatchInput = {
      flag: Uint8Array.from([FLAG_CALL]),
      underlying: Float64Array.of(100),
      strike: Float64Array.of(100),
      t: Float64Array.of(1),
      r: Float64Array.of(0),
      q: Float64Array.of(0.02),
    };
    expect(() => batchPrice("bs", withQ, Float64Array.of(0.2)))
      .toThrowError(/q/);
    const priced = batchPrice("bsm", withQ, Float64Array.of(0.2));
    expect(priced.length).toBe(1);
    expect(priced[0]).toBeGreaterThan(0);
  });
});

describe("parity with the native CLI", () => {
  const N = 1000;

  it("matches a direct vol chain run bit-for-bit on 1000 contracts", () => {
    const { input, sigma } = makeFixture(N);
    const snap = snapshotInput(input, sigma);

    const prices = batchPrice("bs", input, sigma);
    const { iv, status } = batchIv("bs", input, prices);
    expectUnmutated(input, sigma, snap);

    // Independent path: hand-written CSV through the CLI, no bindings.
    const lines = ["flag,S,K,t,r,sigma"];
    for (let i = 0; i < N; i++) {
      lines.push([
        String.fromCharCode(input.flag[i]),
        input.underlying[i].toString(),
        input.strike[i].toString(),
        input.t[i].toString(),
        input.r[i].toString(),
        sigma[i].toString(),
      ].join(","));
    }
    const dir = mkdtempSync(join(tmpdir(), "fastvol-parity-"));
    try {
      const inPath = join(dir, "in.csv");
      const outPath = join(dir, "out.csv");
      writeFileSync(inPath, lines.join("\n") + "\n");
      const proc = spawnSync("vol", [
        "chain", "--input", inPath, "--output", outPath,
        "--model", "bs", "--compute", "price,iv",
      ], { encoding: "utf8" });
      expect(proc.status, proc.stderr).toBe(0);
      const rows = readFileSync(outPath, "utf8")
        .split("\n").filter((l) => l.length > 0);
      const header = rows[0].split(",");
      const priceIdx = header.indexOf("price");
      const ivIdx = header.indexOf("iv");
      const statusIdx = header.indexOf("status");
      const cliPrice = new Float64Array(N);
      const cliIv = new Float64Array(N);
      for (let i = 0; i < N; i++) {
        const cells = rows[i + 1].split(",");
        cliPrice[i] = Number(cells[priceIdx]);
        cliIv[i] = cells[ivIdx] === "nan" ? NaN : Number(cells[ivIdx]);
        expect(status[i]).toBe(cells[statusIdx]);
      }
      expectBitIdentical(prices, cliPrice);
      expectBitIdentical(iv, cliIv);
    } finally {
      rmSync(dir, { recursive: true, force: true });
    }
  });

  it("is deterministic across FASTVOL_THREADS settings", () => {
    const { input, sigma } = makeFixture(200);
    const prices = batchPrice("bs", input, sigma);
    const one = batchIv("bs", input, prices, "halley", { threads: 1 });
    const eight = batchIv("bs", input, prices, "halley", { threads: 8 });
    expectBitIdentical(one.iv, eight.iv);
    expect(one.status).toEqual(eight.status);
  });
});
