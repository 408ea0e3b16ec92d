/**
 * Columnar buffer <-> CSV marshaling.
 *
 * Doubles are rendered with Number.prototype.toString, the shortest decimal
 * that round-trips to the identical IEEE-754 double; the engine parses and
 * re-emits with the same guarantee, so values survive the text boundary
 * bit-for-bit.
 */

/** A numeric column: length-1 buffers broadcast to the batch length. */
export type Column = Float64Array;

export function formatDouble(v: number): string {
  if (!Number.isFinite(v)) {
    throw new RangeError(`non-finite value in input buffer: ${v}`);
  }
  return v.toString();
}

export function broadcastLength(lengths: number[]): number {
  let n = 1;
  for (const len of lengths) {
    if (len !== 1 && len !== n) {
      if (n !== 1) {
        throw new RangeError(
          `buffer length ${len} incompatible with batch size ${n}`);
      }
      n = len;
    }
  }
  if (lengths.includes(0)) return 0;
  return n;
}

export function columnAt(col: Column, i: number): number {
  return col.length === 1 ? col[0] : col[i];
}

export function flagAt(flags: Uint8Array, i: number): string {
  const byte = flags.length === 1 ? flags[0] : flags[i];
  return String.fromCharCode(byte);
}

export interface CsvTable {
  header: string[];
  rows: string[][];
}

/** Minimal CSV parsing; the engine's schema never quotes or embeds commas. */
export function parseCsv(text: string): CsvTable {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines.length === 0) {
    throw new Error("empty CSV output from engine");
  }
  const header = lines[0].split(",");
  const rows = lines.slice(1).map((line) => line.split(","));
  for (const row of rows) {
    if (row.length !== header.length) {
      throw new Error(
        `malformed CSV row: ${row.length} cells, expected ${header.length}`);
    }
  }
  return { header, rows };
}

export function numericColumn(table: CsvTable, name: string): Float64Array {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(`engine output is missing column ${name}`);
  }
  const out = new Float64Array(table.rows.length);
  for (let i = 0; i < table.rows.length; i++) {
    const cell = table.rows[i][idx];
    out[i] = cell === "nan" ? NaN : Number(cell);
  }
  return out;
}

export function stringColumn(table: CsvTable, name: string): string[] {
  const idx = table.header.indexOf(name);
  if (idx < 0) {
    throw new Error(`engine output is missing column ${name}`);
  }
  return table.rows.map((row) => row[idx]);
}
