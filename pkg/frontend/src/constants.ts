/**
 * Engine interface constants, transcribed from the native side.
 *
 * Column order and status-code values mirror the engine's documented CSV
 * schema; keep this file in sync with the `vol chain` interface.
 */

export type Model = "black" | "bs" | "bsm";
export type IvMethod = "halley" | "lbr";

/** Input CSV columns accepted by `vol chain`, in canonical order. */
export const CHAIN_INPUT_COLUMNS = [
  "flag", "S", "F", "K", "t", "r", "q", "sigma", "price",
] as const;

/** Greek output columns, in the order the engine emits them. */
export const GREEK_COLUMNS = [
  "delta", "gamma", "theta", "rho", "vega",
] as const;

/** Status-code strings shared by the solver, the CLI, and these bindings. */
export const STATUS = {
  CONVERGED: "converged",
  FELL_BACK_TO_BISECTION: "fell_back_to_bisection",
  BELOW_INTRINSIC: "below_intrinsic",
  ABOVE_UPPER_BOUND: "above_upper_bound",
  MAX_ITERATIONS: "max_iterations",
  OK: "ok",
  STEP_FUNCTION_EDGE: "step_function_edge",
} as const;

export type StatusCode = (typeof STATUS)[keyof typeof STATUS];

/** Statuses under which an iv value is consumable. */
export const IV_OK_STATUSES: ReadonlySet<string> = new Set([
  STATUS.CONVERGED,
  STATUS.FELL_BACK_TO_BISECTION,
]);

/** Environment variable controlling the engine's worker count. */
export const ENV_THREADS = "FASTVOL_THREADS";

/** Flag bytes: one ASCII 'c' or 'p' (case-insensitive) per row. */
export const FLAG_CALL = "c".charCodeAt(0);
export const FLAG_PUT = "p".charCodeAt(0);
