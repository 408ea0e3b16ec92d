export * from "./constants.js";
export * from "./bindings.js";
export {
  formatDouble,
  parseCsv,
  numericColumn,
  stringColumn,
} from "./marshal.js";
