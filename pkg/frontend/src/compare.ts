import { ComparisonRow, EstimateResponse, Target, TARGETS } from "./types.js";

/** Delta of every pinned row against the chosen baseline row, computed
 * from the displayed response values. */
export function deltasAgainstBaseline(
  rows: readonly ComparisonRow[],
  baselineIndex: number,
): Record<Target | "bops", number>[] {
  const base = rows[baselineIndex].response;
  return rows.map((row) => {
    const out = {} as Record<Target | "bops", number>;
    for (const target of TARGETS) {
      out[target] = row.response.predictions[target] - base.predictions[target];
    }
    out.bops = row.response.bops - base.bops;
    return out;
  });
}

/** Utilization fraction per resource target when a capacity profile is
 * present; null entries mean no capacity was given for that target. */
export function utilization(
  response: EstimateResponse,
  capacity: Record<string, number> | null,
): Partial<Record<Target, number>> {
  const out: Partial<Record<Target, number>> = {};
  if (!capacity) return out;
  for (const target of ["bram", "dsp", "ff", "lut"] as Target[]) {
    const available = capacity[target];
    if (typeof available === "number" && available > 0) {
      out[target] = response.predictions[target] / available;
    }
  }
  return out;
}

export function formatSigned(value: number): string {
  return value > 0 ? `+${value}` : String(value);
}
