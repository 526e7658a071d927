import type { Surface } from "./types";

export interface LegendStop {
  /** Position along the ramp in [0, 1]. */
  t: number;
  color: string;
}

export interface LegendModel {
  title: string;
  /** Endpoint values exactly as the server reported them. */
  min: number;
  max: number;
  mean: number;
  minLabel: string;
  maxLabel: string;
  stops: LegendStop[];
  /** True when every value is identical; the ramp collapses to one color. */
  constant: boolean;
}

const RAMP_STEPS = 7;

const TITLES: Record<string, string> = {
  pv: "prediction variance",
  mean: "predicted surface",
  exceedance: "exceedance probability",
};

/** Blue (low) to red (high) ramp over normalized t in [0, 1]. */
export function heatColor(t: number): string {
  const clamped = Math.min(1, Math.max(0, t));
  const hue = 240 - 240 * clamped;
  return `hsl(${Math.round(hue)}, 85%, 55%)`;
}

/** Map a surface value onto the ramp; a constant surface pins t to 0.5. */
export function normalize(value: number, min: number, max: number): number {
  if (max === min) return 0.5;
  return (value - min) / (max - min);
}

export function formatValue(value: number): string {
  if (value === 0) return "0";
  const magnitude = Math.abs(value);
  if (magnitude >= 0.01 && magnitude < 10000) return String(Number(value.toPrecision(4)));
  return value.toExponential(3);
}

/**
 * Legend for a surface layer. The endpoints are carried through verbatim
 * from the server response; only the display strings are derived.
 */
export function legendModel(surface: Surface): LegendModel {
  const constant = surface.min === surface.max;
  const stops: LegendStop[] = [];
  if (constant) {
    stops.push({ t: 0.5, color: heatColor(0.5) });
  } else {
    for (let i = 0; i < RAMP_STEPS; i++) {
      const t = i / (RAMP_STEPS - 1);
      stops.push({ t, color: heatColor(t) });
    }
  }
  let title = TITLES[surface.what] ?? surface.what;
  if (surface.what === "exceedance" && surface.threshold !== undefined) {
    title += ` above ${formatValue(surface.threshold)}`;
  }
  return {
    title,
    min: surface.min,
    max: surface.max,
    mean: surface.mean,
    minLabel: formatValue(surface.min),
    maxLabel: formatValue(surface.max),
    stops,
    constant,
  };
}
