import type { Campaign, Proposal, Surface } from "./types";
import { heatColor, normalize } from "./legend";

export interface LayerToggles {
  candidates: boolean;
  design: boolean;
  surface: boolean;
  proposal: boolean;
}

export const DEFAULT_TOGGLES: LayerToggles = {
  candidates: true,
  design: true,
  surface: true,
  proposal: true,
};

export type PointRole = "candidate" | "design" | "proposed" | "excluded";

export interface ScenePoint {
  id: string;
  cx: number;
  cy: number;
  r: number;
  fill: string;
  role: PointRole;
  batch: number | null;
}

export interface Scene {
  width: number;
  height: number;
  cells: { id: string; cx: number; cy: number; size: number; fill: string }[];
  points: ScenePoint[];
}

/** Batch 0 is the initial sample; later batches cycle through this palette. */
const BATCH_COLORS = ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#e377c2"];

export function batchColor(batch: number): string {
  return BATCH_COLORS[batch % BATCH_COLORS.length];
}

interface Projection {
  toX(x: number): number;
  toY(y: number): number;
  cell: number;
}

/** Fit the campaign's planar coordinates into the pixel viewport, y up. */
function projection(campaign: Campaign, width: number, height: number): Projection {
  const xs = campaign.candidates.map((c) => c.x);
  const ys = campaign.candidates.map((c) => c.y);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const pad = 14;
  const spanX = maxX - minX || 1;
  const spanY = maxY - minY || 1;
  const scale = Math.min((width - 2 * pad) / spanX, (height - 2 * pad) / spanY);
  const cell = campaign.candidates.length > 1
    ? scale * Math.sqrt((spanX * spanY) / campaign.candidates.length)
    : scale;
  return {
    toX: (x) => pad + (x - minX) * scale,
    toY: (y) => height - pad - (y - minY) * scale,
    cell,
  };
}

/**
 * Build the drawable scene: surface heat cells underneath, then candidate
 * dots, then design points colored by the batch that added them, then the
 * open proposal on top.
 */
export function buildScene(
  campaign: Campaign,
  surface: Surface | null,
  proposal: Proposal | null,
  toggles: LayerToggles,
  pendingExclusions: string[] = [],
  width = 640,
  height = 640,
): Scene {
  const proj = projection(campaign, width, height);
  const byId = new Map(campaign.candidates.map((c) => [c.id, c]));
  const scene: Scene = { width, height, cells: [], points: [] };

  if (toggles.surface && surface) {
    surface.ids.forEach((id, i) => {
      const cand = byId.get(id);
      if (!cand) return;
      const t = normalize(surface.values[i], surface.min, surface.max);
      scene.cells.push({
        id,
        cx: proj.toX(cand.x),
        cy: proj.toY(cand.y),
        size: proj.cell,
        fill: heatColor(t),
      });
    });
  }

  const designBatch = new Map(campaign.design.map((d) => [d.id, d.batch]));
  const proposed = new Set(proposal && proposal.status === "open" ? proposal.ids : []);
  const excluded = new Set(pendingExclusions);

  if (toggles.candidates) {
    for (const cand of campaign.candidates) {
      if (designBatch.has(cand.id) || proposed.has(cand.id)) continue;
      scene.points.push({
        id: cand.id,
        cx: proj.toX(cand.x),
        cy: proj.toY(cand.y),
        r: 2,
        fill: "#9aa0a6",
        role: "candidate",
        batch: null,
      });
    }
  }

  if (toggles.design) {
    for (const d of campaign.design) {
      const cand = byId.get(d.id);
      if (!cand) continue;
      scene.points.push({
        id: d.id,
        cx: proj.toX(cand.x),
        cy: proj.toY(cand.y),
        r: 5,
        fill: batchColor(d.batch),
        role: "design",
        batch: d.batch,
      });
    }
  }

  if (toggles.proposal && proposal && proposal.status === "open") {
    for (const id of proposal.ids) {
      const cand = byId.get(id);
      if (!cand) continue;
      const isExcluded = excluded.has(id);
      scene.points.push({
        id,
        cx: proj.toX(cand.x),
        cy: proj.toY(cand.y),
        r: 6,
        fill: isExcluded ? "#616161" : "#ff9800",
        role: isExcluded ? "excluded" : "proposed",
        batch: null,
      });
    }
  }

  return scene;
}

/** Serialize the scene to standalone SVG markup. */
export function sceneToSvg(scene: Scene): string {
  const parts: string[] = [
    `<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 ${scene.width} ${scene.height}">`,
  ];
  for (const cell of scene.cells) {
    const half = cell.size / 2;
    parts.push(
      `<rect x="${(cell.cx - half).toFixed(2)}" y="${(cell.cy - half).toFixed(2)}" ` +
        `width="${cell.size.toFixed(2)}" height="${cell.size.toFixed(2)}" ` +
        `fill="${cell.fill}" data-id="${cell.id}"/>`,
    );
  }
  for (const p of scene.points) {
    parts.push(
      `<circle cx="${p.cx.toFixed(2)}" cy="${p.cy.toFixed(2)}" r="${p.r}" ` +
        `fill="${p.fill}" data-id="${p.id}" data-role="${p.role}"/>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
