import { describe, expect, it } from "vitest";

import { DEFAULT_TOGGLES, batchColor, buildScene, sceneToSvg } from "../src/map";
import type { Campaign, Proposal, Surface } from "../src/types";
import { fixture } from "./helpers";

const campaign = fixture<Campaign>("campaign");
const surface = fixture<Surface>("surface_pv");
const proposal = fixture<Proposal>("proposal_open");

describe("scene layers", () => {
  const scene = buildScene(campaign, surface, proposal, DEFAULT_TOGGLES);

  it("draws one heat cell per surfaced candidate", () => {
    expect(scene.cells).toHaveLength(campaign.candidates.length);
    const fills = new Set(scene.cells.map((c) => c.fill));
    expect(fills.size).toBeGreaterThan(1);
  });

  it("draws every design point colored by its batch", () => {
    const design = scene.points.filter((p) => p.role === "design");
    expect(design).toHaveLength(campaign.design.length);
    for (const point of design) {
      expect(point.fill).toBe(batchColor(point.batch!));
    }
    const batches = new Set(design.map((p) => p.batch));
    expect(batches).toEqual(new Set(campaign.design.map((d) => d.batch)));
    expect(new Set(design.map((p) => p.fill)).size).toBe(batches.size);
  });

  it("draws the open proposal on top and hides those dots from the candidate layer", () => {
    const proposed = scene.points.filter((p) => p.role === "proposed");
    expect(proposed.map((p) => p.id).sort()).toEqual([...proposal.ids].sort());
    const candidates = scene.points.filter((p) => p.role === "candidate");
    expect(candidates).toHaveLength(
      campaign.candidates.length - campaign.design.length - proposal.ids.length,
    );
    const candidateIds = new Set(candidates.map((p) => p.id));
    for (const id of proposal.ids) expect(candidateIds.has(id)).toBe(false);
    for (const d of campaign.design) expect(candidateIds.has(d.id)).toBe(false);
  });

  it("keeps coordinates inside the viewport", () => {
    for (const p of scene.points) {
      expect(p.cx).toBeGreaterThanOrEqual(0);
      expect(p.cx).toBeLessThanOrEqual(scene.width);
      expect(p.cy).toBeGreaterThanOrEqual(0);
      expect(p.cy).toBeLessThanOrEqual(scene.height);
    }
  });
});

describe("review marks", () => {
  it("recolors marked points as excluded", () => {
    const marked = buildScene(campaign, surface, proposal, DEFAULT_TOGGLES, [proposal.ids[1]]);
    const byId = new Map(marked.points.map((p) => [p.id, p]));
    expect(byId.get(proposal.ids[1])?.role).toBe("excluded");
    expect(byId.get(proposal.ids[1])?.fill).toBe("#616161");
    expect(byId.get(proposal.ids[0])?.role).toBe("proposed");
    expect(byId.get(proposal.ids[0])?.fill).toBe("#ff9800");
  });
});

describe("toggles", () => {
  it("suppress their layer without touching the others", () => {
    const noSurface = buildScene(campaign, surface, proposal, {
      ...DEFAULT_TOGGLES,
      surface: false,
    });
    expect(noSurface.cells).toHaveLength(0);
    expect(noSurface.points.length).toBeGreaterThan(0);

    const noProposal = buildScene(campaign, surface, proposal, {
      ...DEFAULT_TOGGLES,
      proposal: false,
    });
    expect(noProposal.points.some((p) => p.role === "proposed")).toBe(false);
    expect(noProposal.points.some((p) => p.role === "design")).toBe(true);

    const noPoints = buildScene(campaign, surface, proposal, {
      candidates: false,
      design: false,
      surface: false,
      proposal: false,
    });
    expect(noPoints.cells).toHaveLength(0);
    expect(noPoints.points).toHaveLength(0);
  });
});

describe("edge cases", () => {
  it("ignores a closed proposal", () => {
    const closed: Proposal = { ...proposal, status: "amended" };
    const scene = buildScene(campaign, surface, closed, DEFAULT_TOGGLES);
    expect(scene.points.some((p) => p.role === "proposed")).toBe(false);
    const candidates = scene.points.filter((p) => p.role === "candidate");
    expect(candidates).toHaveLength(campaign.candidates.length - campaign.design.length);
  });

  it("paints a constant surface in a single color", () => {
    const flat: Surface = {
      ...surface,
      values: surface.ids.map(() => 0.25),
      min: 0.25,
      max: 0.25,
      mean: 0.25,
    };
    const scene = buildScene(campaign, flat, proposal, DEFAULT_TOGGLES);
    expect(new Set(scene.cells.map((c) => c.fill)).size).toBe(1);
  });

  it("handles a missing surface", () => {
    const scene = buildScene(campaign, null, proposal, DEFAULT_TOGGLES);
    expect(scene.cells).toHaveLength(0);
  });

  it("cycles batch colors past the palette", () => {
    expect(batchColor(0)).not.toBe(batchColor(1));
    expect(batchColor(6)).toBe(batchColor(0));
  });
});

describe("svg output", () => {
  it("tags every element with its id and role for hit testing", () => {
    const scene = buildScene(campaign, surface, proposal, DEFAULT_TOGGLES);
    const svg = sceneToSvg(scene);
    expect(svg.startsWith("<svg ")).toBe(true);
    expect(svg.endsWith("</svg>")).toBe(true);
    expect(svg).toContain('data-role="design"');
    expect(svg).toContain('data-role="proposed"');
    for (const id of proposal.ids) expect(svg).toContain(`data-id="${id}"`);
    const rects = svg.match(/<rect /g) ?? [];
    expect(rects).toHaveLength(scene.cells.length);
  });
});
