import type { Proposal, ReviewRequest } from "./types";
import { DEFAULT_TOGGLES, LayerToggles } from "./map";

export interface Controls {
  b: number;
  delta: number;
  threshold: number;
}

/**
 * Client-side control checks mirroring the server's validation, so bad
 * requests are blocked before they are sent.
 */
export function controlProblems(controls: Partial<Controls>): string[] {
  const problems: string[] = [];
  if (controls.b !== undefined) {
    if (!Number.isInteger(controls.b) || controls.b < 1) {
      problems.push("batch size must be a whole number of at least 1");
    }
  }
  if (controls.delta !== undefined) {
    if (!Number.isFinite(controls.delta) || controls.delta < 0) {
      problems.push("minimum spacing must be a nonnegative number");
    }
  }
  if (controls.threshold !== undefined && !Number.isFinite(controls.threshold)) {
    problems.push("exceedance threshold must be a number");
  }
  return problems;
}

/**
 * Per-campaign view state: layer toggles, the proposal under review, and
 * the exclusions marked so far. Exclusions are only ever ids of the open
 * proposal; selecting a new proposal clears them.
 */
export class ViewState {
  campaignId: string | null = null;
  toggles: LayerToggles = { ...DEFAULT_TOGGLES };
  openProposal: Proposal | null = null;
  private exclusions: string[] = [];

  setCampaign(id: string | null): void {
    this.campaignId = id;
    this.setProposal(null);
  }

  setProposal(proposal: Proposal | null): void {
    this.openProposal = proposal && proposal.status === "open" ? proposal : null;
    this.exclusions = [];
  }

  get pendingExclusions(): string[] {
    return [...this.exclusions];
  }

  /** Mark or unmark one proposed point as infeasible; returns the new mark. */
  toggleExclusion(id: string): boolean {
    if (!this.openProposal || !this.openProposal.ids.includes(id)) {
      throw new Error(`${id} is not part of the open proposal`);
    }
    const at = this.exclusions.indexOf(id);
    if (at >= 0) {
      this.exclusions.splice(at, 1);
      return false;
    }
    this.exclusions.push(id);
    return true;
  }

  toggleLayer(name: keyof LayerToggles): boolean {
    this.toggles[name] = !this.toggles[name];
    return this.toggles[name];
  }

  /**
   * The review to submit for the open proposal: amend carrying exactly the
   * marked exclusions when there are any, plain accept otherwise.
   */
  reviewRequest(): ReviewRequest {
    if (!this.openProposal) {
      throw new Error("no open proposal to review");
    }
    if (this.exclusions.length > 0) {
      return { action: "amend", excluded_ids: [...this.exclusions] };
    }
    return { action: "accept", excluded_ids: [] };
  }

  rejectRequest(): ReviewRequest {
    if (!this.openProposal) {
      throw new Error("no open proposal to review");
    }
    return { action: "reject", excluded_ids: [] };
  }
}
