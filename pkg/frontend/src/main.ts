import { ApiClient, ApiError } from "./api";
import { ingestFailure } from "./ingest";
import { legendModel } from "./legend";
import { buildScene, sceneToSvg } from "./map";
import { reportModel } from "./report";
import { ViewState, controlProblems } from "./state";
import type { Campaign, Proposal, ReviewRequest, Surface, SurfaceKind } from "./types";

const api = new ApiClient("");
const view = new ViewState();

let campaign: Campaign | null = null;
let surface: Surface | null = null;

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

function setStatus(text: string, isError = false): void {
  const banner = el<HTMLDivElement>("status");
  banner.textContent = text;
  banner.className = isError ? "status error" : "status";
}

function openProposalOf(c: Campaign): Proposal | null {
  if (!c.open_proposal) return null;
  return c.proposals.find((p) => p.pid === c.open_proposal) ?? null;
}

async function refreshList(): Promise<void> {
  const rows = await api.listCampaigns();
  const list = el<HTMLUListElement>("campaign-list");
  list.innerHTML = "";
  for (const row of rows) {
    const item = document.createElement("li");
    const link = document.createElement("a");
    link.href = "#";
    link.textContent =
      `${row.id} (${row.design_size}/${row.n_candidates} sampled, ` +
      `${row.rounds} rounds${row.open_proposal ? ", proposal open" : ""})`;
    link.addEventListener("click", (ev) => {
      ev.preventDefault();
      void selectCampaign(row.id);
    });
    item.appendChild(link);
    list.appendChild(item);
  }
  if (rows.length === 0) {
    list.innerHTML = "<li>no campaigns yet</li>";
  }
}

async function selectCampaign(id: string): Promise<void> {
  try {
    campaign = await api.getCampaign(id);
    view.setCampaign(id);
    view.setProposal(openProposalOf(campaign));
    el<HTMLElement>("workspace").hidden = false;
    el<HTMLHeadingElement>("campaign-title").textContent = id;
    await refreshSurface();
    await refreshReport();
    renderAll();
    setStatus(`showing ${id}`);
  } catch (err) {
    showError(err);
  }
}

async function refreshCampaign(): Promise<void> {
  if (!view.campaignId) return;
  campaign = await api.getCampaign(view.campaignId);
  view.setProposal(openProposalOf(campaign));
}

async function refreshSurface(): Promise<void> {
  if (!view.campaignId || !campaign) return;
  if (campaign.rounds.every((r) => r.fit === null)) {
    surface = null;
    return;
  }
  const what = el<HTMLSelectElement>("surface-what").value as SurfaceKind;
  if (what === "exceedance") {
    const threshold = Number(el<HTMLInputElement>("threshold").value);
    const problems = controlProblems({ threshold });
    if (problems.length > 0) {
      setStatus(problems.join("; "), true);
      return;
    }
    surface = await api.getSurface(view.campaignId, what, threshold);
  } else {
    surface = await api.getSurface(view.campaignId, what);
  }
}

async function refreshReport(): Promise<void> {
  if (!view.campaignId || !campaign || campaign.rounds.length === 0) {
    el<HTMLElement>("report").innerHTML = "<p>no rounds ingested yet</p>";
    return;
  }
  const round = campaign.rounds.length - 1;
  const report = await api.getReport(view.campaignId, round);
  const model = reportModel(report);
  const rows = model.figures
    .map((f) => `<tr><td>${f.label}</td><td class="num">${f.text}</td></tr>`)
    .join("");
  const convergence =
    model.converged === null ? "" : model.converged ? " (converged)" : " (not converged)";
  el<HTMLElement>("report").innerHTML =
    `<h3>round ${model.round}${convergence}</h3>` +
    (model.warning ? `<p class="warning">${model.warning}</p>` : "") +
    `<table>${rows}</table>`;
}

function renderLegend(): void {
  const box = el<HTMLElement>("legend");
  if (!surface || !view.toggles.surface) {
    box.innerHTML = "<p>surface layer off</p>";
    return;
  }
  const model = legendModel(surface);
  const gradient = model.constant
    ? model.stops[0].color
    : `linear-gradient(to right, ${model.stops.map((s) => s.color).join(", ")})`;
  box.innerHTML =
    `<h4>${model.title}</h4>` +
    `<div class="ramp" style="background:${gradient}"></div>` +
    `<div class="ends"><span data-field="min">${model.minLabel}</span>` +
    `<span data-field="max">${model.maxLabel}</span></div>`;
}

function renderMap(): void {
  if (!campaign) return;
  const scene = buildScene(
    campaign,
    surface,
    view.openProposal,
    view.toggles,
    view.pendingExclusions,
  );
  const host = el<HTMLElement>("map");
  host.innerHTML = sceneToSvg(scene);
  host.querySelectorAll("circle[data-role='proposed'], circle[data-role='excluded']").forEach(
    (node) => {
      node.addEventListener("click", () => {
        const id = node.getAttribute("data-id");
        if (!id) return;
        view.toggleExclusion(id);
        renderAll();
      });
    },
  );
}

function renderProposal(): void {
  const box = el<HTMLElement>("proposal");
  const proposal = view.openProposal;
  if (!proposal) {
    box.innerHTML = "<p>no open proposal</p>";
    return;
  }
  const marked = new Set(view.pendingExclusions);
  const items = proposal.ids
    .map((id, i) => {
      const cls = marked.has(id) ? "excluded" : "";
      return (
        `<li class="${cls}" data-id="${id}">${id}` +
        ` <span class="num">pv ${proposal.pv[i].toPrecision(3)}</span></li>`
      );
    })
    .join("");
  box.innerHTML =
    `<h4>proposal ${proposal.pid} (${proposal.ids.length} points` +
    `${proposal.exhausted ? ", candidates exhausted" : ""})</h4>` +
    `<ul>${items}</ul>` +
    `<p>${marked.size} marked infeasible; click a point or id to toggle</p>`;
  box.querySelectorAll("li[data-id]").forEach((node) => {
    node.addEventListener("click", () => {
      const id = node.getAttribute("data-id");
      if (!id) return;
      view.toggleExclusion(id);
      renderAll();
    });
  });
}

function renderAll(): void {
  renderLegend();
  renderMap();
  renderProposal();
}

function showError(err: unknown): void {
  if (err instanceof ApiError) {
    const failure = ingestFailure(err);
    const suffix = failure.problems.length > 0 ? `: ${failure.problems.join("; ")}` : "";
    setStatus(`${failure.message}${suffix}`, true);
  } else {
    setStatus(err instanceof Error ? err.message : String(err), true);
  }
}

async function guarded(work: () => Promise<void>): Promise<void> {
  try {
    await work();
  } catch (err) {
    // conflicts usually mean the campaign moved on; refetch so the view
    // reflects the server before the user retries
    showError(err);
    if (err instanceof ApiError && err.status === 409) {
      await refreshCampaign();
      renderAll();
    }
  }
}

function wireControls(): void {
  el<HTMLSelectElement>("surface-what").addEventListener("change", () =>
    guarded(async () => {
      await refreshSurface();
      renderAll();
    }),
  );
  el<HTMLInputElement>("threshold").addEventListener("change", () =>
    guarded(async () => {
      await refreshSurface();
      renderAll();
    }),
  );
  for (const name of ["candidates", "design", "surface", "proposal"] as const) {
    el<HTMLInputElement>(`toggle-${name}`).addEventListener("change", () => {
      view.toggleLayer(name);
      renderAll();
    });
  }

  el<HTMLFormElement>("ingest-form").addEventListener("submit", (ev) => {
    ev.preventDefault();
    void guarded(async () => {
      if (!view.campaignId) return;
      const input = el<HTMLInputElement>("ingest-file");
      const file = input.files?.[0];
      if (!file) {
        setStatus("choose an observation CSV first", true);
        return;
      }
      const report = await api.ingestRound(view.campaignId, file);
      input.value = "";
      await refreshCampaign();
      await refreshSurface();
      await refreshReport();
      renderAll();
      setStatus(`round ${report.round} ingested (${report.n_locations} locations in the model)`);
    });
  });

  el<HTMLButtonElement>("propose").addEventListener("click", () =>
    guarded(async () => {
      if (!view.campaignId) return;
      const b = Number(el<HTMLInputElement>("batch-size").value);
      const problems = controlProblems({ b });
      if (problems.length > 0) {
        setStatus(problems.join("; "), true);
        return;
      }
      const proposal = await api.proposeBatch(view.campaignId, { b });
      await refreshCampaign();
      renderAll();
      setStatus(`proposal ${proposal.pid} is open`);
    }),
  );

  const submitReview = (request: () => ReviewRequest) =>
    guarded(async () => {
      if (!view.campaignId || !view.openProposal) return;
      const body = request();
      campaign = await api.reviewProposal(view.campaignId, view.openProposal.pid, body);
      view.setProposal(openProposalOf(campaign));
      await refreshSurface();
      await refreshReport();
      renderAll();
      await refreshList();
      setStatus(`review submitted (${body.action})`);
    });

  el<HTMLButtonElement>("review-accept").addEventListener("click", () =>
    submitReview(() => view.reviewRequest()),
  );
  el<HTMLButtonElement>("review-reject").addEventListener("click", () =>
    submitReview(() => view.rejectRequest()),
  );
}

async function start(): Promise<void> {
  wireControls();
  await guarded(refreshList);
}

document.addEventListener("DOMContentLoaded", () => {
  void start();
});
