import type {
  Campaign,
  CampaignSummary,
  ErrorDetail,
  ProposalRequest,
  Proposal,
  ReviewRequest,
  RoundReport,
  Settings,
  Surface,
  SurfaceKind,
} from "./types";

/** Server rejection carrying the structured detail body. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: ErrorDetail,
  ) {
    super(detail.message);
    this.name = "ApiError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin client for the campaign service. Every displayed figure comes from
 * these responses; nothing is recomputed on the client.
 */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  listCampaigns(): Promise<CampaignSummary[]> {
    return this.requestJson("GET", "/campaigns");
  }

  getCampaign(id: string): Promise<Campaign> {
    return this.requestJson("GET", `/campaigns/${encodeURIComponent(id)}`);
  }

  createCampaign(opts: {
    candidatesCsv: string;
    settings: Partial<Settings> & { delta: number; b: number };
    id?: string;
    crs?: string;
  }): Promise<Campaign> {
    return this.requestJson("POST", "/campaigns", {
      candidates_csv: opts.candidatesCsv,
      settings: opts.settings,
      ...(opts.id ? { id: opts.id } : {}),
      ...(opts.crs ? { crs: opts.crs } : {}),
    });
  }

  ingestRound(id: string, observations: File | Blob | string): Promise<RoundReport> {
    const path = `/campaigns/${encodeURIComponent(id)}/rounds`;
    if (typeof observations === "string") {
      return this.requestJson("POST", path, { observations_csv: observations });
    }
    const form = new FormData();
    form.append("observations", observations);
    return this.requestForm(path, form);
  }

  proposeBatch(id: string, body: ProposalRequest = {}): Promise<Proposal> {
    return this.requestJson("POST", `/campaigns/${encodeURIComponent(id)}/proposals`, body);
  }

  reviewProposal(id: string, pid: string, body: ReviewRequest): Promise<Campaign> {
    const path = `/campaigns/${encodeURIComponent(id)}/proposals/${encodeURIComponent(pid)}/review`;
    return this.requestJson("POST", path, body);
  }

  getSurface(id: string, what: SurfaceKind, threshold?: number): Promise<Surface> {
    const query = new URLSearchParams({ what });
    if (threshold !== undefined) query.set("c", String(threshold));
    return this.requestJson("GET", `/campaigns/${encodeURIComponent(id)}/surface?${query}`);
  }

  getReport(id: string, round: number): Promise<RoundReport> {
    return this.requestJson("GET", `/campaigns/${encodeURIComponent(id)}/report/${round}`);
  }

  private async requestJson(method: string, path: string, body?: unknown): Promise<any> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    return this.send(path, init);
  }

  private async requestForm(path: string, form: FormData): Promise<any> {
    return this.send(path, { method: "POST", body: form });
  }

  private async send(path: string, init: RequestInit): Promise<any> {
    const response = await this.fetchFn(this.baseUrl + path, init);
    if (response.ok) {
      return response.json();
    }
    let detail: ErrorDetail = { message: `request failed with status ${response.status}` };
    try {
      const parsed = await response.json();
      if (Array.isArray(parsed?.detail)) {
        // request validation errors arrive as a list of field problems
        const first = parsed.detail[0];
        detail = { message: first?.msg ? String(first.msg) : JSON.stringify(parsed.detail) };
      } else if (parsed && typeof parsed.detail === "object" && parsed.detail !== null) {
        detail = parsed.detail as ErrorDetail;
      } else if (typeof parsed?.detail === "string") {
        detail = { message: parsed.detail };
      }
    } catch {
      // non-JSON body; keep the status message
    }
    throw new ApiError(response.status, detail);
  }
}
