/** Payload shapes of the campaign service HTTP API. */

export interface Settings {
  delta: number;
  b: number;
  kappa: number;
  nugget_mode: string;
  min_fit_n: number;
  fix_tau2: number | null;
}

export interface Candidate {
  id: string;
  x: number;
  y: number;
  covariates: number[];
}

export interface DesignPoint {
  id: string;
  batch: number;
}

export interface Fit {
  beta: number[];
  sigma2: number;
  phi: number;
  kappa: number;
  tau2: number;
  log_likelihood: number;
  converged: boolean;
  iterations: number;
  messages: string[];
}

export interface Round {
  round: number;
  mode: string;
  ids: string[];
  values: number[][];
  fit: Fit | null;
  fit_warning: string | null;
  digest: string;
}

export type ProposalStatus = "open" | "accepted" | "rejected" | "amended";

export interface Proposal {
  pid: string;
  round: number;
  b: number;
  delta: number;
  ids: string[];
  pv: number[];
  exhausted: boolean;
  status: ProposalStatus;
  excluded: string[];
  backfill_ids: string[];
  backfill_pv: number[];
}

export interface Campaign {
  id: string;
  crs: string;
  settings: Settings;
  candidates: Candidate[];
  rounds: Round[];
  design: DesignPoint[];
  infeasible: string[];
  removed: string[];
  proposals: Proposal[];
  n_candidates: number;
  mode: string | null;
  open_proposal: string | null;
}

export interface CampaignSummary {
  id: string;
  n_candidates: number;
  rounds: number;
  design_size: number;
  open_proposal: string | null;
}

export type SurfaceKind = "pv" | "mean" | "exceedance";

export interface Surface {
  what: SurfaceKind;
  ids: string[];
  values: number[];
  min: number;
  max: number;
  mean: number;
  threshold?: number;
}

export interface PvSummary {
  min: number;
  max: number;
  mean: number;
}

export interface RoundReport {
  round: number;
  fit: Fit | null;
  fit_warning: string | null;
  n_locations: number;
  apv: number | null;
  pv: PvSummary | null;
  proposal: Proposal | null;
}

export type ReviewAction = "accept" | "reject" | "amend";

export interface ReviewRequest {
  action: ReviewAction;
  excluded_ids: string[];
}

export interface ProposalRequest {
  b?: number;
  delta?: number;
}

/** Error body the service returns for rejected operations. */
export interface ErrorDetail {
  message: string;
  rows?: string[];
  ids?: string[];
  [key: string]: unknown;
}
