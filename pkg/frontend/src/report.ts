import type { Fit, Proposal, RoundReport } from "./types";
import { formatValue } from "./legend";

export interface ReportFigure {
  label: string;
  /** Raw server value; null when the round has no fit. */
  value: number | null;
  text: string;
}

export interface ReportModel {
  round: number;
  nLocations: number;
  converged: boolean | null;
  warning: string | null;
  figures: ReportFigure[];
  proposal: Proposal | null;
}

function figure(label: string, value: number | null | undefined): ReportFigure {
  if (value === null || value === undefined) {
    return { label, value: null, text: "-" };
  }
  return { label, value, text: formatValue(value) };
}

function fitFigures(fit: Fit | null): ReportFigure[] {
  return [
    figure("intercept", fit ? fit.beta[0] : null),
    figure("sigma2", fit?.sigma2),
    figure("phi", fit?.phi),
    figure("kappa", fit?.kappa),
    figure("tau2", fit?.tau2),
    figure("log likelihood", fit?.log_likelihood),
  ];
}

/**
 * View model for one round report. Every figure is the server's number,
 * untouched; formatting happens only in the display string.
 */
export function reportModel(report: RoundReport): ReportModel {
  const figures = [
    figure("locations used", report.n_locations),
    ...fitFigures(report.fit),
    figure("APV", report.apv),
    figure("PV min", report.pv?.min),
    figure("PV max", report.pv?.max),
    figure("PV mean", report.pv?.mean),
  ];
  return {
    round: report.round,
    nLocations: report.n_locations,
    converged: report.fit ? report.fit.converged : null,
    warning: report.fit_warning,
    figures,
    proposal: report.proposal,
  };
}

/** Look a figure up by its label; helper for rendering and tests. */
export function figureValue(model: ReportModel, label: string): number | null {
  const found = model.figures.find((f) => f.label === label);
  return found ? found.value : null;
}
