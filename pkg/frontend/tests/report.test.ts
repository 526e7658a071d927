import { describe, expect, it } from "vitest";

import { figureValue, reportModel } from "../src/report";
import type { RoundReport } from "../src/types";
import { fixture } from "./helpers";

const reports = [0, 1, 2].map((i) => fixture<RoundReport>(`report_${i}`));

describe("round report figures", () => {
  it("every figure equals the service value exactly, for every round", () => {
    for (const report of reports) {
      const model = reportModel(report);
      expect(figureValue(model, "locations used")).toBe(report.n_locations);
      expect(figureValue(model, "intercept")).toBe(report.fit!.beta[0]);
      expect(figureValue(model, "sigma2")).toBe(report.fit!.sigma2);
      expect(figureValue(model, "phi")).toBe(report.fit!.phi);
      expect(figureValue(model, "kappa")).toBe(report.fit!.kappa);
      expect(figureValue(model, "tau2")).toBe(report.fit!.tau2);
      expect(figureValue(model, "log likelihood")).toBe(report.fit!.log_likelihood);
      expect(figureValue(model, "APV")).toBe(report.apv);
      expect(figureValue(model, "PV min")).toBe(report.pv!.min);
      expect(figureValue(model, "PV max")).toBe(report.pv!.max);
      expect(figureValue(model, "PV mean")).toBe(report.pv!.mean);
    }
  });

  it("passes the round's proposal through untouched", () => {
    const model = reportModel(reports[0]);
    expect(model.proposal).toEqual(reports[0].proposal);
    expect(model.proposal!.status).toBe("amended");
    expect(model.proposal!.excluded).toHaveLength(2);
    expect(model.proposal!.backfill_ids).toHaveLength(2);
  });

  it("reflects convergence and the round index", () => {
    for (const report of reports) {
      const model = reportModel(report);
      expect(model.round).toBe(report.round);
      expect(model.converged).toBe(report.fit!.converged);
      expect(model.warning).toBeNull();
    }
  });
});

describe("rounds without a usable fit", () => {
  const bare: RoundReport = {
    round: 0,
    fit: null,
    fit_warning: "parameter estimation failed: flat surface",
    n_locations: 4,
    apv: null,
    pv: null,
    proposal: null,
  };

  it("renders placeholders instead of numbers", () => {
    const model = reportModel(bare);
    expect(model.converged).toBeNull();
    expect(model.warning).toContain("estimation failed");
    expect(figureValue(model, "APV")).toBeNull();
    const apv = model.figures.find((f) => f.label === "APV")!;
    expect(apv.text).toBe("-");
  });

  it("still reports the location count", () => {
    expect(figureValue(reportModel(bare), "locations used")).toBe(4);
  });
});

describe("figure lookup", () => {
  it("unknown labels resolve to null", () => {
    expect(figureValue(reportModel(reports[0]), "no such figure")).toBeNull();
  });
});
