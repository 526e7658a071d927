import { ApiError } from "./api";
import type { ErrorDetail } from "./types";

export interface IngestFailure {
  message: string;
  /** Per-row problems or offending ids reported by the server. */
  problems: string[];
}

/**
 * Normalize an upload rejection for display. The server rejects the whole
 * file when any row is invalid, so a failure never leaves partial state;
 * the list below is everything that must be fixed before retrying.
 */
export function ingestFailure(error: unknown): IngestFailure {
  if (error instanceof ApiError) {
    const detail: ErrorDetail = error.detail;
    const problems: string[] = [];
    if (Array.isArray(detail.rows)) problems.push(...detail.rows.map(String));
    if (Array.isArray(detail.ids)) problems.push(...detail.ids.map(String));
    return { message: detail.message, problems };
  }
  return { message: error instanceof Error ? error.message : String(error), problems: [] };
}
