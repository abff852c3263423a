/** Typed client for the review service REST API. */

import type { BallotPayload, ReviewViewModel, TallyDetail } from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** The reviewer has nothing left to vote on (HTTP 404 + QueueEmpty code). */
export class QueueEmptyError extends ApiError {
  constructor() {
    super(404, "QueueEmpty", "queue empty");
    this.name = "QueueEmptyError";
  }
}

/** Transport-level failure; the UI offers a retry. */
export class NetworkError extends Error {
  constructor(cause: unknown) {
    super(`service unreachable: ${String(cause)}`);
    this.name = "NetworkError";
  }
}

async function errorFrom(res: Response): Promise<ApiError> {
  let code = `HTTP${res.status}`;
  let detail = res.statusText;
  try {
    const body = (await res.json()) as { detail?: unknown; code?: string };
    if (typeof body.code === "string") code = body.code;
    if (typeof body.detail === "string") detail = body.detail;
    else if (body.detail !== undefined) detail = JSON.stringify(body.detail);
  } catch {
    // non-JSON error body; keep the status text
  }
  if (res.status === 404 && code === "QueueEmpty") return new QueueEmptyError();
  return new ApiError(res.status, code, detail);
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  let res: Response;
  try {
    res = await fetch(url, init);
  } catch (cause) {
    throw new NetworkError(cause);
  }
  if (!res.ok) throw await errorFrom(res);
  return (await res.json()) as T;
}

export class ReviewApi {
  constructor(private readonly baseUrl: string = "") {}

  /** Next pending sample this reviewer has not voted on. */
  fetchNext(reviewerId: string): Promise<ReviewViewModel> {
    const query = new URLSearchParams({ reviewer: reviewerId });
    return request<ReviewViewModel>(`${this.baseUrl}/queue/next?${query}`);
  }

  fetchSample(sampleId: string): Promise<ReviewViewModel> {
    return request<ReviewViewModel>(
      `${this.baseUrl}/samples/${encodeURIComponent(sampleId)}`,
    );
  }

  submitBallot(sampleId: string, ballot: BallotPayload): Promise<TallyDetail> {
    return request<TallyDetail>(
      `${this.baseUrl}/samples/${encodeURIComponent(sampleId)}/votes`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(ballot),
      },
    );
  }

  fetchTally(sampleId: string): Promise<TallyDetail> {
    return request<TallyDetail>(
      `${this.baseUrl}/samples/${encodeURIComponent(sampleId)}/tally`,
    );
  }
}
