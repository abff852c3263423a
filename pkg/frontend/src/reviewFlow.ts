/** Review session state machine, kept free of DOM so it is unit-testable.
 *
 * All scores and verdicts travel through the five-criteria form and the
 * service endpoints; nothing is decided or stored client-side.
 */

import { ApiError, NetworkError, QueueEmptyError, ReviewApi } from "./api.js";
import {
  CRITERIA,
  SCORE_MAX,
  SCORE_MIN,
  type ReviewViewModel,
  type TallyDetail,
  type Verdict,
} from "./types.js";

export type FlowPhase =
  | "idle"
  | "loading"
  | "reviewing"
  | "submitted"
  | "queue-empty"
  | "connection-error";

export interface FieldError {
  index: number;
  message: string;
}

export interface FlowState {
  phase: FlowPhase;
  view: ReviewViewModel | null;
  scores: Array<number | null>;
  verdict: Verdict | null;
  /** Inline error on one criterion (server 422). */
  fieldError: FieldError | null;
  /** Non-field banner: conflict, network trouble, queue empty. */
  banner: string | null;
  /** Tally returned by the last accepted ballot. */
  lastTally: TallyDetail | null;
}

function emptyScores(): Array<number | null> {
  return CRITERIA.map(() => null);
}

/** Map a 422 detail message onto the criterion it names, if any. */
export function fieldErrorFromDetail(detail: string): FieldError | null {
  for (let i = 0; i < CRITERIA.length; i++) {
    if (detail.includes(CRITERIA[i])) return { index: i, message: detail };
  }
  return null;
}

export class ReviewFlow {
  private state: FlowState = {
    phase: "idle",
    view: null,
    scores: emptyScores(),
    verdict: null,
    fieldError: null,
    banner: null,
    lastTally: null,
  };

  constructor(
    private readonly api: ReviewApi,
    private readonly reviewerId: string,
    private readonly onChange: (state: FlowState) => void = () => {},
  ) {}

  getState(): Readonly<FlowState> {
    return this.state;
  }

  private update(patch: Partial<FlowState>): void {
    this.state = { ...this.state, ...patch };
    this.onChange(this.state);
  }

  /** Load the next sample for this reviewer. */
  async loadNext(): Promise<void> {
    this.update({ phase: "loading", banner: null, fieldError: null });
    try {
      const view = await this.api.fetchNext(this.reviewerId);
      this.update({
        phase: "reviewing",
        view,
        scores: emptyScores(),
        verdict: null,
        fieldError: null,
        banner: null,
      });
    } catch (error) {
      if (error instanceof QueueEmptyError) {
        this.update({ phase: "queue-empty", view: null, banner: "All caught up — no samples awaiting your review." });
      } else if (error instanceof NetworkError) {
        this.update({ phase: "connection-error", banner: "Cannot reach the review service. Retry when it is back." });
      } else {
        this.update({ phase: "connection-error", banner: String(error) });
      }
    }
  }

  /** Retry affordance for connection errors. */
  retry(): Promise<void> {
    return this.loadNext();
  }

  setScore(index: number, value: number): void {
    if (this.state.phase !== "reviewing") return;
    if (index < 0 || index >= CRITERIA.length) return;
    if (value < SCORE_MIN || value > SCORE_MAX) return; // client-side guard
    const scores = [...this.state.scores];
    scores[index] = value;
    const fieldError =
      this.state.fieldError?.index === index ? null : this.state.fieldError;
    this.update({ scores, fieldError });
  }

  setVerdict(verdict: Verdict): void {
    if (this.state.phase !== "reviewing") return;
    this.update({ verdict });
  }

  /** Submit stays disabled until every criterion is scored and a verdict chosen. */
  canSubmit(): boolean {
    return (
      this.state.phase === "reviewing" &&
      this.state.scores.every((s) => s !== null) &&
      this.state.verdict !== null
    );
  }

  async submit(): Promise<void> {
    if (!this.canSubmit() || !this.state.view) return;
    const ballot = {
      reviewer_id: this.reviewerId,
      criteria_scores: this.state.scores.map((s) => s as number),
      verdict: this.state.verdict as Verdict,
    };
    try {
      const tally = await this.api.submitBallot(
        this.state.view.sample_id,
        ballot,
      );
      this.update({ phase: "submitted", lastTally: tally, banner: null, fieldError: null });
    } catch (error) {
      if (error instanceof ApiError && error.status === 422) {
        const fieldError = fieldErrorFromDetail(error.message);
        this.update({
          fieldError,
          banner: fieldError ? null : error.message,
        });
      } else if (error instanceof ApiError && error.status === 409) {
        this.update({ banner: `Sample already decided by other reviewers: ${error.message}` });
      } else if (error instanceof NetworkError) {
        this.update({ banner: "Submit failed: service unreachable. Your scores are kept — retry." });
      } else {
        this.update({ banner: String(error) });
      }
    }
  }

  /** After a submitted ballot's tally was shown, move on to the next sample. */
  async advance(): Promise<void> {
    if (this.state.phase !== "submitted") return;
    await this.loadNext();
  }
}
