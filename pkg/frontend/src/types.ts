/** Payload shapes mirroring the review service API (single source of truth). */

export type Decision = "pending" | "accepted" | "rejected";
export type Verdict = "accept" | "reject";

export interface TallySummary {
  decision: Decision;
  ballots: number;
  mean_score: number;
}

/** Mirrors GET /samples/{id}; clue text is never mutated client-side. */
export interface ReviewViewModel {
  sample_id: string;
  subtitle: string;
  audio_tone: string;
  visual_expression: string;
  visual_objective: string;
  coarse_description: string;
  candidate_fine_description: string | null;
  pseudo_label: string;
  tally: TallySummary;
}

export interface BallotPayload {
  reviewer_id: string;
  criteria_scores: number[];
  verdict: Verdict;
}

export interface TallyDetail {
  sample_id: string;
  ballots: Array<{
    sample_id: string;
    reviewer_id: string;
    criteria_scores: number[];
    verdict: Verdict;
    submitted_at: string;
  }>;
  decision: Decision;
  mean_score: number;
}

/** The five review criteria, in ballot order. */
export const CRITERIA = [
  "visual_accuracy",
  "audio_accuracy",
  "textual_accuracy",
  "reasoning_process",
  "reasoning_result",
] as const;

export const CRITERIA_LABELS: Record<(typeof CRITERIA)[number], string> = {
  visual_accuracy: "Accuracy of the visual description",
  audio_accuracy: "Accuracy of the audio description",
  textual_accuracy: "Accuracy of the textual description",
  reasoning_process: "Correctness of the reasoning process",
  reasoning_result: "Correctness of the reasoning result",
};

export const SCORE_MIN = 0;
export const SCORE_MAX = 5;
