/** Wire types mirroring the session service's response bodies. */

export interface BottomView {
  id: string;
  cluster: number;
  image_url: string | null;
  swatch: string;
}

export interface TopView {
  id: string;
  image_url: string | null;
  swatch: string;
}

export interface TopsPage {
  items: TopView[];
  total: number;
  offset: number;
  limit: number;
}

export type SessionMode = "proxy" | "human";

export interface StartSessionRequest {
  top_id: string;
  mode: SessionMode;
  user_tag?: string;
}

export interface RecommendationResponse {
  session_id: string;
  step: number;
  n_steps: number;
  bottom: BottomView;
}

export interface FeedbackRequest {
  score?: number;
  idempotency_key?: string;
}

export interface StepRecord {
  step: number;
  bottom: BottomView;
  score: number;
  raw_score: number | null;
  reward: number;
}

export interface HistorySummary {
  steps: number;
  last_score: number | null;
  best_score: number | null;
  mean_score: number | null;
  episode_return: number;
}

export interface FeedbackResponse {
  session_id: string;
  done: boolean;
  recorded: StepRecord;
  step: number;
  n_steps: number;
  bottom: BottomView | null;
  history_summary: HistorySummary;
}

export interface PendingView {
  step: number;
  bottom: BottomView;
}

export interface SessionSnapshot {
  session_id: string;
  user_tag: string | null;
  top_id: string;
  mode: SessionMode;
  status: "active" | "done";
  n_steps: number;
  pending: PendingView | null;
  history: StepRecord[];
  history_summary: HistorySummary;
}

export interface HealthView {
  status: "ok";
  sessions: number;
}

export interface ErrorBody {
  code: string;
  message: string;
}
