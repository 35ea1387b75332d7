/** Client-side session state: one pending recommendation at a time.
 *
 * Each pending step owns a single idempotency key, minted when the
 * recommendation arrives and reused verbatim for every submit attempt of
 * that step — a retransmitted submit is replayed by the server instead of
 * recorded twice.  The timeline is never computed locally: every mutation
 * copies the server's own records, and `resync` can rebuild the whole
 * state from GET /sessions/{id} after a refresh or a conflict.
 */

import { ApiClient, ApiError } from "./api.js";
import type {
  BottomView,
  SessionMode,
  SessionSnapshot,
  StepRecord,
} from "./types.js";

export interface PendingStep {
  step: number;
  bottom: BottomView;
  idempotencyKey: string;
}

export interface SessionState {
  sessionId: string;
  mode: SessionMode;
  topId: string | null;
  nSteps: number;
  pending: PendingStep | null;
  history: StepRecord[];
  done: boolean;
}

export type StateListener = (state: SessionState) => void;

const newKey = (): string => crypto.randomUUID();

export class SessionFlow {
  private state: SessionState | null = null;
  private listeners: StateListener[] = [];

  constructor(private readonly api: ApiClient) {}

  onChange(listener: StateListener): void {
    this.listeners.push(listener);
  }

  get current(): SessionState | null {
    return this.state;
  }

  private emit(): void {
    if (this.state) {
      for (const listener of this.listeners) listener(this.state);
    }
  }

  async start(topId: string, mode: SessionMode, userTag?: string): Promise<SessionState> {
    const first = await this.api.startSession(topId, mode, userTag);
    this.state = {
      sessionId: first.session_id,
      mode,
      topId,
      nSteps: first.n_steps,
      pending: { step: first.step, bottom: first.bottom, idempotencyKey: newKey() },
      history: [],
      done: false,
    };
    this.emit();
    return this.state;
  }

  /** Submit a score for the pending step; retries reuse the same key. */
  async submit(score: number): Promise<SessionState> {
    const state = this.state;
    if (!state || !state.pending) {
      throw new Error("no pending recommendation to score");
    }
    try {
      const reply = await this.api.sendFeedback(state.sessionId, {
        score,
        idempotency_key: state.pending.idempotencyKey,
      });
      state.done = reply.done;
      if (reply.recorded.step === state.pending.step) {
        state.history = [...state.history, reply.recorded];
      }
      state.pending =
        !reply.done && reply.bottom
          ? { step: reply.step, bottom: reply.bottom, idempotencyKey: newKey() }
          : null;
      this.emit();
      return state;
    } catch (error) {
      if (error instanceof ApiError && error.status === 409) {
        // The server is ahead of us (e.g. another tab); adopt its state.
        return this.resync();
      }
      throw error;
    }
  }

  /** Rebuild local state from the server snapshot. */
  async resync(sessionId?: string): Promise<SessionState> {
    const id = sessionId ?? this.state?.sessionId;
    if (!id) {
      throw new Error("no session to resync");
    }
    const snap = await this.api.snapshot(id);
    this.state = fromSnapshot(snap, this.state);
    this.emit();
    return this.state;
  }
}

function fromSnapshot(
  snap: SessionSnapshot,
  previous: SessionState | null,
): SessionState {
  // Keep the old key only if the pending step is literally the same one,
  // so an interrupted submit can still be replayed; otherwise mint fresh.
  const keepKey =
    previous?.pending && snap.pending && previous.pending.step === snap.pending.step
      ? previous.pending.idempotencyKey
      : newKey();
  return {
    sessionId: snap.session_id,
    mode: snap.mode,
    topId: snap.top_id,
    nSteps: snap.n_steps,
    pending: snap.pending
      ? { step: snap.pending.step, bottom: snap.pending.bottom, idempotencyKey: keepKey }
      : null,
    history: [...snap.history],
    done: snap.status === "done",
  };
}
