/** Chat view state and its pure transitions.
 *
 * The state is a pure render input derived from server responses: rendered
 * turns mirror the server's turn count, the evidence panel always belongs to
 * the latest response, and the pending flag enforces one in-flight request
 * per session.
 */

import {
  ApiClient,
  ApiError,
  ChatResponse,
  EvidenceItem,
  TranscriptTurn,
} from "./api.js";

export interface ChatViewState {
  sessionId: string;
  turns: TranscriptTurn[];
  evidence: EvidenceItem[];
  pending: boolean;
  error: string | null;
}

export function initialState(sessionId: string): ChatViewState {
  return { sessionId, turns: [], evidence: [], pending: false, error: null };
}

export function beginSend(state: ChatViewState): ChatViewState {
  return { ...state, pending: true, error: null };
}

export function applyChatResponse(
  state: ChatViewState,
  query: string,
  response: ChatResponse,
): ChatViewState {
  return {
    ...state,
    turns: [...state.turns, { query, response: response.response }],
    evidence: response.evidence,
    pending: false,
    error: null,
  };
}

export function applyChatError(state: ChatViewState, message: string): ChatViewState {
  return { ...state, pending: false, error: message };
}

export function stateFromTranscript(transcript: {
  session_id: string;
  turns: TranscriptTurn[];
}): ChatViewState {
  return {
    sessionId: transcript.session_id,
    turns: [...transcript.turns],
    evidence: [],
    pending: false,
    error: null,
  };
}

export interface SendOutcome {
  accepted: boolean;
  state: ChatViewState;
}

/** Drives one chat session: send/reload/reset with the pending-flag contract
 * (a submit while a request is in flight is rejected, not interleaved). */
export class ChatController {
  state: ChatViewState;

  constructor(
    private readonly api: ApiClient,
    sessionId: string,
    private readonly onChange: (state: ChatViewState) => void = () => {},
  ) {
    this.state = initialState(sessionId);
  }

  private update(state: ChatViewState): void {
    this.state = state;
    this.onChange(state);
  }

  async send(query: string): Promise<SendOutcome> {
    if (!query.trim() || this.state.pending) {
      return { accepted: false, state: this.state };
    }
    this.update(beginSend(this.state));
    try {
      const response = await this.api.chat(this.state.sessionId, query);
      this.update(applyChatResponse(this.state, query, response));
    } catch (error) {
      const message =
        error instanceof ApiError ? error.message : String(error);
      this.update(applyChatError(this.state, message));
    }
    return { accepted: true, state: this.state };
  }

  /** Rebuild the transcript from the server, as after a full page reload. */
  async reload(): Promise<ChatViewState> {
    const transcript = await this.api.fetchSession(this.state.sessionId);
    this.update(stateFromTranscript(transcript));
    return this.state;
  }

  async reset(): Promise<ChatViewState> {
    await this.api.resetSession(this.state.sessionId);
    this.update(initialState(this.state.sessionId));
    return this.state;
  }
}
