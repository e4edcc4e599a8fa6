import { describe, expect, it } from "vitest";

import { ApiClient, ChatResponse } from "../src/api.js";
import {
  renderChatView,
  renderEvidenceItem,
  renderTranscript,
  SNIPPET_LIMIT,
} from "../src/render.js";
import {
  applyChatError,
  applyChatResponse,
  beginSend,
  ChatController,
  initialState,
  stateFromTranscript,
} from "../src/state.js";

const EVIDENCE = {
  doc_id: "doc-1",
  granularity: "summary",
  key_text: "key",
  payload: "payload text",
  score: 0.91,
};

function okResponse(body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status: 200,
    headers: { "Content-Type": "application/json" },
  });
}

describe("chat state transitions", () => {
  it("appends a turn and refreshes evidence on success", () => {
    let state = initialState("s");
    state = beginSend(state);
    expect(state.pending).toBe(true);
    const response: ChatResponse = {
      response: "answer",
      evidence: [EVIDENCE],
      turn: 1,
    };
    state = applyChatResponse(state, "question", response);
    expect(state.turns).toEqual([{ query: "question", response: "answer" }]);
    expect(state.evidence[0].doc_id).toBe("doc-1");
    expect(state.pending).toBe(false);
    expect(state.turns.length).toBe(response.turn);
  });

  it("keeps the transcript unchanged on error", () => {
    let state = initialState("s");
    state = beginSend(state);
    state = applyChatError(state, "backend unavailable");
    expect(state.turns).toEqual([]);
    expect(state.error).toBe("backend unavailable");
    const html = renderChatView(state);
    expect(html).toContain("error-banner");
    expect(html).toContain("backend unavailable");
  });

  it("rebuilds from a server transcript", () => {
    const rebuilt = stateFromTranscript({
      session_id: "s",
      turns: [{ query: "q1", response: "r1" }],
    });
    expect(renderTranscript(rebuilt)).toContain("q1");
    expect(rebuilt.evidence).toEqual([]);
  });
});

describe("pending flag contract", () => {
  it("blocks a second submit while one is in flight", async () => {
    let release: (value: Response) => void = () => {};
    const gate = new Promise<Response>((resolve) => {
      release = resolve;
    });
    const fetchFn = (() => gate) as unknown as typeof fetch;
    const controller = new ChatController(new ApiClient("http://x", fetchFn), "s");

    const first = controller.send("first");
    expect(controller.state.pending).toBe(true);
    const second = await controller.send("second");
    expect(second.accepted).toBe(false);

    release(
      okResponse({ response: "r", evidence: [], turn: 1 } satisfies ChatResponse),
    );
    const outcome = await first;
    expect(outcome.accepted).toBe(true);
    expect(controller.state.turns).toEqual([{ query: "first", response: "r" }]);

    // after resolution the next submit is accepted again
    const fetchOk = (() =>
      Promise.resolve(
        okResponse({ response: "r2", evidence: [], turn: 2 }),
      )) as unknown as typeof fetch;
    const controller2 = new ChatController(new ApiClient("http://x", fetchOk), "s");
    controller2.state = controller.state;
    const third = await controller2.send("third");
    expect(third.accepted).toBe(true);
  });

  it("rejects empty queries without a request", async () => {
    const fetchFn = (() => {
      throw new Error("must not be called");
    }) as unknown as typeof fetch;
    const controller = new ChatController(new ApiClient("http://x", fetchFn), "s");
    const outcome = await controller.send("   ");
    expect(outcome.accepted).toBe(false);
  });
});

describe("evidence rendering", () => {
  it("truncates long payloads with an expand control", () => {
    const long = { ...EVIDENCE, payload: "x".repeat(SNIPPET_LIMIT + 40) };
    const collapsed = renderEvidenceItem(long);
    expect(collapsed).toContain("…");
    expect(collapsed).toContain("expand");
    const expanded = renderEvidenceItem(long, true);
    expect(expanded).not.toContain("expand");
    expect(expanded).toContain("x".repeat(SNIPPET_LIMIT + 40));
  });

  it("escapes markup in payloads", () => {
    const hostile = { ...EVIDENCE, payload: "<script>alert(1)</script>" };
    expect(renderEvidenceItem(hostile)).not.toContain("<script>");
  });
});
