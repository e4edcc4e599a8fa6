/** Live round-trip against `finrag serve` with scripted backends. */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { renderChatView, renderTranscript } from "../src/render.js";
import { ChatController } from "../src/state.js";
import { BASE_URL, fixtureMeta, freshSessionId } from "./helpers.js";

const api = new ApiClient(BASE_URL);

describe("chat round-trip", () => {
  it("renders the scripted reply and the server-reported evidence", async () => {
    const meta = fixtureMeta();
    const controller = new ChatController(api, freshSessionId("rt"));

    const outcome = await controller.send(meta.queries[0]);
    expect(outcome.accepted).toBe(true);
    expect(controller.state.error).toBeNull();
    expect(controller.state.turns).toEqual([
      { query: meta.queries[0], response: meta.replies[0] },
    ]);

    // the evidence panel lists the doc id the server returned
    const hits = await api.retrieve(meta.queries[0], 1);
    const expectedDocId = hits.hits[0].doc_id;
    expect(controller.state.evidence[0].doc_id).toBe(expectedDocId);
    const html = renderChatView(controller.state);
    expect(html).toContain(expectedDocId);
    expect(html).toContain(meta.replies[0]);
  });

  it("reload plus session fetch reproduces the transcript", async () => {
    const meta = fixtureMeta();
    const sessionId = freshSessionId("reload");
    const controller = new ChatController(api, sessionId);
    await controller.send(meta.queries[0]);
    await controller.send(meta.queries[1]);
    expect(controller.state.turns).toHaveLength(2);
    const liveTranscript = renderTranscript(controller.state);

    // a fresh controller simulates the page reload
    const reloaded = new ChatController(api, sessionId);
    await reloaded.reload();
    expect(renderTranscript(reloaded.state)).toBe(liveTranscript);
    expect(reloaded.state.turns).toEqual(controller.state.turns);
  });

  it("shows an inline error and appends no turn on server failure", async () => {
    const controller = new ChatController(api, freshSessionId("err"));
    const outcome = await controller.send("a query the scripted model never recorded");
    expect(outcome.accepted).toBe(true);
    expect(controller.state.error).not.toBeNull();
    expect(controller.state.turns).toHaveLength(0);
    expect(renderChatView(controller.state)).toContain("error-banner");

    // the server recorded nothing either
    const transcript = await api.fetchSession(controller.state.sessionId);
    expect(transcript.turns).toHaveLength(0);
  });

  it("blocks a second rapid submit until the first resolves", async () => {
    const meta = fixtureMeta();
    const controller = new ChatController(api, freshSessionId("rapid"));
    const first = controller.send(meta.queries[0]);
    const second = await controller.send(meta.queries[1]);
    expect(second.accepted).toBe(false);
    await first;
    expect(controller.state.turns).toHaveLength(1);
  });

  it("reset clears the transcript server-side", async () => {
    const meta = fixtureMeta();
    const controller = new ChatController(api, freshSessionId("reset"));
    await controller.send(meta.queries[0]);
    await controller.reset();
    expect(controller.state.turns).toHaveLength(0);
    const transcript = await api.fetchSession(controller.state.sessionId);
    expect(transcript.turns).toHaveLength(0);
  });
});

describe("health", () => {
  it("reports ok with scripted backends", async () => {
    expect((await api.health()).status).toBe("ok");
  });
});
