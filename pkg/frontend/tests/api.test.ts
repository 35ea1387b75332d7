import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

interface Call {
  input: string;
  init?: RequestInit;
}

function recordingFetch(response: Response) {
  const calls: Call[] = [];
  const impl = (input: string, init?: RequestInit) => {
    calls.push({ input, init });
    return Promise.resolve(response);
  };
  return { calls, impl };
}

const json = (body: unknown, status = 200) =>
  new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });

describe("ApiClient", () => {
  it("posts session starts with the wire field names", async () => {
    const { calls, impl } = recordingFetch(
      json({ session_id: "s1", step: 1, n_steps: 10, bottom: null }, 201),
    );
    const client = new ApiClient("http://svc", impl);
    await client.startSession("t0001", "human", "alice");

    expect(calls).toHaveLength(1);
    expect(calls[0]?.input).toBe("http://svc/sessions");
    expect(calls[0]?.init?.method).toBe("POST");
    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual({
      top_id: "t0001",
      mode: "human",
      user_tag: "alice",
    });
  });

  it("omits user_tag when not provided", async () => {
    const { calls, impl } = recordingFetch(json({}, 201));
    await new ApiClient("http://svc", impl).startSession("t1", "human");
    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual({
      top_id: "t1",
      mode: "human",
    });
  });

  it("builds paginated catalog queries", async () => {
    const { calls, impl } = recordingFetch(
      json({ items: [], total: 0, offset: 48, limit: 24 }),
    );
    await new ApiClient("http://svc", impl).tops(48, 24);
    expect(calls[0]?.input).toBe("http://svc/catalog/tops?offset=48&limit=24");
  });

  it("surfaces structured errors as ApiError", async () => {
    const { impl } = recordingFetch(
      json({ code: "unknown_top", message: "no top t9" }, 404),
    );
    const err = await new ApiClient("http://svc", impl)
      .startSession("t9", "human")
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(404);
    expect((err as ApiError).code).toBe("unknown_top");
    expect((err as ApiError).message).toBe("no top t9");
  });

  it("tolerates non-JSON error bodies", async () => {
    const { impl } = recordingFetch(new Response("boom", { status: 502 }));
    const err = await new ApiClient("http://svc", impl)
      .health()
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(502);
    expect((err as ApiError).code).toBe("unknown");
  });

  it("passes idempotency keys through feedback posts", async () => {
    const { calls, impl } = recordingFetch(json({}));
    await new ApiClient("http://svc", impl).sendFeedback("s1", {
      score: 0.75,
      idempotency_key: "key-1",
    });
    expect(calls[0]?.input).toBe("http://svc/sessions/s1/feedback");
    expect(JSON.parse(String(calls[0]?.init?.body))).toEqual({
      score: 0.75,
      idempotency_key: "key-1",
    });
  });
});
