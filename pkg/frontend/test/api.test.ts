import { describe, expect, it } from "vitest";

import { base64ToBytes, bytesToBase64, InpaintClient, ServiceError } from "../src/api.js";

describe("base64 helpers", () => {
  it("round-trip arbitrary bytes", () => {
    const bytes = new Uint8Array(70000);
    for (let i = 0; i < bytes.length; i++) bytes[i] = (i * 13) % 256;
    expect(Array.from(base64ToBytes(bytesToBase64(bytes))))
      .toEqual(Array.from(bytes));
  });

  it("encode empty input", () => {
    expect(bytesToBase64(new Uint8Array(0))).toBe("");
  });
});

describe("InpaintClient", () => {
  it("sends the documented JSON envelope", async () => {
    let captured: { url: string; body: Record<string, unknown> } | null = null;
    const client = new InpaintClient("http://svc:8000/", async (url, init) => {
      captured = { url, body: JSON.parse(String(init?.body)) };
      return Response.json({
        image: bytesToBase64(new Uint8Array([1, 2, 3])),
        width: 4,
        height: 2,
        timing_ms: 7.5,
        intermediates: [bytesToBase64(new Uint8Array([9]))],
      });
    });
    const result = await client.inpaint({
      imageBytes: new Uint8Array([10, 20]),
      maskBytes: new Uint8Array([0, 255]),
      modelId: "m1",
      returnIntermediates: true,
    });
    expect(captured!.url).toBe("http://svc:8000/v1/inpaint");
    expect(captured!.body.model_id).toBe("m1");
    expect(captured!.body.return_intermediates).toBe(true);
    expect(base64ToBytes(String(captured!.body.image))[1]).toBe(20);
    expect(Array.from(result.imageBytes)).toEqual([1, 2, 3]);
    expect(result.width).toBe(4);
    expect(result.timingMs).toBe(7.5);
    expect(result.intermediates).toHaveLength(1);
  });

  it("maps error envelopes to ServiceError", async () => {
    const client = new InpaintClient("http://svc", async () =>
      new Response(JSON.stringify({ error: "image too big" }),
                   { status: 413,
                     headers: { "content-type": "application/json" } }));
    await expect(client.inpaint({
      imageBytes: new Uint8Array([1]),
      maskBytes: new Uint8Array([0]),
      modelId: "m",
    })).rejects.toMatchObject({ status: 413, message: "image too big" });
  });

  it("health and model listing", async () => {
    const client = new InpaintClient("http://svc", async (url) => {
      if (url.endsWith("/v1/health")) {
        return Response.json({ live: true, ready: false });
      }
      return Response.json({ models: [{ model_id: "a", loaded: true }] });
    });
    expect(await client.health()).toEqual({ live: true, ready: false });
    expect(await client.listModels()).toEqual([
      { model_id: "a", loaded: true }]);
    const failing = new InpaintClient("http://svc", async () =>
      new Response("{}", { status: 500 }));
    await expect(failing.listModels()).rejects.toThrowError(ServiceError);
  });
});
