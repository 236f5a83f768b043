import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";

function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

afterEach(() => {
  vi.unstubAllGlobals();
});

describe("ApiClient", () => {
  it("fetches the video listing", async () => {
    const listing = {
      cadence: 5,
      videos: [{ id: "v1", frame_count: 40, frame_indices: [0, 5, 10] }],
    };
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse(listing));
    vi.stubGlobal("fetch", fetchMock);

    const got = await new ApiClient().listVideos();
    expect(fetchMock).toHaveBeenCalledWith("/videos");
    expect(got).toEqual(listing);
  });

  it("builds frame URLs with the video id encoded", () => {
    const api = new ApiClient("http://localhost:8008");
    expect(api.frameUrl("v 1", 15)).toBe("http://localhost:8008/videos/v%201/frames/15");
  });

  it("keys annotations by numeric frame index", async () => {
    const body = {
      video_id: "v1",
      frames: {
        "5": { frame_index: 5, joints: [{ name: "RS", x: 1, y: 2, visible: true }] },
      },
    };
    vi.stubGlobal("fetch", vi.fn().mockResolvedValue(jsonResponse(body)));

    const frames = await new ApiClient().getAnnotations("v1");
    expect(frames.get(5)?.frame_index).toBe(5);
    expect(frames.has(0)).toBe(false);
  });

  it("PUTs the joint list as JSON", async () => {
    const fetchMock = vi.fn().mockResolvedValue(jsonResponse({ status: "saved" }));
    vi.stubGlobal("fetch", fetchMock);

    const joints = [{ name: "RS", x: 320.5, y: 240.25, visible: true }];
    await new ApiClient().putAnnotation("v1", 10, joints);

    expect(fetchMock).toHaveBeenCalledTimes(1);
    const [url, init] = fetchMock.mock.calls[0]!;
    expect(url).toBe("/videos/v1/annotations/10");
    expect(init.method).toBe("PUT");
    expect(JSON.parse(init.body)).toEqual({ joints });
  });

  it("surfaces field-level validation messages from a 400", async () => {
    const body = { errors: [{ field: "joints.0.name", message: "unknown joint 'XX'" }] };
    vi.stubGlobal("fetch", vi.fn().mockResolvedValue(jsonResponse(body, 400)));

    const err = await new ApiClient()
      .putAnnotation("v1", 0, [{ name: "XX", x: 1, y: 1, visible: true }])
      .catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(400);
    expect((err as ApiError).message).toContain("joints.0.name");
  });

  it("surfaces a 404 detail string", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn().mockResolvedValue(jsonResponse({ detail: "unknown video 'nope'" }, 404)),
    );

    const err = await new ApiClient().listVideos().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(404);
    expect((err as ApiError).message).toContain("nope");
  });
});
