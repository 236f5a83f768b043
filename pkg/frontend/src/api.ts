/** Typed client for the annotation service REST endpoints. */

export interface JointRecord {
  name: string;
  x: number | null;
  y: number | null;
  visible: boolean;
}

export interface FrameAnnotation {
  frame_index: number;
  joints: JointRecord[];
}

export interface VideoInfo {
  id: string;
  frame_count: number;
  /** Frame indices exposed for labeling, already filtered to the cadence. */
  frame_indices: number[];
}

export interface VideoListing {
  cadence: number;
  videos: VideoInfo[];
}

export interface SkeletonInfo {
  joints: string[];
  connections: [string, string][];
  limbs: Record<string, string[]>;
}

/** Error carrying the HTTP status and the server's message body. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function getJson<T>(url: string): Promise<T> {
  const resp = await fetch(url);
  if (!resp.ok) {
    throw new ApiError(resp.status, await describeFailure(resp));
  }
  return (await resp.json()) as T;
}

async function describeFailure(resp: Response): Promise<string> {
  try {
    const body = await resp.json();
    if (Array.isArray(body.errors)) {
      return body.errors
        .map((e: { field: string; message: string }) => `${e.field}: ${e.message}`)
        .join("; ");
    }
    if (Array.isArray(body.detail)) {
      return body.detail
        .map((e: { field: string; message: string }) => `${e.field}: ${e.message}`)
        .join("; ");
    }
    if (typeof body.detail === "string") return body.detail;
  } catch {
    /* non-JSON body, fall through to the status line */
  }
  return `${resp.status} ${resp.statusText}`;
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  listVideos(): Promise<VideoListing> {
    return getJson(`${this.baseUrl}/videos`);
  }

  getSkeleton(): Promise<SkeletonInfo> {
    return getJson(`${this.baseUrl}/skeleton`);
  }

  frameUrl(videoId: string, frameIndex: number): string {
    return `${this.baseUrl}/videos/${encodeURIComponent(videoId)}/frames/${frameIndex}`;
  }

  async getAnnotations(videoId: string): Promise<Map<number, FrameAnnotation>> {
    const body = await getJson<{ frames: Record<string, FrameAnnotation> }>(
      `${this.baseUrl}/videos/${encodeURIComponent(videoId)}/annotations`,
    );
    const frames = new Map<number, FrameAnnotation>();
    for (const [key, frame] of Object.entries(body.frames)) {
      frames.set(Number(key), frame);
    }
    return frames;
  }

  async putAnnotation(
    videoId: string,
    frameIndex: number,
    joints: JointRecord[],
  ): Promise<void> {
    const url = `${this.baseUrl}/videos/${encodeURIComponent(videoId)}/annotations/${frameIndex}`;
    const resp = await fetch(url, {
      method: "PUT",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ joints }),
    });
    if (!resp.ok) {
      throw new ApiError(resp.status, await describeFailure(resp));
    }
  }
}
