/**
 * Client for the inpainting service HTTP API.
 *
 * Endpoints: POST /v1/inpaint, GET /v1/models, GET /v1/health. The fetch
 * implementation is injectable so tests can stub the service.
 */

export interface HealthStatus {
  live: boolean;
  ready: boolean;
}

export interface ModelInfo {
  model_id: string;
  loaded: boolean;
  level_count?: number;
  full_resolution?: number;
}

export interface InpaintResult {
  imageBytes: Uint8Array;
  width: number;
  height: number;
  timingMs: number;
  intermediates: Uint8Array[];
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export function bytesToBase64(bytes: Uint8Array): string {
  let binary = "";
  const chunk = 0x8000;
  for (let i = 0; i < bytes.length; i += chunk) {
    binary += String.fromCharCode(...bytes.subarray(i, i + chunk));
  }
  return btoa(binary);
}

export function base64ToBytes(b64: string): Uint8Array {
  const binary = atob(b64);
  const out = new Uint8Array(binary.length);
  for (let i = 0; i < binary.length; i++) {
    out[i] = binary.charCodeAt(i);
  }
  return out;
}

export class ServiceError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
    this.name = "ServiceError";
  }
}

export class InpaintClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  async health(): Promise<HealthStatus> {
    const resp = await this.fetchFn(this.url("/v1/health"));
    const doc = await resp.json();
    return { live: Boolean(doc.live), ready: Boolean(doc.ready) };
  }

  async listModels(): Promise<ModelInfo[]> {
    const resp = await this.fetchFn(this.url("/v1/models"));
    if (!resp.ok) {
      throw new ServiceError(resp.status, "cannot list models");
    }
    const doc = await resp.json();
    return doc.models as ModelInfo[];
  }

  async inpaint(args: {
    imageBytes: Uint8Array;
    maskBytes: Uint8Array;
    modelId: string;
    returnIntermediates?: boolean;
  }): Promise<InpaintResult> {
    const resp = await this.fetchFn(this.url("/v1/inpaint"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        image: bytesToBase64(args.imageBytes),
        mask: bytesToBase64(args.maskBytes),
        model_id: args.modelId,
        return_intermediates: Boolean(args.returnIntermediates),
      }),
    });
    const doc = await resp.json();
    if (!resp.ok) {
      throw new ServiceError(resp.status,
                             String(doc.error ?? `HTTP ${resp.status}`));
    }
    return {
      imageBytes: base64ToBytes(doc.image),
      width: Number(doc.width),
      height: Number(doc.height),
      timingMs: Number(doc.timing_ms),
      intermediates: (doc.intermediates ?? []).map(base64ToBytes),
    };
  }
}
