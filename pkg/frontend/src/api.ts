import { propagateShapes } from "./shapes.js";
import { DesignDraft, EstimateResponse, ModelDescriptor } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public detail: unknown = null,
  ) {
    super(message);
  }
}

/** Serialize a draft into the estimate request body.  The layer list uses
 * the exact dataset record schema so the round trip through the backend
 * parser is lossless. */
export function draftToRequest(draft: DesignDraft): Record<string, unknown> {
  const propagated = propagateShapes(draft.inputShape, draft.layers);
  if ("error" in propagated) throw new ApiError(0, propagated.error);
  const body: Record<string, unknown> = {
    architecture: {
      name: draft.name,
      layers: propagated.layers.map((l) => ({
        kind: l.kind,
        in_shape: l.in_shape,
        out_shape: l.out_shape,
        units_or_filters: l.units_or_filters,
        kernel_size: l.kernel_size,
        stride: l.stride,
        padding: l.padding,
        activation: l.activation,
      })),
    },
    hls_config: { ...draft.config },
  };
  if (draft.checkpoint) body.checkpoint = draft.checkpoint;
  else if (draft.modelKind) body.model_kind = draft.modelKind;
  return body;
}

export class ApiClient {
  constructor(
    private fetchImpl: FetchLike,
    private base: string = "",
  ) {}

  async listModels(): Promise<ModelDescriptor[]> {
    const response = await this.fetchImpl(`${this.base}/api/v1/models`);
    if (!response.ok) throw new ApiError(response.status, "could not list models");
    return (await response.json()) as ModelDescriptor[];
  }

  /** POST one estimate; an AbortSignal lets callers cancel superseded
   * requests. */
  async estimate(draft: DesignDraft, signal?: AbortSignal): Promise<EstimateResponse> {
    const response = await this.fetchImpl(`${this.base}/api/v1/estimate`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(draftToRequest(draft)),
      signal,
    });
    const payload = await response.json();
    if (!response.ok) {
      throw new ApiError(
        response.status,
        (payload && payload.error) || `estimate failed (${response.status})`,
        payload ? payload.detail : null,
      );
    }
    return payload as EstimateResponse;
  }
}
