export type LayerKind =
  | "dense"
  | "conv1d"
  | "conv2d"
  | "maxpool1d"
  | "maxpool2d"
  | "avgpool1d"
  | "avgpool2d"
  | "flatten"
  | "activation"
  | "batchnorm"
  | "input";

export type Activation = "linear" | "relu" | "tanh" | "sigmoid" | "softmax";
export type Padding = "none" | "same" | "valid";
export type Strategy = "latency" | "resource";
export type IoType = "io_parallel" | "io_stream";

export type Shape = [number, number, number];

export interface LayerDraft {
  kind: LayerKind;
  units_or_filters: number;
  kernel_size: number;
  stride: number;
  padding: Padding;
  activation: Activation;
}

export interface LayerRecord extends LayerDraft {
  in_shape: Shape;
  out_shape: Shape;
}

export interface HlsConfigDraft {
  precision_total_bits: number;
  precision_int_bits: number;
  reuse_factor: number;
  strategy: Strategy;
  io_type: IoType;
  clock_ns: number;
  target_part: string;
  vivado_version: string;
  hls4ml_version: string;
}

/** User-editable design state; serialized to the estimate request schema. */
export interface DesignDraft {
  name: string;
  inputShape: Shape;
  layers: LayerDraft[];
  config: HlsConfigDraft;
  modelKind: string | null;
  checkpoint: string | null;
  /** optional board capacity profile: available BRAM/DSP/FF/LUT counts */
  capacity: Record<string, number> | null;
}

export const TARGETS = ["bram", "dsp", "ff", "lut", "cycles", "ii"] as const;
export type Target = (typeof TARGETS)[number];

export interface EstimateResponse {
  predictions: Record<Target, number>;
  bops: number;
  model: {
    id: string;
    kind: string;
    checkpoint_hash: string;
    feature_layout_version: string;
  };
  inference_ms: number;
}

export interface ModelDescriptor {
  id: string;
  kind: string;
  checkpoint_hash: string;
  feature_layout_version: string;
}

/** A pinned estimate; immutable once created. */
export interface ComparisonRow {
  readonly label: string;
  readonly draft: DesignDraft;
  readonly response: EstimateResponse;
}
