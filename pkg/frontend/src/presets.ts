import { Activation, DesignDraft, HlsConfigDraft, LayerDraft } from "./types.js";

/** Default conversion knobs drawn from the exemplar synthesis sweep. */
export const DEFAULT_CONFIG: HlsConfigDraft = {
  precision_total_bits: 16,
  precision_int_bits: 6,
  reuse_factor: 1,
  strategy: "resource",
  io_type: "io_parallel",
  clock_ns: 5.0,
  target_part: "xcu250-figd2104-2L-e",
  vivado_version: "2020.1",
  hls4ml_version: "0.5.0",
};

function dense(units: number, activation: Activation): LayerDraft {
  return {
    kind: "dense",
    units_or_filters: units,
    kernel_size: 1,
    stride: 1,
    padding: "none",
    activation,
  };
}

interface Preset {
  input: number;
  widths: number[];
  activations: Activation[];
}

// the seven exemplar benchmark models
const PRESETS: Record<string, Preset> = {
  Jet: { input: 16, widths: [32, 32, 32, 5], activations: ["relu", "relu", "relu", "softmax"] },
  Quarks: { input: 10, widths: [32, 1], activations: ["relu", "sigmoid"] },
  Anomaly: {
    input: 128,
    widths: [8, 4, 128, 4, 128],
    activations: ["relu", "relu", "relu", "relu", "softmax"],
  },
  BiPC: { input: 67, widths: [36, 36, 36, 36, 36], activations: ["relu", "relu", "relu", "relu", "relu"] },
  CookieBox: { input: 512, widths: [4, 32, 32, 5], activations: ["relu", "relu", "relu", "softmax"] },
  AutoMLP: { input: 7, widths: [12, 16, 12, 2], activations: ["relu", "relu", "relu", "softmax"] },
  ParticleTracking: {
    input: 14,
    widths: [32, 32, 32, 3],
    activations: ["relu", "relu", "relu", "softmax"],
  },
};

export const PRESET_NAMES = Object.keys(PRESETS);

export function loadExemplarPreset(name: string): DesignDraft | null {
  const preset = PRESETS[name];
  if (!preset) return null;
  return {
    name,
    inputShape: [preset.input, 1, 1],
    layers: preset.widths.map((w, i) => dense(w, preset.activations[i])),
    config: { ...DEFAULT_CONFIG },
    modelKind: null,
    checkpoint: null,
    capacity: null,
  };
}

export function emptyDraft(): DesignDraft {
  return {
    name: "custom",
    inputShape: [16, 1, 1],
    layers: [dense(32, "relu"), dense(5, "softmax")],
    config: { ...DEFAULT_CONFIG },
    modelKind: null,
    checkpoint: null,
    capacity: null,
  };
}
