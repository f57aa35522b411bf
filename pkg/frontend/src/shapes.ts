import { LayerDraft, LayerRecord, Shape } from "./types.js";

/** Client-side mirror of the dataset schema's shape-chaining rule:
 * out_shape of layer i feeds in_shape of layer i+1.  Returns the full
 * layer records or a human-readable error when a layer cannot apply. */
export function propagateShapes(
  inputShape: Shape,
  layers: LayerDraft[],
): { layers: LayerRecord[] } | { error: string } {
  let current: Shape = [...inputShape] as Shape;
  const out: LayerRecord[] = [];
  for (let i = 0; i < layers.length; i++) {
    const layer = layers[i];
    const next = outputShape(current, layer, i);
    if (typeof next === "string") return { error: next };
    out.push({ ...layer, in_shape: [...current] as Shape, out_shape: next });
    current = next;
  }
  return { layers: out };
}

function spatial(length: number, kernel: number, stride: number, padding: string): number {
  if (padding === "same") return Math.ceil(length / stride);
  return Math.floor((length - kernel) / stride) + 1;
}

function outputShape(inShape: Shape, layer: LayerDraft, index: number): Shape | string {
  const where = `layer ${index + 1} (${layer.kind})`;
  switch (layer.kind) {
    case "dense":
      if (layer.units_or_filters < 1) return `${where}: units must be >= 1`;
      return [layer.units_or_filters, 1, 1];
    case "conv1d": {
      const length = spatial(inShape[0], layer.kernel_size, layer.stride, layer.padding);
      if (length < 1) return `${where}: kernel ${layer.kernel_size} exceeds length ${inShape[0]}`;
      return [length, layer.units_or_filters, 1];
    }
    case "conv2d": {
      const h = spatial(inShape[0], layer.kernel_size, layer.stride, layer.padding);
      const w = spatial(inShape[1], layer.kernel_size, layer.stride, layer.padding);
      if (h < 1 || w < 1) return `${where}: kernel exceeds spatial extent`;
      return [h, w, layer.units_or_filters];
    }
    case "maxpool1d":
    case "avgpool1d": {
      const length = spatial(inShape[0], layer.kernel_size, layer.stride, "valid");
      if (length < 1) return `${where}: pool window exceeds length`;
      return [length, inShape[1], 1];
    }
    case "maxpool2d":
    case "avgpool2d": {
      const h = spatial(inShape[0], layer.kernel_size, layer.stride, "valid");
      const w = spatial(inShape[1], layer.kernel_size, layer.stride, "valid");
      if (h < 1 || w < 1) return `${where}: pool window exceeds extent`;
      return [h, w, inShape[2]];
    }
    case "flatten":
      return [inShape[0] * inShape[1] * inShape[2], 1, 1];
    case "activation":
    case "batchnorm":
    case "input":
      return [...inShape] as Shape;
  }
}

/** Same validation rules the backend applies, run before submission. */
export function validateDraft(
  inputShape: Shape,
  layers: LayerDraft[],
  config: { precision_total_bits: number; precision_int_bits: number; reuse_factor: number },
): string[] {
  const problems: string[] = [];
  if (layers.length === 0) problems.push("architecture has no layers");
  if (inputShape.some((d) => d < 1)) problems.push("input dimensions must be >= 1");
  layers.forEach((layer, i) => {
    if (layer.units_or_filters < 1) problems.push(`layer ${i + 1}: units/filters must be >= 1`);
    if (
      layer.kind === "dense" &&
      (layer.kernel_size !== 1 || layer.stride !== 1 || layer.padding !== "none")
    ) {
      problems.push(`layer ${i + 1}: dense layers need kernel=stride=1, padding none`);
    }
  });
  const { precision_total_bits: total, precision_int_bits: int, reuse_factor: reuse } = config;
  if (!(int >= 1 && int <= total)) problems.push("precision: need 1 <= int bits <= total bits");
  if (reuse < 1) problems.push("reuse factor must be >= 1");
  return problems;
}
