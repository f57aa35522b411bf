"""Deterministic pseudo-synthesis cost model and random architecture generator.

The cost model is an explicit, versioned analytic stand-in for logic
synthesis so that training and benchmark pipelines run at desk scale
without vendor tools.  Its formulas are normative for this artifact's
tests; no attempt is made to numerically match real toolchain output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from wahls.core import (
    Activation,
    Dataset,
    HlsConfig,
    IoType,
    LayerKind,
    LayerSpec,
    LatencyReport,
    MULT_KINDS,
    NetworkArchitecture,
    Padding,
    PART_U250,
    ResourceReport,
    Sample,
    SampleMeta,
    Split,
    Strategy,
    TargetVector,
    log2_ceil,
)

COST_MODEL_VERSION = "pseudo-1"

FAMILIES = ("dense", "conv1d", "conv2d")


@dataclass(frozen=True)
class CostModelParams:
    """Coefficients of the analytic cost formulas; all must be positive."""

    dsp_bit_threshold: int = 10
    lut_divisor: int = 64
    lut_per_output: int = 40
    ff_divisor: int = 8
    ff_per_output_bit: int = 2
    bram_bits: int = 36864
    pipeline_overhead: int = 3

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            if getattr(self, name) <= 0:
                raise ValueError(f"cost coefficient {name} must be > 0")


DEFAULT_COST_PARAMS = CostModelParams()


def fan_in_out(layer: LayerSpec) -> tuple[int, int]:
    """Per-layer fan-in m and fan-out n for multiply-bearing layers.

    Dense uses total input elements and units; conv uses
    channels*kernel(^2) against filters*output-positions.
    """
    if layer.kind == LayerKind.DENSE:
        return layer.elements_in(), layer.units_or_filters
    if layer.kind == LayerKind.CONV1D:
        channels = layer.in_shape[1]
        positions = layer.out_shape[0]
        return channels * layer.kernel_size, layer.units_or_filters * positions
    if layer.kind == LayerKind.CONV2D:
        channels = layer.in_shape[2]
        positions = layer.out_shape[0] * layer.out_shape[1]
        return channels * layer.kernel_size ** 2, layer.units_or_filters * positions
    raise ValueError(f"layer kind {layer.kind} has no fan-in/fan-out")


def pseudo_synthesize(
    architecture: NetworkArchitecture,
    config: HlsConfig,
    params: CostModelParams = DEFAULT_COST_PARAMS,
) -> TargetVector:
    """Analytic resource/latency labels for an (architecture, config) pair.

    Per multiply-bearing layer with fan-in m, fan-out n, bit width b and
    reuse r:

        DSP  += ceil(m*n / r)           when b >= 10, else 0
        LUT  += ceil(m*n*b^2 / (64*r)) + 40*n
        FF   += ceil(m*n*b / (8*r))    + 2*n*b
        BRAM += ceil(m*n*b / 36864)     when r > 1, else 0
        cyc  += r*[resource strategy] + ceil(log2 m) + 3

    II is max(r) over layers under the resource strategy, otherwise 1.
    Deterministic; higher reuse trades more cycles for fewer resources.
    """
    b = config.precision_total_bits
    r = max(1, config.reuse_factor)
    resource = config.strategy == Strategy.RESOURCE

    dsp = lut = ff = bram = cycles = 0
    ii = 1
    for layer in architecture.layers:
        if layer.kind not in MULT_KINDS:
            continue
        m, n = fan_in_out(layer)
        mn = m * n
        if b >= params.dsp_bit_threshold:
            dsp += math.ceil(mn / r)
        lut += math.ceil(mn * b * b / (params.lut_divisor * r)) + params.lut_per_output * n
        ff += math.ceil(mn * b / (params.ff_divisor * r)) + params.ff_per_output_bit * n * b
        if r > 1:
            bram += math.ceil(mn * b / params.bram_bits)
        cycles += (r if resource else 0) + log2_ceil(m) + params.pipeline_overhead
        if resource:
            ii = max(ii, r)
    return TargetVector(bram, dsp, ff, lut, cycles, ii)


def hls_estimate(labels: TargetVector) -> ResourceReport:
    """Deterministic post-HLS over-estimate companion to the ground truth."""
    return ResourceReport(
        bram=int(labels.bram),
        dsp=int(labels.dsp),
        ff=int(round(labels.ff * 1.08)),
        lut=int(round(labels.lut * 1.25)),
    )


# ---------------------------------------------------------------------------
# Random generation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GenRanges:
    """Parameter ranges for synthetic model generation, per family.

    Conv families force io_stream and the resource strategy; dense families
    use io_parallel.  Conv reuse is sampled uniformly over its range.
    """

    dense_layer_count: tuple[int, int] = (2, 7)
    conv_layer_count: tuple[int, int] = (3, 7)
    neuron_range: tuple[int, int] = (8, 128)
    grid_step: int = 8
    conv_feature_range: tuple[int, int] = (32, 128)
    filter_range: tuple[int, int] = (8, 64)
    shallow_precisions: tuple[int, ...] = (2, 4, 6, 8, 10, 12, 14, 16)
    deep_precisions: tuple[int, ...] = (4, 8, 16)
    dense_reuse: tuple[int, int] = (1, 4093)
    conv_reuse: tuple[int, int] = (8192, 32795)
    activations: tuple[Activation, ...] = (Activation.RELU, Activation.TANH, Activation.SIGMOID)
    shallow_linear_fraction: float = 0.7
    dense_latency_fraction: float = 0.3

    def __post_init__(self):
        for lo, hi in (
            self.dense_layer_count,
            self.conv_layer_count,
            self.neuron_range,
            self.conv_feature_range,
            self.filter_range,
            self.dense_reuse,
            self.conv_reuse,
        ):
            if lo > hi:
                raise ValueError(f"empty range ({lo}, {hi})")
        if not self.shallow_precisions or not self.deep_precisions:
            raise ValueError("precision sets must be nonempty")


DEFAULT_RANGES = GenRanges()

_FAMILY_CODE = {name: i for i, name in enumerate(FAMILIES)}


def _rng(seed: int, family: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(seed), _FAMILY_CODE[family], int(index)])


def _pick_activation(rng: np.random.Generator, ranges: GenRanges, shallow: bool) -> Activation:
    if shallow and rng.random() < ranges.shallow_linear_fraction:
        return Activation.LINEAR
    return ranges.activations[int(rng.integers(0, len(ranges.activations)))]


def _dense_architecture(rng: np.random.Generator, ranges: GenRanges, name: str) -> NetworkArchitecture:
    lo, hi = ranges.dense_layer_count
    depth = int(rng.integers(lo, hi + 1))
    shallow = depth <= 3
    n_lo, n_hi = ranges.neuron_range
    if shallow:
        choices = np.arange(n_lo, n_hi + 1, ranges.grid_step)
        widths = [int(rng.choice(choices)) for _ in range(depth + 1)]
    else:
        widths = [int(rng.integers(n_lo, n_hi + 1)) for _ in range(depth + 1)]
    layers = []
    for i in range(depth):
        layers.append(
            LayerSpec(
                kind=LayerKind.DENSE,
                in_shape=(widths[i], 1, 1),
                out_shape=(widths[i + 1], 1, 1),
                units_or_filters=widths[i + 1],
                activation=_pick_activation(rng, ranges, shallow),
            )
        )
    return NetworkArchitecture(name=name, layers=tuple(layers))


def _conv_architecture(rng: np.random.Generator, ranges: GenRanges, name: str, two_d: bool) -> NetworkArchitecture:
    lo, hi = ranges.conv_layer_count
    n_param = int(rng.integers(lo, hi + 1))
    n_conv = int(rng.integers(1, n_param))  # leaves >= 1 dense layer
    n_dense = n_param - n_conv

    f_lo, f_hi = ranges.conv_feature_range
    length = int(rng.integers(f_lo, f_hi + 1))
    channels = int(rng.integers(1, 4))
    layers: list[LayerSpec] = []

    if two_d:
        shape = (length, length, channels)
    else:
        shape = (length, channels, 1)

    for _ in range(n_conv):
        filters = int(rng.integers(ranges.filter_range[0], ranges.filter_range[1] + 1))
        kernel = int(rng.integers(2, 6))
        act = ranges.activations[int(rng.integers(0, len(ranges.activations)))]
        if two_d:
            out = (shape[0], shape[1], filters)
            layers.append(
                LayerSpec(LayerKind.CONV2D, shape, out, filters, kernel, 1, Padding.SAME, act)
            )
        else:
            out = (shape[0], filters, 1)
            layers.append(
                LayerSpec(LayerKind.CONV1D, shape, out, filters, kernel, 1, Padding.SAME, act)
            )
        shape = out
        # occasional pooling, only while the spatial extent allows it
        if rng.random() < 0.5 and shape[0] >= 4:
            if two_d:
                pooled = (shape[0] // 2, shape[1] // 2, shape[2])
                layers.append(
                    LayerSpec(LayerKind.MAXPOOL2D, shape, pooled, shape[2], 2, 2, Padding.VALID)
                )
            else:
                pooled = (shape[0] // 2, shape[1], 1)
                layers.append(
                    LayerSpec(LayerKind.MAXPOOL1D, shape, pooled, shape[1], 2, 2, Padding.VALID)
                )
            shape = pooled

    flat = shape[0] * shape[1] * shape[2]
    layers.append(LayerSpec(LayerKind.FLATTEN, shape, (flat, 1, 1), 1))
    current = flat
    n_lo, n_hi = ranges.neuron_range
    for i in range(n_dense):
        width = int(rng.integers(n_lo, n_hi + 1))
        act = ranges.activations[int(rng.integers(0, len(ranges.activations)))]
        layers.append(
            LayerSpec(LayerKind.DENSE, (current, 1, 1), (width, 1, 1), width, activation=act)
        )
        current = width
    return NetworkArchitecture(name=name, layers=tuple(layers))


def generate_architecture(
    seed: int,
    family: str,
    ranges: GenRanges = DEFAULT_RANGES,
    name: Optional[str] = None,
) -> NetworkArchitecture:
    """Random architecture for the given family, deterministic in the seed."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}, expected one of {FAMILIES}")
    rng = _rng(seed, family)
    name = name or f"{family}_{seed}"
    if family == "dense":
        return _dense_architecture(rng, ranges, name)
    return _conv_architecture(rng, ranges, name, two_d=family == "conv2d")


def _generate_config(rng: np.random.Generator, family: str, architecture: NetworkArchitecture, ranges: GenRanges) -> HlsConfig:
    if family == "dense":
        depth = architecture.depth()
        shallow = depth <= 3
        precisions = ranges.shallow_precisions if shallow else ranges.deep_precisions
        b = int(rng.choice(np.array(precisions)))
        reuse = int(rng.integers(ranges.dense_reuse[0], ranges.dense_reuse[1] + 1))
        if shallow:
            strategy = Strategy.RESOURCE
        else:
            strategy = (
                Strategy.LATENCY if rng.random() < ranges.dense_latency_fraction else Strategy.RESOURCE
            )
        io = IoType.IO_PARALLEL
    else:
        b = int(rng.choice(np.array(ranges.deep_precisions)))
        reuse = int(rng.integers(ranges.conv_reuse[0], ranges.conv_reuse[1] + 1))
        strategy = Strategy.RESOURCE
        io = IoType.IO_STREAM
    return HlsConfig(
        precision_total_bits=b,
        precision_int_bits=1,
        reuse_factor=reuse,
        strategy=strategy,
        io_type=io,
        target_part=PART_U250,
        clock_ns=10.0,
        vivado_version="2023.2" if rng.random() < 0.5 else "2024.2",
        hls4ml_version="1.1.0",
    )


def _group_tag(family: str, architecture: NetworkArchitecture, config: HlsConfig) -> str:
    if family != "dense":
        return family
    depth = architecture.depth()
    if depth == 2:
        return "2_layer"
    if depth == 3:
        return "3_layer"
    return "latency" if config.strategy == Strategy.LATENCY else "resource"


def generate_sample(
    seed: int,
    index: int,
    family: str,
    ranges: GenRanges = DEFAULT_RANGES,
    params: CostModelParams = DEFAULT_COST_PARAMS,
) -> Sample:
    """One labeled, schema-compliant sample, deterministic in (seed, index)."""
    sample_id = f"{family}-{seed:08d}-{index:06d}"
    rng = _rng(seed, family, index + 1)
    arch_seed = int(rng.integers(0, 2**31 - 1))
    architecture = generate_architecture(arch_seed, family, ranges, name=f"{family}_{index:06d}")
    config = _generate_config(rng, family, architecture, ranges)
    labels = pseudo_synthesize(architecture, config, params)
    tag = _group_tag(family, architecture, config)
    meta = SampleMeta(
        id=sample_id,
        model_name=architecture.name,
        artifact_tarball_name=f"{sample_id}.tar.gz",
        extra=(("cost_model_version", COST_MODEL_VERSION), ("group_tag", tag)),
    )
    return Sample(
        meta=meta,
        architecture=architecture,
        hls_config=config,
        resource_report=ResourceReport(
            int(labels.bram), int(labels.dsp), int(labels.ff), int(labels.lut)
        ),
        hls_resource_report=hls_estimate(labels),
        latency_report=LatencyReport(int(labels.cycles), int(labels.ii)),
        group_tag=tag,
    )


def _family_counts(n: int, family_mix: dict[str, float]) -> dict[str, int]:
    total = sum(family_mix.values())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"family mix fractions must sum to 1, got {total}")
    for family in family_mix:
        if family not in FAMILIES:
            raise ValueError(f"unknown family {family!r}")
    counts = {f: int(math.floor(family_mix.get(f, 0.0) * n)) for f in FAMILIES}
    remainders = sorted(
        FAMILIES, key=lambda f: family_mix.get(f, 0.0) * n - counts[f], reverse=True
    )
    i = 0
    while sum(counts.values()) < n:
        counts[remainders[i % len(remainders)]] += 1
        i += 1
    return counts


def generate_dataset(
    seed: int,
    n: int,
    family_mix: Optional[dict[str, float]] = None,
    split: Split = Split.TRAIN,
    ranges: GenRanges = DEFAULT_RANGES,
    params: CostModelParams = DEFAULT_COST_PARAMS,
) -> Dataset:
    """Generate ``n`` labeled samples with the given family proportions.

    Fully deterministic in the seed: repeated calls serialize to identical
    bytes.
    """
    family_mix = family_mix or {"dense": 1.0}
    counts = _family_counts(n, family_mix)
    samples = []
    for family in FAMILIES:
        for index in range(counts[family]):
            samples.append(generate_sample(seed, index, family, ranges, params))
    samples.sort(key=lambda s: s.id)
    return Dataset(samples=tuple(samples), split=split)


def grid_points(depth: int, ranges: GenRanges = DEFAULT_RANGES):
    """Grid-search generator for shallow dense families.

    Yields (architecture, precision_bits) pairs covering widths on the
    configured step and the shallow precision set.
    """
    if depth not in (2, 3):
        raise ValueError("grid generation covers depths 2 and 3")
    lo, hi = ranges.neuron_range
    axis = list(range(lo, hi + 1, ranges.grid_step))

    def _combos(k: int):
        if k == 0:
            yield ()
            return
        for head in axis:
            for tail in _combos(k - 1):
                yield (head,) + tail

    index = 0
    for widths in _combos(depth + 1):
        for b in ranges.shallow_precisions:
            layers = []
            for i in range(depth):
                layers.append(
                    LayerSpec(
                        kind=LayerKind.DENSE,
                        in_shape=(widths[i], 1, 1),
                        out_shape=(widths[i + 1], 1, 1),
                        units_or_filters=widths[i + 1],
                        activation=Activation.LINEAR,
                    )
                )
            yield NetworkArchitecture(name=f"grid{depth}_{index:06d}", layers=tuple(layers)), b
            index += 1
