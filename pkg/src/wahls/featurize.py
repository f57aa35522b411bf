"""Model-input encodings: per-layer feature vectors, graphs, padded
sequences, tabular aggregates, normalization, and bit-operation counts.

The canonical per-layer feature vector has 18 slots (see ``SLOT_NAMES``).
Categorical slots are one-hot expanded and numeric slots are stored
log1p-scaled at the encoding stage; z-scoring against training-set
statistics happens separately through :class:`NormStats`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from wahls.core import (
    Activation,
    Dataset,
    HlsConfig,
    IoType,
    LayerKind,
    LayerSpec,
    MULT_KINDS,
    NetworkArchitecture,
    Padding,
    Strategy,
    log2_ceil,
    param_count,
)
from wahls.errors import TooDeep
from wahls.synth import fan_in_out

FEATURE_LAYOUT_VERSION = "wa-feat-1"

SLOT_NAMES = (
    "in_dim0",
    "in_dim1",
    "in_dim2",
    "out_dim0",
    "out_dim1",
    "out_dim2",
    "precision_total_bits",
    "precision_int_bits",
    "reuse_factor",
    "layer_type_code",
    "activation_code",
    "filters",
    "kernel_size",
    "stride",
    "padding_code",
    "batchnorm_flag",
    "strategy_code",
    "io_type_code",
)
RAW_SLOT_COUNT = 18

LAYER_KIND_ORDER = tuple(LayerKind)
ACTIVATION_ORDER = tuple(Activation)
PADDING_ORDER = tuple(Padding)
STRATEGY_ORDER = tuple(Strategy)
IO_ORDER = tuple(IoType)

_LAYER_CODE = {k: i for i, k in enumerate(LAYER_KIND_ORDER)}
_ACT_CODE = {a: i for i, a in enumerate(ACTIVATION_ORDER)}
_PAD_CODE = {p: i for i, p in enumerate(PADDING_ORDER)}
_STRATEGY_CODE = {s: i for i, s in enumerate(STRATEGY_ORDER)}
_IO_CODE = {t: i for i, t in enumerate(IO_ORDER)}

NUMERIC_SLOTS = (0, 1, 2, 3, 4, 5, 6, 7, 8, 11, 12, 13)
FLAG_SLOTS = (15,)
ONE_HOT_SLOTS = ((9, len(LAYER_KIND_ORDER)), (10, len(ACTIVATION_ORDER)), (14, len(PADDING_ORDER)), (16, len(STRATEGY_ORDER)), (17, len(IO_ORDER)))

#: Width of an encoded per-layer vector (graph node before the global block,
#: or one sequence token).
ENCODED_TOKEN_WIDTH = len(NUMERIC_SLOTS) + len(FLAG_SLOTS) + sum(c for _, c in ONE_HOT_SLOTS)
#: Width of the per-graph global one-hot block (strategy + io type).
GLOBAL_BLOCK_WIDTH = len(STRATEGY_ORDER) + len(IO_ORDER)
#: Width of a graph node vector with the global block appended.
ENCODED_NODE_WIDTH = ENCODED_TOKEN_WIDTH + GLOBAL_BLOCK_WIDTH

MAX_SEQUENCE_LAYERS = 51

MLP_NUMERIC_NAMES = ("depth", "mean_layer_width", "mean_precision", "mean_reuse", "total_params")

#: Fixed part vocabulary for the tabular baseline's ordinal encoding;
#: parts outside this list map to an out-of-range code.
DEFAULT_PART_VOCAB = ("xcu200-fsgd2104-2-e", "xcu250-figd2104-2L-e")


def layer_features(layer: LayerSpec, config: HlsConfig) -> np.ndarray:
    """Canonical 18-slot raw feature vector for one layer."""
    out = np.zeros(RAW_SLOT_COUNT, dtype=np.float64)
    out[0:3] = layer.in_shape
    out[3:6] = layer.out_shape
    out[6] = config.precision_total_bits
    out[7] = config.precision_int_bits
    out[8] = config.reuse_factor
    out[9] = _LAYER_CODE[layer.kind]
    out[10] = _ACT_CODE[layer.activation]
    out[11] = layer.units_or_filters
    out[12] = layer.kernel_size
    out[13] = layer.stride
    out[14] = _PAD_CODE[layer.padding]
    out[15] = 1.0 if layer.kind == LayerKind.BATCHNORM else 0.0
    out[16] = _STRATEGY_CODE[config.strategy]
    out[17] = _IO_CODE[config.io_type]
    return out


def encode_slots(raw: np.ndarray) -> np.ndarray:
    """Expand raw slot rows (L, 18) into encoded rows (L, ENCODED_TOKEN_WIDTH).

    Numeric slots are log1p-scaled (reuse and dimension ranges span three
    orders of magnitude); categorical slots become one-hot blocks.
    """
    raw = np.atleast_2d(np.asarray(raw, dtype=np.float64))
    n = raw.shape[0]
    parts = [np.log1p(raw[:, list(NUMERIC_SLOTS)]), raw[:, list(FLAG_SLOTS)]]
    for slot, cardinality in ONE_HOT_SLOTS:
        block = np.zeros((n, cardinality), dtype=np.float64)
        codes = raw[:, slot].astype(np.int64)
        if np.any((codes < 0) | (codes >= cardinality)):
            raise ValueError(f"categorical code out of range in slot {SLOT_NAMES[slot]}")
        block[np.arange(n), codes] = 1.0
        parts.append(block)
    return np.concatenate(parts, axis=1)


def global_block(config: HlsConfig) -> np.ndarray:
    """One-hot strategy + io block shared by every node of one graph."""
    out = np.zeros(GLOBAL_BLOCK_WIDTH, dtype=np.float64)
    out[_STRATEGY_CODE[config.strategy]] = 1.0
    out[len(STRATEGY_ORDER) + _IO_CODE[config.io_type]] = 1.0
    return out


@dataclass(frozen=True)
class FeatureGraph:
    """Directed layer graph: encoded node features, sequential edges plus
    self-loops, and the per-graph global one-hot block (also appended to
    each node row)."""

    node_features: np.ndarray  # (L, ENCODED_NODE_WIDTH)
    edges: np.ndarray  # (2, 2L-1) int64, row 0 = source, row 1 = destination
    global_block: np.ndarray  # (GLOBAL_BLOCK_WIDTH,)

    @property
    def n_nodes(self) -> int:
        return self.node_features.shape[0]


def build_graph(architecture: NetworkArchitecture, config: HlsConfig) -> FeatureGraph:
    """One node per layer, edges along the dataflow, one self-loop per node."""
    raw = np.stack([layer_features(l, config) for l in architecture.layers])
    encoded = encode_slots(raw)
    blk = global_block(config)
    nodes = np.concatenate([encoded, np.tile(blk, (encoded.shape[0], 1))], axis=1)
    n = nodes.shape[0]
    seq_src = np.arange(n - 1, dtype=np.int64)
    loops = np.arange(n, dtype=np.int64)
    edges = np.stack(
        [np.concatenate([seq_src, loops]), np.concatenate([seq_src + 1, loops])]
    )
    return FeatureGraph(node_features=nodes, edges=edges, global_block=blk)


@dataclass(frozen=True)
class PaddedSequence:
    """Token matrix with a reserved aggregate slot 0, validity mask, and
    true length (real layers + the aggregate slot)."""

    tokens: np.ndarray  # (MAX_SEQUENCE_LAYERS + 1, ENCODED_TOKEN_WIDTH)
    mask: np.ndarray  # (MAX_SEQUENCE_LAYERS + 1,) bool, True at slot 0 + real layers
    length: int


def build_sequence(architecture: NetworkArchitecture, config: HlsConfig) -> PaddedSequence:
    """Per-layer tokens padded to the maximum depth; slot 0 is reserved for
    the sequence-summary token and is always valid in the mask.

    Raises :class:`TooDeep` beyond ``MAX_SEQUENCE_LAYERS`` layers.
    """
    depth = architecture.depth()
    if depth > MAX_SEQUENCE_LAYERS:
        raise TooDeep(depth, MAX_SEQUENCE_LAYERS)
    tokens = np.zeros((MAX_SEQUENCE_LAYERS + 1, ENCODED_TOKEN_WIDTH), dtype=np.float64)
    if depth:
        raw = np.stack([layer_features(l, config) for l in architecture.layers])
        tokens[1 : depth + 1] = encode_slots(raw)
    mask = np.zeros(MAX_SEQUENCE_LAYERS + 1, dtype=bool)
    mask[: depth + 1] = True
    return PaddedSequence(tokens=tokens, mask=mask, length=depth + 1)


@dataclass(frozen=True)
class MlpFeatures:
    """Statistical averages plus ordinal categorical codes for the tabular
    baseline.  ``part_code`` may be out of vocabulary range; the model
    rejects it at inference time."""

    numeric: np.ndarray  # (5,): depth, mean width, mean precision, mean reuse, total params
    strategy_code: int
    io_code: int
    part_code: int


def aggregate_features(
    architecture: NetworkArchitecture,
    config: HlsConfig,
    part_vocab: tuple[str, ...] = DEFAULT_PART_VOCAB,
) -> MlpFeatures:
    widths = [l.units_or_filters for l in architecture.layers if l.kind in MULT_KINDS]
    mean_width = float(np.mean(widths)) if widths else 0.0
    numeric = np.array(
        [
            float(architecture.depth()),
            mean_width,
            float(config.precision_total_bits),
            float(config.reuse_factor),
            float(param_count(architecture)),
        ],
        dtype=np.float64,
    )
    try:
        part_code = part_vocab.index(config.target_part)
    except ValueError:
        part_code = len(part_vocab)
    return MlpFeatures(
        numeric=numeric,
        strategy_code=_STRATEGY_CODE[config.strategy],
        io_code=_IO_CODE[config.io_type],
        part_code=part_code,
    )


def encode_mlp_numeric(numeric: np.ndarray) -> np.ndarray:
    """log1p scaling for the tabular numeric block (matches encode_slots)."""
    return np.log1p(np.asarray(numeric, dtype=np.float64))


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormStats:
    """Training-set feature mean/std and per-target log1p mean/std.

    Degenerate (constant) feature columns keep std = 1 so application
    maps them to zero instead of dividing by zero.
    """

    feature_mean: np.ndarray
    feature_std: np.ndarray
    target_mean: np.ndarray  # (6,) over log1p(targets)
    target_std: np.ndarray  # (6,)

    def to_dict(self) -> dict:
        return {
            "feature_mean": self.feature_mean.tolist(),
            "feature_std": self.feature_std.tolist(),
            "target_mean": self.target_mean.tolist(),
            "target_std": self.target_std.tolist(),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "NormStats":
        return cls(
            feature_mean=np.asarray(obj["feature_mean"], dtype=np.float64),
            feature_std=np.asarray(obj["feature_std"], dtype=np.float64),
            target_mean=np.asarray(obj["target_mean"], dtype=np.float64),
            target_std=np.asarray(obj["target_std"], dtype=np.float64),
        )


def _guarded_std(x: np.ndarray) -> np.ndarray:
    std = np.std(x, axis=0)
    return np.where(std < 1e-12, 1.0, std)


def fit_normalizer(feature_rows: np.ndarray, targets: np.ndarray) -> NormStats:
    """Fit z-score statistics on encoded feature rows and raw-unit targets.

    Targets are log1p-transformed before the z-fit so zero-valued targets
    stay representable.
    """
    feature_rows = np.asarray(feature_rows, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    log_targets = np.log1p(targets)
    return NormStats(
        feature_mean=np.mean(feature_rows, axis=0),
        feature_std=_guarded_std(feature_rows),
        target_mean=np.mean(log_targets, axis=0),
        target_std=_guarded_std(log_targets),
    )


def apply_features(ns: NormStats, rows: np.ndarray) -> np.ndarray:
    return (np.asarray(rows, dtype=np.float64) - ns.feature_mean) / ns.feature_std


def apply_targets(ns: NormStats, targets: np.ndarray) -> np.ndarray:
    return (np.log1p(np.asarray(targets, dtype=np.float64)) - ns.target_mean) / ns.target_std


def invert_targets(ns: NormStats, z: np.ndarray) -> np.ndarray:
    """Exact inverse of :func:`apply_targets`, clamped at zero."""
    y = np.expm1(np.asarray(z, dtype=np.float64) * ns.target_std + ns.target_mean)
    return np.maximum(y, 0.0)


def fit_normalizer_for(kind: str, dataset: Dataset) -> NormStats:
    """Fit stats on the feature space used by the given model kind."""
    targets = np.array([s.targets().as_tuple() for s in dataset], dtype=np.float64)
    if kind == "gnn":
        rows = np.concatenate(
            [build_graph(s.architecture, s.hls_config).node_features for s in dataset]
        )
    elif kind == "transformer":
        pieces = []
        for s in dataset:
            seq = build_sequence(s.architecture, s.hls_config)
            pieces.append(seq.tokens[1 : seq.length])
        rows = np.concatenate(pieces)
    elif kind == "mlp":
        rows = np.stack(
            [
                encode_mlp_numeric(aggregate_features(s.architecture, s.hls_config).numeric)
                for s in dataset
            ]
        )
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return fit_normalizer(rows, targets)


# ---------------------------------------------------------------------------
# Bit operations
# ---------------------------------------------------------------------------


def bops(architecture: NetworkArchitecture, config: HlsConfig) -> int:
    """Bit operations: sum over multiply-bearing layers of
    n*m*(b_w*b_a + b_w + b_a + ceil(log2 m)) with weight and activation
    widths both equal to the configured precision."""
    b = config.precision_total_bits
    total = 0
    for layer in architecture.layers:
        if layer.kind not in MULT_KINDS:
            continue
        m, n = fan_in_out(layer)
        total += n * m * (b * b + 2 * b + log2_ceil(m))
    return total


def layout_descriptor() -> dict:
    """Machine-readable description of the feature layout (shipped with
    checkpoints so consumers can verify compatibility)."""
    return {
        "version": FEATURE_LAYOUT_VERSION,
        "raw_slots": list(SLOT_NAMES),
        "numeric_slots": [SLOT_NAMES[i] for i in NUMERIC_SLOTS],
        "numeric_scaling": "log1p",
        "flag_slots": [SLOT_NAMES[i] for i in FLAG_SLOTS],
        "one_hot_slots": {SLOT_NAMES[i]: c for i, c in ONE_HOT_SLOTS},
        "encoded_token_width": ENCODED_TOKEN_WIDTH,
        "global_block_width": GLOBAL_BLOCK_WIDTH,
        "encoded_node_width": ENCODED_NODE_WIDTH,
        "max_sequence_layers": MAX_SEQUENCE_LAYERS,
        "mlp_numeric": list(MLP_NUMERIC_NAMES),
        "part_vocab": list(DEFAULT_PART_VOCAB),
        "layer_kind_order": [k.value for k in LAYER_KIND_ORDER],
        "activation_order": [a.value for a in ACTIVATION_ORDER],
        "padding_order": [p.value for p in PADDING_ORDER],
        "strategy_order": [s.value for s in STRATEGY_ORDER],
        "io_order": [t.value for t in IO_ORDER],
    }


if __name__ == "__main__":
    # dump the layout descriptor: python -m wahls.featurize > layout.json
    import json

    print(json.dumps(layout_descriptor(), indent=2, sort_keys=True))
