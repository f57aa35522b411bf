import numpy as np
import pytest

from wahls.core import (
    Activation,
    HlsConfig,
    IoType,
    LayerKind,
    LayerSpec,
    NetworkArchitecture,
    Padding,
    Strategy,
    dense_chain,
)
from wahls.errors import TooDeep
from wahls.featurize import (
    ENCODED_NODE_WIDTH,
    ENCODED_TOKEN_WIDTH,
    GLOBAL_BLOCK_WIDTH,
    MAX_SEQUENCE_LAYERS,
    aggregate_features,
    apply_features,
    apply_targets,
    bops,
    build_graph,
    build_sequence,
    encode_slots,
    fit_normalizer,
    invert_targets,
    layer_features,
    layout_descriptor,
)
from wahls.synth import generate_architecture


def _cfg(**kw):
    defaults = dict(
        precision_total_bits=16,
        precision_int_bits=1,
        reuse_factor=1,
        strategy=Strategy.RESOURCE,
        io_type=IoType.IO_PARALLEL,
    )
    defaults.update(kw)
    return HlsConfig(**defaults)


def test_layer_features_canonical_layout():
    layer = LayerSpec(LayerKind.DENSE, (16, 1, 1), (32, 1, 1), 32, activation=Activation.RELU)
    vec = layer_features(layer, _cfg())
    assert vec.shape == (18,)
    assert list(vec[:3]) == [16, 1, 1]
    assert list(vec[3:6]) == [32, 1, 1]
    assert list(vec[6:9]) == [16, 1, 1]  # total bits, int bits, reuse
    assert vec[9] == list(LayerKind).index(LayerKind.DENSE)
    assert vec[10] == list(Activation).index(Activation.RELU)
    assert list(vec[11:14]) == [32, 1, 1]  # filters slot carries units; kernel, stride
    assert vec[14] == 0  # padding none
    assert vec[15] == 0  # no batchnorm
    assert vec[16] == list(Strategy).index(Strategy.RESOURCE)
    assert vec[17] == list(IoType).index(IoType.IO_PARALLEL)


def test_layer_features_deterministic():
    layer = LayerSpec(LayerKind.DENSE, (8, 1, 1), (8, 1, 1), 8)
    assert np.array_equal(layer_features(layer, _cfg()), layer_features(layer, _cfg()))


def test_conv_layer_feature_slots():
    layer = LayerSpec(
        LayerKind.CONV2D, (28, 28, 3), (28, 28, 8), 8, kernel_size=3, stride=1,
        padding=Padding.SAME, activation=Activation.RELU,
    )
    vec = layer_features(layer, _cfg(io_type=IoType.IO_STREAM))
    assert vec[11] == 8  # filters
    assert vec[12] == 3  # kernel
    assert vec[13] == 1  # stride
    assert vec[9] == list(LayerKind).index(LayerKind.CONV2D)


def test_encoded_widths():
    layer = LayerSpec(LayerKind.DENSE, (4, 1, 1), (4, 1, 1), 4)
    encoded = encode_slots(layer_features(layer, _cfg()))
    assert encoded.shape == (1, ENCODED_TOKEN_WIDTH)
    assert ENCODED_NODE_WIDTH == ENCODED_TOKEN_WIDTH + GLOBAL_BLOCK_WIDTH


def test_build_graph_edges():
    cfg = _cfg()
    three = dense_chain("a", 8, (8, 8, 8), (Activation.RELU,) * 3)
    graph = build_graph(three, cfg)
    assert graph.n_nodes == 3
    assert graph.edges.shape == (2, 5)  # 2 sequential + 3 self-loops
    one = dense_chain("b", 8, (4,), (Activation.RELU,))
    graph1 = build_graph(one, cfg)
    assert graph1.edges.shape == (2, 1)
    assert graph1.edges[0, 0] == graph1.edges[1, 0] == 0


def test_build_graph_edge_count_rule():
    cfg = _cfg()
    for depth in range(1, 9):
        arch = dense_chain("c", 8, (8,) * depth, (Activation.RELU,) * depth)
        graph = build_graph(arch, cfg)
        assert graph.edges.shape[1] == 2 * depth - 1


def test_build_graph_conv_fixture_counts():
    arch = generate_architecture(17, "conv1d")
    graph = build_graph(arch, _cfg(io_type=IoType.IO_STREAM))
    assert graph.n_nodes == arch.depth()
    assert graph.edges.shape[1] == 2 * arch.depth() - 1


def test_global_block_identical_across_nodes():
    arch = dense_chain("d", 8, (8, 8), (Activation.RELU,) * 2)
    graph = build_graph(arch, _cfg())
    tail = graph.node_features[:, -GLOBAL_BLOCK_WIDTH:]
    assert np.all(tail == tail[0])
    assert np.array_equal(tail[0], graph.global_block)


def test_node_feature_multiset_invariant_to_declaration_noise():
    # same architecture built twice encodes identically
    arch = generate_architecture(23, "dense")
    cfg = _cfg()
    lhs = build_graph(arch, cfg)
    rhs = build_graph(arch, cfg)
    assert np.array_equal(lhs.node_features, rhs.node_features)
    assert np.array_equal(lhs.edges, rhs.edges)


def test_build_sequence_boundaries():
    cfg = _cfg()
    four = dense_chain("e", 8, (8,) * 4, (Activation.RELU,) * 4)
    seq = build_sequence(four, cfg)
    assert seq.length == 5
    assert seq.mask.sum() == 5
    assert seq.tokens.shape == (MAX_SEQUENCE_LAYERS + 1, ENCODED_TOKEN_WIDTH)
    assert np.all(seq.tokens[0] == 0.0)  # reserved summary slot
    assert np.all(seq.tokens[5:] == 0.0)  # padded rows zeroed

    deep = dense_chain("f", 8, (8,) * 51, (Activation.RELU,) * 51)
    full = build_sequence(deep, cfg)
    assert full.mask.sum() == 52
    assert full.length == 52

    too_deep = dense_chain("g", 8, (8,) * 52, (Activation.RELU,) * 52)
    with pytest.raises(TooDeep):
        build_sequence(too_deep, cfg)


def test_aggregate_features_jet(jet):
    feats = aggregate_features(jet, _cfg())
    depth, mean_width, mean_precision, mean_reuse, total_params = feats.numeric
    assert depth == 4
    assert mean_width == pytest.approx((32 + 32 + 32 + 5) / 4)
    assert mean_precision == 16
    assert mean_reuse == 1
    assert total_params == 2821


def test_aggregate_features_strategy_code_only_difference(jet):
    lhs = aggregate_features(jet, _cfg(strategy=Strategy.RESOURCE))
    rhs = aggregate_features(jet, _cfg(strategy=Strategy.LATENCY))
    assert np.array_equal(lhs.numeric, rhs.numeric)
    assert lhs.io_code == rhs.io_code
    assert lhs.strategy_code != rhs.strategy_code


def test_aggregate_features_unknown_part_code(jet):
    feats = aggregate_features(jet, _cfg(target_part="xc7z020"))
    assert feats.part_code == 2  # out of the two-entry vocabulary


def test_normalizer_roundtrip_exact():
    rng = np.random.default_rng(0)
    targets = rng.uniform(0.0, 1e7, size=(300, 6))
    rows = rng.normal(size=(300, 8))
    ns = fit_normalizer(rows, targets)
    z = apply_targets(ns, targets)
    back = invert_targets(ns, z)
    assert np.max(np.abs(back - targets) / np.maximum(targets, 1e-12)) < 1e-9


def test_normalizer_mean_maps_to_zero():
    rng = np.random.default_rng(1)
    rows = rng.normal(size=(100, 5)) * 3 + 7
    ns = fit_normalizer(rows, np.abs(rng.normal(size=(100, 6))))
    applied = apply_features(ns, rows)
    assert np.allclose(applied.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(apply_features(ns, rows.mean(axis=0, keepdims=True)), 0.0, atol=1e-12)


def test_normalizer_constant_column_guard():
    rows = np.ones((50, 3))
    rows[:, 1] = np.arange(50)
    targets = np.zeros((50, 6))
    ns = fit_normalizer(rows, targets)
    applied = apply_features(ns, rows)
    assert np.all(np.isfinite(applied))
    assert np.allclose(applied[:, 0], 0.0)
    assert np.allclose(applied[:, 2], 0.0)
    # constant-zero targets invert to zero
    assert np.allclose(invert_targets(ns, apply_targets(ns, targets)), 0.0)


def test_bops_reference_value():
    arch = dense_chain("h", 16, (32,), (Activation.RELU,))
    # 512 * (16*16 + 16+16 + log2(16)) = 512 * 292, frozen by hand
    assert bops(arch, _cfg()) == 149504


def test_bops_monotone_in_precision(jet):
    values = [bops(jet, _cfg(precision_total_bits=b)) for b in (2, 4, 8, 16)]
    assert values == sorted(values)
    assert len(set(values)) == len(values)


def test_bops_flatten_only_zero():
    arch = NetworkArchitecture(
        "flat", (LayerSpec(LayerKind.FLATTEN, (4, 4, 1), (16, 1, 1), 1),)
    )
    assert bops(arch, _cfg()) == 0


def test_featurization_never_errors_on_valid_samples(mixed_dataset):
    from wahls.core import validate_sample

    for sample in mixed_dataset:
        assert validate_sample(sample) == []
        build_graph(sample.architecture, sample.hls_config)
        build_sequence(sample.architecture, sample.hls_config)
        aggregate_features(sample.architecture, sample.hls_config)


def test_layout_descriptor_complete():
    desc = layout_descriptor()
    assert desc["encoded_token_width"] == ENCODED_TOKEN_WIDTH
    assert desc["encoded_node_width"] == ENCODED_NODE_WIDTH
    assert len(desc["raw_slots"]) == 18
    assert desc["version"]
