"""Surrogate-model toolkit for FPGA resource and latency estimation.

Predicts BRAM/DSP/FF/LUT usage, latency cycles, and initiation interval
for neural networks converted through an HLS dataflow flow, and ships a
benchmark harness for evaluating any such estimator.
"""

__version__ = "0.1.0"

from wahls.core import (
    Activation,
    Dataset,
    HlsConfig,
    IoType,
    LayerKind,
    LayerSpec,
    NetworkArchitecture,
    Padding,
    Sample,
    Split,
    Strategy,
    TargetVector,
    exemplar_fixtures,
    exemplar_sweep,
    load_dataset,
    param_count,
    parse_sample,
    serialize_sample,
    validate_sample,
)

__all__ = [
    "Activation",
    "Dataset",
    "HlsConfig",
    "IoType",
    "LayerKind",
    "LayerSpec",
    "NetworkArchitecture",
    "Padding",
    "Sample",
    "Split",
    "Strategy",
    "TargetVector",
    "exemplar_fixtures",
    "exemplar_sweep",
    "load_dataset",
    "param_count",
    "parse_sample",
    "serialize_sample",
    "validate_sample",
]
