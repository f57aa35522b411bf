"""Domain model, published-schema ingestion, dataset splits, and exemplar fixtures.

A synthesis record is a single JSON object with nine top-level fields
(``meta_data``, ``model_config``, ``hls_config``, ``resource_report``,
``hls_resource_report``, ``latency_report``, ``target_part``,
``vivado_version``, ``hls4ml_version``).  This module parses, validates,
and re-serializes such records with a stable key order, and provides the
seven exemplar benchmark architectures together with their synthesis
hyperparameter sweep.
"""

from __future__ import annotations

import enum
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

from wahls.errors import EmptyDataset, MalformedArchitecture, MissingField

log = logging.getLogger(__name__)

SCHEMA_FIELDS = (
    "meta_data",
    "model_config",
    "hls_config",
    "resource_report",
    "hls_resource_report",
    "latency_report",
    "target_part",
    "vivado_version",
    "hls4ml_version",
)

GROUP_TAGS = (
    "2_20",
    "2_layer",
    "3_layer",
    "conv1d",
    "conv2d",
    "latency",
    "resource",
    "exemplar",
)

PART_U200 = "xcu200-fsgd2104-2-e"
PART_U250 = "xcu250-figd2104-2L-e"


class LayerKind(str, enum.Enum):
    DENSE = "dense"
    CONV1D = "conv1d"
    CONV2D = "conv2d"
    MAXPOOL1D = "maxpool1d"
    MAXPOOL2D = "maxpool2d"
    AVGPOOL1D = "avgpool1d"
    AVGPOOL2D = "avgpool2d"
    FLATTEN = "flatten"
    ACTIVATION = "activation"
    BATCHNORM = "batchnorm"
    INPUT = "input"


#: Layer kinds that carry multiply weights (and therefore parameters).
MULT_KINDS = (LayerKind.DENSE, LayerKind.CONV1D, LayerKind.CONV2D)


class Activation(str, enum.Enum):
    LINEAR = "linear"
    RELU = "relu"
    TANH = "tanh"
    SIGMOID = "sigmoid"
    SOFTMAX = "softmax"


class Padding(str, enum.Enum):
    NONE = "none"
    SAME = "same"
    VALID = "valid"


class Strategy(str, enum.Enum):
    LATENCY = "latency"
    RESOURCE = "resource"


class IoType(str, enum.Enum):
    IO_PARALLEL = "io_parallel"
    IO_STREAM = "io_stream"


class Split(str, enum.Enum):
    TRAIN = "train"
    VALIDATION = "validation"
    TEST = "test"
    EXEMPLAR_TEST = "exemplar_test"


Shape = tuple[int, int, int]


def _as_shape(value) -> Shape:
    dims = tuple(int(v) for v in value)
    if len(dims) > 3 or len(dims) == 0:
        raise ValueError(f"shape must have 1-3 dims, got {value!r}")
    return dims + (1,) * (3 - len(dims))


@dataclass(frozen=True)
class LayerSpec:
    """One layer of a network: kind, shapes, and its structural knobs.

    Unused dims are fixed to 1; dense layers carry kernel_size = stride = 1
    and padding ``none``.
    """

    kind: LayerKind
    in_shape: Shape
    out_shape: Shape
    units_or_filters: int = 1
    kernel_size: int = 1
    stride: int = 1
    padding: Padding = Padding.NONE
    activation: Activation = Activation.LINEAR

    def elements_in(self) -> int:
        return self.in_shape[0] * self.in_shape[1] * self.in_shape[2]

    def elements_out(self) -> int:
        return self.out_shape[0] * self.out_shape[1] * self.out_shape[2]


@dataclass(frozen=True)
class NetworkArchitecture:
    """Ordered layer chain, as converted by the dataflow flow."""

    name: str
    layers: tuple[LayerSpec, ...]
    reuse_actual_per_layer: tuple[int, ...] = ()

    def depth(self) -> int:
        return len(self.layers)


@dataclass(frozen=True)
class HlsConfig:
    """Conversion knobs: fixed-point precision, reuse, strategy, io style."""

    precision_total_bits: int
    precision_int_bits: int
    reuse_factor: int
    strategy: Strategy
    io_type: IoType
    target_part: str = PART_U250
    clock_ns: float = 10.0
    vivado_version: str = "2023.2"
    hls4ml_version: str = "1.1.0"
    reuse_target_per_layer: tuple[int, ...] = ()


@dataclass(frozen=True)
class TargetVector:
    """The six regression targets, in raw units (counts and clock cycles)."""

    bram: float
    dsp: float
    ff: float
    lut: float
    cycles: float
    ii: float

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.bram, self.dsp, self.ff, self.lut, self.cycles, self.ii)


TARGET_NAMES = ("bram", "dsp", "ff", "lut", "cycles", "ii")
RESOURCE_NAMES = ("bram", "dsp", "ff", "lut")


@dataclass(frozen=True)
class SampleMeta:
    id: str
    model_name: str
    artifact_tarball_name: str
    extra: tuple[tuple[str, object], ...] = ()

    def extra_dict(self) -> dict:
        return dict(self.extra)


@dataclass(frozen=True)
class ResourceReport:
    bram: int
    dsp: int
    ff: int
    lut: int


@dataclass(frozen=True)
class LatencyReport:
    cycles: int
    ii: int


@dataclass(frozen=True)
class Sample:
    """One synthesis record: architecture + conversion config + ground truth.

    ``resource_report`` holds post-logic-synthesis counts (the actual number
    of components used); ``hls_resource_report`` holds the earlier post-HLS
    estimates.  ``group_tag`` is sidecar provenance metadata, not a schema
    field.
    """

    meta: SampleMeta
    architecture: NetworkArchitecture
    hls_config: HlsConfig
    resource_report: ResourceReport
    hls_resource_report: ResourceReport
    latency_report: LatencyReport
    group_tag: str = "unknown"

    @property
    def id(self) -> str:
        return self.meta.id

    def targets(self) -> TargetVector:
        r, l = self.resource_report, self.latency_report
        return TargetVector(r.bram, r.dsp, r.ff, r.lut, l.cycles, l.ii)

    def family(self) -> str:
        kinds = {layer.kind for layer in self.architecture.layers}
        if LayerKind.CONV2D in kinds:
            return "conv2d"
        if LayerKind.CONV1D in kinds:
            return "conv1d"
        return "dense"


@dataclass(frozen=True)
class Dataset:
    """Immutable ordered sample collection tagged with its split role."""

    samples: tuple[Sample, ...]
    split: Split
    load_failures: tuple[tuple[str, str], ...] = ()

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[Sample]:
        return iter(self.samples)

    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.samples)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    code: str
    message: str


ValidationReport = list


def validate_sample(sample: Sample) -> list[Violation]:
    """List every violated invariant; an empty list means the sample is valid.

    Never raises: malformed content shows up as violations.
    """
    out: list[Violation] = []
    layers = sample.architecture.layers
    if not layers:
        out.append(Violation("EmptyArchitecture", "architecture has no layers"))

    for i, layer in enumerate(layers):
        for dim in layer.in_shape + layer.out_shape:
            if dim < 1:
                out.append(Violation("DimBounds", f"layer {i}: dimension {dim} < 1"))
                break
        if layer.kind == LayerKind.DENSE and (
            layer.kernel_size != 1 or layer.stride != 1 or layer.padding != Padding.NONE
        ):
            out.append(
                Violation("DenseShape", f"layer {i}: dense layer must have kernel=stride=1, padding none")
            )
        if layer.units_or_filters < 1:
            out.append(Violation("DimBounds", f"layer {i}: units_or_filters < 1"))

    for i in range(len(layers) - 1):
        if layers[i].out_shape != layers[i + 1].in_shape:
            out.append(
                Violation(
                    "ShapeChain",
                    f"layer {i} out_shape {layers[i].out_shape} != layer {i + 1} in_shape {layers[i + 1].in_shape}",
                )
            )

    cfg = sample.hls_config
    if not (1 <= cfg.precision_int_bits <= cfg.precision_total_bits):
        out.append(
            Violation(
                "PrecisionBounds",
                f"need 1 <= int_bits <= total_bits, got <{cfg.precision_total_bits},{cfg.precision_int_bits}>",
            )
        )
    if cfg.reuse_factor < 1:
        out.append(Violation("ReuseBounds", f"reuse_factor {cfg.reuse_factor} < 1"))

    for report_name in ("resource_report", "hls_resource_report"):
        report = getattr(sample, report_name)
        for target in RESOURCE_NAMES:
            value = getattr(report, target)
            if value < 0:
                out.append(Violation("NegativeTarget", f"{report_name}.{target} = {value} < 0"))
    for target in ("cycles", "ii"):
        value = getattr(sample.latency_report, target)
        if value < 0:
            out.append(Violation("NegativeTarget", f"latency_report.{target} = {value} < 0"))

    return out


# ---------------------------------------------------------------------------
# Parsing / serialization of the nine-field record
# ---------------------------------------------------------------------------


def _layer_from_dict(obj: dict, index: int) -> LayerSpec:
    try:
        return LayerSpec(
            kind=LayerKind(obj["kind"]),
            in_shape=_as_shape(obj["in_shape"]),
            out_shape=_as_shape(obj["out_shape"]),
            units_or_filters=int(obj.get("units_or_filters", 1)),
            kernel_size=int(obj.get("kernel_size", 1)),
            stride=int(obj.get("stride", 1)),
            padding=Padding(obj.get("padding", "none")),
            activation=Activation(obj.get("activation", "linear")),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise MalformedArchitecture(f"layer {index}: {exc}") from exc


def _layer_to_dict(layer: LayerSpec) -> dict:
    return {
        "kind": layer.kind.value,
        "in_shape": list(layer.in_shape),
        "out_shape": list(layer.out_shape),
        "units_or_filters": layer.units_or_filters,
        "kernel_size": layer.kernel_size,
        "stride": layer.stride,
        "padding": layer.padding.value,
        "activation": layer.activation.value,
    }


def parse_sample(raw_record: Union[str, bytes, dict], group_tag: Optional[str] = None) -> Sample:
    """Bind a nine-field JSON record to a :class:`Sample`.

    Layers are reconstructed from ``model_config`` in declaration order.
    Unknown extra top-level fields are tolerated with a warning.  The group
    tag is read from ``meta_data`` when present, unless supplied externally.

    Raises :class:`MissingField` for an absent schema field and
    :class:`MalformedArchitecture` for an unreconstructable layer list.
    """
    record = raw_record if isinstance(raw_record, dict) else json.loads(raw_record)
    if not isinstance(record, dict):
        raise MalformedArchitecture("record is not a JSON object")

    for name in SCHEMA_FIELDS:
        if name not in record:
            raise MissingField(name)
    extras = [k for k in record if k not in SCHEMA_FIELDS]
    if extras:
        log.warning("record has unrecognized top-level fields %s; ignoring", extras)

    meta_obj = record["meta_data"]
    try:
        meta = SampleMeta(
            id=str(meta_obj["id"]),
            model_name=str(meta_obj["model_name"]),
            artifact_tarball_name=str(meta_obj["artifact_tarball_name"]),
            extra=tuple(
                sorted(
                    (k, v)
                    for k, v in meta_obj.items()
                    if k not in ("id", "model_name", "artifact_tarball_name")
                )
            ),
        )
    except (KeyError, TypeError) as exc:
        raise MissingField(f"meta_data.{exc.args[0] if exc.args else '?'}") from exc

    model_obj = record["model_config"]
    if not isinstance(model_obj, dict) or not isinstance(model_obj.get("layers"), list):
        raise MalformedArchitecture("model_config.layers must be a list")
    layers = tuple(_layer_from_dict(l, i) for i, l in enumerate(model_obj["layers"]))
    architecture = NetworkArchitecture(
        name=str(model_obj.get("name", meta.model_name)),
        layers=layers,
        reuse_actual_per_layer=tuple(int(v) for v in model_obj.get("reuse_actual_per_layer", ())),
    )

    cfg_obj = record["hls_config"]
    try:
        hls_config = HlsConfig(
            precision_total_bits=int(cfg_obj["precision_total_bits"]),
            precision_int_bits=int(cfg_obj["precision_int_bits"]),
            reuse_factor=int(cfg_obj["reuse_factor"]),
            strategy=Strategy(cfg_obj["strategy"]),
            io_type=IoType(cfg_obj["io_type"]),
            target_part=str(record["target_part"]),
            clock_ns=float(cfg_obj.get("clock_ns", 10.0)),
            vivado_version=str(record["vivado_version"]),
            hls4ml_version=str(record["hls4ml_version"]),
            reuse_target_per_layer=tuple(int(v) for v in cfg_obj.get("reuse_target_per_layer", ())),
        )
    except KeyError as exc:
        raise MissingField(f"hls_config.{exc.args[0]}") from exc
    except (ValueError, TypeError) as exc:
        raise MalformedArchitecture(f"hls_config: {exc}") from exc

    def _resources(name: str) -> ResourceReport:
        obj = record[name]
        try:
            return ResourceReport(int(obj["bram"]), int(obj["dsp"]), int(obj["ff"]), int(obj["lut"]))
        except (KeyError, TypeError) as exc:
            raise MissingField(f"{name}.{exc.args[0] if exc.args else '?'}") from exc

    latency_obj = record["latency_report"]
    try:
        latency = LatencyReport(int(latency_obj["cycles"]), int(latency_obj["ii"]))
    except (KeyError, TypeError) as exc:
        raise MissingField(f"latency_report.{exc.args[0] if exc.args else '?'}") from exc

    if group_tag is None:
        group_tag = str(meta.extra_dict().get("group_tag", "unknown"))

    return Sample(
        meta=meta,
        architecture=architecture,
        hls_config=hls_config,
        resource_report=_resources("resource_report"),
        hls_resource_report=_resources("hls_resource_report"),
        latency_report=latency,
        group_tag=group_tag,
    )


def sample_to_dict(sample: Sample) -> dict:
    """Canonical nine-field dict with stable key order."""
    meta = {
        "id": sample.meta.id,
        "model_name": sample.meta.model_name,
        "artifact_tarball_name": sample.meta.artifact_tarball_name,
    }
    meta.update(dict(sample.meta.extra))
    model_config: dict = {
        "name": sample.architecture.name,
        "layers": [_layer_to_dict(l) for l in sample.architecture.layers],
    }
    if sample.architecture.reuse_actual_per_layer:
        model_config["reuse_actual_per_layer"] = list(sample.architecture.reuse_actual_per_layer)
    cfg = sample.hls_config
    hls_config: dict = {
        "precision_total_bits": cfg.precision_total_bits,
        "precision_int_bits": cfg.precision_int_bits,
        "reuse_factor": cfg.reuse_factor,
        "strategy": cfg.strategy.value,
        "io_type": cfg.io_type.value,
        "clock_ns": cfg.clock_ns,
    }
    if cfg.reuse_target_per_layer:
        hls_config["reuse_target_per_layer"] = list(cfg.reuse_target_per_layer)
    return {
        "meta_data": meta,
        "model_config": model_config,
        "hls_config": hls_config,
        "resource_report": {
            "bram": sample.resource_report.bram,
            "dsp": sample.resource_report.dsp,
            "ff": sample.resource_report.ff,
            "lut": sample.resource_report.lut,
        },
        "hls_resource_report": {
            "bram": sample.hls_resource_report.bram,
            "dsp": sample.hls_resource_report.dsp,
            "ff": sample.hls_resource_report.ff,
            "lut": sample.hls_resource_report.lut,
        },
        "latency_report": {
            "cycles": sample.latency_report.cycles,
            "ii": sample.latency_report.ii,
        },
        "target_part": cfg.target_part,
        "vivado_version": cfg.vivado_version,
        "hls4ml_version": cfg.hls4ml_version,
    }


def serialize_sample(sample: Sample) -> str:
    """Compact canonical JSON, byte-stable for identical samples."""
    return json.dumps(sample_to_dict(sample), separators=(",", ":"))


# ---------------------------------------------------------------------------
# Dataset loading / saving
# ---------------------------------------------------------------------------


def _infer_group_from_path(path: Path) -> Optional[str]:
    for part in reversed(path.parent.parts):
        if part in GROUP_TAGS:
            return part
    return None


def load_dataset(path: Union[str, Path], split: Split = Split.TEST, group_tag: Optional[str] = None) -> Dataset:
    """Load every parseable sample under ``path`` (directory or .jsonl archive).

    Parse failures are collected, logged, and reported on the returned
    dataset rather than raised; ordering is deterministic (by sample id).

    Raises :class:`EmptyDataset` when zero samples parse.
    """
    path = Path(path)
    samples: list[Sample] = []
    failures: list[tuple[str, str]] = []

    def _consume(source: str, text: str, tag: Optional[str]) -> None:
        try:
            samples.append(parse_sample(text, group_tag=tag))
        except Exception as exc:
            failures.append((source, f"{type(exc).__name__}: {exc}"))
            log.warning("skipping %s: %s", source, exc)

    if path.is_dir():
        for file in sorted(path.rglob("*.json")):
            tag = group_tag if group_tag is not None else _infer_group_from_path(file)
            _consume(str(file), file.read_text(), tag)
        for file in sorted(path.rglob("*.jsonl")):
            tag = group_tag if group_tag is not None else _infer_group_from_path(file)
            for i, line in enumerate(file.read_text().splitlines()):
                if line.strip():
                    _consume(f"{file}:{i + 1}", line, tag)
    elif path.is_file():
        for i, line in enumerate(path.read_text().splitlines()):
            if line.strip():
                _consume(f"{path}:{i + 1}", line, group_tag)
    else:
        raise EmptyDataset(f"no such path: {path}")

    if not samples:
        raise EmptyDataset(f"no parseable samples under {path}")
    samples.sort(key=lambda s: s.id)
    return Dataset(samples=tuple(samples), split=split, load_failures=tuple(failures))


def save_dataset(ds: Dataset, path: Union[str, Path]) -> Path:
    """Write a dataset as a .jsonl archive (one canonical record per line)
    or, when ``path`` is a directory, as one ``<id>.json`` file per sample.
    """
    path = Path(path)
    if path.suffix == ".jsonl":
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w") as fh:
            for sample in ds.samples:
                fh.write(serialize_sample(sample))
                fh.write("\n")
    else:
        path.mkdir(parents=True, exist_ok=True)
        for sample in ds.samples:
            (path / f"{sample.id}.json").write_text(serialize_sample(sample) + "\n")
    return path


# ---------------------------------------------------------------------------
# Exemplar fixtures
# ---------------------------------------------------------------------------


def dense_chain(name: str, input_size: int, widths: Iterable[int], activations: Iterable[Activation]) -> NetworkArchitecture:
    """Build a fully-connected chain from an input size and per-layer widths."""
    layers = []
    current = int(input_size)
    for width, act in zip(widths, activations):
        layers.append(
            LayerSpec(
                kind=LayerKind.DENSE,
                in_shape=(current, 1, 1),
                out_shape=(int(width), 1, 1),
                units_or_filters=int(width),
                activation=act,
            )
        )
        current = int(width)
    return NetworkArchitecture(name=name, layers=tuple(layers))


_R = Activation.RELU
_S = Activation.SOFTMAX

# The published benchmark's seven exemplar models.  BiPC's input size is set
# so that its parameter count matches the published size for five width-36
# layers (the advertised 36-wide input is inconsistent with that count).
_EXEMPLARS: tuple[tuple[str, int, tuple[int, ...], tuple[Activation, ...]], ...] = (
    ("Jet", 16, (32, 32, 32, 5), (_R, _R, _R, _S)),
    ("Quarks", 10, (32, 1), (_R, Activation.SIGMOID)),
    ("Anomaly", 128, (8, 4, 128, 4, 128), (_R, _R, _R, _R, _S)),
    ("BiPC", 67, (36, 36, 36, 36, 36), (_R, _R, _R, _R, _R)),
    ("CookieBox", 512, (4, 32, 32, 5), (_R, _R, _R, _S)),
    ("AutoMLP", 7, (12, 16, 12, 2), (_R, _R, _R, _S)),
    ("ParticleTracking", 14, (32, 32, 32, 3), (_R, _R, _R, _S)),
)


def exemplar_fixtures() -> list[tuple[str, NetworkArchitecture]]:
    """The seven exemplar benchmark architectures, in canonical order."""
    return [
        (name, dense_chain(name, size, widths, acts))
        for name, size, widths, acts in _EXEMPLARS
    ]


def param_count(architecture: NetworkArchitecture) -> int:
    """Weights + biases over parameterized layers.

    Dense: in*out + out.  Conv: filters*channels*kernel(^2) + filters.
    """
    total = 0
    for layer in architecture.layers:
        if layer.kind == LayerKind.DENSE:
            total += layer.elements_in() * layer.units_or_filters + layer.units_or_filters
        elif layer.kind == LayerKind.CONV1D:
            channels = layer.in_shape[1]
            total += layer.units_or_filters * channels * layer.kernel_size + layer.units_or_filters
        elif layer.kind == LayerKind.CONV2D:
            channels = layer.in_shape[2]
            total += layer.units_or_filters * channels * layer.kernel_size ** 2 + layer.units_or_filters
    return total


EXEMPLAR_PRECISIONS = ((2, 1), (8, 3), (16, 6))
EXEMPLAR_STRATEGIES = (Strategy.LATENCY, Strategy.RESOURCE)
EXEMPLAR_REUSE = (1, 128, 1024)
EXEMPLAR_PARTS = (PART_U200, PART_U250)
EXEMPLAR_CLOCKS = (5.0, 10.0)
EXEMPLAR_VIVADO = ("2019.1", "2020.1")


def exemplar_sweep() -> list[tuple[NetworkArchitecture, HlsConfig]]:
    """Cartesian sweep of the exemplar synthesis hyperparameters.

    144 configurations per model, 1008 entries total.  Synthesis-tool
    failures in the published runs are not modeled here; consumers may
    drop entries.
    """
    entries = []
    for _, arch in exemplar_fixtures():
        for total, intb in EXEMPLAR_PRECISIONS:
            for strategy in EXEMPLAR_STRATEGIES:
                for reuse in EXEMPLAR_REUSE:
                    for part in EXEMPLAR_PARTS:
                        for clock in EXEMPLAR_CLOCKS:
                            for vivado in EXEMPLAR_VIVADO:
                                entries.append(
                                    (
                                        arch,
                                        HlsConfig(
                                            precision_total_bits=total,
                                            precision_int_bits=intb,
                                            reuse_factor=reuse,
                                            strategy=strategy,
                                            io_type=IoType.IO_PARALLEL,
                                            target_part=part,
                                            clock_ns=clock,
                                            vivado_version=vivado,
                                            hls4ml_version="0.5.0",
                                        ),
                                    )
                                )
    return entries


def with_group_tag(sample: Sample, tag: str) -> Sample:
    """Copy of the sample carrying a different sidecar group tag."""
    return replace(sample, group_tag=tag)


def log2_ceil(value: int) -> int:
    """Smallest k with 2**k >= value; 0 for value <= 1."""
    if value <= 1:
        return 0
    return int(math.ceil(math.log2(value)))
