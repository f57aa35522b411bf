import dataclasses
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wahls.core import Activation, HlsConfig, IoType, Strategy, dense_chain
from wahls.synth import generate_dataset


@pytest.fixture(scope="session")
def jet():
    return dense_chain(
        "Jet", 16, (32, 32, 32, 5),
        (Activation.RELU, Activation.RELU, Activation.RELU, Activation.SOFTMAX),
    )


@pytest.fixture(scope="session")
def resource_cfg():
    return HlsConfig(
        precision_total_bits=16,
        precision_int_bits=1,
        reuse_factor=1,
        strategy=Strategy.RESOURCE,
        io_type=IoType.IO_PARALLEL,
    )


@pytest.fixture(scope="session")
def mixed_dataset():
    """Small mixed-family labeled dataset shared across tests."""
    return generate_dataset(11, 60, {"dense": 0.6, "conv1d": 0.2, "conv2d": 0.2})


@pytest.fixture(scope="session")
def dense_split():
    """Dense-only train/val pair big enough for short training runs."""
    ds = generate_dataset(5, 120, {"dense": 1.0})
    train = dataclasses.replace(ds, samples=ds.samples[:96])
    val = dataclasses.replace(ds, samples=ds.samples[96:])
    return train, val
