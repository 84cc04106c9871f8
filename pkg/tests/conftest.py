import numpy as np
import pytest

from surfgauge import dec, fields
from surfgauge.mesh import build_surface


@pytest.fixture(scope="session")
def torus():
    return build_surface(1, 1)


@pytest.fixture(scope="session")
def genus2():
    return build_surface(2, 1)


@pytest.fixture()
def rng():
    return np.random.default_rng(42)


@pytest.fixture()
def config2(genus2, rng):
    return fields.random_configuration(genus2, rng, amplitude=0.5)


def range_cochain(mesh, rng, shape3=True):
    """Random cochain without checkerboard content."""
    w = rng.standard_normal((mesh.ne, 3) if shape3 else (mesh.ne,))
    return dec.unwhitney(mesh, dec.whitney(mesh, w))
