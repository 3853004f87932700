import sys
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hochwalk.bimodule import build_EL, build_gns
from hochwalk.models import amplitude_damping, random_model, zero_model
from hochwalk.walk_coefficients import build_family


def _model(alg, gen, order):
    gns = build_gns(alg, gen)
    el = build_EL(gns)
    return SimpleNamespace(alg=alg, gen=gen, gns=gns, el=el, family=build_family(gns, gen, order, el=el))


@pytest.fixture(scope="session")
def ad():
    """Amplitude damping on M_2, coefficients to order 4."""
    return _model(*amplitude_damping(), order=4)


@pytest.fixture(scope="session")
def m3():
    """Seeded random generator on M_3 with two jump operators, order 4."""
    return _model(*random_model(), order=4)


@pytest.fixture(scope="session")
def zero():
    return _model(*zero_model(), order=4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
