from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from geospectra.ctpl import CtplParams  # noqa: E402
from geospectra.reference import build_reference_graph  # noqa: E402

# tempering rates at delta = 0.05, r_max = 40, from the closed-form tail
LAMBDA_R40 = {1: 0.006151, 3: 0.014985, 5: 0.020693}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def heterogeneous():
    return build_reference_graph("heterogeneous")


@pytest.fixture(scope="session")
def uniform_graph():
    return build_reference_graph("uniform")


@pytest.fixture(scope="session")
def unconstrained():
    return build_reference_graph("unconstrained")


@pytest.fixture(scope="session")
def noise40():
    return {c: CtplParams(c=float(c), lam=lam, r_max=40.0) for c, lam in LAMBDA_R40.items()}
