import sys
from pathlib import Path

import numpy as np
import pytest

from lfss import gen_synthetic

STUB_DIR = Path(__file__).parent / "stubs"


@pytest.fixture(scope="session")
def ramp_lf():
    return gen_synthetic("ramp", 9, 9, 32, 32)


@pytest.fixture(scope="session")
def texture_lf():
    return gen_synthetic("shifted-texture", 9, 9, 48, 48, disparity=1, seed=7)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def stub_template(script: str, *args: str) -> str:
    """Command template invoking a stub tool with this interpreter."""
    return " ".join([sys.executable, str(STUB_DIR / script), *args])
