# hqam_bicm/tests/conftest.py
import numpy as np
import pytest

from hqam_bicm.core.constellation import build
from hqam_bicm.core.convcode import ConvCode, build_trellis


@pytest.fixture
def code57() -> ConvCode:
    return ConvCode.from_octal("5,7")


@pytest.fixture
def trellis57(code57):
    return build_trellis(code57)


@pytest.fixture
def pam4():
    """Equally spaced 4-PAM."""
    return build([0.5], 4)


@pytest.fixture
def pam8():
    """Equally spaced 8-PAM."""
    return build([0.5, 0.25], 8)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


def in_region(raw):
    """Map arbitrary values in [0, 1] onto alphas satisfying the region inequalities."""
    alphas = [0.0] * len(raw)
    for k in range(len(raw) - 1, -1, -1):
        alphas[k] = sum(alphas[k + 1:]) + raw[k]
    total = sum(alphas)
    if total > 1.0:
        alphas = [a / total for a in alphas]
    return alphas
