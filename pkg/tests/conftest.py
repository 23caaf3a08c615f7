import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def separated_support(J, M, rng, margin=1.1):
    """Rejection-sample J positions at torus separation >= margin * 2/M."""
    gap = margin * 2.0 / M
    assert J * gap <= 1.0
    pos = []
    while len(pos) < J:
        x = float(rng.uniform())
        if all(min(abs(x - p), 1 - abs(x - p)) >= gap for p in pos):
            pos.append(x)
    return np.sort(np.array(pos))


def scaled_support(gap_units, M):
    """Support with prescribed spacings in units of 2/M: the same pattern
    reused across window degrees makes constants comparable."""
    gaps = np.asarray(gap_units, dtype=float) * 2.0 / M
    assert gaps.sum() < 1.0
    return np.concatenate([[0.1], 0.1 + np.cumsum(gaps)]) % 1.0
