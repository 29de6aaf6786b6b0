import math

import numpy as np
import pytest

from nlboson import optimize_gadget

# Synthesized gadgets are shared session-wide: the search is deterministic
# for a fixed seed, and several test modules (and the acceptance gate) need
# the same ones.


@pytest.fixture(scope="session")
def gadget_k1():
    return optimize_gadget(1, math.pi / 2)


@pytest.fixture(scope="session")
def gadget_k2():
    return optimize_gadget(
        2, math.pi / 2, 0.15, starts=100, rng=np.random.default_rng(11), budget=1500
    )


@pytest.fixture(scope="session")
def gadget_k2_pi4():
    return optimize_gadget(
        2, math.pi / 4, 0.1, starts=100, rng=np.random.default_rng(17), budget=1500
    )


@pytest.fixture(scope="session")
def gadget_k3():
    return optimize_gadget(
        3, math.pi / 2, 0.02, starts=100, rng=np.random.default_rng(23), budget=2500
    )


@pytest.fixture(scope="session")
def phi_grid_gadgets():
    grid = [(i + 1) / 8 * math.pi / 2 for i in range(8)]
    return {
        phi: optimize_gadget(
            2, phi, 0.1, starts=100, rng=np.random.default_rng(17), budget=1500
        )
        for phi in grid
    }
