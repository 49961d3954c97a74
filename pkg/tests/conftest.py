"""Shared channels and profile generators."""

import numpy as np
import pytest

from dmc_whi import Dmc
from info_measures import MiProfile, ProfilePair


def bsc_row(bit: int, crossover: float) -> list:
    return [1 - crossover, crossover] if bit == 0 else [crossover, 1 - crossover]


def channel_from_rules(nx1, nx2, ny1, ny2, receiver, eavesdropper) -> Dmc:
    """receiver(x1, x2) / eavesdropper(x1, x2) return p(y|x1,x2) as a list."""
    rx = np.array([[receiver(x1, x2) for x2 in range(nx2)] for x1 in range(nx1)], dtype=float)
    ev = np.array([[eavesdropper(x1, x2) for x2 in range(nx2)] for x1 in range(nx1)], dtype=float)
    assert rx.shape[2] == ny1 and ev.shape[2] == ny2
    return Dmc.from_marginals(rx, ev)


def one_hot(size: int, index: int) -> list:
    row = [0.0] * size
    row[index] = 1.0
    return row


@pytest.fixture
def noiseless_rx_independent_eve():
    """Y1 = X1, Y2 a fair coin independent of the inputs."""
    return channel_from_rules(2, 2, 2, 2,
                              lambda x1, x2: one_hot(2, x1),
                              lambda x1, x2: [0.5, 0.5])


@pytest.fixture
def noiseless_rx_noiseless_eve():
    """Y1 = Y2 = X1."""
    return channel_from_rules(2, 2, 2, 2,
                              lambda x1, x2: one_hot(2, x1),
                              lambda x1, x2: one_hot(2, x1))


@pytest.fixture
def xor_rx_channel():
    """Y1 = X1 XOR X2, Y2 = X1."""
    return channel_from_rules(2, 2, 2, 2,
                              lambda x1, x2: one_hot(2, x1 ^ x2),
                              lambda x1, x2: one_hot(2, x1))


@pytest.fixture
def xor_eve_channel():
    """Y1 = X1, Y2 = X1 XOR X2: the helper only hurts the eavesdropper."""
    return channel_from_rules(2, 2, 2, 2,
                              lambda x1, x2: one_hot(2, x1),
                              lambda x1, x2: one_hot(2, x1 ^ x2))


@pytest.fixture
def degraded_channel():
    """Y1 = BSC(0.1) of X1, Y2 = BSC(0.3) of X1; the helper reaches nobody."""
    return channel_from_rules(2, 2, 2, 2,
                              lambda x1, x2: bsc_row(x1, 0.1),
                              lambda x1, x2: bsc_row(x1, 0.3))


@pytest.fixture
def strong_xor_channel():
    """
    Y1 = (X1 ⊕ N1, X2) with N1 ~ Bern(0.1)
    Y2 = (X1 ⊕ X2, X2 ⊕ N2) with N2 ~ Bern(0.3)
    Outputs packed as 2·first + second.
    """
    def receiver(x1, x2):
        row = [0.0] * 4
        for n1, pn in ((0, 0.9), (1, 0.1)):
            row[2 * (x1 ^ n1) + x2] += pn
        return row

    def eavesdropper(x1, x2):
        row = [0.0] * 4
        for n2, pn in ((0, 0.7), (1, 0.3)):
            row[2 * (x1 ^ x2) + (x2 ^ n2)] += pn
        return row

    return channel_from_rules(2, 2, 4, 4, receiver, eavesdropper)


@pytest.fixture
def identical_outputs_channel():
    """Y1 and Y2 are two copies of the same noisy MAC output."""
    def mac(x1, x2):
        return [[0.8, 0.2], [0.3, 0.7], [0.4, 0.6], [0.1, 0.9]][2 * x1 + x2]
    return channel_from_rules(2, 2, 2, 2, mac, mac)


@pytest.fixture
def random_channel():
    rng = np.random.default_rng(7)
    rx = rng.dirichlet(np.ones(2), size=(2, 2))
    ev = rng.dirichlet(np.ones(2), size=(2, 2))
    return Dmc.from_marginals(rx, ev)


def random_profile(rng, scale: float = 1.0) -> MiProfile:
    """Chain-rule consistent: i_sum = i1_alone + i2_given_1 = i2_alone + i1_given_2."""
    x, y = rng.uniform(0, scale, size=2)
    s = x + y + rng.uniform(0, scale)
    return MiProfile(i1_given_2=s - y, i2_given_1=s - x, i_sum=s, i1_alone=x, i2_alone=y)


@pytest.fixture
def profile_pairs():
    """Generator of independent consistent (receiver, eavesdropper) pairs."""
    def make(count: int, seed: int = 0, scale: float = 1.0):
        rng = np.random.default_rng(seed)
        return [ProfilePair(random_profile(rng, scale), random_profile(rng, scale)) for _ in range(count)]
    return make
