"""Shared fixtures: the small binary instances the whole suite leans on."""

import numpy as np
import pytest

from dsclab.sources import ProblemSpec

BSC = lambda p: np.array([[1 - p, p], [p, 1 - p]])


def dsbs(p):
    """Uniform bit X1 with X2 its BSC(p) copy, as a joint letter table."""
    return np.array([[(1 - p) / 2, p / 2], [p / 2, (1 - p) / 2]])


@pytest.fixture
def sw_pair():
    """Two lossless encoders observing a correlated bit pair, no side info."""
    return ProblemSpec(encoders=["1", "2"], lossless=["1", "2"], lossy=[],
                       x_alphabets={"1": 2, "2": 2}, y_alphabet=1,
                       letter_joint=dsbs(0.1)[..., None])


@pytest.fixture
def sw_side():
    """One lossless encoder whose source reaches the decoder through a
    BSC(0.1) as side information."""
    return ProblemSpec(encoders=["1"], lossless=["1"], lossy=[],
                       x_alphabets={"1": 2}, y_alphabet=2,
                       letter_joint=dsbs(0.1))


def quantizer_spec(flip=0.2):
    ch = BSC(flip)
    rep = np.array([[0], [1]])                   # z = w
    dist = np.zeros((2, 1, 2))
    dist[0, 0, 1] = dist[1, 0, 0] = 1.0          # Hamming on (x, z)
    return ProblemSpec(encoders=["1"], lossless=[], lossy=["1"],
                       x_alphabets={"1": 2}, y_alphabet=1,
                       letter_joint=np.array([[0.5], [0.5]]),
                       w_alphabets={"1": 2}, test_channels={"1": ch},
                       reproductions={"1": rep}, distortions={"1": dist},
                       z_alphabets={"1": 2}, distortion_levels={"1": flip})


@pytest.fixture
def quantizer():
    """Single quantizing encoder: uniform bit through a BSC(0.2) test
    channel, reproduced as z = w under Hamming distortion."""
    return quantizer_spec()


@pytest.fixture
def wyner_ziv():
    """Quantizing encoder with decoder side information Y (a noisy copy of
    X); reproduction ignores Y so the closed-form row stays simple."""
    ch = BSC(0.2)
    rep = np.array([[0, 0], [1, 1]])             # z = w for either y
    dist = np.zeros((2, 2, 2))
    dist[0, :, 1] = dist[1, :, 0] = 1.0
    return ProblemSpec(encoders=["1"], lossless=[], lossy=["1"],
                       x_alphabets={"1": 2}, y_alphabet=2,
                       letter_joint=dsbs(0.25),
                       w_alphabets={"1": 2}, test_channels={"1": ch},
                       reproductions={"1": rep}, distortions={"1": dist},
                       z_alphabets={"1": 2}, distortion_levels={"1": 0.3})


@pytest.fixture
def two_coded():
    """Two quantizing encoders on a correlated bit pair, each through its
    own BSC(0.1), each reproduced as z_j = w_j under Hamming distortion."""
    ch = BSC(0.1)
    reps = {}
    dists = {}
    for k, j in enumerate(["1", "2"]):
        rep = np.zeros((2, 2, 1), dtype=int)
        rep[:] = np.arange(2).reshape((2, 1, 1) if k == 0 else (1, 2, 1))
        reps[j] = rep
        dist = np.zeros((2, 2, 1, 2))
        ax = np.arange(2).reshape((2, 1, 1, 1) if k == 0 else (1, 2, 1, 1))
        dist[...] = ax != np.arange(2).reshape(1, 1, 1, 2)
        dists[j] = dist
    return ProblemSpec(encoders=["1", "2"], lossless=[], lossy=["1", "2"],
                       x_alphabets={"1": 2, "2": 2}, y_alphabet=1,
                       letter_joint=dsbs(0.2)[..., None],
                       w_alphabets={"1": 2, "2": 2},
                       test_channels={"1": ch, "2": ch},
                       reproductions=reps, distortions=dists,
                       z_alphabets={"1": 2, "2": 2},
                       distortion_levels={"1": 0.2, "2": 0.2})
