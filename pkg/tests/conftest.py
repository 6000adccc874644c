"""Shared builders for the reference systems used across the suite."""

import numpy as np
import pytest

import dislofract as df

THIRD = 1.0 / 3.0
SIN60 = float(np.sin(np.pi / 3.0))
CANTOR_SNAP = 3.0 ** -8
SIERPINSKI_SNAP = 2.0 ** -7


def make_cantor(snap=CANTOR_SNAP, validate=True):
    """Middle-thirds maps x/3 and x/3 + 2/3 under the plain |x - y| metric."""
    metric = df.DislocatedMetricSpec.absmax(1.0, 0.0)
    maps = (
        df.AffineMapSpec([[THIRD]], [0.0]),
        df.AffineMapSpec([[THIRD]], [2.0 / 3.0]),
    )
    if validate:
        return df.GifsSystem.create(metric=metric, f_maps=maps,
                                    alphas=(THIRD, THIRD), snap=snap)
    return df.GifsSystem(metric=metric, f_maps=maps, g_maps=maps,
                         alphas=(THIRD, THIRD), snap=snap)


def make_sierpinski(snap=SIERPINSKI_SNAP):
    """Three half-scale maps with translations (0,0), (.5,0), (.25, .5*sin60)."""
    metric = df.DislocatedMetricSpec.euclidean(1.0, 0.0, 2)
    half = [[0.5, 0.0], [0.0, 0.5]]
    maps = tuple(
        df.AffineMapSpec(half, t)
        for t in ((0.0, 0.0), (0.5, 0.0), (0.25, 0.5 * SIN60))
    )
    return df.GifsSystem.create(metric=metric, f_maps=maps,
                                alphas=(0.5, 0.5, 0.5), snap=snap)


def make_absmax_halving(snap=1e-5):
    """Single pair f = g: x -> x/2 under the dislocated 2|x-y| + 4*max metric."""
    metric = df.DislocatedMetricSpec.absmax(2.0, 4.0)
    maps = (df.AffineMapSpec([[0.5]], [0.0]),)
    return df.GifsSystem.create(metric=metric, f_maps=maps, alphas=(0.5,), snap=snap)


def make_dislocated_pair():
    """Genuine f != g pair (x/4, x/2) under absmax(2, 4); tight factor 5/8."""
    metric = df.DislocatedMetricSpec.absmax(2.0, 4.0)
    return df.GifsSystem.create(
        metric=metric,
        f_maps=(df.AffineMapSpec([[0.25]], [0.0]),),
        g_maps=(df.AffineMapSpec([[0.5]], [0.0]),),
        alphas=(0.625,))


def random_compact(rng, max_size, dim, lo=0.0, hi=1.0):
    n = int(rng.integers(1, max_size + 1))
    return df.FiniteCompact(lo + (hi - lo) * rng.random((n, dim)))


@pytest.fixture
def cantor():
    return make_cantor()


@pytest.fixture
def sierpinski():
    return make_sierpinski()


@pytest.fixture
def absmax24():
    return df.DislocatedMetricSpec.absmax(2.0, 4.0)


@pytest.fixture
def paper_table():
    """The worked three-point dislocated metric over labels a, b, c."""
    return df.DislocatedMetricSpec.from_table(
        ["a", "b", "c"],
        [[0.0, 9 / 10, 7 / 10],
         [9 / 10, 1.0, 4 / 5],
         [7 / 10, 4 / 5, 2 / 3]],
    )
