import random

import pytest
from hypothesis import settings, strategies as st

from stokeslab.cli import GeneratorSpec, e2_presentation, gen_random, generic_directions
from stokeslab.exactplane import Direction
from stokeslab.presentation import trivial_presentation

settings.register_profile("default", max_examples=25, deadline=None)
settings.load_profile("default")


@pytest.fixture
def e2():
    return e2_presentation()


@pytest.fixture
def trivial():
    return trivial_presentation([0, 1, (1, 1)], [1, 2, 1], Direction(1, -2), Direction(2, 1))


def instance(seed, n=None, maxdim=None):
    rng = random.Random(seed)
    n = rng.randint(1, 4) if n is None else n
    maxdim = rng.randint(1, 3) if maxdim is None else maxdim
    return gen_random(GeneratorSpec(seed=seed, n=n, maxdim=maxdim))


seeds = st.integers(min_value=0, max_value=2**32)


@st.composite
def instances(draw, max_n=4, max_dim=3):
    seed = draw(seeds)
    return gen_random(GeneratorSpec(seed=seed, n=draw(st.integers(1, max_n)),
                                    maxdim=draw(st.integers(1, max_dim))))


@st.composite
def instance_and_direction(draw, max_n=4, max_dim=3):
    p = draw(instances(max_n, max_dim))
    dirs = generic_directions(p, 40)
    return p, draw(st.sampled_from(dirs))
