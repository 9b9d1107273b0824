import numpy as np
from hypothesis import HealthCheck, settings, strategies as st

from nclp.algebra import FiniteVNA

settings.register_profile("default", deadline=None, max_examples=30,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
exponents = st.sampled_from([1.25, 1.5, 2.0, 3.0, 4.0])


@st.composite
def algebras(draw, max_blocks=3, max_dim=3):
    dims = draw(st.lists(st.integers(1, max_dim), min_size=1, max_size=max_blocks))
    weights = draw(st.lists(st.floats(0.25, 4.0), min_size=len(dims), max_size=len(dims)))
    return FiniteVNA.from_dims(dims, weights)


def rng_of(seed):
    return np.random.default_rng(seed)
