import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from polyra.core import ProblemInstance

settings.register_profile("default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("stress", deadline=None, max_examples=2000, suppress_health_check=list(HealthCheck))
settings.load_profile(os.environ.get("POLYRA_HYPOTHESIS_PROFILE", "default"))


@st.composite
def instances(draw, K=st.integers(2, 6), M=None, min_ratio=0.02, max_ratio=0.98):
    """Valid instances with consecutive reward ratios in [min_ratio, max_ratio]."""
    k = draw(K)
    m = draw(st.integers(0, k - 1)) if M is None else draw(M(k) if callable(M) else M)
    ratios = draw(st.lists(st.floats(min_ratio, max_ratio), min_size=k - 1, max_size=k - 1))
    top = draw(st.floats(0.5, 5.0))
    r = top * np.concatenate([np.cumprod(np.asarray(ratios)[::-1])[::-1], [1.0]])
    C = draw(st.floats(0.5, 3.0))
    return ProblemInstance(k, m, C, tuple(float(x) for x in r))


def flex_instances(**kw):
    return instances(M=lambda k: st.integers(1, k - 1), **kw)


@pytest.fixture
def k2():
    return ProblemInstance(2, 1, 1.0, (1.0, 2.0))


@pytest.fixture
def k3m1():
    return ProblemInstance(3, 1, 1.0, (0.25, 0.5, 1.0))


@pytest.fixture
def k3m2():
    return ProblemInstance(3, 2, 1.0, (0.25, 0.5, 1.0))
