from __future__ import annotations

import numpy as np
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from blockycover.matcore import BooleanMatrix

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def bool_matrices(draw, max_m=6, max_n=6, min_m=0, min_n=0):
    m = draw(st.integers(min_m, max_m))
    n = draw(st.integers(min_n, max_n))
    bits = draw(st.lists(st.integers(0, 1), min_size=m * n, max_size=m * n))
    return BooleanMatrix.from_array(np.array(bits, dtype=np.int8).reshape(m, n))


def brute_max_rect(A: BooleanMatrix) -> int:
    """Largest all-ones S×T by trying every column subset."""
    best = 0
    for T in range(1, 1 << A.n):
        S = sum(1 for r in A.rows if r & T == T)
        best = max(best, S * bin(T).count("1"))
    return best
