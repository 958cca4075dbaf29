"""Table generators shared by the test modules."""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from taco.table import Table


def random_table(rng: np.random.Generator, m: int, n: int, ratio: float = 1e3, **meta) -> Table:
    """Log-uniform values spanning at most ``ratio``."""
    logs = rng.uniform(0.0, np.log(ratio), size=(m, n))
    return Table(values=np.exp(logs), **meta)


def gapped_table(rng: np.random.Generator, m: int, n: int, gap: float) -> Table:
    """Distinct values whose sorted neighbours differ by more than ``gap`` relative."""
    steps = rng.uniform(gap * 1.05, gap * 1.6, size=m * n)
    values = np.cumprod(1.0 + steps)
    return Table(values=rng.permutation(values).reshape(m, n))


@st.composite
def tables(draw, max_side: int = 5, ratio: float = 100.0):
    m = draw(st.integers(1, max_side))
    n = draw(st.integers(1, max_side))
    cells = st.floats(1.0, ratio, allow_nan=False, allow_infinity=False)
    values = draw(st.lists(st.lists(cells, min_size=n, max_size=n), min_size=m, max_size=m))
    return Table(values=np.array(values))
