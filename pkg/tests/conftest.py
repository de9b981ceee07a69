import numpy as np
import pytest

from latticefold.core import TermAccumulator


def build_poly(terms, num_vars, offset=0.0, quadratic=False):
    acc = TermAccumulator()
    acc.offset = offset
    for key, coeff in terms.items():
        acc.add(key, coeff)
    return acc.build(num_vars, quadratic=quadratic)


def random_qubo(rng, n, n_quad=None):
    acc = TermAccumulator()
    for i in range(n):
        acc.add((i,), float(rng.normal()))
    n_quad = n_quad if n_quad is not None else 2 * n
    for _ in range(n_quad):
        i, j = sorted(rng.choice(n, 2, replace=False))
        acc.add((int(i), int(j)), float(rng.normal()))
    return acc.build(n, quadratic=True)


def all_assignments(n):
    codes = np.arange(1 << n, dtype=np.uint64)
    return ((codes[:, None] >> np.arange(n, dtype=np.uint64)[None, :]) & np.uint64(1)).astype(np.uint8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
