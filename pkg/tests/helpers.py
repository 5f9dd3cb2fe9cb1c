"""Shared test utilities."""

import numpy as np


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def expand_columns(block, multiplicities):
    """Repeat column j of block multiplicities[j] times, in order."""
    cols = []
    for j, m in enumerate(multiplicities):
        cols.extend([block[:, j]] * m)
    return np.column_stack(cols)


def rel_err(value, reference):
    return abs(value - reference) / max(abs(reference), 1e-300)


def partitions(n, largest=None):
    """All integer partitions of n, each non-increasing."""
    if largest is None:
        largest = n
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in partitions(n - first, first):
            yield (first,) + rest


def compositions(total, parts):
    """All non-negative integer vectors of length ``parts`` summing to total."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest
