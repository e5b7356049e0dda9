"""Shared oracles and random-instance generators for the test suite.

The divergence oracle here is deliberately independent of the library: plain
Python loops over entries using math.log, accumulated left to right in
row-major order.
"""

import math

import numpy as np

from idivnmf import FactorPair


def naive_div_scalar(p, q):
    if p < 0 or q < 0 or not (math.isfinite(p) and math.isfinite(q)):
        raise ValueError("oracle domain")
    if p == 0:
        return q
    if q == 0:
        return math.inf
    return (q - p) + p * math.log(p / q)


def naive_div(a, b):
    """Row-major left-to-right sum of scalar divergences."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    assert a.shape == b.shape
    total = 0.0
    for p, q in zip(a.ravel(), b.ravel()):
        total += naive_div_scalar(p, q)
    return total


def rand_prob_matrix(rng, m, n, low=0.05):
    p = rng.uniform(low, 1.0, size=(m, n))
    return p / p.sum()


def rand_interior_pair(rng, m, k, n, low=0.05):
    left = rng.uniform(low, 1.0, size=(m, k))
    right = rng.uniform(low, 1.0, size=(k, n))
    return FactorPair(left / left.sum(), right / right.sum(axis=1, keepdims=True))


def rand_prob_tensor(rng, m, k, n, low=0.05):
    t = rng.uniform(low, 1.0, size=(m, k, n))
    return t / t.sum()


def rand_member_with_marginal(rng, p, k, low=0.05):
    """Random tensor whose middle-axis sums equal ``p`` exactly up to rounding."""
    p = np.asarray(p, dtype=float)
    raw = rng.uniform(low, 1.0, size=(p.shape[0], k, p.shape[1]))
    return raw * (p / raw.sum(axis=1))[:, None, :]


def batched_div(ts, q):
    """Divergence of each tensor in a (b, m, k, n) batch against ``q``.

    All batch entries must be strictly positive; ``q`` nonnegative.
    """
    with np.errstate(divide="ignore"):
        logs = np.log(ts / q)
    terms = ts * logs - ts + q
    return terms.sum(axis=(1, 2, 3))


def random_instance(rng, max_dim=8, max_k=4):
    """Random nonnegative data matrix and admissible inner size."""
    m = int(rng.integers(2, max_dim + 1))
    n = int(rng.integers(2, max_dim + 1))
    k = int(rng.integers(1, min(m, n, max_k) + 1))
    v = rng.uniform(0.05, 5.0, size=(m, n))
    # occasional exact zeros, but never a zero row or column
    mask = rng.random(size=(m, n)) < 0.1
    mask[rng.integers(0, m), :] = False
    mask[:, rng.integers(0, n)] = False
    v[mask] = 0.0
    return v, k


def planted_instance(rng, m, k, n, scale=None):
    """Data that factors exactly at inner size ``k``, plus the planted pair."""
    pair = rand_interior_pair(rng, m, k, n, low=0.1)
    total = float(rng.uniform(0.5, 20.0)) if scale is None else scale
    return total * pair.product(), pair
