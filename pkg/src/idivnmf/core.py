"""Core types and I-divergence computations.

The divergence between nonnegative numbers is D(p||q) = p*log(p/q) - p + q
with the measure-theoretic conventions 0*log(0) = 0, 0/0 = 0 and p/0 = +inf
for p > 0.  It is nonnegative, zero exactly when p = q, and extends to
matrices and tensors by summing elementwise.  +inf is a representable result,
not an error; only negative or non-finite inputs are rejected.

Sums are accumulated in a fixed row-major order so that repeated runs of the
same build produce bitwise-identical traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CONSTRUCTION_TOL",
    "INPUT_TOL",
    "DegenerateMatrixError",
    "FactorPair",
    "ScaledProblem",
    "as_nonneg_matrix",
    "as_nonneg_tensor",
    "as_prob_matrix",
    "as_prob_tensor",
    "i_div_scalar",
    "i_div_matrix",
    "i_div_tensor",
    "hellinger_tensor",
    "normalize_problem",
    "denormalize_solution",
]

# Probability-sum tolerance for values this library constructs itself, versus
# the looser bound applied to user-supplied data.
CONSTRUCTION_TOL = 1e-12
INPUT_TOL = 1e-9


class DegenerateMatrixError(ValueError):
    """Raised for an all-zero matrix, which has no meaningful factorization."""


def _check_entries(a: np.ndarray, what: str) -> np.ndarray:
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} entries must be finite")
    if np.any(a < 0):
        idx = tuple(int(i) for i in np.argwhere(a < 0)[0])
        raise ValueError(f"{what} has a negative entry at {idx}")
    return a


def as_nonneg_matrix(v) -> np.ndarray:
    """Validate and return ``v`` as a 2-d float64 array of nonnegative reals."""
    a = np.asarray(v, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a nonempty 2-d matrix, got shape {a.shape}")
    return _check_entries(a, "matrix")


def as_nonneg_tensor(t) -> np.ndarray:
    """Validate and return ``t`` as a 3-d float64 array of nonnegative reals."""
    a = np.asarray(t, dtype=np.float64)
    if a.ndim != 3 or min(a.shape) < 1:
        raise ValueError(f"expected a nonempty 3-d tensor, got shape {a.shape}")
    return _check_entries(a, "tensor")


def as_prob_matrix(p, tol: float = CONSTRUCTION_TOL) -> np.ndarray:
    """Validate a nonnegative matrix whose entries sum to one within ``tol``."""
    a = as_nonneg_matrix(p)
    if abs(a.sum() - 1.0) > tol:
        raise ValueError(f"matrix entries sum to {a.sum()!r}, expected 1 within {tol}")
    return a


def as_prob_tensor(t, tol: float = CONSTRUCTION_TOL) -> np.ndarray:
    """Validate a nonnegative tensor whose entries sum to one within ``tol``."""
    a = as_nonneg_tensor(t)
    if abs(a.sum() - 1.0) > tol:
        raise ValueError(f"tensor entries sum to {a.sum()!r}, expected 1 within {tol}")
    return a


def _require_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def _div_terms(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    # Elementwise D(p||q); entries with p > 0, q = 0 come out as +inf.
    out = q - p
    pos = p > 0
    if np.any(pos):
        with np.errstate(divide="ignore"):
            out[pos] += p[pos] * np.log(p[pos] / q[pos])
    return out


def _ordered_sum(terms: np.ndarray) -> float:
    # Sequential row-major accumulation; matches a naive left-to-right loop
    # bit for bit, unlike np.sum's pairwise reduction.
    flat = np.ascontiguousarray(terms).ravel()
    if flat.size == 0:
        return 0.0
    return float(np.cumsum(flat)[-1])


def _i_div_arrays(p: np.ndarray, q: np.ndarray) -> float:
    return _ordered_sum(_div_terms(p, q))


def i_div_scalar(p: float, q: float) -> float:
    """I-divergence D(p||q) between nonnegative scalars; may be +inf."""
    a = np.asarray(p, dtype=np.float64).reshape(1)
    b = np.asarray(q, dtype=np.float64).reshape(1)
    _check_entries(a, "first argument")
    _check_entries(b, "second argument")
    return _i_div_arrays(a, b)


def i_div_matrix(a, b) -> float:
    """Sum of elementwise I-divergences between two equal-shape matrices."""
    m = as_nonneg_matrix(a)
    n = as_nonneg_matrix(b)
    _require_same_shape(m, n)
    return _i_div_arrays(m, n)


def i_div_tensor(a, b) -> float:
    """Sum of elementwise I-divergences between two equal-shape 3-d tensors."""
    s = as_nonneg_tensor(a)
    t = as_nonneg_tensor(b)
    _require_same_shape(s, t)
    return _i_div_arrays(s, t)


def hellinger_tensor(a, b) -> float:
    """Squared Hellinger distance sum((sqrt(a) - sqrt(b))**2) between two
    probability tensors.

    Both arguments must sum to one within ``INPUT_TOL``.  The value is
    symmetric, zero exactly at equality, and never exceeds the I-divergence
    when the latter is finite.
    """
    s = as_prob_tensor(a, tol=INPUT_TOL)
    t = as_prob_tensor(b, tol=INPUT_TOL)
    _require_same_shape(s, t)
    return float(np.sum((np.sqrt(s) - np.sqrt(t)) ** 2))


@dataclass(frozen=True)
class FactorPair:
    """A normalized factorization: ``left`` (m x k) carries total mass one,
    ``right`` (k x n) is row-stochastic, and ``left @ right`` is a probability
    matrix of inner size k.

    Arrays are copied and frozen read-only, so instances are safe to share.
    """

    left: np.ndarray
    right: np.ndarray

    def __post_init__(self):
        left = np.array(self.left, dtype=np.float64)
        right = np.array(self.right, dtype=np.float64)
        if left.ndim != 2 or right.ndim != 2:
            raise ValueError("factors must be 2-d arrays")
        if left.shape[1] != right.shape[0]:
            raise ValueError(
                f"inner sizes disagree: left is {left.shape}, right is {right.shape}"
            )
        m, k = left.shape
        n = right.shape[1]
        if not 1 <= k <= min(m, n):
            raise ValueError(f"inner size {k} outside [1, min({m}, {n})]")
        _check_entries(left, "left factor")
        _check_entries(right, "right factor")
        if abs(left.sum() - 1.0) > CONSTRUCTION_TOL:
            raise ValueError("left factor entries must sum to 1")
        if np.max(np.abs(right.sum(axis=1) - 1.0)) > CONSTRUCTION_TOL:
            raise ValueError("each right factor row must sum to 1")
        left.setflags(write=False)
        right.setflags(write=False)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def inner_size(self) -> int:
        return self.left.shape[1]

    @property
    def shape(self) -> tuple[int, int, int]:
        """(m, k, n) of the factorization."""
        return (self.left.shape[0], self.left.shape[1], self.right.shape[1])

    def product(self) -> np.ndarray:
        """The reconstructed probability matrix ``left @ right``."""
        return self.left @ self.right


@dataclass(frozen=True)
class ScaledProblem:
    """A nonnegative matrix split into its total mass and the probability
    matrix obtained by dividing it out."""

    p: np.ndarray
    total: float

    def __post_init__(self):
        p = as_prob_matrix(self.p, tol=CONSTRUCTION_TOL)
        if not (math.isfinite(self.total) and self.total > 0):
            raise ValueError("total mass must be positive and finite")
        p = np.array(p)
        p.setflags(write=False)
        object.__setattr__(self, "p", p)


def normalize_problem(v) -> ScaledProblem:
    """Split ``v`` into total mass and the probability matrix ``v / total``.

    Raises ``DegenerateMatrixError`` if ``v`` has no positive entry.
    """
    a = as_nonneg_matrix(v)
    total = float(a.sum())
    if total == 0.0:
        raise DegenerateMatrixError("matrix is identically zero")
    return ScaledProblem(p=a / total, total=total)


def denormalize_solution(pair: FactorPair, total: float) -> tuple[np.ndarray, np.ndarray]:
    """Map a normalized pair back to factors of the original problem:
    ``w = total * pair.left`` and ``h = pair.right``."""
    if not (math.isfinite(total) and total > 0):
        raise ValueError("total mass must be positive and finite")
    return total * pair.left, np.array(pair.right)
