"""Three-index lifting of the factorization problem.

A factor pair embeds into the space of m x k x n probability tensors as the
product tensor T(i,l,j) = left(i,l) * right(l,j); summing out the middle axis
("collapsing") recovers the reconstructed matrix.  Two closed-form
I-projections act on this space:

* ``marginal_projection`` rescales the fibers of a tensor so that its
  collapsed matrix matches a prescribed target, minimizing D(. || tensor)
  over that constraint set;
* ``factor_projection`` extracts the divergence-closest product tensor from
  an arbitrary probability tensor, minimizing D(tensor || .).

Both projections obey an exact additive (Pythagorean) split of the
divergence, exposed here as residual checks, and membership tests for the two
constraint sets decide whether a matrix factors exactly at a given inner
size.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .core import (
    INPUT_TOL,
    FactorPair,
    _i_div_arrays,
    _require_same_shape,
    as_nonneg_tensor,
    as_prob_matrix,
    as_prob_tensor,
)

__all__ = [
    "MembershipCheck",
    "tensor_from_pair",
    "collapse",
    "marginal_projection",
    "factor_projection",
    "has_marginal",
    "is_product",
    "pythagorean_residual_marginal",
    "pythagorean_residual_factor",
]


class MembershipCheck(NamedTuple):
    """Outcome of a set-membership test: the verdict and the worst deviation."""

    ok: bool
    residual: float


def tensor_from_pair(pair: FactorPair) -> np.ndarray:
    """Product tensor T(i,l,j) = left(i,l) * right(l,j) of a factor pair.

    The result is a probability tensor: the left factor carries total mass
    one and the right factor rows each sum to one.
    """
    return pair.left[:, :, None] * pair.right[None, :, :]


def collapse(t) -> np.ndarray:
    """Sum out the middle axis, returning the m x n matrix of fiber totals."""
    return as_nonneg_tensor(t).sum(axis=1)


def _fiber_ratio(p: np.ndarray, collapsed: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(collapsed > 0, p / collapsed, 0.0)


def marginal_projection(p, t) -> np.ndarray:
    """Rescale the fibers of tensor ``t`` to the target marginal ``p``.

    Returns the tensor with entries t(i,l,j) * p(i,j) / collapse(t)(i,j),
    taking whole fibers to zero where the collapsed entry vanishes, so the
    result never puts mass where ``t`` has none.  Among tensors collapsing to
    ``p`` it minimizes the divergence to ``t``.
    """
    target = as_prob_matrix(p, tol=INPUT_TOL)
    tens = as_nonneg_tensor(t)
    if tens.shape[0] != target.shape[0] or tens.shape[2] != target.shape[1]:
        raise ValueError(
            f"tensor shape {tens.shape} does not collapse to matrix shape {target.shape}"
        )
    ratio = _fiber_ratio(target, tens.sum(axis=1))
    return tens * ratio[:, None, :]


def _extract_pair(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    left = t.sum(axis=2)
    right_raw = t.sum(axis=0)
    mass = right_raw.sum(axis=1)
    right = np.empty_like(right_raw)
    alive = mass > 0
    right[alive] = right_raw[alive] / mass[alive, None]
    # Rows with no mass are unconstrained; fix the uniform row for determinism.
    right[~alive] = 1.0 / t.shape[2]
    return left, right


def factor_projection(t) -> FactorPair:
    """Divergence-closest factor pair to a probability tensor.

    ``left`` is the tensor's (i,l)-marginal and each ``right`` row is the
    conditional distribution of the last index given the middle one; rows
    conditioned on a zero-mass middle state are set uniform.  The resulting
    product tensor minimizes D(t || .) over all product tensors, and product
    tensors are recovered exactly.
    """
    tens = as_prob_tensor(t, tol=INPUT_TOL)
    left, right = _extract_pair(tens)
    return FactorPair(left, right)


def has_marginal(t, p, tol: float = INPUT_TOL) -> MembershipCheck:
    """Whether ``t`` collapses to ``p`` within ``tol``, with the max deviation."""
    target = as_prob_matrix(p, tol=INPUT_TOL)
    tens = as_nonneg_tensor(t)
    if tens.shape[0] != target.shape[0] or tens.shape[2] != target.shape[1]:
        raise ValueError(
            f"tensor shape {tens.shape} does not collapse to matrix shape {target.shape}"
        )
    deviation = float(np.max(np.abs(tens.sum(axis=1) - target)))
    return MembershipCheck(deviation <= tol, deviation)


def is_product(t, tol: float = INPUT_TOL) -> MembershipCheck:
    """Whether ``t`` equals the product tensor of its own extracted pair.

    The residual is the largest elementwise gap to that reconstruction.
    Together with ``has_marginal`` this decides exact factorability of a
    matrix at the tensor's inner size.
    """
    tens = as_prob_tensor(t, tol=INPUT_TOL)
    left, right = _extract_pair(tens)
    residual = float(np.max(np.abs(tens - left[:, :, None] * right[None, :, :])))
    return MembershipCheck(residual <= tol, residual)


def _identity_residual(lhs: float, rhs: float) -> float:
    # Infinite on one side only signals a support inconsistency; both sides
    # infinite means the identity holds in the extended reals.
    if math.isinf(lhs) or math.isinf(rhs):
        return 0.0 if (math.isinf(lhs) and math.isinf(rhs)) else math.inf
    return abs(lhs - rhs)


def pythagorean_residual_marginal(p, member, t) -> float:
    """Residual of D(member||t) = D(member||proj) + D(p||collapse(t)) where
    ``proj`` is the marginal projection of ``t`` onto target ``p``.

    ``member`` must collapse to ``p``; ``t`` is the tensor being projected.
    Exact in the extended reals; +inf flags a support inconsistency between
    the two sides.
    """
    target = as_prob_matrix(p, tol=INPUT_TOL)
    mem = as_nonneg_tensor(member)
    tens = as_nonneg_tensor(t)
    _require_same_shape(mem, tens)
    proj = marginal_projection(target, tens)
    lhs = _i_div_arrays(mem, tens)
    rhs = _i_div_arrays(mem, proj) + _i_div_arrays(target, tens.sum(axis=1))
    return _identity_residual(lhs, rhs)


def pythagorean_residual_factor(member, t) -> float:
    """Residual of D(member||t) = D(member||best) + D(best||t) where ``best``
    is the product tensor of ``member``'s own factor projection.

    ``member`` is any probability tensor; ``t`` should be a product tensor.
    """
    mem = as_prob_tensor(member, tol=INPUT_TOL)
    tens = as_nonneg_tensor(t)
    _require_same_shape(mem, tens)
    left, right = _extract_pair(mem)
    best = left[:, :, None] * right[None, :, :]
    lhs = _i_div_arrays(mem, tens)
    rhs = _i_div_arrays(mem, best) + _i_div_arrays(best, tens)
    return _identity_residual(lhs, rhs)
