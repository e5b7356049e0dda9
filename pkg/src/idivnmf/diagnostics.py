"""Gradients, stationarity reports, and auxiliary-function diagnostics.

The objective's raw partial derivatives have closed forms in the two factors,
and the multiplicative updates are exactly gradient-rescaled moves, so
analytic gradients, a finite-difference oracle, and the first-order
(Kuhn-Tucker) conditions of the nonnegativity-constrained problem are all
checkable here.  The auxiliary function implemented below majorizes the
objective, touches it on the diagonal, and its partial minimizers are the
update formulas; the exact gap identities it satisfies are exposed as
residuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    INPUT_TOL,
    FactorPair,
    _i_div_arrays,
    as_prob_matrix,
)
from .lifted import marginal_projection, tensor_from_pair
from .solver import DEAD_COLUMN_TOL, _masked_log_sum, _normalize_rows, _ratio

__all__ = [
    "FiniteDifferenceError",
    "KktReport",
    "AuxEval",
    "grad",
    "finite_diff_grad",
    "kkt_report",
    "aux_full",
    "aux_left",
    "aux_right",
    "aux_gain_identities",
]


class FiniteDifferenceError(RuntimeError):
    """The finite-difference oracle hit an infinite objective value."""


def _checked_inputs(p, pair: FactorPair):
    target = as_prob_matrix(p, tol=INPUT_TOL)
    m, _, n = pair.shape
    if target.shape != (m, n):
        raise ValueError(f"matrix shape {target.shape} does not match pair shape {(m, n)}")
    return target


def grad(p, pair: FactorPair) -> tuple[np.ndarray, np.ndarray]:
    """Raw partial derivatives of D(p || left @ right) in both factors.

    With E = 1 - p/(left @ right) (elementwise, 0/0 read as 0), the left
    gradient is E @ right.T and the right gradient left.T @ E.  The
    normalization constraints are not projected out; these are the plain
    partials of the objective, and the multiplicative update equals
    ``left * (1 - grad_left)`` entrywise.
    """
    target = _checked_inputs(p, pair)
    recon = pair.product()
    if np.any((target > 0) & (recon == 0)):
        raise ValueError(
            "gradient undefined: reconstruction vanishes on the support of the data"
        )
    err = 1.0 - _ratio(target, recon, guard=False)
    return err @ pair.right.T, pair.left.T @ err


def finite_diff_grad(
    p, pair: FactorPair, step: float = 1e-6
) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference approximation of :func:`grad`, entry by entry.

    Each factor entry is perturbed by ``+-step`` with everything else held
    fixed (no re-normalization), matching the raw partials.  Entries closer
    to zero than ``step`` cannot be perturbed inside the nonnegative orthant
    and come back as NaN.  ``step`` must lie in [1e-8, 1e-4].
    """
    if not 1e-8 <= step <= 1e-4:
        raise ValueError("step must lie in [1e-8, 1e-4]")
    target = _checked_inputs(p, pair)
    left = np.array(pair.left)
    right = np.array(pair.right)

    def objective(lf, rf):
        value = _i_div_arrays(target, lf @ rf)
        if math.isinf(value):
            raise FiniteDifferenceError("objective is infinite at a perturbed point")
        return value

    def diff_matrix(mat, other, is_left):
        out = np.full(mat.shape, np.nan)
        for idx in np.ndindex(mat.shape):
            if mat[idx] < step:
                continue
            saved = mat[idx]
            mat[idx] = saved + step
            f_plus = objective(mat, other) if is_left else objective(other, mat)
            mat[idx] = saved - step
            f_minus = objective(mat, other) if is_left else objective(other, mat)
            mat[idx] = saved
            out[idx] = (f_plus - f_minus) / (2.0 * step)
        return out

    return diff_matrix(left, right, True), diff_matrix(right, left, False)


@dataclass(frozen=True)
class KktReport:
    """First-order stationarity report at a factor pair.

    ``comp_left``/``comp_right`` hold the entrywise complementarity products
    ``factor * gradient``; ``active_left``/``active_right`` mark entries at
    the nonnegativity boundary (value <= tol).  Dead left-factor columns
    (mass <= ``DEAD_COLUMN_TOL``) are excluded from both summary statistics
    and listed separately: first-order conditions say nothing about them.
    ``min_zero_gradient`` is None when no entry is active.
    """

    comp_left: np.ndarray
    comp_right: np.ndarray
    grad_left: np.ndarray
    grad_right: np.ndarray
    active_left: np.ndarray
    active_right: np.ndarray
    max_complementarity: float
    min_zero_gradient: float | None
    dead_columns: tuple[int, ...]
    tol: float
    satisfied: bool


def kkt_report(p, pair: FactorPair, tol: float) -> KktReport:
    """Check the first-order conditions: complementarity ``|x * dD/dx| <= tol``
    everywhere and ``dD/dx >= -tol`` at entries on the boundary.

    Entries with value at most ``tol`` count as boundary-active.  Columns of
    the left factor with numerically zero mass are excluded (along with the
    matching right-factor rows) and reported in ``dead_columns``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    target = _checked_inputs(p, pair)
    grad_left, grad_right = grad(target, pair)
    comp_left = pair.left * grad_left
    comp_right = pair.right * grad_right

    dead = np.flatnonzero(pair.left.sum(axis=0) <= DEAD_COLUMN_TOL)
    live_left = np.ones(pair.left.shape, dtype=bool)
    live_left[:, dead] = False
    live_right = np.ones(pair.right.shape, dtype=bool)
    live_right[dead, :] = False

    max_comp = float(
        max(
            np.max(np.abs(comp_left[live_left]), initial=0.0),
            np.max(np.abs(comp_right[live_right]), initial=0.0),
        )
    )
    active_left = pair.left <= tol
    active_right = pair.right <= tol
    active_grads = np.concatenate(
        [grad_left[active_left & live_left], grad_right[active_right & live_right]]
    )
    min_zero_grad = float(active_grads.min()) if active_grads.size else None

    satisfied = max_comp <= tol and (min_zero_grad is None or min_zero_grad >= -tol)
    return KktReport(
        comp_left=comp_left,
        comp_right=comp_right,
        grad_left=grad_left,
        grad_right=grad_right,
        active_left=active_left,
        active_right=active_right,
        max_complementarity=max_comp,
        min_zero_gradient=min_zero_grad,
        dead_columns=tuple(int(l) for l in dead),
        tol=tol,
        satisfied=satisfied,
    )


@dataclass(frozen=True)
class AuxEval:
    """One evaluation of the majorizing auxiliary function.

    ``slack = aux_value - objective_value`` is nonnegative up to rounding and
    zero when the candidate equals the anchor pair.
    """

    aux_value: float
    objective_value: float
    slack: float


def _aux_eval(target, anchor: FactorPair, candidate: FactorPair) -> AuxEval:
    projected = marginal_projection(target, tensor_from_pair(anchor))
    aux_value = _i_div_arrays(projected, tensor_from_pair(candidate))
    objective_value = _i_div_arrays(target, candidate.product())
    if math.isinf(aux_value) or math.isinf(objective_value):
        if aux_value == objective_value:
            slack = 0.0
        else:
            slack = math.inf if aux_value > objective_value else -math.inf
    else:
        slack = aux_value - objective_value
    return AuxEval(aux_value=aux_value, objective_value=objective_value, slack=slack)


def aux_full(p, anchor: FactorPair, candidate: FactorPair) -> AuxEval:
    """Evaluate the auxiliary function anchored at ``anchor`` on ``candidate``.

    The value is the divergence from the anchor's marginal projection to the
    candidate's product tensor.  It majorizes the objective at the candidate,
    coincides with it when ``candidate == anchor``, and is minimized over
    candidates exactly by the simultaneous update; support violations yield
    +inf rather than an error.
    """
    target = _checked_inputs(p, anchor)
    _checked_inputs(p, candidate)
    return _aux_eval(target, anchor, candidate)


def aux_left(p, anchor: FactorPair, left_candidate) -> AuxEval:
    """Auxiliary function restricted to the left factor (right held fixed).

    Its minimizer is the left multiplicative update.
    """
    target = _checked_inputs(p, anchor)
    candidate = FactorPair(left_candidate, anchor.right)
    return _aux_eval(target, anchor, candidate)


def aux_right(p, anchor: FactorPair, right_candidate) -> AuxEval:
    """Auxiliary function restricted to the right factor (left held fixed).

    Its minimizer is the right multiplicative update computed with the
    anchor's left factor.
    """
    target = _checked_inputs(p, anchor)
    candidate = FactorPair(anchor.left, right_candidate)
    return _aux_eval(target, anchor, candidate)


def aux_gain_identities(p, pair: FactorPair) -> tuple[float, float, float]:
    """Residuals of the three exact gap identities at the update minimizers.

    With ``new_left``/``new_right`` the one-step update outputs (the right
    one computed from the old left), the objective minus the restricted
    auxiliary minimum equals, exactly:

    * left case: the divergence between new and old left factors;
    * right case: the mass-weighted row divergences between new and old right
      factors, weighted by the updated column masses;
    * full case: the sum of the two.

    Returns the three absolute residuals ``|lhs - rhs|``.
    """
    target = _checked_inputs(p, pair)
    left, right = pair.left, pair.right
    ratio = _ratio(target, left @ right, guard=False)
    new_left = left * (ratio @ right.T)
    new_right = _normalize_rows(right * (left.T @ ratio))

    objective = _i_div_arrays(target, left @ right)
    left_gap = objective - _aux_eval(target, pair, FactorPair(new_left, right)).aux_value
    right_gap = objective - _aux_eval(target, pair, FactorPair(left, new_right)).aux_value
    full_gap = (
        objective - _aux_eval(target, pair, FactorPair(new_left, new_right)).aux_value
    )

    left_rhs = _i_div_arrays(new_left, left)
    weights = new_left.sum(axis=0)[:, None] * new_right
    right_rhs = _masked_log_sum(weights, new_right, right)
    return (
        abs(left_gap - left_rhs),
        abs(right_gap - right_rhs),
        abs(full_gap - (left_rhs + right_rhs)),
    )
