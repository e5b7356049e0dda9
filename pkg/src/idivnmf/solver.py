"""Alternating-minimization solver for the I-divergence factorization problem.

Each iteration alternates the two closed-form projections of the lifted
problem; collapsed back to matrices this is the familiar multiplicative
update scheme.  Three variants are offered:

* ``simultaneous`` updates both factors from the same current pair (one full
  sweep of the alternating projections);
* ``sequential`` updates the left factor first and feeds the result into the
  right-factor update, so each half-step is itself a partial minimization;
* ``unnormalized`` iterates the raw multiplicative updates on ``(w, h)``
  directly; its trajectory equals the simultaneous one after rescaling.

Every step can only decrease the objective, and the per-iteration decrease
("gain") splits exactly into a marginal-projection part and a
factor-projection part; the solver records both on request so the descent is
auditable to machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    CONSTRUCTION_TOL,
    INPUT_TOL,
    FactorPair,
    _i_div_arrays,
    as_nonneg_matrix,
    as_prob_matrix,
    normalize_problem,
)

__all__ = [
    "DEAD_COLUMN_TOL",
    "STATUS_CONVERGED",
    "STATUS_MAX_ITERS",
    "STATUS_UNDERFLOW",
    "UnderflowError",
    "IdentityViolationError",
    "SolverConfig",
    "IterationRecord",
    "SolveResult",
    "init_deterministic",
    "init_random",
    "step_simultaneous",
    "step_sequential",
    "step_unnormalized",
    "gain_components",
    "solve",
]

# A left-factor column with at most this much mass counts as dead: the
# factorization has effectively dropped to a smaller inner size.
DEAD_COLUMN_TOL = 1e-12

STATUS_CONVERGED = "converged"
STATUS_MAX_ITERS = "max_iters"
STATUS_UNDERFLOW = "underflow"


class UnderflowError(RuntimeError):
    """A reconstruction entry hit exact zero against positive data, so the
    multiplicative update is no longer defined."""


class IdentityViolationError(RuntimeError):
    """An exact descent identity failed beyond its tolerance during a
    checked run."""


@dataclass(frozen=True)
class SolverConfig:
    """Settings for :func:`solve`.

    ``tol_gain`` is relative: the run stops once the per-iteration gain drops
    to ``tol_gain * max(1, divergence)``.  With ``record_components`` each
    trace record carries the exact two-part gain split (one extra tensor pass
    per iteration).  ``underflow_guard`` turns zero reconstruction entries
    against positive data into a clean ``underflow`` stop instead of
    propagating infinities.
    """

    inner_size: int
    max_iters: int = 1000
    tol_gain: float = 1e-10
    variant: str = "simultaneous"
    init: str = "deterministic"
    seed: int = 0
    record_components: bool = False
    underflow_guard: bool = True

    def __post_init__(self):
        if self.inner_size < 1:
            raise ValueError("inner_size must be at least 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not self.tol_gain > 0:
            raise ValueError("tol_gain must be positive")
        if self.variant not in ("simultaneous", "sequential", "unnormalized"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.init not in ("deterministic", "random"):
            raise ValueError(f"unknown init {self.init!r}")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


@dataclass(frozen=True)
class IterationRecord:
    """One step of the trace.

    ``divergence`` is the objective before the step and ``gain`` its decrease
    across the step.  When recorded, ``gain_marginal`` + ``gain_factor``
    equals the gain up to ``gain_residual``, which the exact split keeps at
    rounding level.
    """

    iteration: int
    divergence: float
    gain: float
    gain_marginal: float | None = None
    gain_factor: float | None = None
    gain_residual: float | None = None


@dataclass(frozen=True)
class SolveResult:
    pair: FactorPair
    trace: tuple[IterationRecord, ...]
    status: str
    final_divergence: float
    effective_inner_size: int


def init_deterministic(v, inner_size: int) -> FactorPair:
    """Closed-form starting pair built from row and column mass profiles.

    The left factor repeats the row-sum distribution across all ``inner_size``
    columns (scaled to total mass one) and every right row equals the
    column-sum distribution.  The starting divergence is always finite, and
    the pair is interior exactly when ``v`` has no zero row or column.
    """
    a = as_nonneg_matrix(v)
    total = float(a.sum())
    if total == 0.0:
        raise _degenerate()
    m, n = a.shape
    k = _checked_inner_size(inner_size, m, n)
    left = np.repeat(a.sum(axis=1)[:, None], k, axis=1) / (k * total)
    right = np.repeat((a.sum(axis=0) / total)[None, :], k, axis=0)
    return FactorPair(left, right)


def init_random(v, inner_size: int, seed: int) -> FactorPair:
    """Strictly interior random pair, reproducible from ``seed``.

    Entries are drawn uniformly from (1e-6, 1) and normalized: the left
    factor globally to total mass one, the right factor row by row.
    """
    a = as_nonneg_matrix(v)
    if float(a.sum()) == 0.0:
        raise _degenerate()
    m, n = a.shape
    k = _checked_inner_size(inner_size, m, n)
    rng = np.random.default_rng(seed)
    left = rng.uniform(1e-6, 1.0, size=(m, k))
    right = rng.uniform(1e-6, 1.0, size=(k, n))
    return FactorPair(left / left.sum(), right / right.sum(axis=1, keepdims=True))


def _degenerate():
    from .core import DegenerateMatrixError

    return DegenerateMatrixError("matrix is identically zero")


def _checked_inner_size(k: int, m: int, n: int) -> int:
    if not 1 <= k <= min(m, n):
        raise ValueError(f"inner size {k} outside [1, min({m}, {n})]")
    return k


def _ratio(data: np.ndarray, recon: np.ndarray, guard: bool) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(data > 0, data / recon, 0.0)
    if guard and not np.all(np.isfinite(r)):
        raise UnderflowError("reconstruction vanished on the support of the data")
    return r


def _normalize_rows(raw: np.ndarray) -> np.ndarray:
    mass = raw.sum(axis=1)
    if mass.min() > 0.0:
        return raw / mass[:, None]
    out = np.empty_like(raw)
    alive = mass > 0
    out[alive] = raw[alive] / mass[alive, None]
    out[~alive] = 1.0 / raw.shape[1]
    return out


def _step_simultaneous(p, left, right, guard=True):
    r = _ratio(p, left @ right, guard)
    new_left = left * (r @ right.T)
    new_right = _normalize_rows(right * (left.T @ r))
    return new_left, new_right


def _step_sequential(p, left, right, guard=True):
    new_left = left * (_ratio(p, left @ right, guard) @ right.T)
    r2 = _ratio(p, new_left @ right, guard)
    new_right = _normalize_rows(right * (new_left.T @ r2))
    return new_left, new_right


def _step_unnormalized(v, w, h, guard=True):
    r = _ratio(v, w @ h, guard)
    new_w = w * (r @ h.T)
    new_h = _normalize_rows(h * (w.T @ r))
    return new_w, new_h


def step_simultaneous(p, pair: FactorPair) -> FactorPair:
    """One full update of both factors from the current pair.

    Never increases D(p || left @ right); equals composing the marginal
    projection with the factor projection in the lifted space.  Raises
    ``UnderflowError`` if the reconstruction is zero where ``p`` is positive.
    """
    target = as_prob_matrix(p, tol=INPUT_TOL)
    _check_compatible(target, pair)
    new_left, new_right = _step_simultaneous(target, pair.left, pair.right)
    return FactorPair(new_left, new_right)


def step_sequential(p, pair: FactorPair) -> FactorPair:
    """Update the left factor, then the right factor using the new left.

    Each half-step is a partial minimization, so the objective cannot
    increase across either half.
    """
    target = as_prob_matrix(p, tol=INPUT_TOL)
    _check_compatible(target, pair)
    new_left, new_right = _step_sequential(target, pair.left, pair.right)
    return FactorPair(new_left, new_right)


def step_unnormalized(v, w, h) -> tuple[np.ndarray, np.ndarray]:
    """One multiplicative update of raw factors ``(w, h)`` against data ``v``.

    ``h`` must be row-stochastic; the update preserves that, and the new
    ``w`` has row sums equal to those of ``v`` (hence total mass equal to
    ``v``'s).  Rescaling ``w`` by its total maps the trajectory onto the
    simultaneous normalized one.
    """
    a = as_nonneg_matrix(v)
    wm = as_nonneg_matrix(w)
    hm = as_nonneg_matrix(h)
    if wm.shape[0] != a.shape[0] or hm.shape[1] != a.shape[1] or wm.shape[1] != hm.shape[0]:
        raise ValueError(
            f"incompatible shapes: v {a.shape}, w {wm.shape}, h {hm.shape}"
        )
    if np.max(np.abs(hm.sum(axis=1) - 1.0)) > INPUT_TOL:
        raise ValueError("h must be row-stochastic")
    return _step_unnormalized(a, wm, hm)


def _product_tensor(left, right):
    return left[:, :, None] * right[None, :, :]


def _projected_tensor(p, left, right):
    t = _product_tensor(left, right)
    ratio = _ratio(p, t.sum(axis=1), guard=False)
    return t * ratio[:, None, :]


def _endpoint_components(p, left, right, new_left, new_right):
    # Exact split of the gain for the simultaneous map: divergence between
    # successive marginal projections plus divergence between successive
    # product tensors.
    proj_before = _projected_tensor(p, left, right)
    proj_after = _projected_tensor(p, new_left, new_right)
    gain_marginal = _i_div_arrays(proj_before, proj_after)
    gain_factor = _i_div_arrays(
        _product_tensor(new_left, new_right), _product_tensor(left, right)
    )
    return gain_marginal, gain_factor


def _masked_log_sum(weights: np.ndarray, num: np.ndarray, den: np.ndarray) -> float:
    mask = weights > 0
    if not np.any(mask):
        return 0.0
    return float(np.sum(weights[mask] * np.log(num[mask] / den[mask])))


def _sequential_components(p, left, right, new_left, new_right):
    # The endpoint split above is exact only for the simultaneous map; for
    # the sequential variant the gain decomposes per half-step instead.  The
    # marginal part chains the projections through the intermediate pair and
    # the factor part sums the left-marginal and conditional-row divergences
    # of the two partial updates.
    proj0 = _projected_tensor(p, left, right)
    proj_mid = _projected_tensor(p, new_left, right)
    proj1 = _projected_tensor(p, new_left, new_right)
    gain_marginal = _i_div_arrays(proj0, proj_mid) + _i_div_arrays(proj_mid, proj1)
    left_leg = _i_div_arrays(new_left, left)
    mid_marginal = proj_mid.sum(axis=0)
    right_leg = _masked_log_sum(mid_marginal, new_right, right)
    return gain_marginal, left_leg + right_leg


def gain_components(p, pair_before: FactorPair, pair_after: FactorPair):
    """Exact two-part split of the gain of one simultaneous step.

    Returns ``(gain_marginal, gain_factor, residual)`` where the first term
    is the divergence between the marginal projections at the two pairs, the
    second the divergence between their product tensors, and the residual
    ``|gain - gain_marginal - gain_factor|``.  The residual stays at rounding
    level only when ``pair_after`` is the simultaneous step output for
    ``pair_before``; otherwise it is reported, not raised.
    """
    target = as_prob_matrix(p, tol=INPUT_TOL)
    _check_compatible(target, pair_before)
    _check_compatible(target, pair_after)
    gain = _i_div_arrays(target, pair_before.product()) - _i_div_arrays(
        target, pair_after.product()
    )
    gain_marginal, gain_factor = _endpoint_components(
        target, pair_before.left, pair_before.right, pair_after.left, pair_after.right
    )
    return gain_marginal, gain_factor, abs(gain - gain_marginal - gain_factor)


def _check_compatible(p: np.ndarray, pair: FactorPair) -> None:
    m, _, n = pair.shape
    if p.shape != (m, n):
        raise ValueError(f"matrix shape {p.shape} does not match pair shape {(m, n)}")


def _effective_inner_size(left: np.ndarray) -> int:
    return int(np.count_nonzero(left.sum(axis=0) > DEAD_COLUMN_TOL))


# Steps with gains below this relative floor are indistinguishable from
# rounding noise; the solver records them but does not adopt them, so a
# detected fixed point is returned as-is.
_ADOPTION_FLOOR = 1e-14


class _FastObjective:
    """Per-iteration divergence and update ratio against a fixed target.

    The target's support mask and positive entries are precomputed once; the
    divergence uses sum(recon) - sum(target) + sum(target * log(ratio)),
    which agrees with the elementwise kernel to rounding level at a fraction
    of the cost.  Never raises: a reconstruction that vanished on the
    target's support simply yields an infinite divergence and ratio.
    """

    def __init__(self, target: np.ndarray):
        self.shape = target.shape
        self.pos = target > 0
        self.target_pos = target[self.pos]
        self.target_total = float(target.sum())

    # Callers hold an errstate suppressing divide warnings; the ratio is
    # strictly positive (possibly +inf), so the divergence is +inf exactly
    # when the reconstruction vanished somewhere on the support.

    def ratio_on_support(self, recon: np.ndarray) -> np.ndarray:
        return self.target_pos / recon[self.pos]

    def divergence(self, recon: np.ndarray, ratio_pos: np.ndarray) -> float:
        return (float(recon.sum()) - self.target_total) + float(
            self.target_pos @ np.log(ratio_pos)
        )

    def expand(self, ratio_pos: np.ndarray) -> np.ndarray:
        ratio = np.zeros(self.shape)
        ratio[self.pos] = ratio_pos
        return ratio


def solve(
    v,
    config: SolverConfig,
    *,
    initial_pair: FactorPair | None = None,
    check_identities: bool = False,
) -> SolveResult:
    """Run the alternating-minimization scheme on nonnegative data ``v``.

    The data is normalized internally; the returned pair factors the
    probability matrix ``v / sum(v)`` (rescale the left factor by the total
    to recover raw factors).  Iteration stops when the relative gain falls
    below ``config.tol_gain``, the iteration budget runs out, or the
    underflow guard trips; the status field reports which.

    ``initial_pair`` overrides the configured initialization (shape-checked,
    used as-is).  With ``check_identities`` every iteration additionally
    verifies the exact descent identities (projection consistency, both
    Pythagorean splits, the auxiliary-function gain identities, and the gain
    decomposition) and raises ``IdentityViolationError`` on the first failure
    beyond ``1e-10 * max(1, divergence)``.

    Raises ``DegenerateMatrixError`` for an all-zero ``v``: no finite
    iterate exists and the status vocabulary has nothing to report.
    """
    scaled = normalize_problem(v)
    p = scaled.p
    m, n = p.shape
    _checked_inner_size(config.inner_size, m, n)

    if initial_pair is not None:
        _check_compatible(p, initial_pair)
        if initial_pair.inner_size != config.inner_size:
            raise ValueError("initial pair inner size disagrees with config")
        pair0 = initial_pair
    elif config.init == "random":
        pair0 = init_random(v, config.inner_size, config.seed)
    else:
        pair0 = init_deterministic(v, config.inner_size)

    left = np.array(pair0.left)
    right = np.array(pair0.right)
    unnormalized = config.variant == "unnormalized"
    if unnormalized:
        data = as_nonneg_matrix(v)
        w = scaled.total * left
        h = right.copy()

    guard = config.underflow_guard
    want_components = config.record_components or check_identities
    records: list[IterationRecord] = []
    status = STATUS_MAX_ITERS
    div_after = math.inf
    prev_projection = None
    objective = _FastObjective(p)
    data_objective = _FastObjective(data) if unnormalized else None
    sequential = config.variant == "sequential"

    with np.errstate(divide="ignore", invalid="ignore"):
        recon = ((w @ h) / w.sum()) if unnormalized else (left @ right)
        ratio_pos = objective.ratio_on_support(recon)
        div_before = objective.divergence(recon, ratio_pos)
        div_after = div_before

        for t in range(config.max_iters):
            try:
                if guard and math.isinf(div_before):
                    raise UnderflowError(
                        "reconstruction vanished on the support of the data"
                    )
                if unnormalized:
                    data_ratio = data_objective.expand(
                        data_objective.ratio_on_support(w @ h)
                    )
                    new_w = w * (data_ratio @ h.T)
                    new_h = _normalize_rows(h * (w.T @ data_ratio))
                    new_left, new_right = new_w / new_w.sum(), new_h
                elif sequential:
                    new_left = left * (objective.expand(ratio_pos) @ right.T)
                    mid_pos = objective.ratio_on_support(new_left @ right)
                    if guard and np.isinf(mid_pos).any():
                        raise UnderflowError(
                            "reconstruction vanished on the support of the data"
                        )
                    ratio_mid = objective.expand(mid_pos)
                    new_right = _normalize_rows(right * (new_left.T @ ratio_mid))
                else:
                    ratio = objective.expand(ratio_pos)
                    new_left = left * (ratio @ right.T)
                    new_right = _normalize_rows(right * (left.T @ ratio))
            except UnderflowError:
                status = STATUS_UNDERFLOW
                div_after = div_before
                break

            new_recon = new_left @ new_right
            new_ratio_pos = objective.ratio_on_support(new_recon)
            div_after = objective.divergence(new_recon, new_ratio_pos)
            gain = div_before - div_after

            gain_marginal = gain_factor = gain_residual = None
            if want_components:
                if sequential:
                    gain_marginal, gain_factor = _sequential_components(
                        p, left, right, new_left, new_right
                    )
                else:
                    gain_marginal, gain_factor = _endpoint_components(
                        p, left, right, new_left, new_right
                    )
                gain_residual = abs(gain - gain_marginal - gain_factor)

            if check_identities:
                _audit_iteration(
                    p, left, right, div_before, gain_residual, prev_projection, t
                )
                prev_projection = _projected_tensor(p, left, right)

            records.append(
                IterationRecord(
                    iteration=t,
                    divergence=div_before,
                    gain=gain,
                    gain_marginal=gain_marginal if config.record_components else None,
                    gain_factor=gain_factor if config.record_components else None,
                    gain_residual=gain_residual if config.record_components else None,
                )
            )

            if gain <= config.tol_gain * max(1.0, div_before):
                status = STATUS_CONVERGED
                # The probe step is recorded either way, but adopted only when
                # its gain clears rounding noise; a detected fixed point is
                # returned exactly as it stands.
                if gain > _ADOPTION_FLOOR * max(1.0, div_before):
                    left, right = new_left, new_right
                else:
                    div_after = div_before
                break
            left, right = new_left, new_right
            recon, ratio_pos, div_before = new_recon, new_ratio_pos, div_after
            if unnormalized:
                w, h = new_w, new_h

    return SolveResult(
        pair=FactorPair(left, right),
        trace=tuple(records),
        status=status,
        final_divergence=div_after,
        effective_inner_size=_effective_inner_size(left),
    )


def _audit_iteration(p, left, right, div_before, gain_residual, prev_projection, t):
    # Identity audit at the current iterate.  All identities are exact in
    # real arithmetic; anything beyond rounding level means the invariants
    # have been broken (bad input support or an implementation fault).
    from .diagnostics import aux_gain_identities
    from .lifted import (
        pythagorean_residual_factor,
        pythagorean_residual_marginal,
    )

    bound = 1e-10 * max(1.0, div_before)
    failures = []

    current = _projected_tensor(p, left, right)
    consistency = abs(_i_div_arrays(current, _product_tensor(left, right)) - div_before)
    if consistency > bound:
        failures.append(("projection consistency", consistency))

    if prev_projection is not None:
        q_tensor = _product_tensor(left, right)
        r_marg = pythagorean_residual_marginal(p, prev_projection, q_tensor)
        if r_marg > bound:
            failures.append(("marginal Pythagorean rule", r_marg))
        r_fac = pythagorean_residual_factor(prev_projection, q_tensor)
        if r_fac > bound:
            failures.append(("factor Pythagorean rule", r_fac))

    pair = FactorPair(left, right)
    for name, residual in zip(
        ("left auxiliary identity", "right auxiliary identity", "full auxiliary identity"),
        aux_gain_identities(p, pair),
    ):
        if residual > bound:
            failures.append((name, residual))

    if gain_residual is not None and gain_residual > bound:
        failures.append(("gain decomposition", gain_residual))

    if failures:
        detail = "; ".join(f"{name}: {res:.3e}" for name, res in failures)
        raise IdentityViolationError(f"iteration {t}: {detail} (bound {bound:.3e})")
