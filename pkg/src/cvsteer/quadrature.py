"""Numerical integration engines.

Two deliberately separate tools:

* Gauss-Hermite rules for moment integrals of the form polynomial x exp(-scale*r^2),
  which they integrate exactly up to the rule degree.
* An adaptive Gauss-Kronrod panel integrator for differential-entropy integrands
  ``-g ln g``, whose integrable logarithmic zeros rule out fixed polynomial rules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "QuadratureSpec",
    "DEFAULT_SPEC",
    "GaussHermiteRule",
    "gauss_hermite_rule",
    "ConvergenceFailure",
    "IntegralResult",
    "integrate_moment_1d",
    "integrate_moment_2d",
    "integrate_entropy_1d",
    "integrate_entropy_2d",
    "adaptive_panels",
    "ENTROPY_FLOOR",
]

SQRT_PI = math.sqrt(math.pi)

# Densities below this floor contribute exactly 0 to entropy integrands (0*ln 0 = 0).
ENTROPY_FLOOR = 1e-300


class ConvergenceFailure(RuntimeError):
    """Gauss-Hermite rule construction failed; signals a bug, not user error."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Precision budget shared by all integration routines.

    gh_order    tensor Gauss-Hermite order for moment integrals
    half_width  truncation L of panel integrals to [-L, L]
    panel_tol   absolute tolerance for one adaptive panel integral
    max_depth   bisection depth limit per panel
    """

    gh_order: int = 64
    half_width: float = 8.0
    panel_tol: float = 1e-10
    max_depth: int = 40

    def __post_init__(self):
        if self.gh_order < 2:
            raise ValueError("gh_order must be >= 2")
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        if not 0.0 < self.panel_tol < 1.0:
            raise ValueError("panel_tol must lie in (0, 1)")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


DEFAULT_SPEC = QuadratureSpec()


@dataclass(frozen=True)
class GaussHermiteRule:
    """Nodes and weights for the weight function exp(-y^2) on the real line.

    ``modified_weights`` are weights[i] * exp(nodes[i]^2); they stay O(1) at any order
    and let integrands carry their own Gaussian without underflow.
    """

    nodes: np.ndarray
    weights: np.ndarray
    modified_weights: np.ndarray

    @property
    def order(self) -> int:
        return self.nodes.size


def _osc_pair(order: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal oscillator functions (u_{order-1}, u_order) at x, co-evaluated with
    their Gaussian so the recurrence stays bounded at any order."""
    prev = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    cur = math.sqrt(2.0) * x * prev
    for n in range(2, order + 1):
        prev, cur = cur, math.sqrt(2.0 / n) * x * cur - math.sqrt((n - 1.0) / n) * prev
    return prev, cur


@lru_cache(maxsize=64)
def gauss_hermite_rule(order: int) -> GaussHermiteRule:
    """Golub-Welsch construction: eigen-decompose the Hermite Jacobi matrix.

    The Jacobi matrix for the (physicists') Hermite weight has zero diagonal and
    off-diagonal entries sqrt(k/2); its eigenvalues are the nodes. Eigenvector-based
    weights lose all relative accuracy in the far tail (the extreme components sit at
    the eigensolver's absolute noise floor), so after a Newton polish of the nodes the
    weights come from the orthonormal-function identity w_i exp(x_i^2) =
    1 / (order * u_{order-1}(x_i)^2), which is relatively accurate at every node.
    """
    if order < 2:
        raise ValueError("order must be >= 2")
    k = np.arange(1, order)
    jacobi = np.diag(np.sqrt(k / 2.0), 1) + np.diag(np.sqrt(k / 2.0), -1)
    try:
        nodes = np.linalg.eigvalsh(jacobi)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - library failure path
        raise ConvergenceFailure(f"Hermite Jacobi eigen-decomposition failed at order {order}") from exc
    for _ in range(2):
        u_prev, u_cur = _osc_pair(order, nodes)
        deriv = math.sqrt(2.0 * order) * u_prev - nodes * u_cur
        step = u_cur / deriv
        if not np.all(np.isfinite(step)):  # pragma: no cover - would signal a bug
            raise ConvergenceFailure(f"Newton polish failed at order {order}")
        nodes = nodes - step
    # Enforce the exact +/- symmetry of the rule.
    nodes = 0.5 * (nodes - nodes[::-1])
    u_prev, _ = _osc_pair(order, nodes)
    modified = 1.0 / (order * u_prev * u_prev)
    modified = 0.5 * (modified + modified[::-1])
    weights = modified * np.exp(-nodes * nodes)
    for arr in (nodes, weights, modified):
        arr.setflags(write=False)
    return GaussHermiteRule(nodes=nodes, weights=weights, modified_weights=modified)


def integrate_moment_1d(f: Callable[[np.ndarray], np.ndarray], rule: GaussHermiteRule,
                        gaussian_scale: float = 1.0) -> float:
    """Integrate f over the real line, f = polynomial x exp(-gaussian_scale*a^2).

    Exact (to rounding) for polynomial degree <= 2*order - 1.
    """
    root = math.sqrt(gaussian_scale)
    x = rule.nodes / root
    return float(rule.modified_weights @ np.asarray(f(x), dtype=float)) / root


def integrate_moment_2d(f: Callable[[np.ndarray, np.ndarray], np.ndarray], rule: GaussHermiteRule,
                        gaussian_scale: float = 1.0) -> float:
    """Tensor-product Gauss-Hermite integral of f(a, b) = poly x exp(-scale*(a^2+b^2)).

    The change of variables absorbs ``gaussian_scale``; f is evaluated on the full
    node mesh in one call and must broadcast.
    """
    root = math.sqrt(gaussian_scale)
    x = rule.nodes / root
    values = np.asarray(f(x[:, None], x[None, :]), dtype=float)
    mw = rule.modified_weights
    return float(mw @ values @ mw) / gaussian_scale


@dataclass(frozen=True)
class IntegralResult:
    """Value plus error estimate; ``converged=False`` means the tolerance was not met
    within max_depth (the value is still the best available estimate)."""

    value: float
    error: float
    converged: bool


# 15-point Kronrod nodes with embedded 7-point Gauss weights (zero where the node is
# Kronrod-only). Standard tabulated values, accurate to double precision.
_GK_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769, -0.741531185599394,
    -0.586087235467691, -0.405845151377397, -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691, 0.741531185599394,
    0.864864423359769, 0.949107912342759, 0.991455371120813,
])
_GK_WEIGHTS = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_G7_WEIGHTS = np.array([
    0.0, 0.129484966168870, 0.0, 0.279705391489277, 0.0, 0.381830050505119, 0.0,
    0.417959183673469, 0.0, 0.381830050505119, 0.0, 0.279705391489277, 0.0,
    0.129484966168870, 0.0,
])


def _segments(lo: float, hi: float, breakpoints: Sequence[float]) -> list[tuple[float, float]]:
    """Initial panels of [lo, hi] pre-split at the given interior breakpoints."""
    cuts = [lo]
    for p in sorted(float(b) for b in breakpoints):
        if lo < p < hi and p - cuts[-1] > 1e-14 * (hi - lo):
            cuts.append(p)
    cuts.append(hi)
    return [(cuts[i], cuts[i + 1]) for i in range(len(cuts) - 1) if cuts[i + 1] > cuts[i]]


def _adaptive_many(f, task_of_seg, seg_lo, seg_hi, tol_per_task, max_depth, n_tasks):
    """Shared worklist refinement for a batch of independent panel integrals.

    ``f(task_ids, x)`` evaluates, elementwise, the integrand of task ``task_ids[i]`` at
    ``x[i]``. Every panel must meet the width-proportional share of its task's absolute
    tolerance; all pending panels of all tasks are evaluated in one vectorized call per
    sweep. Deterministic: panel ordering, splitting and accumulation are data-driven.
    """
    task = np.asarray(task_of_seg, dtype=np.intp)
    lo = np.asarray(seg_lo, dtype=float)
    hi = np.asarray(seg_hi, dtype=float)
    total_width = np.bincount(task, weights=hi - lo, minlength=n_tasks)
    depth = np.zeros(task.size, dtype=np.intp)

    values = np.zeros(n_tasks)
    errors = np.zeros(n_tasks)
    failed = np.zeros(n_tasks, dtype=bool)

    while task.size:
        half = 0.5 * (hi - lo)
        mid = lo + half
        pts = (mid[:, None] + half[:, None] * _GK_NODES).ravel()
        fv = f(np.repeat(task, _GK_NODES.size), pts).reshape(-1, _GK_NODES.size)
        ik = (fv @ _GK_WEIGHTS) * half
        ig = (fv @ _G7_WEIGHTS) * half
        perr = np.abs(ik - ig)
        share = tol_per_task[task] * (hi - lo) / total_width[task]
        ok = perr <= share
        # Roundoff floor of the panel sum: refining below it cannot reduce the error
        # estimate, so a tolerance under the floor would otherwise split forever.
        noise = 100.0 * np.finfo(float).eps * (np.abs(fv) @ _GK_WEIGHTS) * half
        stop = ok | (perr <= noise) | (depth >= max_depth)
        if np.any(stop):
            values += np.bincount(task[stop], weights=ik[stop], minlength=n_tasks)
            errors += np.bincount(task[stop], weights=perr[stop], minlength=n_tasks)
            exhausted = stop & ~ok
            if np.any(exhausted):
                failed[np.unique(task[exhausted])] = True
        keep = ~stop
        if not np.any(keep):
            break
        n_keep = int(keep.sum())
        task = np.repeat(task[keep], 2)
        new_lo = np.empty(2 * n_keep)
        new_hi = np.empty(2 * n_keep)
        new_lo[0::2] = lo[keep]
        new_lo[1::2] = mid[keep]
        new_hi[0::2] = mid[keep]
        new_hi[1::2] = hi[keep]
        lo, hi = new_lo, new_hi
        depth = np.repeat(depth[keep] + 1, 2)

    return values, errors, ~failed


def adaptive_panels(f: Callable[[np.ndarray], np.ndarray], lo: float, hi: float,
                    tol: float, max_depth: int,
                    breakpoints: Sequence[float] = ()) -> IntegralResult:
    """Adaptively integrate a vectorized integrand over [lo, hi] to absolute ``tol``."""
    segs = _segments(lo, hi, breakpoints)
    vals, errs, ok = _adaptive_many(
        lambda _t, x: np.asarray(f(x), dtype=float),
        np.zeros(len(segs), dtype=np.intp),
        [s[0] for s in segs], [s[1] for s in segs],
        np.array([tol]), max_depth, 1,
    )
    return IntegralResult(value=float(vals[0]), error=float(errs[0]), converged=bool(ok[0]))


def _neg_plogp(v: np.ndarray) -> np.ndarray:
    """Entropy integrand -v ln v with the 0*ln0 = 0 convention below ENTROPY_FLOOR.

    Never returns NaN or -inf: values at or below the floor (including any negative
    rounding noise of a nonnegative density) contribute exactly 0.
    """
    out = np.zeros_like(v)
    mask = v > ENTROPY_FLOOR
    vm = v[mask]
    out[mask] = -vm * np.log(vm)
    return out


def integrate_entropy_1d(g: Callable[[np.ndarray], np.ndarray], spec: QuadratureSpec,
                         breakpoints: Sequence[float] = ()) -> IntegralResult:
    """-int g ln g over [-L, L] by adaptive bisected panels.

    ``g`` must be vectorized and nonnegative with tail mass beyond +-L below 1e-12.
    Known zero locations of g should be passed as ``breakpoints``: panels are pre-split
    there, which restores fast convergence around the integrable log singularities.
    """
    L = spec.half_width
    return adaptive_panels(
        lambda x: _neg_plogp(np.asarray(g(x), dtype=float)),
        -L, L, spec.panel_tol, spec.max_depth, breakpoints,
    )


def integrate_entropy_2d(g: Callable[[np.ndarray, np.ndarray], np.ndarray], spec: QuadratureSpec,
                         inner_breakpoints: Callable[[np.ndarray], np.ndarray | None] | None = None,
                         outer_breakpoints: Sequence[float] = ()) -> IntegralResult:
    """-int int g ln g over [-L, L]^2 by iterated adaptive panels.

    ``g(a, b)`` must evaluate elementwise on same-length arrays. The inner (b) integrals
    for all pending outer abscissae are refined together in shared vectorized sweeps;
    results are cached per outer abscissa. ``inner_breakpoints(a_values)`` may return an
    (n, r) array (NaN-padded) of known zeros of b -> g(a, b) used as panel pre-splits.
    """
    L = spec.half_width
    inner_tol = spec.panel_tol / (8.0 * L)
    cache: dict[float, float] = {}
    inner_ok = [True]

    def _inner_batch(avals: np.ndarray) -> None:
        seg_task: list[int] = []
        seg_lo: list[float] = []
        seg_hi: list[float] = []
        hints = inner_breakpoints(avals) if inner_breakpoints is not None else None
        for t, a in enumerate(avals):
            row = () if hints is None else tuple(h for h in np.atleast_1d(hints[t]) if np.isfinite(h))
            for s_lo, s_hi in _segments(-L, L, row):
                seg_task.append(t)
                seg_lo.append(s_lo)
                seg_hi.append(s_hi)
        vals, _errs, ok = _adaptive_many(
            lambda tid, b: _neg_plogp(np.asarray(g(avals[tid], b), dtype=float)),
            seg_task, seg_lo, seg_hi,
            np.full(avals.size, inner_tol), spec.max_depth, avals.size,
        )
        if not ok.all():
            inner_ok[0] = False
        for a, v in zip(avals.tolist(), vals.tolist()):
            cache[a] = v

    def outer_f(x: np.ndarray) -> np.ndarray:
        missing = [a for a in x.tolist() if a not in cache]
        if missing:
            _inner_batch(np.asarray(missing))
        return np.array([cache[a] for a in x.tolist()])

    outer = adaptive_panels(outer_f, -L, L, spec.panel_tol, spec.max_depth, outer_breakpoints)
    return IntegralResult(
        value=outer.value,
        error=outer.error + 2.0 * L * inner_tol,
        converged=outer.converged and inner_ok[0],
    )
