"""Parameter sweeps over the built-in state families, critical-angle location, and the
criteria-coverage report.

Angles where a criterion crosses its classical bound are located by a fixed-step scan
followed by bisection; angles where the value only touches the bound (no sign change)
are found separately by locating local minima of |value - bound| and refining them by
golden-section search. Crossings and touch-points are distinguished by ``kind`` and by
a zero-width bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, Mapping

import numpy as np

from .criteria import CHSH_CLASSICAL_BOUND, chsh_max, entropic_value, reid_value
from .fock import FockState, make_psi, make_psi_prime
from .quadrature import DEFAULT_SPEC, QuadratureSpec

__all__ = [
    "CRITERIA",
    "STATE_BUILDERS",
    "CriticalAngle",
    "SweepResult",
    "HierarchyReport",
    "NoRootInRange",
    "sweep",
    "find_critical_angles",
    "hierarchy_report",
]

CRITERIA = ("reid", "entropic", "chsh")

STATE_BUILDERS: Mapping[str, Callable[[float], FockState]] = {
    "psi": make_psi,
    "psi-prime": make_psi_prime,
}

_SCAN_STEP = 0.01       # two orders below every inter-root gap of the built-in families
_TOUCH_TOL = 1e-9       # |value - bound| at a refined extremum to count as a touch-point
_TOUCH_GATE = 1e-3      # coarse gate on grid values before refining an extremum
_SNAP_TOL = 1e-4        # touch angles this close to 0, pi/2, pi snap to the exact point


class NoRootInRange(LookupError):
    """No sign change and no touch-point of the criterion over [0, pi]."""


@dataclass(frozen=True)
class CriticalAngle:
    criterion: str
    angle: float
    bracket: tuple[float, float]
    residual: float
    kind: str  # "crossing" | "touch"


@dataclass(frozen=True)
class SweepResult:
    state_id: str
    thetas: tuple[float, ...]
    values: Mapping[str, tuple[float, ...]]
    criticals: tuple[CriticalAngle, ...] = ()
    flagged: tuple[tuple[str, float], ...] = ()  # (criterion, theta) with unmet tolerance


@dataclass(frozen=True)
class HierarchyReport:
    """Where each detector fires, as unions of open intervals (lo, hi).

    Spans never merge across a bound-touching angle, so an isolated excluded point
    (e.g. pi/2) appears as a zero-width gap between two spans. ``undetected_steering``
    is the CHSH-violating region minus both detected regions: Bell nonlocality there
    guarantees steering that neither criterion sees, hence ``criteria_incomplete``.
    """

    state_id: str
    chsh_violation_region: tuple[tuple[float, float], ...]
    reid_detected: tuple[tuple[float, float], ...]
    entropic_detected: tuple[tuple[float, float], ...]
    undetected_steering: tuple[tuple[float, float], ...]
    criteria_incomplete: bool


def _builder(state_id: str) -> Callable[[float], FockState]:
    key = state_id.replace("_", "-").lower()
    if key not in STATE_BUILDERS:
        raise ValueError(f"unknown state id {state_id!r}; expected one of {sorted(STATE_BUILDERS)}")
    return STATE_BUILDERS[key]


def _evaluate(criterion: str, state: FockState, spec: QuadratureSpec, theta: float):
    if criterion == "reid":
        return reid_value(state, spec=spec, theta=theta)
    if criterion == "entropic":
        return entropic_value(state, spec=spec, theta=theta)
    if criterion == "chsh":
        return chsh_max(state, theta=theta)
    raise ValueError(f"unknown criterion {criterion!r}; expected one of {CRITERIA}")


def sweep(state_id: str, criteria_set: Iterable[str], n_points: int,
          spec: QuadratureSpec = DEFAULT_SPEC, theta_min: float = 0.0,
          theta_max: float = math.pi, locate_criticals: bool = False) -> SweepResult:
    """Evaluate the requested criteria on a uniform theta grid.

    Results are emitted in grid order; the per-theta evaluations are independent, so
    the output does not depend on any execution interleaving. Unmet quadrature
    tolerances are collected in ``flagged`` without aborting the sweep. With
    ``locate_criticals`` the bound-meeting angles of each requested criterion are
    attached (see find_critical_angles).
    """
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if not theta_min < theta_max:
        raise ValueError("theta_min must be < theta_max")
    build = _builder(state_id)
    wanted = [c for c in CRITERIA if c in set(criteria_set)]
    if not wanted:
        raise ValueError("criteria_set must name at least one known criterion")
    thetas = np.linspace(theta_min, theta_max, n_points)
    columns: dict[str, list[float]] = {c: [] for c in wanted}
    flagged: list[tuple[str, float]] = []
    for theta in thetas.tolist():
        state = build(theta)
        for c in wanted:
            res = _evaluate(c, state, spec, theta)
            columns[c].append(res.value)
            if not res.converged:
                flagged.append((c, theta))
    criticals: tuple[CriticalAngle, ...] = ()
    if locate_criticals:
        located: list[CriticalAngle] = []
        for c in wanted:
            try:
                located.extend(find_critical_angles(state_id, c, spec))
            except NoRootInRange:
                pass
        criticals = tuple(sorted(located, key=lambda r: (r.angle, r.criterion)))
    return SweepResult(
        state_id=state_id,
        thetas=tuple(thetas.tolist()),
        values={c: tuple(col) for c, col in columns.items()},
        criticals=criticals,
        flagged=tuple(flagged),
    )


def _bisect(f: Callable[[float], float], lo: float, hi: float, f_lo: float,
            root_tol: float) -> tuple[float, tuple[float, float], float]:
    while hi - lo > root_tol:
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0.0:
            return mid, (mid, mid), 0.0
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    angle = 0.5 * (lo + hi)
    return angle, (lo, hi), abs(f(angle))


_GOLDEN = 0.5 * (math.sqrt(5.0) - 1.0)


def _refine_minimum(f: Callable[[float], float], lo: float, hi: float,
                    root_tol: float) -> tuple[float, float]:
    """Golden-section minimization of |f| (for bound-touching extrema)."""
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc, fd = abs(f(c)), abs(f(d))
    while hi - lo > root_tol:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = abs(f(c))
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = abs(f(d))
    angle = 0.5 * (lo + hi)
    return angle, abs(f(angle))


def find_critical_angles(state_id: str, criterion: str,
                         spec: QuadratureSpec = DEFAULT_SPEC,
                         root_tol: float = 1e-6) -> tuple[CriticalAngle, ...]:
    """Locate every angle in [0, pi] where the criterion meets its classical bound.

    A 0.01-step scan finds sign changes of value - bound, each bisected to width
    <= root_tol. Bound-touching extrema (no sign change) are detected from local
    minima of the scanned |value - bound| and refined by golden section; they are
    reported with kind="touch" and a zero-width bracket. Raises NoRootInRange when
    neither kind exists. Results are memoized: the location is a pure deterministic
    function of its arguments, and the report layer re-requests the same scans.
    """
    if root_tol <= 0:
        raise ValueError("root_tol must be positive")
    _builder(state_id)  # validate before normalizing the cache key
    return _find_critical_angles_cached(state_id.replace("_", "-").lower(),
                                        criterion, spec, root_tol)


@lru_cache(maxsize=128)
def _find_critical_angles_cached(state_id: str, criterion: str, spec: QuadratureSpec,
                                 root_tol: float) -> tuple[CriticalAngle, ...]:
    build = _builder(state_id)
    bound = CHSH_CLASSICAL_BOUND if criterion == "chsh" else 0.0

    def f(theta: float) -> float:
        return _evaluate(criterion, build(theta), spec, theta).value - bound

    grid = np.append(np.arange(0.0, math.pi, _SCAN_STEP), math.pi)
    values = np.array([f(t) for t in grid.tolist()])

    found: list[CriticalAngle] = []
    for i in range(grid.size - 1):
        f0, f1 = values[i], values[i + 1]
        if f0 == 0.0 or f1 == 0.0:
            continue  # exact grid zeros are classified below
        if (f0 > 0.0) != (f1 > 0.0):
            angle, bracket, residual = _bisect(f, float(grid[i]), float(grid[i + 1]), float(f0), root_tol)
            found.append(CriticalAngle(criterion, angle, bracket, residual, "crossing"))

    for i in np.flatnonzero(values == 0.0):
        left = values[i - 1] if i > 0 else None
        right = values[i + 1] if i + 1 < values.size else None
        if left is not None and right is not None and (left > 0.0) != (right > 0.0):
            kind = "crossing"
        else:
            kind = "touch"
        angle = float(grid[i])
        found.append(CriticalAngle(criterion, angle, (angle, angle), 0.0, kind))

    for i in range(1, grid.size - 1):
        fi = values[i]
        if fi == 0.0 or abs(fi) > _TOUCH_GATE:
            continue
        if abs(fi) <= abs(values[i - 1]) and abs(fi) <= abs(values[i + 1]) \
                and (values[i - 1] > 0.0) == (fi > 0.0) == (values[i + 1] > 0.0):
            angle, residual = _refine_minimum(f, float(grid[i - 1]), float(grid[i + 1]), root_tol)
            if residual <= _TOUCH_TOL:
                found.append(CriticalAngle(criterion, angle, (angle, angle), residual, "touch"))

    if not found:
        raise NoRootInRange(f"{criterion} never meets its bound for state {state_id!r}")
    return tuple(sorted(found, key=lambda r: r.angle))


def _snap(angle: float) -> float:
    for special in (0.0, 0.5 * math.pi, math.pi):
        if abs(angle - special) < _SNAP_TOL:
            return special
    return angle


def _violation_spans(state_id: str, criterion: str, roots: tuple[CriticalAngle, ...],
                     spec: QuadratureSpec) -> tuple[tuple[float, float], ...]:
    """Open intervals between consecutive bound-meeting angles where the criterion is
    strictly violated (probed at interval midpoints)."""
    build = _builder(state_id)
    bound = CHSH_CLASSICAL_BOUND if criterion == "chsh" else 0.0
    cuts = [0.0]
    for r in roots:
        a = _snap(r.angle)
        if cuts[-1] + 1e-9 < a < math.pi - 1e-9:
            cuts.append(a)
    cuts.append(math.pi)
    spans = []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        mid = 0.5 * (lo + hi)
        if _evaluate(criterion, build(mid), spec, mid).value > bound:
            spans.append((lo, hi))
    return tuple(spans)


def _subtract_spans(spans, minus):
    out = []
    for lo, hi in spans:
        pieces = [(lo, hi)]
        for m_lo, m_hi in minus:
            trimmed = []
            for p_lo, p_hi in pieces:
                if m_hi <= p_lo or m_lo >= p_hi:
                    trimmed.append((p_lo, p_hi))
                    continue
                if m_lo > p_lo:
                    trimmed.append((p_lo, m_lo))
                if m_hi < p_hi:
                    trimmed.append((m_hi, p_hi))
            pieces = trimmed
        out.extend(p for p in pieces if p[1] - p[0] > 1e-12)
    return tuple(sorted(out))


def hierarchy_report(state_id: str, spec: QuadratureSpec = DEFAULT_SPEC) -> HierarchyReport:
    """Compose critical angles into the detector-coverage report.

    undetected_steering = (CHSH-violating region) minus (Reid region) minus (entropic
    region). Nonempty for both built-in families: in that set the state is Bell
    nonlocal, hence steerable, yet neither steering criterion fires.
    """
    reid_spans = _violation_spans(state_id, "reid",
                                  find_critical_angles(state_id, "reid", spec), spec)
    ent_spans = _violation_spans(state_id, "entropic",
                                 find_critical_angles(state_id, "entropic", spec), spec)
    chsh_spans = _violation_spans(state_id, "chsh",
                                  find_critical_angles(state_id, "chsh", spec), spec)
    undetected = _subtract_spans(_subtract_spans(chsh_spans, reid_spans), ent_spans)
    return HierarchyReport(
        state_id=state_id,
        chsh_violation_region=chsh_spans,
        reid_detected=reid_spans,
        entropic_detected=ent_spans,
        undetected_steering=undetected,
        criteria_incomplete=any(hi - lo > 0.0 for lo, hi in undetected),
    )
