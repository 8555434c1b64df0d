"""Two-mode harmonic-oscillator Fock superpositions and their densities.

Natural units throughout: hbar = 1, with the product m*omega kept as one configurable
positive scale. Position-domain eigenfunctions use the oscillator scale s = m*omega;
the momentum representation of the same state is the scale-inverted oscillator basis
(s -> 1/s) with an extra phase (-i)^n per excitation, fixed by the Fourier kernel
(2*pi)^(-1/2) exp(-i p x) applied per mode.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .quadrature import DEFAULT_SPEC, QuadratureSpec, gauss_hermite_rule

__all__ = [
    "Domain",
    "UnitSystem",
    "NATURAL_UNITS",
    "FockState",
    "DegenerateMarginal",
    "make_psi",
    "make_psi_prime",
    "hermite",
    "eigenfunction_x",
    "eigenfunction_p",
    "wavefunction",
    "joint_density",
    "marginal_density",
    "conditional_mean",
    "DENSITY_FLOOR",
]

# Marginals at or below this floor are degenerate: conditioning there is ill-defined and
# such points contribute zero to any weighted average (their weight is the marginal).
DENSITY_FLOOR = 1e-300

# Amplitudes below this are dropped by the constructors (exact product points survive
# the rounding of cos/sin at multiples of pi/2).
_AMP_DROP = 1e-15

_NORM_TOL = 1e-12
_PI_QUARTER = math.pi ** -0.25
_PHASE_MINUS_I = (1.0 + 0.0j, -1.0j, -1.0 + 0.0j, 1.0j)  # (-i)^n, exact


class Domain(enum.Enum):
    POSITION = "position"
    MOMENTUM = "momentum"


class DegenerateMarginal(ValueError):
    """Raised when a conditional is requested where the marginal is below the floor."""


@dataclass(frozen=True)
class UnitSystem:
    """hbar is pinned to 1 (the criteria constants 1/4 and ln(pi e) presuppose it);
    m_omega is the product m*omega, kept configurable for scale-invariance checks."""

    hbar: float = 1.0
    m_omega: float = 1.0

    def __post_init__(self):
        if self.hbar != 1.0:
            raise ValueError("hbar is fixed to 1 in this library")
        if not self.m_omega > 0:
            raise ValueError("m_omega must be positive")


NATURAL_UNITS = UnitSystem()


@dataclass(frozen=True)
class FockState:
    """Two-mode wavefunction as a finite list of (n1, n2, amplitude) Fock terms.

    Terms are unique in (n1, n2), sorted, and normalized: sum |amp|^2 = 1 within 1e-12
    (Fock products are orthonormal, so this is the norm). Build via ``from_terms``.
    """

    terms: tuple[tuple[int, int, complex], ...]
    max_n: int

    def __post_init__(self):
        seen = set()
        top = 0
        for n1, n2, _amp in self.terms:
            if n1 < 0 or n2 < 0 or n1 != int(n1) or n2 != int(n2):
                raise ValueError("Fock indices must be nonnegative integers")
            if (n1, n2) in seen:
                raise ValueError(f"duplicate Fock pair ({n1}, {n2})")
            seen.add((n1, n2))
            top = max(top, n1, n2)
        if not self.terms:
            raise ValueError("state must have at least one term")
        if abs(self.norm_sq() - 1.0) > _NORM_TOL:
            raise ValueError(f"state not normalized: sum |amp|^2 = {self.norm_sq()!r}")
        if self.max_n != top:
            raise ValueError("max_n does not match the largest Fock index")

    @classmethod
    def from_terms(cls, terms) -> "FockState":
        kept = [(int(n1), int(n2), complex(amp)) for n1, n2, amp in terms
                if abs(complex(amp)) >= _AMP_DROP]
        kept.sort(key=lambda t: (t[0], t[1]))
        top = max((max(n1, n2) for n1, n2, _ in kept), default=0)
        return cls(terms=tuple(kept), max_n=top)

    def norm_sq(self) -> float:
        return float(sum(abs(a) ** 2 for _, _, a in self.terms))


def make_psi(theta: float) -> FockState:
    """cos(theta)|0,0> + sin(theta)|1,1>."""
    return FockState.from_terms([(0, 0, math.cos(theta)), (1, 1, math.sin(theta))])


def make_psi_prime(theta: float) -> FockState:
    """cos(theta)|0,1> + sin(theta)|1,0>."""
    return FockState.from_terms([(0, 1, math.cos(theta)), (1, 0, math.sin(theta))])


def _maybe_scalar(arr, scalar_in: bool):
    if scalar_in:
        return arr[()].item() if isinstance(arr, np.ndarray) else arr
    return arr


def hermite(n: int, y):
    """Physicists' Hermite polynomial H_n(y) by the three-term recurrence.

    H_{k+1}(y) = 2 y H_k(y) - 2 k H_{k-1}(y); exact for n <= 1.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    scalar_in = np.ndim(y) == 0
    y = np.asarray(y, dtype=float)
    h_prev = np.ones_like(y)
    if n == 0:
        return _maybe_scalar(h_prev, scalar_in)
    h = 2.0 * y
    for k in range(1, n):
        h, h_prev = 2.0 * y * h - 2.0 * k * h_prev, h
    return _maybe_scalar(h, scalar_in)


def _osc_table(n_max: int, y: np.ndarray, include_gaussian: bool = True) -> np.ndarray:
    """Normalized oscillator functions u_n(y) for n = 0..n_max, co-evaluated with the
    Gaussian so the recurrence never overflows at large n.

    u_n(y) = pi^(-1/4) (2^n n!)^(-1/2) H_n(y) exp(-y^2/2); with include_gaussian=False
    the exp factor is dropped (polynomial part only, used where the Gauss-Hermite
    weight already carries it).
    """
    y = np.asarray(y, dtype=float)
    out = np.empty((n_max + 1,) + y.shape)
    out[0] = _PI_QUARTER * (np.exp(-0.5 * y * y) if include_gaussian else np.ones_like(y))
    if n_max >= 1:
        out[1] = math.sqrt(2.0) * y * out[0]
    for n in range(2, n_max + 1):
        out[n] = math.sqrt(2.0 / n) * y * out[n - 1] - math.sqrt((n - 1.0) / n) * out[n - 2]
    return out


def eigenfunction_x(n: int, x, units: UnitSystem = NATURAL_UNITS):
    """phi(n, x): n-th oscillator eigenfunction, position representation (real)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    scalar_in = np.ndim(x) == 0
    s = units.m_omega / units.hbar
    y = math.sqrt(s) * np.asarray(x, dtype=float)
    return _maybe_scalar(s ** 0.25 * _osc_table(n, y)[n], scalar_in)


def eigenfunction_p(n: int, p, units: UnitSystem = NATURAL_UNITS):
    """Momentum representation of phi(n, .): (-i)^n times the scale-inverted
    eigenfunction, under the Fourier kernel (2*pi)^(-1/2) exp(-i p x)."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    scalar_in = np.ndim(p) == 0
    inv = units.hbar / units.m_omega
    y = math.sqrt(inv) * np.asarray(p, dtype=float)
    val = _PHASE_MINUS_I[n % 4] * (inv ** 0.25 * _osc_table(n, y)[n])
    return _maybe_scalar(val, scalar_in)


@dataclass(frozen=True)
class _DomainView:
    """A state's term data expressed in one domain's oscillator basis.

    ``scale`` is the oscillator scale of that domain (s for position, 1/s for
    momentum); momentum amplitudes already include the (-i)^(n1+n2) phases.
    """

    scale: float
    n1: np.ndarray
    n2: np.ndarray
    amps: np.ndarray
    max_n1: int
    max_n2: int


@lru_cache(maxsize=4096)
def _view(state: FockState, dom: Domain, units: UnitSystem) -> _DomainView:
    n1 = np.array([t[0] for t in state.terms], dtype=np.intp)
    n2 = np.array([t[1] for t in state.terms], dtype=np.intp)
    amps = np.array([t[2] for t in state.terms], dtype=complex)
    if dom is Domain.MOMENTUM:
        scale = units.hbar / units.m_omega
        amps = amps * np.array([_PHASE_MINUS_I[int(k) % 4] for k in (n1 + n2)])
    else:
        scale = units.m_omega / units.hbar
    for arr in (n1, n2, amps):
        arr.setflags(write=False)
    return _DomainView(scale=scale, n1=n1, n2=n2, amps=amps,
                       max_n1=int(n1.max()), max_n2=int(n2.max()))


def wavefunction(state: FockState, a, b, dom: Domain = Domain.POSITION,
                 units: UnitSystem = NATURAL_UNITS):
    """Complex amplitude at (a, b) in the requested domain; broadcasts over a, b."""
    scalar_in = np.ndim(a) == 0 and np.ndim(b) == 0
    v = _view(state, dom, units)
    root = math.sqrt(v.scale)
    ya, yb = np.broadcast_arrays(root * np.asarray(a, float), root * np.asarray(b, float))
    u1 = _osc_table(v.max_n1, ya)
    u2 = _osc_table(v.max_n2, yb)
    out = np.zeros(ya.shape, dtype=complex)
    for n1, n2, amp in zip(v.n1, v.n2, v.amps):
        out += amp * u1[n1] * u2[n2]
    return _maybe_scalar(math.sqrt(v.scale) * out, scalar_in)


def joint_density(state: FockState, a, b, dom: Domain = Domain.POSITION,
                  units: UnitSystem = NATURAL_UNITS):
    """|Psi(a, b)|^2 in the requested domain; nonnegative."""
    psi = wavefunction(state, a, b, dom, units)
    out = np.abs(np.asarray(psi)) ** 2
    return _maybe_scalar(out, np.ndim(psi) == 0)


def _group_indices(view: _DomainView, mode: int) -> dict[int, list[int]]:
    """Term indices grouped by the *other* mode's Fock index (the one integrated out)."""
    other = view.n2 if mode == 1 else view.n1
    groups: dict[int, list[int]] = {}
    for idx, g in enumerate(other.tolist()):
        groups.setdefault(g, []).append(idx)
    return groups


def marginal_density(state: FockState, a, dom: Domain = Domain.POSITION,
                     units: UnitSystem = NATURAL_UNITS, mode: int = 1):
    """Closed-form marginal of the requested mode, via Fock orthonormality.

    Integrating out the other mode collapses its cross terms: grouping terms by the
    integrated-out index g, the marginal is sum_g |sum_{k in g} amp_k phi(n_k, a)|^2.
    """
    if mode not in (1, 2):
        raise ValueError("mode must be 1 or 2")
    scalar_in = np.ndim(a) == 0
    v = _view(state, dom, units)
    kept = v.n1 if mode == 1 else v.n2
    ya = math.sqrt(v.scale) * np.asarray(a, dtype=float)
    u = _osc_table(int(kept.max()), ya)
    out = np.zeros(ya.shape)
    for idxs in _group_indices(v, mode).values():
        c = np.zeros(ya.shape, dtype=complex)
        for k in idxs:
            c += v.amps[k] * u[kept[k]]
        out += np.abs(c) ** 2
    return _maybe_scalar(math.sqrt(v.scale) * out, scalar_in)


def _ladder_position(n_max: int, scale: float) -> np.ndarray:
    """Matrix elements <m| x |n> in the scale-s oscillator basis, x = (a+a^+)/sqrt(2s)."""
    m = np.zeros((n_max + 1, n_max + 1))
    for n in range(n_max):
        m[n + 1, n] = m[n, n + 1] = math.sqrt((n + 1) / (2.0 * scale))
    return m


def _ladder_position_sq(n_max: int, scale: float) -> np.ndarray:
    """Matrix elements <m| x^2 |n> in the scale-s oscillator basis."""
    m = np.zeros((n_max + 1, n_max + 1))
    for n in range(n_max + 1):
        m[n, n] = (2 * n + 1) / (2.0 * scale)
        if n + 2 <= n_max:
            m[n + 2, n] = m[n, n + 2] = math.sqrt((n + 1) * (n + 2)) / (2.0 * scale)
    return m


def _inner_moments(view: _DomainView, rule, ya: np.ndarray):
    """Gauss-Hermite inner moments of mode 2 at fixed first coordinates.

    Returns (M, N, S2) where, with P the joint density and a = ya/sqrt(scale),
    M = int P db (physical marginal), N = int b P db, S2 = int b^2 P db. The rule sums
    run over the polynomial part (the exp(-v^2) Gaussian is the rule's weight), so all
    three are exact up to the rule degree.
    """
    v = view
    u1 = _osc_table(v.max_n1, ya, include_gaussian=False)
    u2 = _osc_table(v.max_n2, rule.nodes, include_gaussian=False)
    c = np.zeros((ya.size, rule.order), dtype=complex)
    for n1, n2, amp in zip(v.n1, v.n2, v.amps):
        c += amp * u1[n1][:, None] * u2[n2][None, :]
    w_poly = np.abs(c) ** 2
    w = rule.weights
    nodes = rule.nodes
    envelope = np.exp(-ya * ya)
    m_phys = math.sqrt(v.scale) * envelope * (w_poly @ w)
    n_phys = envelope * (w_poly @ (w * nodes))
    s2_phys = envelope / math.sqrt(v.scale) * (w_poly @ (w * nodes * nodes))
    return m_phys, n_phys, s2_phys


def conditional_mean(state: FockState, a: float, dom: Domain = Domain.POSITION,
                     units: UnitSystem = NATURAL_UNITS,
                     spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """E[b | a] = int b P(a, b) db / marginal(a): the estimator minimizing the
    conditional variance.

    Raises DegenerateMarginal when the marginal at ``a`` is at or below the density
    floor; callers forming weighted averages must treat such points as contributing
    zero (their weight is the marginal itself).
    """
    v = _view(state, dom, units)
    rule = gauss_hermite_rule(spec.gh_order)
    ya = np.array([math.sqrt(v.scale) * float(a)])
    m_phys, n_phys, _ = _inner_moments(v, rule, ya)
    if not m_phys[0] > DENSITY_FLOOR:
        raise DegenerateMarginal(f"marginal at {a!r} is {m_phys[0]!r}")
    return float(n_phys[0] / m_phys[0])


def _hermite_monomial_rows(n_max: int) -> np.ndarray:
    """Monomial coefficients of H_n (row n, ascending powers), exact in doubles for
    the small n used here."""
    rows = np.zeros((n_max + 1, n_max + 1))
    rows[0, 0] = 1.0
    if n_max >= 1:
        rows[1, 1] = 2.0
    for n in range(2, n_max + 1):
        rows[n, 1:] = 2.0 * rows[n - 1, :-1]
        rows[n, :] -= 2.0 * (n - 1) * rows[n - 2, :]
    return rows


def _real_aligned(amps: np.ndarray) -> np.ndarray | None:
    """Strip a global phase; return real amplitudes, or None if genuinely complex."""
    pivot = amps[np.argmax(np.abs(amps))]
    aligned = amps * (abs(pivot) / pivot)
    if np.max(np.abs(aligned.imag)) > 1e-12 * np.max(np.abs(aligned)):
        return None
    return aligned.real


def _b_zero_hints(view: _DomainView, a: np.ndarray, limit: float) -> np.ndarray | None:
    """Zeros in b of the amplitude at fixed first coordinates, for panel pre-splits.

    Zero *curves* of the density exist only when the wavefunction is real up to a
    global phase; then b -> psi(a, b) is a degree-max_n2 polynomial (times a Gaussian)
    whose real roots are returned, NaN-padded to shape (len(a), max_n2).
    """
    amps = _real_aligned(view.amps)
    if amps is None or view.max_n2 == 0:
        return None
    root_scale = math.sqrt(view.scale)
    ya = root_scale * np.asarray(a, dtype=float)
    u1 = _osc_table(view.max_n1, ya, include_gaussian=False)
    deg = view.max_n2
    # Coefficients of the polynomial in yb, in the monomial basis.
    herm = _hermite_monomial_rows(deg)
    coeff = np.zeros((deg + 1, ya.size))
    for n1, n2, amp in zip(view.n1, view.n2, amps):
        norm = 1.0 / math.sqrt(2.0 ** int(n2) * math.factorial(int(n2)))
        coeff += (amp * norm) * np.outer(herm[n2], u1[n1])
    out = np.full((ya.size, deg), np.nan)
    tiny = 1e-14 * max(np.max(np.abs(coeff)), 1.0)
    if deg == 1:
        c0, c1 = coeff
        ok = np.abs(c1) > tiny
        out[ok, 0] = -c0[ok] / c1[ok]
    elif deg == 2:
        c0, c1, c2 = coeff
        quad = np.abs(c2) > tiny
        disc = np.where(quad, c1 * c1 - 4.0 * c2 * c0, -1.0)
        real2 = quad & (disc >= 0.0)
        sq = np.sqrt(np.where(real2, disc, 0.0))
        denom = np.where(real2, 2.0 * c2, 1.0)
        out[real2, 0] = (-c1[real2] - sq[real2]) / denom[real2]
        out[real2, 1] = (-c1[real2] + sq[real2]) / denom[real2]
        lin = ~quad & (np.abs(c1) > tiny)
        out[lin, 0] = -c0[lin] / c1[lin]
    else:
        for i in range(ya.size):
            roots = np.roots(coeff[::-1, i])
            reals = [r.real for r in roots if abs(r.imag) <= 1e-9 * (1.0 + abs(r))]
            out[i, :len(reals)] = sorted(reals)[:deg]
    out /= root_scale
    out[np.abs(out) >= limit] = np.nan
    return out


def _marginal_zero_hints(view: _DomainView, mode: int, limit: float) -> tuple[float, ...]:
    """Real zeros of the mode's marginal. Nonempty only when a single orthogonality
    group survives (the marginal is then |polynomial|^2 x Gaussian)."""
    groups = _group_indices(view, mode)
    if len(groups) != 1:
        return ()
    kept = view.n1 if mode == 1 else view.n2
    (idxs,) = groups.values()
    amps = _real_aligned(view.amps[idxs])
    if amps is None:
        return ()
    deg = int(max(kept[k] for k in idxs))
    if deg == 0:
        return ()
    herm = _hermite_monomial_rows(deg)
    coeff = np.zeros(deg + 1)
    for amp, k in zip(amps, idxs):
        n = int(kept[k])
        coeff[:n + 1] += amp * herm[n, :n + 1] / math.sqrt(2.0 ** n * math.factorial(n))
    roots = np.roots(coeff[::-1])
    root_scale = math.sqrt(view.scale)
    zeros = sorted(r.real / root_scale for r in roots
                   if abs(r.imag) <= 1e-9 * (1.0 + abs(r)) and abs(r.real / root_scale) < limit)
    return tuple(zeros)


def _is_uncorrelated(view: _DomainView) -> bool:
    """True when every term shares the same first-mode index: the state factorizes and
    mode 2's conditional statistics equal its marginal statistics."""
    return bool(np.all(view.n1 == view.n1[0]))


def _mode2_vector(view: _DomainView) -> np.ndarray:
    """Mode-2 coefficient vector for a factorized state (see _is_uncorrelated)."""
    beta = np.zeros(view.max_n2 + 1, dtype=complex)
    for n2, amp in zip(view.n2, view.amps):
        beta[n2] = amp
    return beta
