"""Nonlinear single-qubit transmission: root enumeration and branch tracing.

At incident power P0 the transmission obeys an implicit relation,

    1/D = 1 + (g/4) * [(4*Gamma + g)*M0 + 4*Gamma*eta^2*P0*D]
                    / (delta^2 + eta^2*P0*D + Gamma^2)^2,

with delta = omega - 1 and M0 = delta^2 + Gamma^2: D appears inside the
power-broadened denominator because the qubit saturates on the transmitted
field. The relation is solved as a one-dimensional root problem in D at
fixed P0: a dense log-spaced scan of F(D) = D - RHS(D) followed by
bisection, rather than by fixed-point iteration, which would lose the
middle branch of the S-curve. Root count is 1 or 3; the 3-root window in P0
is the bistable regime, bounded by a pair of folds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BranchAmbiguity, NoRoot
from .model import OMEGA_Q, ModelParams

_SCAN_FLOOR = 1e-12
_ROOT_TOL = 1e-12
_MATCH_TOL = 1e-9


@dataclass(frozen=True)
class BranchPoint:
    power: float
    d: float
    branch: str
    stability: str


@dataclass(frozen=True)
class BranchCurve:
    """Multivalued D(P) curve: ordered points plus fold coordinates.

    ``points`` are ordered by (power, D). ``fold_points`` holds (P, D) pairs
    where the root count changes; they come in (lower fold, upper fold)
    pairs when bistability exists. Stability labels are heuristic: the
    middle branch of an S-curve is marked unstable.
    """

    points: tuple
    fold_points: tuple

    def branch(self, name: str) -> list:
        return [p for p in self.points if p.branch == name]

    @property
    def is_multivalued(self) -> bool:
        return len(self.fold_points) > 0


def _rhs(d, omega, params, power):
    delta = omega / OMEGA_Q - 1.0
    g = params.coupling_g
    gamma = params.gamma_q
    m0 = delta * delta + gamma * gamma
    sat = params.interaction_eta**2 * power * d
    denom = (delta * delta + sat + gamma * gamma) ** 2
    return 1.0 / (1.0 + 0.25 * g * ((4.0 * gamma + g) * m0 + 4.0 * gamma * sat) / denom)


def transcendental_residual(d, omega: float, params: ModelParams, power: float):
    """F(D) = D - RHS(D); roots of F are the self-consistent transmissions."""
    return d - _rhs(d, omega, params, power)


def _bisect(f, lo, hi, f_lo):
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid) < _ROOT_TOL or (hi - lo) < 1e-16 * max(1.0, mid):
            return mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def single_qubit_nonlinear_roots(
    omega: float,
    params: ModelParams,
    power_p0: float,
    *,
    n_scan: int = 2000,
) -> list[float]:
    """All self-consistent transmissions D in (0, 1] at incident power P0.

    Returns roots sorted ascending; there is always at least one (F brackets
    between 0+ and 1 by continuity), and generically one or three.

    Raises
    ------
    NoRoot
        If the scan finds no sign change, impossible for a correct scan,
        so this flags a resolution bug rather than missing physics.
    """
    if power_p0 < 0.0:
        raise ValueError(f"power_p0 must be >= 0, got {power_p0!r}")
    grid = np.logspace(np.log10(_SCAN_FLOOR), 0.0, n_scan)
    f_vals = transcendental_residual(grid, omega, params, power_p0)
    signs = np.sign(f_vals)
    roots = []
    for i in np.nonzero(signs[:-1] != signs[1:])[0]:
        if f_vals[i] == 0.0:
            roots.append(float(grid[i]))
            continue
        root = _bisect(
            lambda d: transcendental_residual(d, omega, params, power_p0),
            grid[i],
            grid[i + 1],
            f_vals[i],
        )
        roots.append(float(root))
    if f_vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    if not roots:
        raise NoRoot(
            f"no sign change over {n_scan} scan points at P0 = {power_p0!r}; "
            "scan resolution bug"
        )
    roots.sort()
    # Collapse duplicates from a sign change landing exactly on a grid node.
    dedup = [roots[0]]
    for r in roots[1:]:
        if r - dedup[-1] > 1e-14:
            dedup.append(r)
    return dedup


def _labels_for(roots):
    if len(roots) >= 3:
        return ("lower", "middle", "upper")[: len(roots)]
    return ("unique",) * len(roots)


def _fold_between(omega, params, p_lo, p_hi, n_lo, *, rel_tol=1e-9):
    """Bisect the power where the root count changes; return (P, D) there."""
    count = lambda p: len(single_qubit_nonlinear_roots(omega, params, p))
    for _ in range(200):
        mid = 0.5 * (p_lo + p_hi)
        if count(mid) == n_lo:
            p_lo = mid
        else:
            p_hi = mid
        if (p_hi - p_lo) <= rel_tol * max(p_hi, 1e-300):
            break
    roots_lo = single_qubit_nonlinear_roots(omega, params, p_lo)
    roots_hi = single_qubit_nonlinear_roots(omega, params, p_hi)
    # The merging pair exists on whichever side has three roots.
    tri = roots_lo if len(roots_lo) == 3 else roots_hi
    single = roots_hi if len(roots_lo) == 3 else roots_lo
    # Fold D = midpoint of the pair that vanishes across the transition.
    surviving = min(tri, key=lambda r: abs(r - single[0]))
    pair = [r for r in tri if r != surviving]
    d_fold = 0.5 * sum(pair) if pair else surviving
    return 0.5 * (p_lo + p_hi), float(d_fold)


def trace_d_vs_power(
    omega: float, params: ModelParams, p_grid, *, match_tol: float = _MATCH_TOL
) -> BranchCurve:
    """Trace all branches of D(P0) over a sorted power grid.

    Root sets at adjacent powers are stitched by nearest-neighbor matching
    in D (for a one-dimensional relation the sorted order is the matching);
    folds are pinned by bisection wherever the root count changes.

    Raises
    ------
    BranchAmbiguity
        If two roots at one power both sit within ``match_tol`` of the same
        root at the previous power, meaning the grid is too coarse to stitch and
        the caller should refine it.
    """
    p_grid = np.asarray(p_grid, dtype=float)
    if p_grid.ndim != 1 or p_grid.size < 2:
        raise ValueError("p_grid must be a 1-D grid with at least 2 points")
    if np.any(np.diff(p_grid) <= 0.0):
        raise ValueError("p_grid must be sorted ascending")

    points = []
    folds = []
    prev_roots = None
    prev_p = None
    for p in p_grid:
        roots = single_qubit_nonlinear_roots(omega, params, p)
        if prev_roots is not None and len(roots) == len(prev_roots):
            for r in prev_roots:
                near = [nr for nr in roots if abs(nr - r) < match_tol]
                if len(near) > 1:
                    raise BranchAmbiguity(
                        f"two roots at P0 = {p!r} fall within {match_tol:g} of one "
                        "predecessor; refine the power grid"
                    )
        if prev_roots is not None and len(roots) != len(prev_roots):
            folds.append(_fold_between(omega, params, prev_p, p, len(prev_roots)))
        labels = _labels_for(roots)
        for r, lab in zip(roots, labels):
            stability = "unstable" if lab == "middle" else "stable"
            points.append(BranchPoint(power=float(p), d=r, branch=lab, stability=stability))
        prev_roots, prev_p = roots, p
    folds.sort()
    return BranchCurve(points=tuple(points), fold_points=tuple(folds))


def three_root_window(
    omega: float, params: ModelParams, p_grid
) -> tuple[float, float] | None:
    """Coarse (P_lo, P_hi) bounds of the 3-root window, or None if absent."""
    lo = None
    hi = None
    for p in np.asarray(p_grid, dtype=float):
        if len(single_qubit_nonlinear_roots(omega, params, p)) >= 3:
            lo = p if lo is None else lo
            hi = p
    if lo is None:
        return None
    return float(lo), float(hi)


def bistability_ratio(omega: float, params: ModelParams) -> float:
    """rho = g / sqrt((omega - 1)^2 + Gamma^2); the knob controlling folding."""
    delta = omega / OMEGA_Q - 1.0
    return params.coupling_g / np.hypot(delta, params.gamma_q)
