"""Maximally entangled mixed states (concurrence/purity family) and their C-P-B values."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .quantifiers import Region, XState, as_x_state

TWO_THIRDS = 2.0 / 3.0


def _check_unit(x: float, name: str) -> float:
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")
    return x


def mems_g(gamma: float) -> float:
    gamma = _check_unit(gamma, "gamma")
    return gamma / 2.0 if gamma >= TWO_THIRDS else 1.0 / 3.0


def mems_state(gamma: float) -> XState:
    g = mems_g(gamma)
    return XState(g, 0.0, 1.0 - 2.0 * g, g, gamma / 2.0, 0.0)


@dataclass(frozen=True)
class MemsPoint:
    C: float
    P: float
    B: float
    R: float
    region: Region


def mems_cpb(gamma: float) -> MemsPoint:
    """Piecewise closed forms of C, P, B and R along the family."""
    gamma = _check_unit(gamma, "gamma")
    g2 = gamma * gamma
    if gamma <= 1.0 / 3.0:
        b_sq4, purity, rem, region = 1.0 / 9.0 + g2, 1.0 / 3.0 + g2 / 2.0, -2.0 / 9.0 - g2 / 2.0, Region.R1
    elif gamma < TWO_THIRDS:
        b_sq4, purity, rem, region = 2.0 * g2, 1.0 / 3.0 + g2 / 2.0, -1.0 / 3.0 + g2 / 2.0, Region.R3
    else:
        b_sq4, purity, rem, region = 2.0 * g2, 1.0 - 2.0 * gamma + 2.0 * g2, 0.0 - (1.0 - gamma) ** 2, Region.R3
    return MemsPoint(gamma, purity, 2.0 * math.sqrt(b_sq4), rem, region)


def mems_boundary(C: float) -> float:
    """Purity of the MEMS with concurrence ``C``."""
    C = _check_unit(C, "concurrence")
    if C < TWO_THIRDS:
        return 1.0 / 3.0 + C * C / 2.0
    return 1.0 - 2.0 * C + 2.0 * C * C


# relabel |0> <-> |1> on one qubit, in the {|11>,|10>,|01>,|00>} ordering
FLIP_B = np.array([1, 0, 3, 2])
FLIP_A = np.array([2, 3, 0, 1])


@dataclass
class MemsReport:
    holds: bool
    gammas: list[float] = field(default_factory=list)
    matches: list[bool] = field(default_factory=list)
    counted: list[bool] = field(default_factory=list)
    max_deviation: float = 0.0


def _match(rho: np.ndarray) -> tuple[float, float]:
    gamma = min(1.0, 2.0 * abs(rho[0, 3]))
    target = mems_state(gamma).to_matrix()
    # a local phase on one qubit rotates the coherence; compare magnitudes there
    diff = np.abs(np.abs(rho) - np.abs(target))
    return gamma, float(np.max(diff))


def is_mems_trajectory(states, tol: float = 1e-8) -> MemsReport:
    """Check that every state with gamma >= 2/3 is a MEMS after a one-qubit bit relabel.

    Either qubit may be relabelled; the better fit is kept.  Samples with
    gamma < 2/3 are reported but do not count toward the verdict, and an
    empty set of counted samples gives ``holds=False``.
    """
    states = list(states)
    if not states:
        raise ValueError("need at least one state")
    report = MemsReport(holds=True)
    n_counted = 0
    for st in states:
        rho = as_x_state(st).to_matrix()
        best = None
        for perm in (FLIP_B, FLIP_A):
            gamma, dev = _match(rho[np.ix_(perm, perm)])
            if best is None or dev < best[1]:
                best = (gamma, dev)
        gamma, dev = best
        ok = dev <= tol
        counted = gamma >= TWO_THIRDS - tol
        report.gammas.append(gamma)
        report.matches.append(ok)
        report.counted.append(counted)
        if counted:
            n_counted += 1
            report.max_deviation = max(report.max_deviation, dev)
            if not ok:
                report.holds = False
    if n_counted == 0:
        report.holds = False
    return report


def mems_matrix(gamma: float) -> np.ndarray:
    return mems_state(gamma).to_matrix()


__all__ = [
    "MemsPoint", "MemsReport", "is_mems_trajectory", "mems_boundary", "mems_cpb",
    "mems_g", "mems_matrix", "mems_state",
]
