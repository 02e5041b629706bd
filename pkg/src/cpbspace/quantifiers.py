"""Concurrence, purity, Bell-CHSH maximum and the C-P-B remainder for X states."""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import qmat
from .errors import DimensionError, IdentityViolation, NotADensityMatrix, XLeakage

X_TOL = 1e-10
IDENTITY_TOL = 1e-9
IDENTITY_HARD_TOL = 1e-6
TWO_SQRT2 = 2.0 * math.sqrt(2.0)


class Region(enum.IntEnum):
    R1 = 1
    R2 = 2
    R3 = 3
    R4 = 4


@dataclass(frozen=True)
class XState:
    """The seven real parameters of an X-structured two-qubit state.

    Populations follow the basis order {|11>, |10>, |01>, |00>}; ``c14`` is
    <11|rho|00> and ``c23`` is <10|rho|01>.
    """

    p11: float
    p22: float
    p33: float
    p44: float
    c14: complex = 0.0
    c23: complex = 0.0

    def to_matrix(self) -> np.ndarray:
        rho = np.diag([self.p11, self.p22, self.p33, self.p44]).astype(complex)
        rho[0, 3] = self.c14
        rho[3, 0] = np.conj(self.c14)
        rho[1, 2] = self.c23
        rho[2, 1] = np.conj(self.c23)
        return rho

    @property
    def populations(self) -> tuple[float, float, float, float]:
        return (self.p11, self.p22, self.p33, self.p44)

    def swapped(self) -> "XState":
        """Relabel 1<->2, 3<->4 (and so c14<->c23)."""
        return XState(self.p22, self.p11, self.p44, self.p33, self.c23, self.c14)


@dataclass(frozen=True)
class CPBTriplet:
    C: float
    P: float
    B: float
    R: float
    region: Region
    K1: float
    K2: float
    u1: float
    u2: float
    u3: float
    B1: float
    B2: float

    @property
    def residual(self) -> float:
        return self.B ** 2 / 4.0 - self.P - self.C ** 2 - self.R

    def to_dict(self) -> dict:
        d = asdict(self)
        d["region"] = int(self.region)
        return d


def validate_x_state(rho, tol: float = X_TOL) -> XState:
    """Check that ``rho`` is a 4x4 density matrix with X structure and extract it.

    Tiny negative populations (numerical noise above the positivity
    tolerance) are clipped to zero.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionError(f"expected a 4x4 state, got {rho.shape}")
    leak = qmat.off_x_magnitude(rho)
    if leak > tol:
        raise XLeakage(leak, tol)
    snapped = np.where(qmat.X_MASK, rho, 0.0)
    qmat.check_density_matrix(snapped)
    pops = [max(0.0, float(rho[i, i].real)) for i in range(4)]
    return XState(*pops, complex(rho[0, 3]), complex(rho[1, 2]))


def as_x_state(state) -> XState:
    if isinstance(state, XState):
        return state
    return validate_x_state(state)


def _ks(s: XState) -> tuple[float, float]:
    k1 = abs(s.c14) - math.sqrt(s.p22 * s.p33)
    k2 = abs(s.c23) - math.sqrt(s.p11 * s.p44)
    return k1, k2


def concurrence_x(s: XState) -> float:
    return 2.0 * max(0.0, *_ks(s))


def concurrence_block_oracle(s: XState) -> float:
    """Wootters concurrence from the spectrum of rho * rho_tilde.

    For an X state rho_tilde = (Y x Y) rho* (Y x Y) keeps the X pattern, so
    rho * rho_tilde splits into the outer and inner 2x2 blocks and the four
    square-rooted eigenvalues come out of two 2x2 problems.
    """
    rho = s.to_matrix()
    yy = np.kron(qmat.PAULI_Y, qmat.PAULI_Y)
    prod = rho @ yy @ rho.conj() @ yy
    lams = []
    for block in qmat.x_blocks(prod):
        tr = block[0, 0] + block[1, 1]
        det = block[0, 0] * block[1, 1] - block[0, 1] * block[1, 0]
        disc = np.sqrt(tr * tr / 4.0 - det + 0j)
        for ev in (tr / 2.0 + disc, tr / 2.0 - disc):
            lams.append(math.sqrt(max(0.0, ev.real)))
    lams.sort(reverse=True)
    return max(0.0, lams[0] - lams[1] - lams[2] - lams[3])


def purity(rho) -> float:
    if isinstance(rho, XState):
        s = rho
        return sum(p * p for p in s.populations) + 2.0 * (abs(s.c23) ** 2 + abs(s.c14) ** 2)
    rho = np.asarray(rho, dtype=complex)
    # Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
    return float(np.sum(np.abs(rho) ** 2))


def _us(s: XState) -> tuple[float, float, float]:
    a, b = abs(s.c14), abs(s.c23)
    u1 = 4.0 * (a + b) ** 2
    u2 = (s.p11 + s.p44 - s.p22 - s.p33) ** 2
    u3 = 4.0 * (a - b) ** 2
    return u1, u2, u3


def bell_max_x(s: XState) -> tuple[float, str]:
    """CHSH maximum of an X state and the branch ('B1' or 'B2') that attains it."""
    u1, u2, u3 = _us(s)
    b1 = 2.0 * math.sqrt(u1 + u2)
    b2 = 2.0 * math.sqrt(u1 + u3)
    return (b1, "B1") if b1 >= b2 else (b2, "B2")


def correlation_tensor(rho) -> np.ndarray:
    """T_ij = Tr(rho sigma_i x sigma_j) for i, j in (x, y, z)."""
    rho = np.asarray(rho, dtype=complex)
    t = np.empty((3, 3))
    for i, si in enumerate(qmat.PAULIS):
        for j, sj in enumerate(qmat.PAULIS):
            t[i, j] = np.real(np.trace(rho @ np.kron(si, sj)))
    return t


def bell_max_horodecki(rho) -> float:
    """2 sqrt(t1 + t2) with t1 >= t2 the two largest eigenvalues of T^T T."""
    if isinstance(rho, XState):
        rho = rho.to_matrix()
    t = correlation_tensor(rho)
    ev = qmat.eigvals_sym3(t.T @ t)
    return 2.0 * math.sqrt(max(0.0, ev[0] + ev[1]))


def _unit(theta, phi):
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def _normalize_rows(v: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(v, axis=-1, keepdims=True)
    ok = norms > 1e-300
    return np.where(ok, v / np.where(ok, norms, 1.0), fallback)


def bell_max_bruteforce(
    rho,
    n_restarts: int = 64,
    seed: int = 0,
    max_iter: int = 2000,
    tol: float = 1e-15,
) -> float:
    """CHSH maximum by direct search over the four measurement directions.

    ``n_restarts`` random direction quadruples (spherical angles) are drawn
    and each is refined by seesaw iteration: with Alice's pair fixed, Bob's
    best pair is b ~ T^T(a + a'), b' ~ T^T(a - a'), and symmetrically for
    Alice.  Every update can only raise the CHSH value.  The result is an
    actual CHSH value at unit vectors, so it never exceeds the true maximum.
    """
    if n_restarts < 16:
        raise ValueError("n_restarts must be >= 16")
    if isinstance(rho, XState):
        rho = rho.to_matrix()
    t = correlation_tensor(rho)
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, math.pi, (4, n_restarts))
    phi = rng.uniform(0.0, 2.0 * math.pi, (4, n_restarts))
    a, a2, b, b2 = (_unit(theta[k], phi[k]) for k in range(4))

    def value():
        def corr(x, y):
            return np.einsum("ni,ij,nj->n", x, t, y)

        return np.abs(corr(a, b) + corr(a, b2) + corr(a2, b) - corr(a2, b2))

    best = float(np.max(value()))
    for _ in range(max_iter):
        b = _normalize_rows((a + a2) @ t, b)
        b2 = _normalize_rows((a - a2) @ t, b2)
        a = _normalize_rows((b + b2) @ t.T, a)
        a2 = _normalize_rows((b - b2) @ t.T, a2)
        cur = float(np.max(value()))
        if cur - best <= tol:
            best = max(best, cur)
            break
        best = cur
    return best


def classify_region(s: XState) -> Region:
    """Region from the orderings of (u2, u3) and (K1, K2); ties go to the lower index."""
    _, u2, u3 = _us(s)
    k1, k2 = _ks(s)
    if u2 >= u3:
        return Region.R1 if k1 >= k2 else Region.R2
    return Region.R3 if k1 >= k2 else Region.R4


def _r1(s: XState) -> float:
    a, b = abs(s.c14), abs(s.c23)
    p1, p2, p3, p4 = s.populations
    return 2.0 * (
        b * b - a * a + p1 * p4 - p2 * p3 + 4.0 * a * b
        + 4.0 * a * math.sqrt(p2 * p3) - (p1 + p4) * (p2 + p3)
    )


def _r3(s: XState) -> float:
    a, b = abs(s.c14), abs(s.c23)
    p1, p2, p3, p4 = s.populations
    return (
        2.0 * a * a + 6.0 * b * b - 4.0 * p2 * p3 + 8.0 * a * math.sqrt(p2 * p3)
        - p1 * p1 - p2 * p2 - p3 * p3 - p4 * p4
    )


def remainder(s: XState, region: Region | None = None) -> float:
    """Closed-form remainder R = B^2/4 - P - C^2 in each of the four regions.

    The region formulas take C = 2K with K the larger of K1, K2.  When that K
    is negative the state is separable and C = 0, so 4K^2 is added back.
    """
    if region is None:
        region = classify_region(s)
    if region is Region.R1:
        r = _r1(s)
    elif region is Region.R2:
        r = _r1(s.swapped())
    elif region is Region.R3:
        r = _r3(s)
    else:
        r = _r3(s.swapped())
    k1, k2 = _ks(s)
    k = k1 if region in (Region.R1, Region.R3) else k2
    if k < 0.0:
        r += 4.0 * k * k
    return r


def cpb_triplet(rho, tol: float = X_TOL) -> CPBTriplet:
    s = rho if isinstance(rho, XState) else validate_x_state(rho, tol)
    k1, k2 = _ks(s)
    u1, u2, u3 = _us(s)
    b1 = 2.0 * math.sqrt(u1 + u2)
    b2 = 2.0 * math.sqrt(u1 + u3)
    region = classify_region(s)
    trip = CPBTriplet(
        C=concurrence_x(s),
        P=purity(s),
        B=max(b1, b2),
        R=remainder(s, region),
        region=region,
        K1=k1, K2=k2, u1=u1, u2=u2, u3=u3, B1=b1, B2=b2,
    )
    if abs(trip.residual) > IDENTITY_HARD_TOL:
        raise IdentityViolation(f"B^2/4 - P - C^2 - R = {trip.residual:.3e} in region {int(region)}")
    return trip


def convert_measures(C: float, P: float) -> tuple[float, float]:
    """(tangle, linear entropy) from concurrence and purity."""
    if not 0.0 <= C <= 1.0:
        raise ValueError(f"concurrence {C} outside [0, 1]")
    if not 0.25 <= P <= 1.0:
        raise ValueError(f"purity {P} outside [1/4, 1]")
    return C * C, 4.0 / 3.0 * (1.0 - P)


def random_x_state(rng: np.random.Generator) -> XState:
    """Flat-simplex populations, coherence magnitudes uniform up to the positivity bound, random phases."""
    p = rng.dirichlet(np.ones(4))
    m14 = rng.uniform(0.0, math.sqrt(p[0] * p[3]))
    m23 = rng.uniform(0.0, math.sqrt(p[1] * p[2]))
    ph = rng.uniform(0.0, 2 * math.pi, 2)
    return XState(*map(float, p), m14 * np.exp(1j * ph[0]), m23 * np.exp(1j * ph[1]))


def random_pure_x_state(rng: np.random.Generator) -> XState:
    """Random rank-one X state: a normalized vector inside one of the two X blocks."""
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    x, y = v
    if rng.random() < 0.5:
        return XState(abs(x) ** 2, 0.0, 0.0, abs(y) ** 2, x * np.conj(y), 0.0)
    return XState(0.0, abs(x) ** 2, abs(y) ** 2, 0.0, 0.0, x * np.conj(y))


__all__ = [
    "CPBTriplet", "NotADensityMatrix", "Region", "XLeakage", "XState",
    "as_x_state", "bell_max_bruteforce", "bell_max_horodecki", "bell_max_x",
    "classify_region", "concurrence_block_oracle", "concurrence_x",
    "convert_measures", "correlation_tensor", "cpb_triplet", "purity",
    "random_pure_x_state", "random_x_state", "remainder", "validate_x_state",
]
