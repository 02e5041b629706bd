"""Two qubits in a common zero-temperature cavity with a Lorentzian spectrum.

The Lorentzian reservoir is replaced by a single damped pseudomode, which is
exact for this spectral density.  In the frame rotating at the qubit
frequency (resonant cavity) the enlarged system obeys

    d rho / dt = -i [H, rho] + kappa (a rho a^+ - {a^+ a, rho} / 2),
    H = g [(s+_A + s+_B) a + h.c.],

with kappa = 2 lambda and g = sqrt(Gamma lambda) / 2.  This calibration makes
the one-excitation amplitude obey c'' + lambda c' + (Gamma lambda / 2) c = 0,
i.e. the super-radiant population decays as

    rho_pp = exp(-lambda t) [cos(d t / 2) + (lambda / d) sin(d t / 2)]^2,
    d = sqrt(2 Gamma lambda - lambda^2).

Under the other common convention Gamma is the single-qubit rate and the
collective coupling carries an extra factor sqrt(2); use
``SimParams(lam=..., gamma=2*Gamma)`` to switch.

All rates are in units of Gamma, all times in units of 1/Gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import qmat
from .errors import DimensionError, StepTooLarge, TruncationError
from .quantifiers import XState

TRUNCATION_TOL = 1e-10
STEP_DRIFT_TOL = 1e-12
DEGENERATE_D = 1e-6

SQRT6 = math.sqrt(6.0)


def default_dt(rate: float) -> float:
    """At least 200 steps per fastest time scale, never above 0.01."""
    if rate <= 0.0:
        return 0.01
    return min(0.005 / rate, 0.01)


@dataclass(frozen=True)
class SimParams:
    """Lossy common cavity.  ``lam`` is the Lorentzian half-width in units of Gamma."""

    lam: float
    gamma: float = 1.0
    n_max: int = 2
    dt: float | None = None
    t_max: float = 200.0

    def __post_init__(self):
        if not self.lam > 0.0:
            raise ValueError(f"lambda must be positive for a lossy cavity, got {self.lam}")
        if not self.gamma > 0.0:
            raise ValueError(f"Gamma must be positive, got {self.gamma}")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if self.dt is not None and not self.dt > 0.0:
            raise ValueError("dt must be positive")

    @property
    def coupling(self) -> float:
        return math.sqrt(self.gamma * self.lam) / 2.0

    @property
    def pm_decay(self) -> float:
        return 2.0 * self.lam

    @property
    def step(self) -> float:
        if self.dt is not None:
            return self.dt
        return default_dt(max(math.sqrt(self.gamma * self.lam), self.lam))


@dataclass(frozen=True)
class PerfectCavityParams:
    """Lossless single-mode cavity with per-qubit coupling ``omega``."""

    omega: float
    n_max: int = 2
    dt: float | None = None

    def __post_init__(self):
        if not self.omega > 0.0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def coupling(self) -> float:
        return self.omega

    @property
    def pm_decay(self) -> float:
        return 0.0

    @property
    def period(self) -> float:
        return 2.0 * math.pi / (SQRT6 * self.omega)

    @property
    def step(self) -> float:
        if self.dt is not None:
            return self.dt
        return default_dt(SQRT6 * self.omega)


def rho_pp_analytic(t, p: SimParams):
    """Super-radiant population for an initial |+>, vectorized over ``t``.

    Damped oscillation for 2 Gamma > lambda, hyperbolic decay below, and the
    critically damped limit exp(-lambda t)(1 + lambda t / 2)^2 in between.
    """
    t = np.asarray(t, dtype=float)
    lam, gam = p.lam, p.gamma
    d2 = 2.0 * gam * lam - lam * lam
    if abs(d2) < (DEGENERATE_D * lam) ** 2:
        amp = 1.0 + lam * t / 2.0
    elif d2 > 0.0:
        d = math.sqrt(d2)
        amp = np.cos(d * t / 2.0) + (lam / d) * np.sin(d * t / 2.0)
    else:
        d = math.sqrt(-d2)
        amp = np.cosh(d * t / 2.0) + (lam / d) * np.sinh(d * t / 2.0)
    out = np.exp(-lam * t) * amp * amp
    return float(out) if out.ndim == 0 else out


def state_plus_from_rho_pp(rho_pp: float) -> XState:
    h = rho_pp / 2.0
    return XState(0.0, h, h, 1.0 - rho_pp, 0.0, h)


def state_plus(t: float, p: SimParams) -> XState:
    return state_plus_from_rho_pp(rho_pp_analytic(t, p))


def perfect_cavity_psi(t: float, q: PerfectCavityParams) -> XState:
    """Closed-form reduced state for |Psi> = (|00> + |11>)/sqrt(2) in a lossless cavity."""
    x = SQRT6 * q.omega * t
    rho_pp = math.sin(x) ** 2 / 6.0
    c14 = (2.0 + math.cos(x)) / 6.0
    p11 = 2.0 * c14 * c14
    h = rho_pp / 2.0
    return XState(p11, h, h, 1.0 - p11 - rho_pp, c14, h)


# --- named initial states -------------------------------------------------

PSI = np.array([1, 0, 0, 1], dtype=complex) / math.sqrt(2.0)   # (|11> + |00>)/sqrt2
PLUS = np.array([0, 1, 1, 0], dtype=complex) / math.sqrt(2.0)  # (|10> + |01>)/sqrt2
MINUS = np.array([0, 1, -1, 0], dtype=complex) / math.sqrt(2.0)
GROUND = qmat.ket(3, 4)

INITIAL_STATES = {
    "psi": PSI,
    "plus": PLUS,
    "minus": MINUS,
    "ground": GROUND,
}


def initial_density(name: str) -> np.ndarray:
    try:
        return qmat.projector(INITIAL_STATES[name])
    except KeyError:
        raise ValueError(f"unknown initial state {name!r}; choose from {sorted(INITIAL_STATES)}") from None


def singlet_population(rho) -> float:
    """<-|rho|-> with |-> = (|10> - |01>)/sqrt(2)."""
    rho = np.asarray(rho)
    return float(np.real(MINUS.conj() @ rho @ MINUS))


def plus_population(rho) -> float:
    rho = np.asarray(rho)
    return float(np.real(PLUS.conj() @ rho @ PLUS))


# --- generator --------------------------------------------------------------


@dataclass(frozen=True)
class Generator:
    """Liouvillian on row-major vectorized states of the qubits+mode space."""

    matrix: np.ndarray
    hamiltonian: np.ndarray
    jump: np.ndarray
    decay: float
    n_max: int
    number: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def field_dim(self) -> int:
        return self.n_max + 1

    def apply(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return (self.matrix @ rho.reshape(-1)).reshape(rho.shape)


def _operators(n_max: int):
    nf = n_max + 1
    a = np.diag(np.sqrt(np.arange(1, nf)), 1).astype(complex)
    i2, f_id = np.eye(2), np.eye(nf)
    sp_a = qmat.kron(qmat.kron(qmat.SIGMA_PLUS, i2), f_id)
    sp_b = qmat.kron(qmat.kron(i2, qmat.SIGMA_PLUS), f_id)
    a_full = qmat.kron(np.eye(4), a)
    return sp_a, sp_b, a_full


def excitation_operator(n_max: int) -> np.ndarray:
    sp_a, sp_b, a_full = _operators(n_max)
    return sp_a @ sp_a.conj().T + sp_b @ sp_b.conj().T + a_full.conj().T @ a_full


def build_generator_raw(coupling: float, decay: float, n_max: int = 2) -> Generator:
    sp_a, sp_b, a = _operators(n_max)
    h = coupling * ((sp_a + sp_b) @ a)
    h = h + h.conj().T
    dim = h.shape[0]
    eye = np.eye(dim)
    # row-major vec: vec(X Y Z) = (X kron Z^T) vec(Y)
    liou = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    if decay:
        ada = a.conj().T @ a
        liou = liou + decay * (np.kron(a, a.conj()) - 0.5 * np.kron(ada, eye) - 0.5 * np.kron(eye, ada.T))
    return Generator(liou, h, a, decay, n_max, excitation_operator(n_max))


def build_generator(p: SimParams | PerfectCavityParams) -> Generator:
    return build_generator_raw(p.coupling, p.pm_decay, p.n_max)


# --- integration --------------------------------------------------------------


def rk4_propagator(liou: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step for the linear system y' = L y, as a matrix.

    For linear L the four RK4 stages collapse to the degree-4 Taylor
    polynomial of exp(hL), so applying this matrix is the same arithmetic
    map as the stage-by-stage scheme.
    """
    hl = h * liou
    eye = np.eye(liou.shape[0], dtype=complex)
    term = eye.copy()
    out = eye.copy()
    for k in range(1, 5):
        term = term @ hl / k
        out = out + term
    return out


def _leak_population(rho_full: np.ndarray, n_max: int) -> float:
    """Population of states at the top Fock level with at least one qubit excited.

    Only those states couple beyond the truncation; |00, n_max> is inert.
    """
    nf = n_max + 1
    diag = np.real(np.diag(rho_full)).reshape(4, nf)
    return float(np.sum(diag[:3, n_max]))


def _excitations(rho_q: np.ndarray) -> int:
    """Largest qubit excitation number carried by an initial two-qubit state."""
    counts = np.array([2, 1, 1, 0])
    support = np.abs(np.diag(rho_q)) > 1e-15
    return int(counts[support].max()) if support.any() else 0


@dataclass
class Evolution:
    times: np.ndarray
    full: np.ndarray            # (n_times, D, D)
    steps: int
    dt: float
    max_trace_drift: float
    max_leak: float

    @property
    def reduced(self) -> np.ndarray:
        n = self.full.shape[1]
        return np.stack([qmat.partial_trace_field(r, 4, n // 4) for r in self.full])


def evolve_full(rho0_qubits, p: SimParams | PerfectCavityParams, t_grid) -> Evolution:
    """Integrate the pseudomode master equation from rho0_qubits x |0><0|.

    Fixed-step RK4; each interval between requested times is split into
    equal sub-steps no longer than the parameter set's step.
    """
    rho0 = qmat.check_density_matrix(rho0_qubits)
    if rho0.shape != (4, 4):
        raise DimensionError(f"initial qubit state must be 4x4, got {rho0.shape}")
    if _excitations(rho0) > p.n_max:
        raise TruncationError(f"n_max={p.n_max} is below the initial excitation number")
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0.0):
        raise ValueError("t_grid must be strictly increasing and start at 0")

    gen = build_generator(p)
    dim = gen.dim
    vac = np.zeros((gen.field_dim, gen.field_dim), dtype=complex)
    vac[0, 0] = 1.0
    y = qmat.kron(rho0, vac).reshape(-1)
    diag_idx = np.arange(dim) * (dim + 1)

    dt = p.step
    props: dict[int, np.ndarray] = {}
    out = np.empty((t_grid.size, dim, dim), dtype=complex)
    out[0] = y.reshape(dim, dim)
    steps = 0
    max_drift = 0.0
    max_leak = _leak_population(out[0], p.n_max)
    for k in range(1, t_grid.size):
        span = t_grid[k] - t_grid[k - 1]
        m = max(1, math.ceil(span / dt - 1e-9))
        h = span / m
        # uniform grids give h values equal up to rounding; share one propagator
        key = round(h / dt, 9)
        if key not in props:
            prop = rk4_propagator(gen.matrix, h)
            if np.max(np.abs(np.linalg.eigvals(prop))) > 1.0 + 1e-12:
                raise StepTooLarge(f"RK4 step h={h:.3g} is unstable for this generator")
            props[key] = prop
        prop = props[key]
        for _ in range(m):
            y = prop @ y
        steps += m
        if not np.all(np.isfinite(y)):
            raise StepTooLarge(f"non-finite state at t={t_grid[k]:.6g}")
        drift = abs(np.sum(y[diag_idx]).real - 1.0)
        max_drift = max(max_drift, drift)
        if drift > STEP_DRIFT_TOL * steps:
            raise StepTooLarge(f"trace drift {drift:.3e} after {steps} steps at t={t_grid[k]:.6g}")
        rho = y.reshape(dim, dim)
        leak = _leak_population(rho, p.n_max)
        max_leak = max(max_leak, leak)
        if leak > TRUNCATION_TOL:
            raise TruncationError(f"population {leak:.3e} at the Fock cutoff n_max={p.n_max}")
        out[k] = rho
    return Evolution(t_grid, out, steps, dt, max_drift, max_leak)


def evolve(rho0_qubits, p: SimParams | PerfectCavityParams, t_grid) -> np.ndarray:
    """Reduced two-qubit states, shape (len(t_grid), 4, 4)."""
    return evolve_full(rho0_qubits, p, t_grid).reduced


def total_excitation(rho_full, n_max: int) -> float:
    return float(np.real(np.trace(excitation_operator(n_max) @ rho_full)))
