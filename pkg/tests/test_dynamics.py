import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from cpbspace import dynamics as dyn, qmat, quantifiers as qf
from cpbspace.errors import StepTooLarge, TruncationError

from conftest import random_density


def amplitude_ode(lam, gamma, times):
    """Integrate c'' + lam c' + (gamma lam / 2) c = 0, c(0)=1, c'(0)=0 to tight tolerance."""

    def rhs(_t, y):
        return [y[1], -lam * y[1] - 0.5 * gamma * lam * y[0]]

    sol = solve_ivp(rhs, (0, times[-1]), [1.0, 0.0], t_eval=times, rtol=1e-12, atol=1e-14, method="DOP853")
    return sol.y[0] ** 2


# --- analytic forms -------------------------------------------------------------


def test_rho_pp_initial_value():
    for lam in (1e-3, 0.5, 2.0, 10.0):
        assert dyn.rho_pp_analytic(0.0, dyn.SimParams(lam=lam)) == pytest.approx(1.0)


def test_rho_pp_strong_coupling_value():
    # Gamma = 2 lambda, lambda t = 1
    lam = 0.5
    expected = math.exp(-1) * (math.cos(math.sqrt(3) / 2) + math.sin(math.sqrt(3) / 2) / math.sqrt(3)) ** 2
    assert dyn.rho_pp_analytic(1 / lam, dyn.SimParams(lam=lam)) == pytest.approx(expected, abs=1e-15)
    assert expected == pytest.approx(0.435, abs=5e-4)


@pytest.mark.parametrize("lam", [1e-3, 0.3, 1.9, 2.0, 2.1, 5.0])
def test_rho_pp_matches_amplitude_ode(lam):
    times = np.linspace(0, 60, 301)
    p = dyn.SimParams(lam=lam)
    np.testing.assert_allclose(dyn.rho_pp_analytic(times, p), amplitude_ode(lam, 1.0, times), atol=1e-9)


def test_rho_pp_continuous_across_regimes():
    times = np.linspace(0, 20, 101)
    exact = dyn.rho_pp_analytic(times, dyn.SimParams(lam=2.0))
    for lam in (2.0 * (1 - 1e-7), 2.0 * (1 + 1e-7)):
        np.testing.assert_allclose(dyn.rho_pp_analytic(times, dyn.SimParams(lam=lam)), exact, atol=1e-6)


def test_rho_pp_in_unit_interval():
    times = np.linspace(0, 500, 2001)
    for lam in (1e-3, 1e-2, 1.0, 3.0):
        v = dyn.rho_pp_analytic(times, dyn.SimParams(lam=lam))
        assert np.all(v >= 0) and np.all(v <= 1 + 1e-15)


def test_first_bell_violation_loss_at_inverse_sqrt2():
    p = dyn.SimParams(lam=1e-3)
    times = np.linspace(0, 80, 80001)
    rpp = dyn.rho_pp_analytic(times, p)
    b = np.array([qf.cpb_triplet(dyn.state_plus_from_rho_pp(r)).B for r in rpp[::100]])
    k = np.argmax(b <= 2.0)
    assert rpp[::100][k] <= 1 / math.sqrt(2) < rpp[::100][k - 1]


def test_state_plus_examples():
    p = dyn.SimParams(lam=1e-2)
    s = dyn.state_plus(0.0, p)
    assert s == qf.XState(0.0, 0.5, 0.5, 0.0, 0.0, 0.5)
    t = qf.cpb_triplet(dyn.state_plus_from_rho_pp(0.5))
    assert (t.C, t.P, t.B) == pytest.approx((0.5, 0.5, math.sqrt(2)))
    late = dyn.state_plus(5000.0, dyn.SimParams(lam=1.0))
    np.testing.assert_allclose(late.to_matrix(), np.diag([0, 0, 0, 1.0]), atol=1e-12)


def test_perfect_cavity_closed_form():
    q = dyn.PerfectCavityParams(omega=0.3)
    np.testing.assert_allclose(dyn.perfect_cavity_psi(0.0, q).to_matrix(), qmat.projector([1, 0, 0, 1]) / 2, atol=1e-15)
    half = dyn.perfect_cavity_psi(q.period / 2, q)
    assert (half.p11, half.p44, abs(half.c14)) == pytest.approx((1 / 18, 17 / 18, 1 / 6), abs=1e-15)
    assert half.p22 == pytest.approx(0.0, abs=1e-15)
    t = qf.cpb_triplet(half)
    assert (t.C, t.P, t.B) == pytest.approx((1 / 3, 77 / 81, 2 * math.sqrt(10) / 3), abs=1e-12)
    np.testing.assert_allclose(dyn.perfect_cavity_psi(q.period, q).to_matrix(),
                               dyn.perfect_cavity_psi(0.0, q).to_matrix(), atol=1e-14)


# --- generator --------------------------------------------------------------------


@pytest.fixture(scope="module")
def lossy_gen():
    return dyn.build_generator(dyn.SimParams(lam=0.3))


def test_generator_ground_state_stationary(lossy_gen):
    ground = qmat.kron(qmat.projector(dyn.GROUND), np.diag([1.0, 0, 0]))
    assert np.max(np.abs(lossy_gen.apply(ground))) == 0.0


def test_generator_trace_and_hermiticity(lossy_gen, rng):
    for _ in range(100):
        rho = random_density(rng, 12)
        d = lossy_gen.apply(rho)
        assert abs(np.trace(d)) <= 1e-12
        assert np.max(np.abs(d - d.conj().T)) <= 1e-12


def test_generator_single_excitation_sector():
    """|+,0> <-> |00,1> form a damped two-level problem with the expected amplitude equation."""
    p = dyn.SimParams(lam=0.4)
    gen = dyn.build_generator(p)
    plus0 = qmat.kron(dyn.PLUS, qmat.ket(0, 3))
    g01 = qmat.kron(dyn.GROUND, qmat.ket(1, 3))
    coupling = g01.conj() @ gen.hamiltonian @ plus0
    assert coupling == pytest.approx(math.sqrt(p.gamma * p.lam / 2))
    assert gen.decay == pytest.approx(2 * p.lam)
    # the singlet does not couple at all
    minus0 = qmat.kron(dyn.MINUS, qmat.ket(0, 3))
    assert np.max(np.abs(gen.hamiltonian @ minus0)) == 0.0


def test_excitation_number_conserved_by_hamiltonian(lossy_gen):
    n = dyn.excitation_operator(2)
    assert np.max(np.abs(lossy_gen.hamiltonian @ n - n @ lossy_gen.hamiltonian)) < 1e-15


def test_rk4_propagator_is_rk4(lossy_gen, rng):
    h = 0.05
    y = random_density(rng, 12).reshape(-1)
    L = lossy_gen.matrix
    k1 = L @ y
    k2 = L @ (y + h / 2 * k1)
    k3 = L @ (y + h / 2 * k2)
    k4 = L @ (y + h * k3)
    staged = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    np.testing.assert_allclose(dyn.rk4_propagator(L, h) @ y, staged, atol=1e-15)


# --- evolve ------------------------------------------------------------------------


def test_evolve_ground_state_constant():
    states = dyn.evolve(qmat.projector(dyn.GROUND), dyn.SimParams(lam=0.1), np.linspace(0, 50, 11))
    for r in states:
        np.testing.assert_allclose(r, np.diag([0, 0, 0, 1.0]), atol=1e-15)


def test_evolve_plus_matches_analytic():
    p = dyn.SimParams(lam=1e-3)
    grid = np.linspace(0, 200, 4001)
    states = dyn.evolve(dyn.initial_density("plus"), p, grid)
    num = np.array([dyn.plus_population(r) for r in states])
    assert np.max(np.abs(num - dyn.rho_pp_analytic(grid, p))) <= 1e-6


@pytest.mark.parametrize("lam", [0.05, 1.0, 4.0])
def test_evolve_against_exact_exponential(lam):
    p = dyn.SimParams(lam=lam)
    gen = dyn.build_generator(p)
    grid = np.linspace(0, 10, 21)
    rho0 = dyn.initial_density("psi")
    full0 = qmat.kron(rho0, np.diag([1.0, 0, 0])).reshape(-1)
    ev = dyn.evolve_full(rho0, p, grid)
    for t, r in zip(grid, ev.full):
        exact = (expm(gen.matrix * t) @ full0).reshape(12, 12)
        assert np.max(np.abs(r - exact)) <= 1e-8


def test_evolve_perfect_cavity_matches_closed_form():
    q = dyn.PerfectCavityParams(omega=0.05)
    grid = np.linspace(0, q.period, 1001)
    states = dyn.evolve(dyn.initial_density("psi"), q, grid)
    worst = max(np.max(np.abs(r - dyn.perfect_cavity_psi(t, q).to_matrix())) for t, r in zip(grid, states))
    assert worst <= 1e-6


def test_evolve_input_validation():
    p = dyn.SimParams(lam=0.1)
    with pytest.raises(ValueError):
        dyn.evolve(dyn.initial_density("psi"), p, [1.0, 2.0])
    with pytest.raises(ValueError):
        dyn.evolve(dyn.initial_density("psi"), p, [0.0, 2.0, 1.0])
    with pytest.raises(TruncationError):
        dyn.evolve(dyn.initial_density("psi"), dyn.SimParams(lam=0.1, n_max=1), [0.0, 1.0])
    with pytest.raises(StepTooLarge):
        dyn.evolve(dyn.initial_density("psi"), dyn.SimParams(lam=1.0, dt=5.0), [0.0, 50.0])
    with pytest.raises(ValueError):
        dyn.SimParams(lam=0.0)


def test_n_max_three_agrees_with_two():
    grid = np.linspace(0, 30, 31)
    a = dyn.evolve(dyn.initial_density("psi"), dyn.SimParams(lam=0.05), grid)
    b = dyn.evolve(dyn.initial_density("psi"), dyn.SimParams(lam=0.05, n_max=3), grid)
    np.testing.assert_allclose(a, b, atol=1e-13)


def test_singlet_population_examples():
    assert dyn.singlet_population(dyn.initial_density("plus")) == pytest.approx(0.0)
    assert dyn.singlet_population(dyn.initial_density("minus")) == pytest.approx(1.0)


@pytest.mark.parametrize("s0", [0.0, 0.25, 0.5, 1.0])
def test_singlet_population_invariant(s0):
    # mixture of |-> and |11>, so the triplet ladder is also populated
    rho0 = s0 * dyn.initial_density("minus") + (1 - s0) * qmat.projector(qmat.ket(0, 4))
    states = dyn.evolve(rho0, dyn.SimParams(lam=1e-2), np.linspace(0, 100, 201))
    sing = np.array([dyn.singlet_population(r) for r in states])
    assert np.max(np.abs(sing - s0)) <= 1e-9


def test_excitation_number_non_increasing():
    p = dyn.SimParams(lam=0.05)
    ev = dyn.evolve_full(dyn.initial_density("psi"), p, np.linspace(0, 100, 501))
    n = np.array([dyn.total_excitation(r, p.n_max) for r in ev.full])
    assert n[0] == pytest.approx(1.0)
    assert np.all(np.diff(n) <= 1e-12)


def test_x_structure_and_positivity_preserved():
    for name in ("psi", "plus"):
        ev = dyn.evolve_full(dyn.initial_density(name), dyn.SimParams(lam=1e-2), np.linspace(0, 200, 801))
        for r, f in zip(ev.reduced, ev.full):
            assert qmat.off_x_magnitude(r) <= 1e-10
            assert qmat.min_eigenvalue(f) >= -1e-8
        assert ev.max_trace_drift <= 1e-9


def test_quantifiers_frame_independent(rng):
    """Rotating-frame phases are local diagonal unitaries and leave C, P, B unchanged."""
    states = dyn.evolve(dyn.initial_density("psi"), dyn.SimParams(lam=1e-2), np.linspace(0, 100, 51))
    for r in states:
        base = qf.cpb_triplet(r)
        a, b = rng.uniform(0, 2 * np.pi, 2)
        u = np.kron(np.diag([np.exp(1j * a), 1]), np.diag([np.exp(1j * b), 1]))
        rot = qf.cpb_triplet(u @ r @ u.conj().T)
        assert (rot.C, rot.P, rot.B) == pytest.approx((base.C, base.P, base.B), abs=1e-10)
        assert qf.bell_max_horodecki(u @ r @ u.conj().T) == pytest.approx(base.B, abs=1e-10)
