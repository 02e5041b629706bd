"""Self-check suites run by ``cpbspace verify``.

Each suite returns a list of Check results; suites are independent and
deterministic for a given seed.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import dynamics, mems, qmat, quantifiers as qf, trajectory


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    passed: bool
    detail: str = ""


def _check(suite, name, value, bound, fmt="{:.2e}"):
    return Check(suite, name, bool(value <= bound), f"{fmt.format(value)} <= {bound:g}")


def suite_qmat(seed: int) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    worst = 0.0
    for _ in range(50):
        a, b, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(3))
        worst = max(worst, np.max(np.abs(qmat.kron(qmat.kron(a, b), c) - qmat.kron(a, qmat.kron(b, c)))))
    out.append(_check("qmat", "kron associativity", worst, 1e-12))

    worst = 0.0
    for _ in range(50):
        rq = _random_density(rng, 4)
        rf = _random_density(rng, 3)
        worst = max(worst, np.max(np.abs(qmat.partial_trace_field(qmat.kron(rq, rf), 4, 3) - rq)))
    out.append(_check("qmat", "partial trace of product", worst, 1e-12))

    worst = 0.0
    for _ in range(200):
        m = rng.normal(size=(3, 3))
        m = m + m.T
        ev = qmat.eigvals_sym3(m)
        worst = max(worst, abs(sum(ev) - np.trace(m)), abs(np.prod(ev) - np.linalg.det(m)))
    out.append(_check("qmat", "sym3 eigenvalues: trace and determinant", worst, 1e-10))
    return out


def _random_density(rng, n):
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def suite_quantifiers(seed: int) -> list[Check]:
    rng = np.random.default_rng(seed)
    out = []
    worst = 0.0
    for _ in range(1000):
        s = qf.random_pure_x_state(rng)
        trip = qf.cpb_triplet(s)
        worst = max(worst, abs(trip.B - 2.0 * math.sqrt(1.0 + trip.C ** 2)))
    out.append(_check("quantifiers", "pure states: B = 2 sqrt(1 + C^2)", worst, 1e-9))

    worst_id = worst_c = worst_b = 0.0
    hits = {r: 0 for r in qf.Region}
    for _ in range(10_000):
        s = qf.random_x_state(rng)
        trip = qf.cpb_triplet(s)
        hits[trip.region] += 1
        worst_id = max(worst_id, abs(trip.residual))
        worst_c = max(worst_c, abs(trip.C - qf.concurrence_block_oracle(s)))
        if hits[trip.region] <= 250:
            worst_b = max(worst_b, abs(trip.B - qf.bell_max_horodecki(s)))
    out.append(_check("quantifiers", "remainder identity, all regions", worst_id, 1e-9))
    out.append(Check("quantifiers", "every region sampled >= 100 times", min(hits.values()) >= 100,
                     " ".join(f"R{int(k)}={v}" for k, v in hits.items())))
    out.append(_check("quantifiers", "concurrence vs block oracle", worst_c, 1e-10))
    out.append(_check("quantifiers", "X-state B vs Horodecki", worst_b, 1e-10))

    below = above = 0.0
    for i in range(50):
        s = qf.random_x_state(rng)
        h = qf.bell_max_horodecki(s)
        bf = qf.bell_max_bruteforce(s, seed=seed + i)
        below = max(below, h - bf)
        above = max(above, bf - h)
    out.append(_check("quantifiers", "brute-force CHSH reaches Horodecki", below, 1e-4))
    out.append(_check("quantifiers", "brute-force CHSH never exceeds Horodecki", above, 1e-12))
    return out


def suite_mems(seed: int) -> list[Check]:
    out = []
    grid = np.linspace(0.0, 1.0, 1000)
    worst = 0.0
    bad_region = 0
    for g in grid:
        closed = mems.mems_cpb(g)
        trip = qf.cpb_triplet(mems.mems_state(g))
        worst = max(worst, abs(closed.C - trip.C), abs(closed.P - trip.P),
                    abs(closed.B - trip.B), abs(closed.R - trip.R))
        bad_region += trip.region in (qf.Region.R2, qf.Region.R4)
    out.append(_check("mems", "closed forms vs generic pipeline", worst, 1e-10))
    out.append(Check("mems", "regions 2 and 4 never occur", bad_region == 0, f"{bad_region} hits"))
    out.append(_check("mems", "B(1/sqrt2) = 2", abs(mems.mems_cpb(1 / math.sqrt(2)).B - 2.0), 1e-9))
    viol = grid[grid > 1 / math.sqrt(2)]
    worst = max(abs(mems.mems_cpb(g).B - 2 * math.sqrt(2) * mems.mems_cpb(g).C) for g in viol)
    out.append(_check("mems", "B = 2 sqrt2 C in the violation range", worst, 1e-10))
    return out


def suite_dynamics(seed: int) -> list[Check]:
    out = []
    p = dynamics.SimParams(lam=1e-3)
    grid = trajectory.default_grid()
    ev = dynamics.evolve_full(dynamics.initial_density("plus"), p, grid)
    red = ev.reduced
    num = np.array([dynamics.plus_population(r) for r in red])
    out.append(_check("dynamics", "|+> population vs analytic decay",
                      float(np.max(np.abs(num - dynamics.rho_pp_analytic(grid, p)))), 1e-6))
    out.append(_check("dynamics", "trace drift", ev.max_trace_drift, 1e-9))

    q = dynamics.PerfectCavityParams(omega=0.05)
    tgrid = np.linspace(0.0, q.period, 801)
    red = dynamics.evolve(dynamics.initial_density("psi"), q, tgrid)
    worst = max(np.max(np.abs(r - dynamics.perfect_cavity_psi(t, q).to_matrix())) for t, r in zip(tgrid, red))
    out.append(_check("dynamics", "perfect cavity vs closed form", worst, 1e-6))

    rho0 = qmat.projector(qmat.ket(1, 4))  # |10>, half singlet
    ev = dynamics.evolve_full(rho0, dynamics.SimParams(lam=1e-2), np.linspace(0.0, 100.0, 401))
    sing = np.array([dynamics.singlet_population(r) for r in ev.reduced])
    out.append(_check("dynamics", "singlet population conserved", float(np.ptp(sing)), 1e-9))
    exc = np.array([dynamics.total_excitation(r, 2) for r in ev.full])
    out.append(_check("dynamics", "excitation number non-increasing", float(max(0.0, np.max(np.diff(exc)))), 1e-12))
    return out


def suite_trajectory(seed: int) -> list[Check]:
    out = []
    recs = trajectory.sample_trajectory("psi_lossy", dynamics.SimParams(lam=1e-3))
    n = len(trajectory.detect_branches(recs))
    out.append(Check("trajectory", "|Psi> multi-branch (>= 3 branches)", n >= 3, f"{n} branches"))
    rel = trajectory.check_closed_relation(recs, tol=1e-8)
    out.append(Check("trajectory", "|Psi> has no closed relation", not rel.holds, f"residual {rel.max_residual:.3g}"))
    grid = trajectory.default_grid()
    plus_states = dynamics.evolve(dynamics.initial_density("plus"), dynamics.SimParams(lam=1e-3), grid)
    plus = trajectory.records_from_states(grid, plus_states)
    rel = trajectory.check_closed_relation(plus, tol=1e-8, min_rho_pp=1.0 / 3.0)
    out.append(_check("trajectory", "|+> closed relation", rel.max_residual, 1e-8))
    ids = float(np.max(np.abs(trajectory.identity_residuals(recs))))
    out.append(_check("trajectory", "exported identity residual", ids, 1e-9))
    report = mems.is_mems_trajectory(plus_states, tol=1e-8)
    out.append(Check("trajectory", "|+> evolves along MEMS", report.holds, f"max dev {report.max_deviation:.2e}"))
    return out


SUITES = {
    "qmat": suite_qmat,
    "quantifiers": suite_quantifiers,
    "mems": suite_mems,
    "dynamics": suite_dynamics,
    "trajectory": suite_trajectory,
}


def run_suites(names, seed: int, workers: int = 1) -> list[Check]:
    names = list(SUITES) if names in ("all", ["all"]) else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suite(s) {unknown}; choose from {['all', *SUITES]}")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda n: SUITES[n](seed), names))
    else:
        results = [SUITES[n](seed) for n in names]
    return [c for suite in results for c in suite]
