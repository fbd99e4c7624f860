"""Verification driver: runs every inequality the package implements
against freshly generated systems and randomized inputs, and reports one
:class:`~qeqlab.bounds.BoundReport` per check.

The randomized suites draw from seeded generators, so a verification run
is reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bounds as _bounds
from .dynamics import finite_time_average_state, equilibrium_state, default_time_step
from .entropy import (
    observational_continuity_bound,
    observational_entropy,
    shannon_continuity_bound,
    shannon_entropy,
    von_neumann_continuity_bound,
    von_neumann_entropy,
)
from .harness import (
    ConfigError,
    _check_keys,
    compute_trajectory,
    evaluate_bounds,
    prepare_system,
    sample_deviations,
    time_grid,
)
from .linalg import trace_norm
from .measurement import Povm, populations, pvm_from_observable
from .models import (
    PureState,
    SpinChainParams,
    all_down_state,
    bulk_magnetization,
    tilted_ising_chain,
)

__all__ = [
    "VerifyConfig",
    "observational_continuity_suite",
    "povm_equilibration_suite",
    "random_density_matrix",
    "random_povm",
    "run_verification",
    "shannon_continuity_suite",
    "time_averaged_state_suite",
    "von_neumann_continuity_suite",
]


@dataclass
class VerifyConfig:
    """Knob set for one verification run."""

    sites: tuple = (5, 6, 7, 8, 9)
    average_grid: tuple = (10.0, 25.0, 50.0, 100.0)
    t_max: float = 100.0
    fluctuation_sites: int = 7
    fluctuation_window: float = 1.0e4
    fluctuation_count: int = 10_000
    averaged_state_sites: tuple = (2, 3, 4, 5, 6)
    averaged_state_windows: tuple = (1.0e2, 1.0e3, 1.0e4)
    shannon_pairs: int = 10_000
    observational_cases: int = 1_000
    von_neumann_cases: int = 1_000
    povm_cases: int = 1_000
    povm_window: float = 10.0
    seed: int = 0
    eps_points: int = 32

    @classmethod
    def from_dict(cls, raw: dict) -> "VerifyConfig":
        _check_keys("verify", raw, {
            "sites", "average_grid", "t_max", "fluctuation", "averaged_state",
            "suites", "seed", "eps_points",
        })
        fluct = raw.get("fluctuation", {})
        _check_keys("fluctuation", fluct, {"sites", "window", "count"})
        avg_state = raw.get("averaged_state", {})
        _check_keys("averaged_state", avg_state, {"sites", "windows"})
        suites = raw.get("suites", {})
        _check_keys("suites", suites, {"shannon_pairs", "observational_cases",
                                       "von_neumann_cases", "povm_cases", "povm_window"})
        try:
            return cls(
                sites=tuple(int(n) for n in raw.get("sites", (5, 6, 7, 8, 9))),
                average_grid=tuple(float(t) for t in raw.get("average_grid", (10.0, 25.0, 50.0, 100.0))),
                t_max=float(raw.get("t_max", 100.0)),
                fluctuation_sites=int(fluct.get("sites", 7)),
                fluctuation_window=float(fluct.get("window", 1.0e4)),
                fluctuation_count=int(fluct.get("count", 10_000)),
                averaged_state_sites=tuple(int(n) for n in avg_state.get("sites", (2, 3, 4, 5, 6))),
                averaged_state_windows=tuple(float(t) for t in avg_state.get("windows", (1.0e2, 1.0e3, 1.0e4))),
                shannon_pairs=int(suites.get("shannon_pairs", 10_000)),
                observational_cases=int(suites.get("observational_cases", 1_000)),
                von_neumann_cases=int(suites.get("von_neumann_cases", 1_000)),
                povm_cases=int(suites.get("povm_cases", 1_000)),
                povm_window=float(suites.get("povm_window", 10.0)),
                seed=int(raw.get("seed", 0)),
                eps_points=int(raw.get("eps_points", 32)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError("verify", str(exc)) from exc


# ---------------------------------------------------------------------------
# random inputs


def random_density_matrix(rng, dim: int, rank: int | None = None):
    """Haar-ish random mixed state from a Ginibre factor."""
    rank = rank or dim
    G = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = G @ G.conj().T
    rho /= np.trace(rho).real
    from .models import DensityMatrix

    return DensityMatrix(rho)


def random_hermitian(rng, dim: int) -> np.ndarray:
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (G + G.conj().T) / 2


def random_pure_state(rng, dim: int) -> PureState:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return PureState(v / np.linalg.norm(v))


def random_povm(rng, dim: int, outcomes: int) -> Povm:
    """Random POVM: Ginibre-positive pieces whitened to sum to 1."""
    pieces = []
    for _ in range(outcomes):
        G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        pieces.append(G @ G.conj().T)
    total = sum(pieces)
    w, V = np.linalg.eigh(total)
    inv_sqrt = (V * (1.0 / np.sqrt(w))) @ V.conj().T
    effects = np.array([inv_sqrt @ piece @ inv_sqrt for piece in pieces])
    return Povm(effects=effects)


def random_partition_pvm(rng, dim: int, outcomes: int):
    """PVM with multi-dimensional eigenspaces: random orthonormal basis
    split into random contiguous groups."""
    G = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    Q, _ = np.linalg.qr(G)
    cuts = np.sort(rng.choice(np.arange(1, dim), size=outcomes - 1, replace=False))
    edges = np.concatenate([[0], cuts, [dim]])
    values = np.arange(outcomes, 0, -1, dtype=float)  # descending, arbitrary labels
    from .measurement import ProjectiveMeasurement

    slices = tuple(slice(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]))
    return ProjectiveMeasurement(values=values, basis=Q, outcome_slices=slices)


# ---------------------------------------------------------------------------
# randomized suites (each returns a single summarizing report)


def _summarize(name: str, worst, cases: int, violations: int, extra: dict | None = None) -> _bounds.BoundReport:
    params = {"cases": cases, "violations": violations}
    if extra:
        params.update(extra)
    return _bounds.BoundReport(name=name, lhs=worst[0], rhs=worst[1], parameters=params)


def _track(worst, lhs: float, rhs: float):
    return (lhs, rhs) if worst is None or lhs - rhs > worst[0] - worst[1] else worst


def shannon_continuity_suite(rng, pairs: int = 10_000, max_outcomes: int = 64) -> _bounds.BoundReport:
    """|S(p) - S(q)| against the distribution continuity bound on random
    distribution pairs."""
    worst = None
    violations = 0
    for _ in range(pairs):
        r = int(rng.integers(2, max_outcomes + 1))
        p = rng.dirichlet(np.ones(r))
        q = rng.dirichlet(np.ones(r))
        lhs = abs(shannon_entropy(p) - shannon_entropy(q))
        rhs = shannon_continuity_bound(p, q)
        violations += lhs > rhs + _bounds.ATOL_BOUND
        worst = _track(worst, lhs, rhs)
    return _summarize("shannon_continuity_suite", worst, pairs, violations,
                      {"max_outcomes": max_outcomes})


def observational_continuity_suite(rng, cases: int = 1_000, max_dim: int = 32) -> _bounds.BoundReport:
    """Observational-entropy continuity on random state pairs sharing a
    measurement; alternates nondegenerate and coarse measurements."""
    worst = None
    violations = 0
    for k in range(cases):
        dim = int(rng.integers(2, max_dim + 1))
        if k % 2 == 0:
            measurement = pvm_from_observable(random_hermitian(rng, dim))
        else:
            outcomes = int(rng.integers(2, min(dim, 8) + 1))
            measurement = random_partition_pvm(rng, dim, outcomes)
        rho = random_density_matrix(rng, dim)
        sigma = random_density_matrix(rng, dim)
        p = populations(measurement, rho)
        q = populations(measurement, sigma)
        mult = measurement.multiplicities
        lhs = abs(observational_entropy(p, mult) - observational_entropy(q, mult))
        rhs = observational_continuity_bound(p, q, dim)
        violations += lhs > rhs + _bounds.ATOL_BOUND
        worst = _track(worst, lhs, rhs)
    return _summarize("observational_continuity_suite", worst, cases, violations,
                      {"max_dim": max_dim})


def von_neumann_continuity_suite(rng, cases: int = 1_000, max_dim: int = 16) -> _bounds.BoundReport:
    """von Neumann entropy difference against the trace-distance bound."""
    worst = None
    violations = 0
    for k in range(cases):
        dim = int(rng.integers(2, max_dim + 1))
        rho = random_density_matrix(rng, dim)
        if k % 3 == 0:
            sigma = random_pure_state(rng, dim).density_matrix()
        else:
            sigma = random_density_matrix(rng, dim, rank=int(rng.integers(1, dim + 1)))
        lhs = abs(von_neumann_entropy(rho) - von_neumann_entropy(sigma))
        rhs = von_neumann_continuity_bound(rho, sigma)
        violations += lhs > rhs + _bounds.ATOL_BOUND
        worst = _track(worst, lhs, rhs)
    return _summarize("von_neumann_continuity_suite", worst, cases, violations,
                      {"max_dim": max_dim})


def povm_equilibration_suite(rng, cases: int = 1_000, max_dim: int = 32,
                             max_outcomes: int = 8, window: float = 10.0,
                             eps_points: int = 16) -> _bounds.BoundReport:
    """Population equilibration (and the entropy bounds it implies) for
    random Hamiltonians measured through random POVMs."""
    worst = None
    violations = 0
    checks = 0
    for _ in range(cases):
        dim = int(rng.integers(4, max_dim + 1))
        outcomes = int(rng.integers(2, max_outcomes + 1))
        ham = random_hermitian(rng, dim)
        povm = random_povm(rng, dim, outcomes)
        system = prepare_system(ham, povm, random_pure_state(rng, dim))
        dt = default_time_step(system.decomposition.spectral_range)
        # ~1k samples resolve these small dense spectra within rtol_avg
        dt = max(dt, window / 1024)
        trajectory = compute_trajectory(system, time_grid(window, dt))
        for report in evaluate_bounds(system, trajectory, [window], eps_points=eps_points):
            checks += 1
            violations += not report.holds
            worst = _track(worst, report.lhs, report.rhs)
    return _summarize("povm_equilibration_suite", worst, checks, violations,
                      {"systems": cases, "max_dim": max_dim, "max_outcomes": max_outcomes,
                       "window": window})


def time_averaged_state_suite(sites, windows, seed: int = 0) -> list:
    """Finite-time-averaged states against the dephasing rate: trace-norm
    convergence and von Neumann entropy continuity, per chain size and
    averaging window."""
    reports = []
    for n in sites:
        params = SpinChainParams(sites=int(n))
        system = prepare_system(
            tilted_ising_chain(params),
            bulk_magnetization(int(n), "z"),
            all_down_state(int(n), seed=seed),
            label=f"avg_state_{n}",
        )
        decomp = system.decomposition
        omega = equilibrium_state(decomp, system.initial)
        s_omega = von_neumann_entropy(omega)
        min_gap = system.gap_stats.min_gap
        dim = decomp.dim
        for T in windows:
            avg = finite_time_average_state(decomp, system.initial, float(T))
            dist = trace_norm(avg.matrix - omega.matrix)
            theta_bound = 2.0 * math.sqrt(dim) / (min_gap * float(T))
            params = {"system": system.label, "sites": int(n), "dim": dim,
                      "T": float(T), "min_gap": min_gap}
            reports.append(_bounds.BoundReport(
                name="averaged_state_distance",
                lhs=dist,
                rhs=theta_bound,
                parameters=dict(params),
            ))
            reports.append(_bounds.BoundReport(
                name="averaged_state_entropy",
                lhs=abs(von_neumann_entropy(avg) - s_omega),
                rhs=_bounds.averaged_state_entropy_bound(dim, min_gap, float(T)),
                parameters=dict(params),
            ))
    return reports


# ---------------------------------------------------------------------------
# full run


def run_verification(config: VerifyConfig, corrupt_trajectory=None) -> list:
    """Run the complete inequality suite and return all reports.

    ``corrupt_trajectory`` is a test hook: it receives each spin-chain
    trajectory before bound evaluation and may return a tampered one (a
    negative control must make the run fail).
    """
    reports = []

    for n in config.sites:
        params = SpinChainParams(sites=int(n))
        system = prepare_system(
            tilted_ising_chain(params),
            bulk_magnetization(int(n), "z"),
            all_down_state(int(n), seed=config.seed),
            label=f"chain_{n}",
        )
        dt = default_time_step(system.decomposition.spectral_range)
        trajectory = compute_trajectory(system, time_grid(config.t_max, dt))
        if corrupt_trajectory is not None:
            trajectory = corrupt_trajectory(trajectory)
        for report in evaluate_bounds(system, trajectory, config.average_grid,
                                      eps_points=config.eps_points):
            report.parameters["system"] = system.label
            reports.append(report)
        jensen = _bounds.average_entropy_check(trajectory, system.equilibrium.shannon, config.t_max)
        jensen.parameters["system"] = system.label
        reports.append(jensen)

    n = config.fluctuation_sites
    params = SpinChainParams(sites=int(n))
    system = prepare_system(
        tilted_ising_chain(params),
        bulk_magnetization(int(n), "z"),
        all_down_state(int(n), seed=config.seed),
        label=f"fluct_{n}",
    )
    r = system.measurement.r
    delta = _bounds.asymptotic_shannon_bound(r, system.d_eff)
    nu = _bounds.asymptotic_observational_bound(r, system.d_eff, system.dim)
    sh = sample_deviations(system, config.fluctuation_window, config.fluctuation_count,
                           seed=config.seed, kind="shannon")
    ob = sample_deviations(system, config.fluctuation_window, config.fluctuation_count,
                           seed=config.seed + 1, kind="observational")
    for name, samples, scale in (("shannon_fluctuation", sh, delta),
                                 ("observational_fluctuation", ob, nu)):
        report = _bounds.tail_bound_check(samples, math.sqrt(scale), scale, name=name)
        report.parameters["system"] = system.label
        reports.append(report)

    reports.extend(time_averaged_state_suite(config.averaged_state_sites,
                                             config.averaged_state_windows,
                                             seed=config.seed))

    rng = np.random.default_rng(config.seed)
    reports.append(shannon_continuity_suite(rng, config.shannon_pairs))
    reports.append(observational_continuity_suite(rng, config.observational_cases))
    reports.append(von_neumann_continuity_suite(rng, config.von_neumann_cases))
    reports.append(povm_equilibration_suite(rng, config.povm_cases, window=config.povm_window))
    return reports
