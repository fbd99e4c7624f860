"""Experiment orchestration: prepared systems, trajectory generation,
bound evaluation per averaging window, fluctuation sampling, chain-length
sweeps, and exponential fits.

Everything is deterministic given the configuration (including its
seed); reports serialize to JSON through ``to_json_dict`` methods.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import bounds as _bounds
from .dynamics import (
    DEFAULT_EXACT_GAP_LIMIT,
    EquilibriumReference,
    GapStatistics,
    Trajectory,
    default_time_step,
    effective_dimension,
    equilibrium_state,
    gap_statistics,
    time_average_scalar,
)
from .entropy import _xlogx
from .linalg import SpectralDecomposition, decompose_hermitian
from .measurement import Povm, ProjectiveMeasurement, populations, pvm_from_observable
from .models import (
    DEFAULT_DIMENSION_CAP,
    DensityMatrix,
    PureState,
    SpinChainParams,
    all_down_state,
    bulk_magnetization,
    precessing_spin,
    spin_bath,
    tilted_ising_chain,
)

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "FitResult",
    "PreparedSystem",
    "build_system",
    "compute_trajectory",
    "evaluate_bounds",
    "execute_experiment",
    "finite_time_average_curve",
    "fit_exponential",
    "prepare_system",
    "run_experiment",
    "sample_deviations",
    "sweep_chain_lengths",
    "time_grid",
    "window_average",
]

# Max complex entries per trajectory chunk (~256 MiB of amplitudes).
_CHUNK_ENTRIES = 2**24


# ---------------------------------------------------------------------------
# prepared systems


@dataclass(frozen=True)
class PreparedSystem:
    """A diagonalized system bundled with its measurement and initial
    state, plus the eigenbasis caches the fast paths need."""

    label: str
    decomposition: SpectralDecomposition
    measurement: ProjectiveMeasurement | Povm
    initial: PureState | DensityMatrix
    observable: np.ndarray | None
    gap_stats: GapStatistics
    d_eff: float
    equilibrium: EquilibriumReference
    observable_norm: float | None = None
    amps_eig: np.ndarray | None = field(repr=False, default=None)
    contraction: np.ndarray | None = field(repr=False, default=None)
    effects_eig: np.ndarray | None = field(repr=False, default=None)

    @property
    def dim(self) -> int:
        return self.decomposition.dim

    @property
    def r(self) -> int:
        return self.measurement.r


def _measurement_in_eigenbasis(measurement, decomp: SpectralDecomposition):
    """Contraction taking eigenbasis amplitudes to measurement-basis
    amplitudes (PVM) or the effects rotated into the eigenbasis (POVM)."""
    U = decomp.eigenvectors
    if isinstance(measurement, ProjectiveMeasurement):
        basis = measurement.basis
        if np.count_nonzero(basis) == basis.shape[0]:
            # permutation basis (diagonal observables): skip the GEMM
            perm = np.argmax(np.abs(basis), axis=0)
            return basis[perm, np.arange(basis.shape[1])].conj()[:, None] * U[perm, :], None
        return basis.conj().T @ U, None
    effects_eig = np.array([U.conj().T @ eff @ U for eff in measurement.effects])
    return None, effects_eig


def _entropy_rows(pops: np.ndarray, multiplicities: np.ndarray):
    """Shannon, observational and multiplicity terms for population rows."""
    shannon = -np.sum(_xlogx(pops), axis=1)
    boltzmann = pops @ np.log(np.asarray(multiplicities, dtype=float))
    return shannon, shannon + boltzmann, boltzmann


def _clamp_rows(raw: np.ndarray) -> np.ndarray:
    if raw.min(initial=0.0) < -1e-12:
        raise ValueError(f"population {raw.min():.3e} below the round-off floor")
    pops = np.clip(raw, 0.0, None)
    totals = pops.sum(axis=1)
    if np.max(np.abs(totals - 1.0)) > 1e-10:
        raise ValueError("population rows do not sum to 1")
    return pops / totals[:, None]


def prepare_system(hamiltonian, observable, initial, label: str = "",
                   exact_gap_limit: int = DEFAULT_EXACT_GAP_LIMIT) -> PreparedSystem:
    """Diagonalize, build the measurement, and precompute equilibrium
    references and gap statistics.

    ``observable`` may be a Hermitian matrix (a projective measurement is
    built from it) or an already constructed measurement.
    """
    decomp = decompose_hermitian(hamiltonian)
    obs_matrix = None
    obs_norm = None
    if isinstance(observable, (ProjectiveMeasurement, Povm)):
        measurement = observable
    else:
        obs_matrix = np.asarray(observable, dtype=complex)
        measurement = pvm_from_observable(obs_matrix)
        # the outcome values reconstruct the measured operator exactly,
        # so its norm is the extremal value
        obs_norm = float(np.max(np.abs(measurement.values)))
    stats = gap_statistics(decomp, exact_limit=exact_gap_limit)
    d_eff = effective_dimension(decomp, initial)

    amps_eig = contraction = effects_eig = None
    if isinstance(initial, PureState):
        amps_eig = decomp.eigenvectors.conj().T @ initial.amplitudes
        contraction, effects_eig = _measurement_in_eigenbasis(measurement, decomp)

    if isinstance(initial, PureState) and isinstance(measurement, ProjectiveMeasurement):
        # dephased-state populations without materializing omega:
        # accumulate |C[:, block] @ amps[block]|^2 over energy eigenspaces
        edges = [sl.start for sl in decomp.cluster_slices]
        per_block = np.add.reduceat(contraction * amps_eig[None, :], edges, axis=1)
        weights = np.sum(np.abs(per_block) ** 2, axis=1)
        p_omega = _clamp_rows(measurement.group_sums(weights)[None, :])[0]
    else:
        p_omega = populations(measurement, equilibrium_state(decomp, initial))

    values = getattr(measurement, "values", None)
    expectation_omega = float(np.dot(values, p_omega)) if values is not None else None
    mult = measurement.multiplicities
    s_row, o_row, b_row = _entropy_rows(p_omega[None, :], mult)
    equilibrium = EquilibriumReference(
        populations=p_omega,
        expectation=expectation_omega,
        shannon=float(s_row[0]),
        observational=float(o_row[0]),
        boltzmann=float(b_row[0]),
    )
    return PreparedSystem(
        label=label,
        decomposition=decomp,
        measurement=measurement,
        initial=initial,
        observable=obs_matrix,
        gap_stats=stats,
        d_eff=d_eff,
        equilibrium=equilibrium,
        observable_norm=obs_norm,
        amps_eig=amps_eig,
        contraction=contraction,
        effects_eig=effects_eig,
    )


def _populations_at(system: PreparedSystem, times: np.ndarray) -> np.ndarray:
    """Outcome populations at arbitrary times, (len(times), r)."""
    decomp = system.decomposition
    measurement = system.measurement
    if system.amps_eig is not None:
        out = np.empty((len(times), measurement.r))
        chunk = max(256, _CHUNK_ENTRIES // decomp.dim)
        for start in range(0, len(times), chunk):
            ts = times[start : start + chunk]
            phases = np.exp(np.outer(decomp.level_values, ts) * (-1j))
            amps = phases * system.amps_eig[:, None]
            if system.contraction is not None:
                coeffs = system.contraction @ amps
                raw = measurement.group_sums(np.abs(coeffs) ** 2).T
            else:
                raw = np.einsum("jt,ijk,kt->ti", amps.conj(), system.effects_eig, amps).real
            out[start : start + len(ts)] = raw
        return _clamp_rows(out)
    # mixed initial state: materialize each evolved state (small systems)
    from .dynamics import evolve

    rows = [populations(measurement, evolve(decomp, system.initial, float(t))) for t in times]
    return np.array(rows)


def time_grid(t_max: float, dt: float) -> np.ndarray:
    """Uniform grid covering [0, t_max], endpoint included."""
    if t_max <= 0 or dt <= 0:
        raise ValueError("t_max and dt must be positive")
    n = int(math.ceil(t_max / dt - 1e-9))
    return np.arange(n + 1) * dt


def compute_trajectory(system: PreparedSystem, times) -> Trajectory:
    """Sample populations, expectation value, and entropies on a grid."""
    times = np.asarray(times, dtype=float)
    pops = _populations_at(system, times)
    values = getattr(system.measurement, "values", None)
    expectation = pops @ values if values is not None else None
    shannon, observational, boltzmann = _entropy_rows(pops, system.measurement.multiplicities)
    return Trajectory(
        times=times,
        populations=pops,
        expectation=expectation,
        shannon=shannon,
        observational=observational,
        boltzmann=boltzmann,
        equilibrium=system.equilibrium,
    )


def sample_deviations(system: PreparedSystem, window: float, count: int, seed: int,
                      kind: str = "shannon") -> np.ndarray:
    """|entropy(t) - entropy(omega)| at ``count`` uniformly random times
    in [0, window], deterministic per seed."""
    if window <= 0:
        raise ValueError("window must be positive")
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    times = rng.uniform(0.0, window, size=count)
    pops = _populations_at(system, times)
    shannon, observational, _ = _entropy_rows(pops, system.measurement.multiplicities)
    eq = system.equilibrium
    if kind == "shannon":
        return np.abs(shannon - eq.shannon)
    if kind == "observational":
        return np.abs(observational - eq.observational)
    raise KeyError(f"unknown deviation kind {kind!r}")


# ---------------------------------------------------------------------------
# bound evaluation


def evaluate_bounds(system: PreparedSystem, trajectory: Trajectory, T_grid,
                    eps_points: int = 32) -> list:
    """Evaluate the population, entropy, and expectation inequalities for
    every averaging window in ``T_grid``."""
    reports = []
    stats = system.gap_stats
    r = system.measurement.r
    dim = system.dim
    if not system.measurement.bound_eligible:
        raise ValueError("bound evaluation needs a measurement with r >= 2")
    for T in T_grid:
        T = float(T)
        eps, factor = _bounds.optimal_epsilon(stats, T, points=eps_points)
        eta = _bounds.population_distance_bound(r, system.d_eff, factor)
        params = {
            "T": T,
            "eps": eps,
            "factor": factor,
            "eta": eta,
            "window_count": stats.window_count(eps),
            "distinct_count": stats.distinct_count,
            "min_gap": stats.min_gap,
            "outcomes": r,
            "d_eff": system.d_eff,
            "dim": dim,
        }
        estimated = stats.estimated
        reports.append(_bounds.BoundReport(
            name="population_equilibration",
            lhs=time_average_scalar(trajectory, "population_distance", T),
            rhs=eta,
            parameters=dict(params),
            estimated=estimated,
        ))
        shannon_params = dict(params)
        shannon_params["rhs_alt_prefactor"] = _bounds.shannon_deviation_bound(r, eta, alt_prefactor=True)
        reports.append(_bounds.BoundReport(
            name="shannon_deviation",
            lhs=time_average_scalar(trajectory, "shannon_abs_dev", T),
            rhs=_bounds.shannon_deviation_bound(r, eta),
            parameters=shannon_params,
            estimated=estimated,
        ))
        reports.append(_bounds.BoundReport(
            name="observational_deviation",
            lhs=time_average_scalar(trajectory, "observational_abs_dev", T),
            rhs=_bounds.observational_deviation_bound(dim, eta),
            parameters=dict(params),
            estimated=estimated,
        ))
        if system.observable_norm is not None:
            reports.append(_bounds.BoundReport(
                name="expectation_deviation",
                lhs=time_average_scalar(trajectory, "expectation_sq_dev", T),
                rhs=_bounds.expectation_bound(system.observable_norm, system.d_eff, factor),
                parameters=dict(params),
                estimated=estimated,
            ))
    return reports


def finite_time_average_curve(trajectory: Trajectory, quantity: str, T_grid) -> list:
    """``(T, <quantity>_T)`` pairs for a grid of averaging windows."""
    out = []
    for T in T_grid:
        out.append((float(T), time_average_scalar(trajectory, quantity, float(T))))
    return out


def window_average(trajectory: Trajectory, quantity: str, t0: float, t1: float) -> float:
    """Average of a trajectory quantity over [t0, t1]."""
    if not 0 <= t0 < t1 <= trajectory.span * (1 + 1e-12):
        raise ValueError(f"window [{t0}, {t1}] outside the trajectory span")
    high = time_average_scalar(trajectory, quantity, t1, check_refinement=False) * t1
    low = time_average_scalar(trajectory, quantity, t0, check_refinement=False) * t0 if t0 > 0 else 0.0
    return (high - low) / (t1 - t0)


# ---------------------------------------------------------------------------
# exponential fits


@dataclass(frozen=True)
class FitResult:
    """Least-squares fit of ``a * exp(b * x)`` on log-transformed values."""

    a: float
    b: float
    residual: float

    def to_json_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "residual": self.residual}


def fit_exponential(points) -> FitResult:
    """Fit ``value = a exp(b x)`` by linear least squares on ln(value).

    Requires at least three points with positive values; the residual is
    the rms misfit of ln(value).
    """
    pts = [(float(x), float(v)) for x, v in points]
    if len(pts) < 3:
        raise ValueError("need at least 3 points to fit")
    xs = np.array([p[0] for p in pts])
    vs = np.array([p[1] for p in pts])
    if np.any(vs <= 0):
        raise ValueError("exponential fit needs positive values")
    b, ln_a = np.polyfit(xs, np.log(vs), 1)
    resid = np.log(vs) - (ln_a + b * xs)
    return FitResult(a=float(np.exp(ln_a)), b=float(b), residual=float(np.sqrt(np.mean(resid**2))))


# ---------------------------------------------------------------------------
# experiment configuration


_MODEL_KINDS = ("tilted_ising", "precessing_spin", "spin_bath")


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment run."""

    label: str
    model: dict
    observable: dict = field(default_factory=lambda: {"axis": "z"})
    t_max: float = 100.0
    dt: float | None = None
    average_grid: tuple = (10.0, 25.0, 50.0, 100.0)
    fluctuation_window: float = 1.0e4
    fluctuation_count: int = 10_000
    seed: int = 0
    dimension_cap: int = DEFAULT_DIMENSION_CAP
    exact_gap_limit: int = DEFAULT_EXACT_GAP_LIMIT
    eps_points: int = 32

    def __post_init__(self):
        kind = self.model.get("kind")
        if kind not in _MODEL_KINDS:
            raise ConfigError("model.kind", f"must be one of {_MODEL_KINDS}, got {kind!r}")
        if kind == "tilted_ising" and "sites" not in self.model:
            raise ConfigError("model.sites", "required for tilted_ising")
        if self.t_max <= 0:
            raise ConfigError("times.t_max", "must be positive")
        if self.average_grid and max(self.average_grid) > self.t_max * (1 + 1e-12):
            raise ConfigError("average_grid", "entries must not exceed times.t_max")
        if self.fluctuation_count < 1:
            raise ConfigError("fluctuation.count", "must be >= 1")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {
            "label", "model", "observable", "times", "average_grid",
            "fluctuation", "seed", "dimension_cap", "exact_gap_limit", "eps_points",
        }
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown configuration key")
        if "model" not in raw:
            raise ConfigError("model", "missing required key")
        _check_keys("model", raw["model"], {"kind", "sites", "g", "h", "J", "bath_dim"})
        _check_keys("observable", raw.get("observable", {}), {"axis"})
        _check_keys("times", raw.get("times", {}), {"t_max", "dt"})
        _check_keys("fluctuation", raw.get("fluctuation", {}), {"window", "count"})
        times = raw.get("times", {})
        fluct = raw.get("fluctuation", {})
        try:
            return cls(
                label=str(raw.get("label", "experiment")),
                model=dict(raw["model"]),
                observable=dict(raw.get("observable", {"axis": "z"})),
                t_max=float(times.get("t_max", 100.0)),
                dt=None if times.get("dt") is None else float(times["dt"]),
                average_grid=tuple(float(t) for t in raw.get("average_grid", (10.0, 25.0, 50.0, 100.0))),
                fluctuation_window=float(fluct.get("window", 1.0e4)),
                fluctuation_count=int(fluct.get("count", 10_000)),
                seed=int(raw.get("seed", 0)),
                dimension_cap=int(raw.get("dimension_cap", DEFAULT_DIMENSION_CAP)),
                exact_gap_limit=int(raw.get("exact_gap_limit", DEFAULT_EXACT_GAP_LIMIT)),
                eps_points=int(raw.get("eps_points", 32)),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError("config", str(exc)) from exc

    def resolved_dict(self) -> dict:
        """Canonical nested form; parsing it back yields an identical
        configuration (config round-trip contract)."""
        return {
            "label": self.label,
            "model": dict(self.model),
            "observable": dict(self.observable),
            "times": {"t_max": self.t_max, "dt": self.dt},
            "average_grid": list(self.average_grid),
            "fluctuation": {"window": self.fluctuation_window, "count": self.fluctuation_count},
            "seed": self.seed,
            "dimension_cap": self.dimension_cap,
            "exact_gap_limit": self.exact_gap_limit,
            "eps_points": self.eps_points,
        }


class ConfigError(ValueError):
    """Invalid configuration; carries the offending key."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"config key {key!r}: {message}")


def _check_keys(section: str, mapping, allowed: set):
    if not isinstance(mapping, dict):
        raise ConfigError(section, "must be a mapping")
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"{section}.{key}", "unknown configuration key")


def build_system(config: ExperimentConfig) -> PreparedSystem:
    """Construct the model, measurement and initial state of a config."""
    kind = config.model["kind"]
    if kind == "tilted_ising":
        params = SpinChainParams(
            sites=int(config.model["sites"]),
            g=float(config.model.get("g", SpinChainParams.g)),
            h=float(config.model.get("h", SpinChainParams.h)),
            J=float(config.model.get("J", SpinChainParams.J)),
        )
        ham = tilted_ising_chain(params, dimension_cap=config.dimension_cap)
        axis = config.observable.get("axis", "z")
        obs = bulk_magnetization(params.sites, axis, dimension_cap=config.dimension_cap)
        initial = all_down_state(params.sites, seed=config.seed, dimension_cap=config.dimension_cap)
    elif kind == "precessing_spin":
        ham, initial, obs = precessing_spin(float(config.model.get("g", 1.0)))
    else:
        ham, initial, obs = spin_bath(
            float(config.model.get("g", 1.0)), int(config.model.get("bath_dim", 4))
        )
    return prepare_system(ham, obs, initial, label=config.label,
                          exact_gap_limit=config.exact_gap_limit)


# ---------------------------------------------------------------------------
# experiment driver


@dataclass
class ExperimentReport:
    """Everything one experiment run produced, JSON-serializable."""

    label: str
    config: dict
    system: dict
    equilibrium: dict
    past_hypothesis: dict
    trajectory_summary: dict
    bound_reports: list
    fluctuations: dict | None
    oracle: dict | None

    def to_json_dict(self) -> dict:
        return {
            "label": self.label,
            "config": self.config,
            "system": self.system,
            "equilibrium": self.equilibrium,
            "past_hypothesis": self.past_hypothesis,
            "trajectory_summary": self.trajectory_summary,
            "bounds": [r.to_json_dict() for r in self.bound_reports],
            "fluctuations": self.fluctuations,
            "oracle": self.oracle,
        }


def _oracle_populations(config: ExperimentConfig, times: np.ndarray) -> np.ndarray | None:
    """Closed-form outcome populations for the analytic models."""
    kind = config.model["kind"]
    if kind not in ("precessing_spin", "spin_bath"):
        return None
    g = float(config.model.get("g", 1.0))
    up = np.cos(g * times) ** 2
    return np.column_stack([up, 1.0 - up])


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run one configured experiment end to end; see
    :func:`execute_experiment` for the variant that also hands back the
    working objects."""
    return execute_experiment(config)[0]


def execute_experiment(config: ExperimentConfig):
    """Run one configured experiment end to end.

    Builds and diagonalizes the model, samples the trajectory, evaluates
    every inequality on the averaging grid, samples fluctuations, and
    records the initial-versus-equilibrium entropy data. Nothing is
    written to disk; the CLI layer handles persistence.

    Returns ``(report, system, trajectory)``.
    """
    system = build_system(config)
    dt = config.dt if config.dt is not None else default_time_step(system.decomposition.spectral_range)
    times = time_grid(config.t_max, dt)
    trajectory = compute_trajectory(system, times)

    reports = evaluate_bounds(system, trajectory, config.average_grid, eps_points=config.eps_points)
    reports.append(_bounds.average_entropy_check(trajectory, system.equilibrium.shannon, config.t_max))

    r = system.measurement.r
    eta_inf = _bounds.population_distance_bound(r, system.d_eff, 1.0) if r >= 2 else None
    delta = _bounds.asymptotic_shannon_bound(r, system.d_eff) if r >= 2 else None
    delta_alt = _bounds.asymptotic_shannon_bound(r, system.d_eff, alt_prefactor=True) if r >= 2 else None
    nu = _bounds.asymptotic_observational_bound(r, system.d_eff, system.dim) if r >= 2 else None

    fluctuations = None
    if delta is not None and config.fluctuation_count > 0:
        sh = sample_deviations(system, config.fluctuation_window, config.fluctuation_count,
                               seed=config.seed, kind="shannon")
        ob = sample_deviations(system, config.fluctuation_window, config.fluctuation_count,
                               seed=config.seed + 1, kind="observational")
        shannon_check = _bounds.tail_bound_check(sh, math.sqrt(delta), delta,
                                                 name="shannon_fluctuation")
        obs_check = _bounds.tail_bound_check(ob, math.sqrt(nu), nu,
                                             name="observational_fluctuation")
        reports.extend([shannon_check, obs_check])
        fluctuations = {
            "window": config.fluctuation_window,
            "count": config.fluctuation_count,
            "sqrt_delta": math.sqrt(delta),
            "sqrt_nu": math.sqrt(nu),
            "max_shannon_deviation": float(sh.max()),
            "max_observational_deviation": float(ob.max()),
        }

    late_start = 0.75 * config.t_max
    late_sel = trajectory.times >= late_start
    late_band = float(np.max(np.abs(trajectory.shannon[late_sel] - system.equilibrium.shannon)))
    initial_shannon = float(trajectory.shannon[0])
    eq_shannon = system.equilibrium.shannon
    past_hypothesis = {
        "initial_shannon": initial_shannon,
        "equilibrium_shannon": eq_shannon,
        "ratio": initial_shannon / eq_shannon if eq_shannon > 0 else None,
        "late_band": late_band,
        "within_late_band": abs(initial_shannon - eq_shannon) <= late_band,
    }

    oracle = None
    analytic = _oracle_populations(config, times)
    if analytic is not None:
        err = float(np.max(np.abs(trajectory.populations - analytic)))
        oracle = {"max_population_error": err, "passed": err <= 1e-8}

    trajectory_summary = {
        "samples": int(len(times)),
        "dt": float(dt),
        "t_max": float(config.t_max),
        "shannon_initial": initial_shannon,
        "shannon_min": float(trajectory.shannon.min()),
        "shannon_max": float(trajectory.shannon.max()),
        "boltzmann_variance": float(np.var(trajectory.boltzmann)),
        "late_band": late_band,
    }
    system_info = {
        "kind": config.model["kind"],
        "dim": system.dim,
        "outcomes": r,
        "multiplicities": [float(v) for v in system.measurement.multiplicities],
        "values": [float(v) for v in system.measurement.values]
        if getattr(system.measurement, "values", None) is not None else None,
        "distinct_count": system.gap_stats.distinct_count,
        "min_gap": system.gap_stats.min_gap,
        "spectral_range": system.decomposition.spectral_range,
        "d_eff": system.d_eff,
        "eta_infinite": eta_inf,
        "delta": delta,
        "delta_alt_prefactor": delta_alt,
        "nu": nu,
        "delta_applicable": system.gap_stats.degenerate_gap_multiplicity() <= 1,
        "gap_stats_estimated": system.gap_stats.estimated,
    }
    equilibrium = {
        "populations": [float(p) for p in system.equilibrium.populations],
        "expectation": system.equilibrium.expectation,
        "shannon": system.equilibrium.shannon,
        "observational": system.equilibrium.observational,
        "boltzmann": system.equilibrium.boltzmann,
    }
    report = ExperimentReport(
        label=config.label,
        config=config.resolved_dict(),
        system=system_info,
        equilibrium=equilibrium,
        past_hypothesis=past_hypothesis,
        trajectory_summary=trajectory_summary,
        bound_reports=reports,
        fluctuations=fluctuations,
        oracle=oracle,
    )
    return report, system, trajectory


# ---------------------------------------------------------------------------
# chain-length sweep


def sweep_chain_lengths(sites, seed: int = 0, t_max: float = 100.0,
                        late_window: tuple = (50.0, 80.0), axis: str = "z",
                        dimension_cap: int = DEFAULT_DIMENSION_CAP,
                        exact_gap_limit: int = DEFAULT_EXACT_GAP_LIMIT) -> dict:
    """Sweep the chain length and collect the scaling data: per-N
    effective dimension, asymptotic bound, and late-time-averaged
    entropy deviation, plus exponential fits of both curves."""
    rows = []
    for n in sites:
        params = SpinChainParams(sites=int(n))
        system = prepare_system(
            tilted_ising_chain(params, dimension_cap=dimension_cap),
            bulk_magnetization(int(n), axis, dimension_cap=dimension_cap),
            all_down_state(int(n), seed=seed, dimension_cap=dimension_cap),
            label=f"chain_{n}",
            exact_gap_limit=exact_gap_limit,
        )
        dt = default_time_step(system.decomposition.spectral_range)
        trajectory = compute_trajectory(system, time_grid(t_max, dt))
        late = window_average(trajectory, "shannon_abs_dev", late_window[0], late_window[1])
        r = system.measurement.r
        rows.append({
            "sites": int(n),
            "dim": system.dim,
            "outcomes": r,
            "d_eff": system.d_eff,
            "delta": _bounds.asymptotic_shannon_bound(r, system.d_eff),
            "delta_alt_prefactor": _bounds.asymptotic_shannon_bound(r, system.d_eff, alt_prefactor=True),
            "nu": _bounds.asymptotic_observational_bound(r, system.d_eff, system.dim),
            "late_abs_dev": late,
        })
    delta_fit = fit_exponential([(row["sites"], row["delta"]) for row in rows])
    late_fit = fit_exponential([(row["sites"], row["late_abs_dev"]) for row in rows])
    return {
        "rows": rows,
        "late_window": list(late_window),
        "delta_fit": delta_fit.to_json_dict(),
        "late_fit": late_fit.to_json_dict(),
        "delta_inversions": _count_inversions([row["delta"] for row in rows]),
        "late_inversions": _count_inversions([row["late_abs_dev"] for row in rows]),
    }


def _count_inversions(values) -> int:
    """Number of upward steps in a nominally decreasing sequence."""
    return int(sum(1 for a, b in zip(values, values[1:]) if b > a))
