"""Exact unitary dynamics in the energy eigenbasis, finite- and
infinite-time averages, effective dimension, and energy-gap statistics.

Evolution never exponentiates the Hamiltonian: states are rotated into
the eigenbasis once and propagated by phases. Degenerate levels carry
the clustered eigenvalue, so states inside one eigenspace acquire
exactly equal phases and the infinite-time average is an exact fixed
point of the evolution.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .linalg import SpectralDecomposition
from .models import DensityMatrix, PureState

__all__ = [
    "GapStatistics",
    "Trajectory",
    "default_time_step",
    "effective_dimension",
    "energy_populations",
    "equilibrium_state",
    "evolve",
    "finite_time_average_state",
    "gap_statistics",
    "time_average_scalar",
]

# Relative tolerance for the trapezoidal-refinement convergence check.
DEFAULT_AVG_RTOL = 1e-4
# Exact all-pairs gap statistics up to this many distinct eigenvalues;
# beyond it the gap multiset is subsampled and counts are estimates.
DEFAULT_EXACT_GAP_LIMIT = 2**10


def _check_dim(decomp: SpectralDecomposition, dim: int):
    if decomp.dim != dim:
        raise ValueError(f"dimension mismatch: decomposition {decomp.dim}, state {dim}")


def _rho_eigenbasis(decomp: SpectralDecomposition, state) -> np.ndarray:
    if isinstance(state, PureState):
        rho = state.density_matrix().matrix
    elif isinstance(state, DensityMatrix):
        rho = state.matrix
    else:
        rho = DensityMatrix(state).matrix
    _check_dim(decomp, rho.shape[0])
    return decomp.to_eigenbasis(rho)


def evolve(decomp: SpectralDecomposition, state, t: float):
    """Propagate a state to time ``t``: ``e^{-iHt} rho e^{+iHt}``.

    Returns the same kind of state it was given (pure in, pure out).
    """
    phase = np.exp(-1j * decomp.level_values * t)
    if isinstance(state, PureState):
        _check_dim(decomp, state.dim)
        amps = decomp.eigenvectors @ (phase * (decomp.eigenvectors.conj().T @ state.amplitudes))
        return PureState(amps)
    rho_eig = _rho_eigenbasis(decomp, state)
    rotated = decomp.eigenvectors * phase
    return DensityMatrix(rotated @ rho_eig @ rotated.conj().T)


def _dephase_eigenbasis(decomp: SpectralDecomposition, rho_eig: np.ndarray) -> np.ndarray:
    out = np.zeros_like(rho_eig)
    for sl in decomp.cluster_slices:
        out[sl, sl] = rho_eig[sl, sl]
    return out


def equilibrium_state(decomp: SpectralDecomposition, state) -> DensityMatrix:
    """Infinite-time average: the initial state dephased across the
    energy eigenspaces, ``omega = sum_E Pi_E rho Pi_E``."""
    rho_eig = _rho_eigenbasis(decomp, state)
    return DensityMatrix(decomp.from_eigenbasis(_dephase_eigenbasis(decomp, rho_eig)))


def energy_populations(decomp: SpectralDecomposition, state) -> np.ndarray:
    """Populations of the state on the Hamiltonian eigenspaces."""
    if isinstance(state, PureState):
        _check_dim(decomp, state.dim)
        per_level = np.abs(decomp.eigenvectors.conj().T @ state.amplitudes) ** 2
    else:
        rho_eig = _rho_eigenbasis(decomp, state)
        per_level = rho_eig.diagonal().real
    edges = [sl.start for sl in decomp.cluster_slices]
    return np.add.reduceat(per_level, edges)


def effective_dimension(decomp: SpectralDecomposition, state) -> float:
    """Effective dimension ``1 / sum_E Tr[Pi_E rho]^2``.

    Cross-checked against the purity form ``1 / Tr[omega^2]``; the two
    agree whenever the state is pure or the spectrum is nondegenerate
    (every case this laboratory produces), and a mismatch means the
    caller is in genuinely ambiguous territory, so it is an error.
    For pure states the two expressions are algebraically identical and
    the check is free.
    """
    pops = energy_populations(decomp, state)
    from_populations = 1.0 / float(np.sum(pops**2))
    # round-off can land a hair outside the mathematical range [1, d]
    from_populations = min(max(from_populations, 1.0), float(decomp.dim))
    if not isinstance(state, PureState):
        rho_eig = _rho_eigenbasis(decomp, state)
        purity = 0.0
        for sl in decomp.cluster_slices:
            purity += float(np.sum(np.abs(rho_eig[sl, sl]) ** 2))
        from_purity = 1.0 / purity
        if abs(from_populations - from_purity) > 1e-9 * max(1.0, from_purity):
            raise ValueError(
                "effective-dimension definitions disagree "
                f"({from_populations!r} vs {from_purity!r}); degenerate spectrum "
                "with a mixed state has no unambiguous effective dimension"
            )
    return from_populations


def finite_time_average_state(decomp: SpectralDecomposition, state, T: float) -> DensityMatrix:
    """Time-averaged state ``(1/T) int_0^T rho(t) dt``, computed exactly.

    In the eigenbasis each coherence picks up the analytic factor
    ``exp(-i w T/2) sinc(w T/2)`` for level gap ``w`` (sinc(0) = 1), so
    no quadrature is involved.
    """
    if T <= 0:
        raise ValueError("averaging window T must be positive")
    rho_eig = _rho_eigenbasis(decomp, state)
    lv = decomp.level_values
    gaps = lv[:, None] - lv[None, :]
    # numpy's sinc is sin(pi x)/(pi x): sinc(w T/2) = np.sinc(w T / (2 pi))
    kernel = np.exp(-0.5j * gaps * T) * np.sinc(gaps * T / (2.0 * math.pi))
    return DensityMatrix(decomp.from_eigenbasis(rho_eig * kernel))


@dataclass(frozen=True)
class GapStatistics:
    """Statistics of the multiset of nonzero energy gaps.

    Gaps are signed differences over ordered pairs of *distinct*
    eigenvalues, counted with multiplicity. ``window_count(eps)`` is the
    maximum number of gaps in any half-open interval of width eps; when
    the multiset was subsampled the counts are scaled estimates.
    """

    distinct_count: int
    min_gap: float | None
    gap_count: int
    subsample_factor: float
    window_counts: dict = field(default_factory=dict)
    _gaps: np.ndarray = field(repr=False, default=None)

    @property
    def estimated(self) -> bool:
        return self.subsample_factor > 1.0

    @property
    def max_gap(self) -> float:
        return float(self._gaps[-1]) if self._gaps is not None and self._gaps.size else 0.0

    def window_count(self, eps: float) -> int:
        """Maximum number of gaps in any half-open window [x, x + eps)."""
        if eps <= 0:
            raise ValueError("window width eps must be positive")
        if self._gaps is None or self._gaps.size == 0:
            return 0
        upper = np.searchsorted(self._gaps, self._gaps + eps, side="left")
        raw = int(np.max(upper - np.arange(self._gaps.size)))
        return int(math.ceil(raw * self.subsample_factor))

    def epsilon_grid(self, points: int = 32) -> np.ndarray:
        """Logarithmic grid of window widths from the smallest gap
        magnitude to the spectral range."""
        if self.min_gap is None:
            raise ValueError("no nonzero gaps: epsilon grid undefined")
        return np.geomspace(self.min_gap, max(self.max_gap, self.min_gap * (1 + 1e-12)), points)

    def degenerate_gap_multiplicity(self, rel_tol: float = 1e-12) -> int:
        """Maximum multiplicity of a single gap value (the eps -> 0 limit
        of the window count), up to a relative tolerance."""
        if self._gaps is None or self._gaps.size == 0:
            return 0
        eps = rel_tol * max(1.0, self.max_gap)
        upper = np.searchsorted(self._gaps, self._gaps + eps, side="left")
        return int(np.max(upper - np.arange(self._gaps.size)))


def gap_statistics(
    decomp: SpectralDecomposition,
    epsilons=(),
    exact_limit: int = DEFAULT_EXACT_GAP_LIMIT,
) -> GapStatistics:
    """Build gap statistics for a decomposition.

    For more than ``exact_limit`` distinct eigenvalues the all-pairs gap
    multiset (which grows quadratically) is replaced by the gaps of a
    uniformly subsampled spectrum and counts are scaled back up; the
    result carries ``estimated = True`` and the subsampling factor. The
    smallest nonzero gap is always exact.
    """
    values = decomp.cluster_values
    m = len(values)
    if m < 2:
        warnings.warn("single distinct eigenvalue: no gaps, window counts are 0")
        stats = GapStatistics(
            distinct_count=m, min_gap=None, gap_count=0, subsample_factor=1.0, _gaps=np.array([])
        )
        for eps in epsilons:
            stats.window_counts[float(eps)] = 0
        return stats
    min_gap = float(np.min(np.diff(values)))  # values ascending
    if m > exact_limit:
        picks = np.unique(np.round(np.linspace(0, m - 1, exact_limit)).astype(int))
        sample = values[picks]
        factor = (m * (m - 1)) / (len(sample) * (len(sample) - 1))
    else:
        sample = values
        factor = 1.0
    diff = sample[None, :] - sample[:, None]
    gaps = np.sort(diff[~np.eye(len(sample), dtype=bool)])
    stats = GapStatistics(
        distinct_count=m,
        min_gap=min_gap,
        gap_count=m * (m - 1),
        subsample_factor=float(factor),
        _gaps=gaps,
    )
    for eps in epsilons:
        stats.window_counts[float(eps)] = stats.window_count(float(eps))
    return stats


def default_time_step(spectral_range: float) -> float:
    """Grid step resolving the fastest phase of the evolution."""
    if spectral_range <= 0:
        return 0.02
    return min(0.02, math.pi / (10.0 * spectral_range))


@dataclass(frozen=True)
class EquilibriumReference:
    """Per-observable values of the infinite-time-averaged state."""

    populations: np.ndarray
    expectation: float | None
    shannon: float
    observational: float
    boltzmann: float


@dataclass(frozen=True)
class Trajectory:
    """Sampled observables of an evolving state on an ascending time grid."""

    times: np.ndarray
    populations: np.ndarray  # (samples, outcomes)
    expectation: np.ndarray | None
    shannon: np.ndarray
    observational: np.ndarray
    boltzmann: np.ndarray
    equilibrium: EquilibriumReference

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        if times.ndim != 1 or np.any(np.diff(times) <= 0):
            raise ValueError("time grid must be strictly ascending")

    @property
    def span(self) -> float:
        return float(self.times[-1])

    def quantity(self, name: str) -> np.ndarray:
        """Resolve a named per-time series, including deviation series
        taken relative to the equilibrium reference."""
        eq = self.equilibrium
        if name == "expectation":
            return self.expectation
        if name == "shannon":
            return self.shannon
        if name == "observational":
            return self.observational
        if name == "boltzmann":
            return self.boltzmann
        if name == "shannon_abs_dev":
            return np.abs(self.shannon - eq.shannon)
        if name == "observational_abs_dev":
            return np.abs(self.observational - eq.observational)
        if name == "boltzmann_abs_dev":
            return np.abs(self.boltzmann - eq.boltzmann)
        if name == "population_distance":
            return 0.5 * np.sum(np.abs(self.populations - eq.populations[None, :]), axis=1)
        if name == "expectation_sq_dev":
            return (self.expectation - eq.expectation) ** 2
        raise KeyError(f"unknown trajectory quantity {name!r}")


def _trapezoid_to(times: np.ndarray, values: np.ndarray, T: float) -> float:
    """Integral of the sampled series over [0, T], with the final partial
    interval handled by linear interpolation."""
    k = int(np.searchsorted(times, T, side="right")) - 1
    total = float(np.trapezoid(values[: k + 1], times[: k + 1])) if k >= 1 else 0.0
    if k + 1 < len(times) and times[k] < T:
        frac = (T - times[k]) / (times[k + 1] - times[k])
        v_t = values[k] + frac * (values[k + 1] - values[k])
        total += 0.5 * (values[k] + v_t) * (T - times[k])
    return total


def time_average_scalar(
    series: Trajectory,
    quantity,
    T: float,
    rtol_avg: float = DEFAULT_AVG_RTOL,
    check_refinement: bool = True,
) -> float:
    """Trapezoidal time average ``(1/T) int_0^T X(t) dt``.

    ``quantity`` is a named series or a raw array aligned with the grid.
    The average is recomputed on the grid thinned by half; a relative
    change above ``rtol_avg`` means the grid does not resolve the signal
    and triggers a warning.
    """
    times = series.times
    values = series.quantity(quantity) if isinstance(quantity, str) else np.asarray(quantity, float)
    if T <= 0 or T > times[-1] * (1 + 1e-12):
        raise ValueError(f"T = {T!r} outside the trajectory span (0, {times[-1]!r}]")
    T = min(T, float(times[-1]))
    avg = _trapezoid_to(times, values, T) / T
    if check_refinement:
        # keep the final sample so the coarse integral spans the same window
        idx = np.arange(0, len(times), 2)
        if idx[-1] != len(times) - 1:
            idx = np.append(idx, len(times) - 1)
        coarse = _trapezoid_to(times[idx], values[idx], T) / T
        delta = abs(avg - coarse)
        if delta > rtol_avg * max(1.0, abs(avg)):
            warnings.warn(
                f"time average of {quantity!r} not converged: halving the "
                f"step moves it by {delta:.3e}"
            )
    return avg
