"""The clock process: accumulated waiting time along a walk trajectory.

S(k) = sum_{i<k} e_i exp(beta sqrt(N) X(i)) with unit exponentials e_i and
X(i) the landscape energy at the i-th visited vertex. Increments span many
orders of magnitude, so the accumulation is done in the log domain
throughout; the linear-domain values are materialized on demand and an
overflow flag records when they stop being representable.

Rescalings of one simulated clock (plain, coarse-grained to block
boundaries, energy-truncated) are lazy views: they map a macroscopic time t
to a step index and read the stored cumulative sums, so querying is O(log)
per point and no dense rescaled path ever exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ModelParams, as_generator, log_cumsum_exp
from .hamiltonian import trajectory_energies
from .hypercube import SpinConfig, WalkTrajectory
from .skorokhod import CadlagStepPath


@dataclass(frozen=True, eq=False)
class ClockPath:
    """Cumulative clock S over integer steps 0..K; S(0) = 0.

    log_values[k] = log S(k) (log_values[0] = -inf); values[k] = S(k) with
    inf where the linear domain overflows, in which case `overflowed` is set.
    """

    log_values: np.ndarray
    overflowed: bool

    @property
    def steps(self) -> int:
        return len(self.log_values) - 1

    @property
    def values(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_values)

    def log_increments(self) -> np.ndarray:
        out = np.empty(self.steps)
        out[0] = self.log_values[1]
        prev = self.log_values[1:-1]
        nxt = self.log_values[2:]
        # log(e^nxt - e^prev), stable since nxt >= prev
        with np.errstate(divide="ignore"):
            out[1:] = nxt + np.log1p(-np.exp(np.minimum(prev - nxt, 0.0)))
        return out


def clock_from_log_increments(log_incs: np.ndarray) -> ClockPath:
    log_values = np.concatenate(([-np.inf], log_cumsum_exp(log_incs)))
    overflowed = bool(log_values[-1] > 709.0)
    return ClockPath(log_values, overflowed)


def clock_from_energies(
    energies: np.ndarray, exponentials: np.ndarray, params: ModelParams
) -> ClockPath:
    """Clock from given per-step energies X(0..k-1) and waiting draws e_i."""
    energies = np.asarray(energies, dtype=np.float64)
    exponentials = np.asarray(exponentials, dtype=np.float64)
    if len(energies) != len(exponentials):
        raise ValueError("energies and exponentials must align per step")
    if np.any(exponentials <= 0):
        raise ValueError("waiting variables must be positive")
    log_incs = (
        params.beta * math.sqrt(params.N) * energies + np.log(exponentials)
    )
    return clock_from_log_increments(log_incs)


class ClockSimulation:
    """Stateful driver so a clock can be advanced in chunks; advancing k1
    then k2 steps is bit-identical to advancing k1+k2 in one call."""

    def __init__(self, disorder, params: ModelParams, rng, start: SpinConfig | None = None):
        if disorder.N != params.N:
            raise ValueError("disorder and params disagree on N")
        base = rng if hasattr(rng, "substream") else None
        if base is not None:
            self._gen_walk = base.substream(1).generator()
            self._gen_exp = base.substream(2).generator()
        else:
            gen = as_generator(rng)
            self._gen_walk = gen
            self._gen_exp = gen
        self.disorder = disorder
        self.params = params
        self.start = start if start is not None else SpinConfig.all_plus(params.N)
        self._flips: list[int] = []
        self._log_incs: list[float] = []
        self._energies: list[float] = []
        self._config = self.start
        self._pending_energy = disorder.energy(self.start)

    def advance(self, k: int) -> None:
        if k < 1:
            raise ValueError("advance needs k >= 1")
        root = self.params.beta * math.sqrt(self.params.N)
        flips = self._gen_walk.integers(0, self.params.N, size=k)
        waits = self._gen_exp.exponential(size=k)
        cache = {"bits": self._config.bits, "energy": self._pending_energy}
        for f, w in zip(flips, waits):
            x = cache["energy"]
            self._energies.append(x)
            self._log_incs.append(root * x + math.log(w))
            e, cache = self.disorder.energy_delta(self._config, int(f), cache)
            self._config = self._config.flip(int(f))
            self._flips.append(int(f))
        self._pending_energy = cache["energy"]

    def snapshot(self) -> tuple[WalkTrajectory, ClockPath, np.ndarray]:
        traj = WalkTrajectory(self.start, tuple(self._flips))
        clock = clock_from_log_increments(np.asarray(self._log_incs))
        energies = np.concatenate([self._energies, [self._pending_energy]])
        return traj, clock, energies


def simulate_clock(
    disorder, params: ModelParams, steps: int, rng
) -> tuple[WalkTrajectory, ClockPath, np.ndarray]:
    """Simulate `steps` walk steps and the attached clock. The returned
    energy sequence has length steps+1 (one value per visited vertex);
    increment i uses energies[i]. Walk and waiting randomness come from
    disjoint substreams of `rng`."""
    if steps < 1:
        raise ValueError("steps must be >= 1")
    sim = ClockSimulation(disorder, params, rng)
    sim.advance(steps)
    return sim.snapshot()


# ---------------------------------------------------------------------------
# rescaled views
# ---------------------------------------------------------------------------


class InsufficientStepsError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class RescaledClock:
    """Lazy macroscopic view t -> e^{-gamma N} S(step_index(t)).

    kind "bar" uses step_index = floor(t sqrt(N) e^{N gamma^2/2 beta^2});
    kind "tilde" floors that index to a multiple of nu (coarse graining).
    """

    clock: ClockPath
    params: ModelParams
    kind: str = "bar"

    def __post_init__(self):
        if self.kind not in ("bar", "tilde"):
            raise ValueError(f"unknown kind {self.kind!r}")

    def _rate(self) -> float:
        return math.exp(self.params.log_r1())

    def step_index(self, t):
        arr = np.asarray(t, dtype=np.float64)
        if np.any(arr < 0):
            raise ValueError("t must be >= 0")
        k = np.floor(arr * self._rate()).astype(np.int64)
        if self.kind == "tilde":
            nu = self.params.nu()
            k = nu * (k // nu)
        if np.any(k > self.clock.steps):
            raise InsufficientStepsError(
                f"query needs step {int(np.max(k))} but clock has {self.clock.steps}"
            )
        return k

    def value_at(self, t):
        k = self.step_index(t)
        out = np.exp(self.clock.log_values[k] - self.params.gamma * self.params.N)
        out = np.where(np.isneginf(self.clock.log_values[k]), 0.0, out)
        return float(out) if np.ndim(t) == 0 else out

    def max_time(self) -> float:
        return self.clock.steps / self._rate()

    def to_step_path(self, T: float) -> CadlagStepPath:
        """Materialize the exact step path on [0, T] for metric diagnostics."""
        rate = self._rate()
        k_max = math.floor(T * rate)
        if k_max > self.clock.steps:
            raise InsufficientStepsError(
                f"T={T} needs step {k_max} but clock has {self.clock.steps}"
            )
        ks = np.arange(1, k_max + 1)
        if self.kind == "tilde":
            nu = self.params.nu()
            ks = ks[ks % nu == 0]
        times = ks / rate
        vals = np.exp(
            self.clock.log_values[ks] - self.params.gamma * self.params.N
        )
        keep = np.diff(np.concatenate(([0.0], vals))) > 0
        return CadlagStepPath(T, 0.0, times[keep], vals[keep])

    def to_csv(self, grid) -> str:
        lines = ["t,value"]
        for t in grid:
            lines.append(f"{float(t)!r},{self.value_at(float(t))!r}")
        return "\n".join(lines) + "\n"


def _require_coverage(clock: ClockPath, params: ModelParams):
    needed = params.r_steps(params.horizon_T)
    if clock.steps < needed:
        raise InsufficientStepsError(
            f"horizon {params.horizon_T} needs {needed} steps, clock has {clock.steps}"
        )


def rescale_clock(clock: ClockPath, params: ModelParams) -> RescaledClock:
    _require_coverage(clock, params)
    return RescaledClock(clock, params, "bar")


def coarse_grain_clock(clock: ClockPath, params: ModelParams) -> RescaledClock:
    _require_coverage(clock, params)
    return RescaledClock(clock, params, "tilde")


def coarse_grain_gap(clock: ClockPath, params: ModelParams) -> float:
    """sup over [0, horizon_T] of (plain - coarse-grained) rescaled clock:
    the largest intra-block accumulation, reported as a diagnostic."""
    _require_coverage(clock, params)
    k_max = params.r_steps(params.horizon_T)
    nu = params.nu()
    lv = clock.log_values[: k_max + 1]
    vals = np.exp(lv - params.gamma * params.N)
    vals = np.where(np.isneginf(lv), 0.0, vals)
    base = vals[nu * (np.arange(k_max + 1) // nu)]
    return float(np.max(vals - base))


def truncation_level(params: ModelParams, m: float) -> float:
    """B_m = gamma sqrt(N)/beta - m/(beta sqrt(N)); increments with energy
    above this level are dropped by the truncated clock."""
    root = math.sqrt(params.N)
    return params.gamma * root / params.beta - m / (params.beta * root)


def truncated_clock(
    clock: ClockPath, energies: np.ndarray, params: ModelParams, m: float
) -> RescaledClock:
    """Rescaled clock keeping only increments whose energy is <= B_m."""
    energies = np.asarray(energies, dtype=np.float64)
    if len(energies) < clock.steps:
        raise ValueError("energies must cover every increment")
    log_incs = clock.log_increments()
    keep = energies[: clock.steps] <= truncation_level(params, m)
    masked = np.where(keep, log_incs, -np.inf)
    return RescaledClock(clock_from_log_increments(masked), params, "bar")


def record_point_process(
    energies: np.ndarray, params: ModelParams, m: float
) -> np.ndarray:
    """Macroscopic positions i nu / r(N) of blocks whose maximal energy over
    steps (i nu, (i+1) nu] exceeds B_m, clipped to [0, horizon_T]."""
    energies = np.asarray(energies, dtype=np.float64)
    nu = params.nu()
    level = truncation_level(params, m)
    n_steps = len(energies) - 1
    n_blocks = n_steps // nu
    if n_blocks < 1:
        return np.array([])
    # block i looks at X(i nu + 1) .. X((i+1) nu)
    blockwise = energies[1 : n_blocks * nu + 1].reshape(n_blocks, nu)
    hits = np.flatnonzero(blockwise.max(axis=1) > level)
    rate = math.exp(params.log_r1())
    pos = hits * nu / rate
    return pos[pos <= params.horizon_T]
