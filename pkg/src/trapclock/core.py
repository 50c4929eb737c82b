"""Model parameters, derived scales, and the randomness contract.

Everything downstream shares three conventions defined here:

* parameters travel as an immutable :class:`ModelParams`;
* randomness is counter-based: a :class:`RngStream` is a pure value
  (master_seed, stream_id) and every draw is a function of it, so replicas
  parallelize without shared state;
* quantities of the form exp(beta*sqrt(N)*H) are accumulated either in the
  linear domain (desk-scale N fits in float64) or in the log domain via
  :func:`log_cumsum_exp`; a compensated-summation variant is provided for
  accuracy-sensitive small paths.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# steps beyond this cannot be indexed as python ints reliably anyway and the
# run would never finish; refuse instead of silently overflowing
_MAX_STEPS = 1 << 60


def mix64(x: int) -> int:
    """SplitMix64 finalizer on python ints (stateless 64-bit avalanche)."""
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def mix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized SplitMix64 finalizer; input/output np.uint64.

    Wraparound is the point of the arithmetic, so the overflow warning that
    numpy raises for scalar (0-d) operands is suppressed."""
    with np.errstate(over="ignore"):
        x = (x + np.uint64(_GOLDEN)).astype(np.uint64)
        x ^= x >> np.uint64(30)
        x *= np.uint64(0xBF58476D1CE4E5B9)
        x ^= x >> np.uint64(27)
        x *= np.uint64(0x94D049BB133111EB)
        return x ^ (x >> np.uint64(31))


def gaussian_from_hash(key, index) -> np.ndarray:
    """Standard normal as a pure function of (key, index).

    Two SplitMix64 rounds give two 64-bit words per index; Box-Muller turns
    them into one gaussian. Repeated queries of the same (key, index) are
    bit-identical, distinct indices are independent for statistical purposes.
    `key` may be a scalar or an array broadcastable against `index`.
    """
    idx = np.asarray(index, dtype=np.uint64)
    if isinstance(key, (int, np.integer)):
        key = np.uint64(int(key) & _MASK64)
    else:
        key = np.asarray(key, dtype=np.uint64)
    with np.errstate(over="ignore"):
        h1 = mix64_array(idx + key)
    h2 = mix64_array(h1 ^ np.uint64(_GOLDEN))
    # 53-bit mantissa uniforms, offset so u1 > 0
    u1 = ((h1 >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    u2 = (h2 >> np.uint64(11)).astype(np.float64) * 2.0**-53
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


@dataclass(frozen=True)
class RngStream:
    """Counter-based stream handle: a pure (master_seed, stream_id) pair.

    Two streams with distinct pairs are statistically independent, identical
    pairs reproduce bit-identical sequences (Philox counter mode underneath).
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array(
            [self.master_seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64
        )
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, k: int) -> "RngStream":
        """Derive a child stream; children with distinct k are independent."""
        child = mix64((self.stream_id ^ mix64(k + 1)) & _MASK64)
        return RngStream(self.master_seed, child)

    def hash_key(self) -> int:
        """64-bit key for the stateless gaussian generator."""
        return mix64((self.master_seed ^ mix64(self.stream_id)) & _MASK64)


def as_generator(rng) -> np.random.Generator:
    """Accept an RngStream or an already-built Generator.

    An RngStream is a seed recipe, not a stateful source: converting it
    builds a generator seeded from scratch. Functions that draw once per
    call therefore repeat the same draw if handed the same RngStream in a
    loop; pass ``stream.generator()`` (once) to step through a sequence.
    """
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng)!r}")


@dataclass(frozen=True)
class ModelParams:
    """Static parameters of one experiment.

    N        number of spins
    p        interaction order (>= 2)
    beta     inverse temperature; beta = 0 is the decoupled null model used
             for calibration checks (rescaling is undefined there)
    gamma    time-scale exponent of the observation scale exp(gamma*N)
    omega    block exponent in (1/2, 1); nu = floor(N**omega)
    horizon_T  macroscopic time horizon
    seed     master seed for all streams derived from these parameters
    """

    N: int
    p: int
    beta: float
    gamma: float
    omega: float = 0.6
    horizon_T: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not isinstance(self.N, int) or self.N < 1:
            raise ValueError(f"N must be a positive integer, got {self.N!r}")
        if not isinstance(self.p, int) or self.p < 2:
            raise ValueError(f"p must be an integer >= 2, got {self.p!r}")
        if self.beta < 0:
            raise ValueError(f"beta must be >= 0, got {self.beta!r}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")
        if not 0.5 < self.omega < 1.0:
            raise ValueError(f"omega must lie in (1/2, 1), got {self.omega!r}")
        if self.horizon_T <= 0:
            raise ValueError(f"horizon_T must be positive, got {self.horizon_T!r}")
        if self.nu() >= self.N:
            warnings.warn(
                f"nu = {self.nu()} >= N = {self.N}: block structure degenerate",
                stacklevel=2,
            )

    def nu(self) -> int:
        return max(1, math.floor(self.N**self.omega))

    def alpha(self) -> float:
        """gamma / beta**2, the stable index of the limiting subordinator."""
        if self.beta == 0:
            raise ValueError("alpha undefined at beta = 0")
        return self.gamma / self.beta**2

    def log_r1(self) -> float:
        """log of the step scale r(N) = sqrt(N) * exp(N gamma^2 / (2 beta^2))."""
        if self.beta == 0:
            raise ValueError("step scale undefined at beta = 0")
        return 0.5 * math.log(self.N) + self.N * self.gamma**2 / (2 * self.beta**2)

    def r_steps(self, t: float) -> int:
        """floor(t * sqrt(N) * exp(N gamma^2 / (2 beta^2))), nondecreasing in t."""
        if t < 0:
            raise ValueError("t must be >= 0")
        if t == 0:
            return 0
        log_steps = math.log(t) + self.log_r1()
        if log_steps > math.log(_MAX_STEPS):
            raise OverflowError(
                f"step budget exp({log_steps:.1f}) exceeds addressable range"
            )
        return math.floor(t * math.exp(self.log_r1()))

    def log_wall_scale(self) -> float:
        """log of the observation time scale exp(gamma * N)."""
        return self.gamma * self.N

    def stream(self) -> RngStream:
        return RngStream(self.seed, 0)


@dataclass(frozen=True)
class ScaleReport:
    nu: int
    r1: int
    r_horizon: int
    log_wall_scale: float
    wall_scale: float
    alpha: float
    zeta_p: float
    admissible: bool
    notes: tuple[str, ...]


def derive_scales(params: ModelParams, zeta_tol: float = 1e-5) -> ScaleReport:
    """Derived scales and admissibility flags for a parameter set.

    Admissibility means gamma < min(beta^2, zeta(p) * beta); a violation is
    reported, not raised, because the finite-N simulation is still defined.
    """
    if params.beta <= 0:
        raise ValueError("derive_scales requires beta > 0")
    # ModelParams has already validated the other ranges
    zeta_p = _zeta_cached(params.p, zeta_tol)
    alpha = params.alpha()
    notes = []
    if params.nu() >= params.N:
        notes.append("nu >= N: block structure degenerate")
    gamma_max = min(params.beta**2, zeta_p * params.beta)
    admissible = params.gamma < gamma_max
    if not admissible:
        notes.append(
            f"gamma = {params.gamma} >= min(beta^2, zeta(p) beta) = {gamma_max:.6g}: "
            "outside the subordinator regime"
        )
    if not 0 < alpha < 1:
        notes.append(f"alpha = {alpha:.6g} outside (0, 1)")
    log_wall = params.log_wall_scale()
    wall = math.exp(log_wall) if log_wall < 709 else math.inf
    report = ScaleReport(
        nu=params.nu(),
        r1=params.r_steps(1.0),
        r_horizon=params.r_steps(params.horizon_T),
        log_wall_scale=log_wall,
        wall_scale=wall,
        alpha=alpha,
        zeta_p=zeta_p,
        admissible=admissible,
        notes=tuple(notes),
    )
    for note in notes:
        warnings.warn(note, stacklevel=2)
    return report


@lru_cache(maxsize=None)
def _zeta_cached(p: int, tol: float) -> float:
    from .analysis import zeta

    return zeta(p, tol)


_PARAM_FIELDS = ("N", "p", "beta", "gamma", "omega", "horizon_T", "seed")
_PARAM_REQUIRED = ("N", "p", "beta", "gamma")


def params_from_json(source) -> ModelParams:
    """Build ModelParams from a JSON document (path, file object, or dict).

    Field names must match exactly; unknown keys are an error so that typos in
    experiment configs fail loudly instead of running the wrong experiment.
    """
    if isinstance(source, dict):
        doc = dict(source)
    elif hasattr(source, "read"):
        doc = json.load(source)
    else:
        with open(source, encoding="utf-8") as fh:
            doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError("parameter document must be a JSON object")
    unknown = sorted(set(doc) - set(_PARAM_FIELDS))
    if unknown:
        raise ValueError(f"unknown parameter keys: {', '.join(unknown)}")
    missing = sorted(set(_PARAM_REQUIRED) - set(doc))
    if missing:
        raise ValueError(f"missing parameter keys: {', '.join(missing)}")
    if "N" in doc:
        doc["N"] = int(doc["N"])
    if "p" in doc:
        doc["p"] = int(doc["p"])
    if "seed" in doc:
        doc["seed"] = int(doc["seed"])
    return ModelParams(**doc)


def params_to_json(params: ModelParams) -> str:
    doc = {name: getattr(params, name) for name in _PARAM_FIELDS}
    return json.dumps(doc, sort_keys=True)


def log_cumsum_exp(log_values: np.ndarray) -> np.ndarray:
    """Running log(sum(exp(...))) along the last axis, overflow-free."""
    return np.logaddexp.accumulate(np.asarray(log_values, dtype=np.float64), axis=-1)


def kahan_cumsum(values) -> np.ndarray:
    """Compensated running sum (Kahan). Python-loop speed; use on short paths
    where the plain cumsum's O(k*eps) error growth would matter."""
    out = np.empty(len(values), dtype=np.float64)
    total = 0.0
    carry = 0.0
    for i, v in enumerate(values):
        y = float(v) - carry
        t = total + y
        carry = (t - total) - y
        total = t
        out[i] = total
    return out
