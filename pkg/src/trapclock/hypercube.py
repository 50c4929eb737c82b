"""Simple random walk on the hypercube {-1,+1}^N and its Ehrenfest projection.

Configurations are stored bit-packed (bit i set means spin i is -1), so
Hamming distances are XOR + popcount and a trajectory of length k costs
O(k) ints of memory, not O(kN). The distance-to-start process is the
Ehrenfest birth-death chain on {0..N}; exact hitting probabilities and the
full distribution after k steps are computed here and cross-checked against
a linear-system solve in the tests.
"""

from __future__ import annotations

import io
import math
import struct
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import RngStream, as_generator


@dataclass(frozen=True)
class SpinConfig:
    """One vertex of {-1,+1}^N. bit i of `bits` set <=> spin i equals -1."""

    N: int
    bits: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not 0 <= self.bits < (1 << self.N):
            raise ValueError("bits out of range for N")

    @classmethod
    def all_plus(cls, N: int) -> "SpinConfig":
        return cls(N, 0)

    @classmethod
    def from_signs(cls, signs) -> "SpinConfig":
        arr = np.asarray(signs)
        if not np.all(np.abs(arr) == 1):
            raise ValueError("signs must be +1/-1")
        bits = 0
        for i, s in enumerate(arr):
            if s < 0:
                bits |= 1 << i
        return cls(len(arr), bits)

    @classmethod
    def random(cls, N: int, rng) -> "SpinConfig":
        gen = as_generator(rng)
        bits = int.from_bytes(gen.bytes((N + 7) // 8), "little") & ((1 << N) - 1)
        return cls(N, bits)

    def signs(self) -> np.ndarray:
        out = np.ones(self.N, dtype=np.int8)
        b = self.bits
        while b:
            i = (b & -b).bit_length() - 1
            out[i] = -1
            b &= b - 1
        return out

    def spin(self, i: int) -> int:
        return -1 if (self.bits >> i) & 1 else 1

    def flip(self, i: int) -> "SpinConfig":
        if not 0 <= i < self.N:
            raise IndexError(f"coordinate {i} out of range")
        return SpinConfig(self.N, self.bits ^ (1 << i))

    def packed(self) -> bytes:
        return self.bits.to_bytes((self.N + 7) // 8, "little")


def hamming(a: SpinConfig, b: SpinConfig) -> int:
    if a.N != b.N:
        raise ValueError("dimension mismatch")
    return (a.bits ^ b.bits).bit_count()


def overlap(a: SpinConfig, b: SpinConfig) -> float:
    """Normalized overlap, equal to 1 - 2*hamming/N."""
    return 1.0 - 2.0 * hamming(a, b) / a.N


def walk_step(config: SpinConfig, rng) -> tuple[SpinConfig, int]:
    """One step of the unbiased walk: flip a uniformly chosen coordinate.

    When stepping in a loop, pass a numpy Generator; a bare RngStream is
    reseeded on every call and would repeat the same coordinate.
    """
    i = int(as_generator(rng).integers(config.N))
    return config.flip(i), i


@dataclass(frozen=True)
class WalkTrajectory:
    """A walk given by its start and the sequence of flipped coordinates."""

    start: SpinConfig
    flips: tuple[int, ...]

    def __post_init__(self):
        for f in self.flips:
            if not 0 <= f < self.start.N:
                raise ValueError(f"flip index {f} out of range")

    @property
    def length(self) -> int:
        return len(self.flips)

    @property
    def N(self) -> int:
        return self.start.N

    def config_at(self, k: int) -> SpinConfig:
        if not 0 <= k <= self.length:
            raise IndexError("step index out of range")
        bits = self.start.bits
        for f in self.flips[:k]:
            bits ^= 1 << f
        return SpinConfig(self.N, bits)

    def positions(self) -> list[SpinConfig]:
        out = [self.start]
        bits = self.start.bits
        for f in self.flips:
            bits ^= 1 << f
            out.append(SpinConfig(self.N, bits))
        return out

    def position_bits(self) -> np.ndarray:
        """(length+1, ceil(N/8)) packed uint8 array of all visited vertices."""
        nbytes = (self.N + 7) // 8
        masks = np.zeros((self.length + 1, nbytes), dtype=np.uint8)
        masks[0] = np.frombuffer(self.start.packed(), dtype=np.uint8)
        if self.length:
            flips = np.asarray(self.flips, dtype=np.int64)
            rows = np.arange(1, self.length + 1)
            masks[rows, flips // 8] = np.uint8(1) << (flips % 8).astype(np.uint8)
            np.bitwise_xor.accumulate(masks, axis=0, out=masks)
        return masks

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        buf.write(struct.pack("<QQ", self.N, self.length))
        buf.write(self.start.packed())
        buf.write(np.asarray(self.flips, dtype="<u4").tobytes())
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes) -> "WalkTrajectory":
        N, k = struct.unpack_from("<QQ", data, 0)
        off = 16
        nbytes = (N + 7) // 8
        bits = int.from_bytes(data[off : off + nbytes], "little")
        off += nbytes
        flips = np.frombuffer(data, dtype="<u4", count=k, offset=off)
        return cls(SpinConfig(int(N), bits), tuple(int(f) for f in flips))


def sample_walk(N: int, k: int, rng, start: SpinConfig | None = None) -> WalkTrajectory:
    if start is None:
        start = SpinConfig.all_plus(N)
    if start.N != N:
        raise ValueError("start has wrong dimension")
    flips = as_generator(rng).integers(0, N, size=k)
    return WalkTrajectory(start, tuple(int(f) for f in flips))


# ---------------------------------------------------------------------------
# Ehrenfest (distance) chain
# ---------------------------------------------------------------------------


@dataclass
class EhrenfestChain:
    """Birth-death chain on {0..N}: from i, down w.p. i/N, up w.p. 1 - i/N."""

    N: int
    state: int = 0

    def __post_init__(self):
        if not 0 <= self.state <= self.N:
            raise ValueError("state out of range")

    def step(self, rng) -> int:
        """Advance one step and return the new state (pass a Generator when
        looping, see walk_step)."""
        gen = as_generator(rng)
        if gen.random() < self.state / self.N:
            self.state -= 1
        else:
            self.state += 1
        return self.state


def _ehrenfest_paths(N: int, steps: int, replicas: int, gen: np.random.Generator) -> np.ndarray:
    """(replicas, steps) array of states Q_1..Q_steps, all started at 0."""
    states = np.zeros(replicas, dtype=np.int64)
    out = np.empty((replicas, steps), dtype=np.int64)
    for i in range(steps):
        down = gen.random(replicas) * N < states
        states = states + np.where(down, -1, 1)
        out[:, i] = states
    return out


def ehrenfest_hitting_prob(k: int, l: int, m: int, N: int) -> float:
    """P_l[T_m < T_k] for the Ehrenfest chain, exact.

    Computed as a ratio of sums of inverse binomials, evaluated in rational
    arithmetic so the only rounding is the final float conversion.
    """
    if not (0 <= k < l < m <= N):
        raise ValueError(f"need 0 <= k < l < m <= N, got k={k}, l={l}, m={m}, N={N}")
    num = sum(Fraction(1, math.comb(N - 1, i)) for i in range(k, l))
    den = num + sum(Fraction(1, math.comb(N - 1, i)) for i in range(l, m))
    return float(num / den)


def ehrenfest_hitting_linear_solve(k: int, l: int, m: int, N: int) -> float:
    """Same probability from the first-step linear system on states k..m.

    Independent of the closed form above; kept as the cross-check route.
    """
    if not (0 <= k < l < m <= N):
        raise ValueError(f"need 0 <= k < l < m <= N, got k={k}, l={l}, m={m}, N={N}")
    interior = list(range(k + 1, m))
    n = len(interior)
    A = np.eye(n)
    b = np.zeros(n)
    for row, i in enumerate(interior):
        p_down = i / N
        p_up = 1.0 - p_down
        if i - 1 == k:
            pass  # h(k) = 0
        else:
            A[row, row - 1] -= p_down
        if i + 1 == m:
            b[row] += p_up  # h(m) = 1
        else:
            A[row, row + 1] -= p_up
    h = np.linalg.solve(A, b)
    return float(h[interior.index(l)])


def distance_distribution(N: int, k: int) -> np.ndarray:
    """Exact law of the distance from the start after k steps, over {0..N}."""
    if k < 0:
        raise ValueError("k must be >= 0")
    p = np.zeros(N + 1)
    p[0] = 1.0
    down = np.arange(N + 1) / N  # prob of moving d -> d-1 from state d
    for _ in range(k):
        q = np.zeros_like(p)
        q[:-1] += p[1:] * down[1:]
        q[1:] += p[:-1] * (1.0 - down[:-1])
        p = q
    assert abs(p.sum() - 1.0) < 1e-12
    return p


def binomial_half_pmf(N: int) -> np.ndarray:
    """Binomial(N, 1/2) pmf, the parity-averaged stationary law of the chain."""
    return np.array([math.comb(N, d) for d in range(N + 1)], dtype=float) / 2.0**N


def mixing_constant_estimate(N: int, target_tv: float = 1e-6, k_max: int | None = None) -> float:
    """Smallest K such that the parity-averaged law at k = ceil(K N^2 log N)
    is within target_tv of Binomial(N, 1/2) in total variation.

    The relevant bound guarantees existence of some finite K without naming
    it, so this reports rather than asserts.
    """
    stat = binomial_half_pmf(N)
    scale = N * N * math.log(N) if N > 1 else 1.0
    if k_max is None:
        k_max = int(8 * scale) + 2
    p = distance_distribution(N, 0)
    prev = p
    for k in range(1, k_max + 1):
        prev, p = p, _distance_step(N, p)
        tv = 0.5 * np.abs(0.5 * (prev + p) - stat).sum()
        if tv <= target_tv:
            return k / scale
    raise RuntimeError(f"no K <= {k_max / scale:.2f} reached TV {target_tv}")


def _distance_step(N: int, p: np.ndarray) -> np.ndarray:
    down = np.arange(N + 1) / N
    q = np.zeros_like(p)
    q[:-1] += p[1:] * down[1:]
    q[1:] += p[:-1] * (1.0 - down[:-1])
    return q


def no_backtrack_prob(N: int, nu: int) -> float:
    """P[the first nu flips pick nu distinct coordinates] = prod (N-i)/N."""
    if not 1 <= nu <= N:
        raise ValueError(f"need 1 <= nu <= N, got nu={nu}, N={N}")
    prob = 1.0
    for i in range(nu):
        prob *= (N - i) / N
    lower = math.exp(-(nu**2) / N)
    if prob < lower:
        raise AssertionError(
            f"no_backtrack_prob({N}, {nu}) = {prob} broke the lower bound {lower}"
        )
    return prob


def return_statistic_rho(
    N: int, nu: int, d: int, samples: int, rng
) -> tuple[float, float]:
    """Monte Carlo estimate of the expected time the distance chain spends at
    level d during steps 1..nu, started from 0. Returns (estimate, stderr)."""
    if d > nu:
        raise ValueError("d > nu: level unreachable within the window")
    gen = as_generator(rng)
    paths = _ehrenfest_paths(N, nu, samples, gen)
    visits = (paths == d).sum(axis=1).astype(float)
    est = float(visits.mean())
    se = float(visits.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    if d == 0 and nu >= 2 and est < 1.0 / N - 3.0 * se:
        warnings.warn(f"rho(0) estimate {est:.4g} below 1/N = {1 / N:.4g}", stacklevel=2)
    if est > 2.0 + 3.0 * se:
        warnings.warn(f"rho({d}) estimate {est:.4g} above the expected O(1) range", stacklevel=2)
    return est, se


def pair_distance_counts(
    traj: WalkTrajectory, nu: int, cap: int = 10_000, incremental: bool = False
) -> np.ndarray:
    """Counts of vertex pairs (i < j) at each Hamming distance d, split by
    block membership.

    Returns an (N+1, 2) integer array: column 0 counts pairs whose indices
    fall in different length-nu blocks, column 1 pairs in the same block.
    The computation is quadratic in the trajectory length; lengths above
    `cap` require incremental=True as an explicit opt-in. The packed-bit
    representation keeps memory at (k+1)*ceil(N/8) bytes either way.
    """
    if nu < 1:
        raise ValueError("nu must be >= 1")
    k = traj.length
    if k > cap and not incremental:
        raise ValueError(
            f"trajectory length {k} exceeds cap {cap}; pass incremental=True"
        )
    N = traj.N
    counts = np.zeros((N + 1, 2), dtype=np.int64)
    bits = traj.position_bits()
    blocks = np.arange(k + 1) // nu
    for j in range(1, k + 1):
        d = np.bitwise_count(bits[:j] ^ bits[j]).sum(axis=1).astype(np.int64)
        same = (blocks[:j] == blocks[j]).astype(np.int64)
        np.add.at(counts, (d, same), 1)
    return counts


def pair_counts_to_csv(counts: np.ndarray) -> str:
    lines = ["d,cross_count,same_count"]
    for d in range(counts.shape[0]):
        lines.append(f"{d},{counts[d, 0]},{counts[d, 1]}")
    return "\n".join(lines) + "\n"
