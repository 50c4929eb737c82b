"""Two-time overlap estimators and the arcsine aging prediction.

The quantity of interest is the probability that the rescaled dynamics at
wall-clock times ``t * e**(gamma*N)`` and ``(t+s) * e**(gamma*N)`` sit in the
same shallow neighbourhood: the Hamming distance between the two visited
sites is at most ``epsilon * N / 2``. As N grows this converges to the
generalized arcsine law ``arcsine_cdf(alpha, t/(t+s))`` with
``alpha = gamma / beta**2``.

Everything here runs at fixed finite N, so the estimators are Monte Carlo
over fresh environments (and, optionally, over environments with a frozen
jump chain). The REM kernel is fully vectorized: walks advance in chunks,
site energies come from a counter-based hash so revisits see the same trap
depth without storing the visited set, and each replica is retired as soon
as both crossing times are known.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import ndtri

from .core import ModelParams, RngStream, mix64_array
from .stable import arcsine_cdf

__all__ = [
    "AgingEstimate",
    "estimate_aging",
    "estimate_range_miss",
    "aging_curve",
    "aging_curve_csv",
]

# fraction of replicas allowed to exhaust the step budget before the
# estimate is flagged as non conclusive
_EXCLUSION_BUDGET = 0.05


@dataclass(frozen=True)
class AgingEstimate:
    """One Monte Carlo estimate of a two-time probability.

    ``estimate`` is the empirical mean over replicas that resolved both
    crossing times; ``excluded`` counts replicas that ran out of step budget
    first. ``non_conclusive`` is set when the excluded fraction exceeds 5%,
    in which case the estimate should not be trusted (the budget truncation
    biases exactly the long-crossing tail that matters).
    """

    t: float
    s: float
    epsilon: float
    replicas: int
    estimate: float
    stderr: float
    arcsine_prediction: float
    alpha_used: float
    excluded: int = 0
    non_conclusive: bool = False
    mode: str = "rem"

    def as_dict(self) -> dict:
        return {
            "t": self.t,
            "s": self.s,
            "epsilon": self.epsilon,
            "replicas": self.replicas,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "arcsine_prediction": self.arcsine_prediction,
            "alpha_used": self.alpha_used,
            "excluded": self.excluded,
            "non_conclusive": self.non_conclusive,
            "mode": self.mode,
        }


def _arcsine_point(params: ModelParams, t: float, s: float) -> tuple[float, float]:
    if params.beta <= 0.0:
        return math.nan, math.nan
    alpha = params.alpha()
    if not 0.0 < alpha < 1.0:
        return math.nan, alpha
    if t + s <= 0.0:
        return math.nan, alpha
    return float(arcsine_cdf(alpha, t / (t + s))), alpha


def _step_cap(params: ModelParams, horizon: float, factor: float) -> int:
    # budget in microscopic steps before a replica is written off
    if params.beta > 0.0:
        return int(factor * params.r_steps(horizon)) + 1
    return int(factor * horizon * math.exp(params.gamma * params.N)) + 1


def _check_kernel_domain(params: ModelParams) -> None:
    if params.N > 64:
        raise ValueError("aging kernel packs sites into uint64, needs N <= 64")
    if params.beta * math.sqrt(params.N) > 90.0:
        raise ValueError(
            "linear-domain kernel would overflow: beta * sqrt(N) > 90"
        )
    if params.gamma * params.N > 600.0:
        raise ValueError("gamma * N too large for float64 wall-clock times")


def _derive_keys(rng: RngStream, ids: np.ndarray) -> np.ndarray:
    # one fresh environment per replica: double-mixed per-replica keys
    base = np.uint64(rng.hash_key())
    with np.errstate(over="ignore"):
        return mix64_array(mix64_array(ids.astype(np.uint64)) + base)


def _site_gaussian(keys: np.ndarray, sites: np.ndarray) -> np.ndarray:
    """One standard normal per (key, site) pair, bit-reproducible.

    A single SplitMix64 round gives a 53-bit uniform; the normal quantile
    turns it into the trap depth. This is the kernel's own hot path: the
    quantile is a vectorized rational approximation, several times cheaper
    than a Box-Muller round per element at equal statistical quality.
    """
    with np.errstate(over="ignore"):
        h = mix64_array(sites + keys)
    u = ((h >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


def _rem_kernel(
    params: ModelParams,
    t: float,
    s: float,
    replicas: int,
    rng: RngStream,
    step_cap: int,
    batch: int = 1024,
    chunk: int | None = None,
):
    """Simulate `replicas` independent REM clocks up to the second crossing.

    Returns (dist, excluded, vstar, range_undetermined):
      dist       -- Hamming distance between the sites occupied at the two
                    crossing times, -1 where the budget ran out first
      excluded   -- mask of budget-exhausted replicas (aging event unknown)
      vstar      -- first coarse-block clock value above t*e**(gamma*N),
                    NaN where no block boundary got that far in budget
      range_und  -- mask where vstar is NaN
    """
    N = params.N
    nu = params.nu()
    if chunk is None:
        chunk = max(nu, (2048 // nu) * nu)
    if chunk % nu != 0:
        raise ValueError("chunk length must be a multiple of nu")
    wall = math.exp(params.gamma * N)
    target1 = t * wall
    target2 = (t + s) * wall
    root = params.beta * math.sqrt(N)

    dist = np.full(replicas, -1, dtype=np.int64)
    excluded = np.zeros(replicas, dtype=bool)
    vstar = np.full(replicas, np.nan)

    ids = np.arange(replicas, dtype=np.uint64)
    all_keys = _derive_keys(rng.substream(1), ids)
    one = np.uint64(1)

    for lo in range(0, replicas, batch):
        hi = min(lo + batch, replicas)
        rows = np.arange(lo, hi)
        keys = all_keys[lo:hi][:, None]
        gen = rng.substream(2).substream(lo).generator()

        n = hi - lo
        pos = np.zeros(n, dtype=np.uint64)
        clock = np.zeros(n)
        site1 = np.zeros(n, dtype=np.uint64)
        site2 = np.zeros(n, dtype=np.uint64)
        have1 = np.zeros(n, dtype=bool)
        have2 = np.zeros(n, dtype=bool)
        have_v = np.zeros(n, dtype=bool)
        vloc = np.full(n, np.nan)
        steps_done = 0

        while True:
            flips = gen.integers(0, N, size=(n, chunk)).astype(np.uint64)
            waits = gen.standard_exponential(size=(n, chunk))
            pos_after = pos[:, None] ^ np.bitwise_xor.accumulate(
                one << flips, axis=1
            )
            sites = np.empty_like(pos_after)
            sites[:, 0] = pos
            sites[:, 1:] = pos_after[:, :-1]
            energies = _site_gaussian(keys, sites)
            series = clock[:, None] + np.cumsum(
                waits * np.exp(root * energies), axis=1
            )

            over1 = series > target1
            tail1 = over1[:, -1]
            j1 = np.argmax(over1, axis=1)
            fresh1 = ~have1 & tail1
            site1[fresh1] = sites[fresh1, j1[fresh1]]
            have1 |= tail1

            over2 = series > target2
            tail2 = over2[:, -1]
            j2 = np.argmax(over2, axis=1)
            fresh2 = ~have2 & tail2
            site2[fresh2] = sites[fresh2, j2[fresh2]]
            have2 |= tail2

            # coarse-grained range: clock values at block boundaries only
            blocks = series[:, nu - 1 :: nu]
            overb = blocks > target1
            bj = np.argmax(overb, axis=1)
            freshv = ~have_v & overb[:, -1]
            vloc[freshv] = blocks[freshv, bj[freshv]]
            have_v |= overb[:, -1]

            clock = series[:, -1]
            pos = pos_after[:, -1]
            steps_done += chunk

            done = have2
            if steps_done >= step_cap:
                d = hamming_u64(site1[done], site2[done])
                dist[rows[done]] = d
                vstar[rows] = vloc
                excluded[rows[~done]] = True
                break
            if done.all():
                dist[rows] = hamming_u64(site1, site2)
                vstar[rows] = vloc
                break
            if done.any():
                keep = ~done
                d = hamming_u64(site1[done], site2[done])
                dist[rows[done]] = d
                vstar[rows[done]] = vloc[done]
                rows = rows[keep]
                keys = keys[keep]
                pos = pos[keep]
                clock = clock[keep]
                site1 = site1[keep]
                site2 = site2[keep]
                have1 = have1[keep]
                have2 = have2[keep]
                have_v = have_v[keep]
                vloc = vloc[keep]
                n = rows.size

    range_und = np.isnan(vstar)
    return dist, excluded, vstar, range_und


def hamming_u64(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamming distance between packed spin configurations (bitwise)."""
    return np.bitwise_count(a ^ b).astype(np.int64)


def _frozen_rem_kernel(
    params: ModelParams,
    t: float,
    s: float,
    replicas_per_group: int,
    groups: int,
    rng: RngStream,
    step_cap: int,
    chunk: int | None = None,
):
    """REM kernel with the jump chain frozen within each group.

    Every replica in a group walks the same trajectory; the traps (site
    energies) and the exponential marks are redrawn per replica. Returns a
    list of (dist, excluded) pairs, one per group.
    """
    N = params.N
    nu = params.nu()
    if chunk is None:
        chunk = max(nu, (2048 // nu) * nu)
    wall = math.exp(params.gamma * N)
    target1 = t * wall
    target2 = (t + s) * wall
    root = params.beta * math.sqrt(N)
    one = np.uint64(1)

    out = []
    for g in range(groups):
        grng = rng.substream(100 + g)
        walk_gen = grng.substream(1).generator()
        mark_gen = grng.substream(2).generator()
        ids = np.arange(replicas_per_group, dtype=np.uint64)
        keys = _derive_keys(grng.substream(3), ids)[:, None]

        n = replicas_per_group
        pos = np.uint64(0)
        clock = np.zeros(n)
        site1 = np.zeros(n, dtype=np.uint64)
        site2 = np.zeros(n, dtype=np.uint64)
        have1 = np.zeros(n, dtype=bool)
        have2 = np.zeros(n, dtype=bool)
        steps_done = 0
        excluded = np.zeros(n, dtype=bool)

        while True:
            flips = walk_gen.integers(0, N, size=chunk).astype(np.uint64)
            pos_after = pos ^ np.bitwise_xor.accumulate(one << flips)
            sites = np.empty(chunk, dtype=np.uint64)
            sites[0] = pos
            sites[1:] = pos_after[:-1]

            waits = mark_gen.standard_exponential(size=(n, chunk))
            energies = _site_gaussian(keys, sites[None, :])
            series = clock[:, None] + np.cumsum(
                waits * np.exp(root * energies), axis=1
            )

            over1 = series > target1
            j1 = np.argmax(over1, axis=1)
            fresh1 = ~have1 & over1[:, -1]
            site1[fresh1] = sites[j1[fresh1]]
            have1 |= over1[:, -1]

            over2 = series > target2
            j2 = np.argmax(over2, axis=1)
            fresh2 = ~have2 & over2[:, -1]
            site2[fresh2] = sites[j2[fresh2]]
            have2 |= over2[:, -1]

            clock = series[:, -1]
            pos = pos_after[-1]
            steps_done += chunk

            if have2.all():
                break
            if steps_done >= step_cap:
                excluded = ~have2
                break

        dist = hamming_u64(site1, site2)
        dist[excluded] = -1
        out.append((dist, excluded))
    return out


def _pspin_kernel(
    params: ModelParams,
    t: float,
    s: float,
    replicas: int,
    rng: RngStream,
    step_cap: int,
    batch: int = 128,
):
    """p-spin version of the two-time kernel, dense tensors per replica.

    Energies are recomputed from scratch each step with a batched einsum,
    which caps the practical scale at roughly N <= 16, p <= 3. Returns the
    same (dist, excluded, vstar, range_und) tuple as the REM kernel.
    """
    N, p = params.N, params.p
    if N > 64:
        raise ValueError("p-spin aging kernel packs sites into uint64")
    if N**p > 2_000_000:
        raise ValueError("p-spin aging kernel needs a small dense tensor")
    nu = params.nu()
    wall = math.exp(params.gamma * N)
    target1 = t * wall
    target2 = (t + s) * wall
    root_scale = params.beta * math.sqrt(N) / N ** (p / 2.0)
    one = np.uint64(1)

    letters = "ijklmnoq"[:p]
    subscripts = "b" + "".join(letters) + "," + ",".join("b" + c for c in letters) + "->b"

    dist = np.full(replicas, -1, dtype=np.int64)
    excluded = np.zeros(replicas, dtype=bool)
    vstar = np.full(replicas, np.nan)

    for lo in range(0, replicas, batch):
        hi = min(lo + batch, replicas)
        n = hi - lo
        gen = rng.substream(2).substream(lo).generator()
        coup = gen.standard_normal(size=(n,) + (N,) * p)

        signs = np.ones((n, N))
        bits = np.zeros(n, dtype=np.uint64)
        clock = np.zeros(n)
        site1 = np.zeros(n, dtype=np.uint64)
        site2 = np.zeros(n, dtype=np.uint64)
        have1 = np.zeros(n, dtype=bool)
        have2 = np.zeros(n, dtype=bool)
        have_v = np.zeros(n, dtype=bool)
        vloc = np.full(n, np.nan)
        arow = np.arange(n)

        for step in range(step_cap):
            energy = np.einsum(subscripts, coup, *([signs] * p)) * root_scale
            waits = gen.standard_exponential(size=n)
            clock = clock + waits * np.exp(energy)

            fresh1 = ~have1 & (clock > target1)
            site1[fresh1] = bits[fresh1]
            have1 |= fresh1
            fresh2 = ~have2 & (clock > target2)
            site2[fresh2] = bits[fresh2]
            have2 |= fresh2
            if (step + 1) % nu == 0:
                freshv = ~have_v & (clock > target1)
                vloc[freshv] = clock[freshv]
                have_v |= freshv
            if have2.all():
                break

            flips = gen.integers(0, N, size=n)
            signs[arow, flips] *= -1.0
            bits = bits ^ (one << flips.astype(np.uint64))

        rows = np.arange(lo, hi)
        good = have2
        d = hamming_u64(site1[good], site2[good])
        dist[rows[good]] = d
        excluded[rows[~good]] = True
        vstar[rows] = vloc

    return dist, excluded, vstar, np.isnan(vstar)


def _assemble(
    params: ModelParams,
    t: float,
    s: float,
    epsilon: float,
    requested: int,
    indicator_valid: np.ndarray,
    n_excluded: int,
    mode: str,
) -> AgingEstimate:
    pred, alpha = _arcsine_point(params, t, s)
    n_valid = indicator_valid.size
    if n_valid == 0:
        est, se = math.nan, math.nan
    else:
        est = float(indicator_valid.mean())
        se = math.sqrt(max(est * (1.0 - est), 0.0) / n_valid)
    return AgingEstimate(
        t=float(t),
        s=float(s),
        epsilon=float(epsilon),
        replicas=requested,
        estimate=est,
        stderr=se,
        arcsine_prediction=pred,
        alpha_used=alpha,
        excluded=n_excluded,
        non_conclusive=bool(n_excluded > _EXCLUSION_BUDGET * requested),
        mode=mode,
    )


def estimate_aging(
    params: ModelParams,
    t: float,
    s: float,
    epsilon,
    replicas: int,
    mode: str = "rem",
    rng: RngStream | None = None,
    step_cap_factor: float = 8.0,
):
    """Monte Carlo estimate of the two-time epsilon-neighbourhood probability.

    The event: the walk observed through the rescaled clock occupies, at
    wall-clock times t*e**(gamma*N) and (t+s)*e**(gamma*N), sites within
    Hamming distance epsilon*N/2 of each other. Crossing indices are located
    on the fly (first k with S(k) above the target), no path is stored.

    `epsilon` may be a scalar or a sequence; a sequence reuses one kernel
    run and returns a list of AgingEstimate in the same order. `t, s >= 0`
    with t + s > 0; s == 0 is the degenerate check where both crossing
    times coincide and the estimate is exactly 1.
    """
    if t < 0 or s < 0 or t + s <= 0:
        raise ValueError("need t, s >= 0 and t + s > 0")
    if replicas <= 0:
        raise ValueError("replicas must be positive")
    _check_kernel_domain(params)
    if rng is None:
        rng = params.stream().substream(3)

    eps_list = [epsilon] if np.isscalar(epsilon) else list(epsilon)
    if mode == "rem":
        cap = _step_cap(params, t + s, step_cap_factor)
        dist, excluded, _, _ = _rem_kernel(params, t, s, replicas, rng, cap)
    elif mode == "pspin":
        if params.beta <= 0.0:
            raise ValueError("p-spin kernel needs beta > 0")
        cap = _step_cap(params, t + s, step_cap_factor)
        dist, excluded, _, _ = _pspin_kernel(params, t, s, replicas, rng, cap)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    valid = dist[~excluded]
    out = [
        _assemble(
            params, t, s, e, replicas,
            (valid <= e * params.N / 2.0), int(excluded.sum()), mode,
        )
        for e in eps_list
    ]
    return out[0] if np.isscalar(epsilon) else out


def estimate_aging_frozen(
    params: ModelParams,
    t: float,
    s: float,
    epsilon: float,
    replicas_per_group: int,
    groups: int = 12,
    rng: RngStream | None = None,
    step_cap_factor: float = 8.0,
) -> AgingEstimate:
    """Aging estimate with the jump chain frozen within each replica group.

    All replicas of a group share one trajectory; traps and exponential
    marks are fresh per replica. The returned stderr is the spread of the
    per-group means over sqrt(groups), which absorbs both the within-group
    binomial noise and the trajectory-to-trajectory variability.
    """
    if t < 0 or s < 0 or t + s <= 0:
        raise ValueError("need t, s >= 0 and t + s > 0")
    if groups < 2:
        raise ValueError("need at least two groups for a spread estimate")
    _check_kernel_domain(params)
    if rng is None:
        rng = params.stream().substream(4)
    cap = _step_cap(params, t + s, step_cap_factor)
    per_group = _frozen_rem_kernel(
        params, t, s, replicas_per_group, groups, rng, cap
    )

    thresh = epsilon * params.N / 2.0
    means, n_excluded = [], 0
    for dist, excluded in per_group:
        n_excluded += int(excluded.sum())
        good = dist[~excluded]
        if good.size:
            means.append(float((good <= thresh).mean()))
    pred, alpha = _arcsine_point(params, t, s)
    requested = replicas_per_group * groups
    est = float(np.mean(means))
    se = float(np.std(means, ddof=1) / math.sqrt(len(means)))
    return AgingEstimate(
        t=float(t),
        s=float(s),
        epsilon=float(epsilon),
        replicas=requested,
        estimate=est,
        stderr=se,
        arcsine_prediction=pred,
        alpha_used=alpha,
        excluded=n_excluded,
        non_conclusive=bool(n_excluded > _EXCLUSION_BUDGET * requested),
        mode="rem-frozen",
    )


def estimate_range_miss(
    params: ModelParams,
    t: float,
    s: float,
    replicas: int,
    mode: str = "rem",
    rng: RngStream | None = None,
    step_cap_factor: float = 8.0,
) -> AgingEstimate:
    """Probability that the coarse-grained clock range misses (t, t+s).

    The coarse clock only exposes values at block boundaries (multiples of
    nu). A miss means the first boundary value above t*e**(gamma*N) already
    exceeds (t+s)*e**(gamma*N), which forces both crossings into a single
    coarse block (typically one deep visit), so the miss event sits inside
    the aging event up to within-block corrections: at finite N this
    estimate runs below the two-time one, and both converge to the same
    arcsine limit.
    """
    if t < 0 or s < 0 or t + s <= 0:
        raise ValueError("need t, s >= 0 and t + s > 0")
    if replicas <= 0:
        raise ValueError("replicas must be positive")
    _check_kernel_domain(params)
    if rng is None:
        rng = params.stream().substream(5)
    cap = _step_cap(params, t + s, step_cap_factor)
    if mode == "rem":
        _, _, vstar, und = _rem_kernel(params, t, s, replicas, rng, cap)
    elif mode == "pspin":
        _, _, vstar, und = _pspin_kernel(params, t, s, replicas, rng, cap)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    wall = math.exp(params.gamma * params.N)
    miss = vstar[~und] >= (t + s) * wall
    return _assemble(
        params, t, s, math.nan, replicas, miss, int(und.sum()), mode + "-range"
    )


def aging_curve(
    params: ModelParams,
    ratios: Sequence[float],
    total: float,
    epsilon: float,
    replicas: int,
    mode: str = "rem",
    rng: RngStream | None = None,
) -> list[AgingEstimate]:
    """Sweep t/(t+s) at fixed t+s = total; one estimate per ratio.

    The arcsine prediction is increasing in the ratio, so the empirical
    curve should be monotone up to Monte Carlo noise.
    """
    if rng is None:
        rng = params.stream().substream(6)
    out = []
    for i, theta in enumerate(ratios):
        if not 0.0 < theta < 1.0:
            raise ValueError("ratios must lie strictly inside (0, 1)")
        t = theta * total
        out.append(
            estimate_aging(
                params, t, total - t, epsilon, replicas, mode=mode,
                rng=rng.substream(10 + i),
            )
        )
    return out


def aging_curve_csv(estimates: Sequence[AgingEstimate]) -> str:
    lines = ["ratio,t,s,epsilon,estimate,stderr,arcsine,excluded"]
    for e in estimates:
        ratio = e.t / (e.t + e.s)
        lines.append(
            f"{ratio!r},{e.t!r},{e.s!r},{e.epsilon!r},{e.estimate!r},"
            f"{e.stderr!r},{e.arcsine_prediction!r},{e.excluded}"
        )
    return "\n".join(lines) + "\n"
