"""From microscopic clock to stable subordinator.

Simulates one p-spin clock path at desk scale, rescales it, and sets it
next to a directly sampled alpha-stable subordinator with the matching
index. The two are different processes at finite N; the point of the
rescaling is that their Laplace functionals already look alike.
"""

import math

import numpy as np

from trapclock.clock import rescale_clock, simulate_clock
from trapclock.core import ModelParams, RngStream
from trapclock.hamiltonian import PSpinDisorder
from trapclock.stable import arcsine_cdf, range_miss_prob_mc, sample_subordinator

params = ModelParams(N=16, p=3, beta=1.5, gamma=0.9, horizon_T=1.0, seed=5)
alpha = params.alpha()
steps = params.r_steps(params.horizon_T)
print(f"N = {params.N}, beta = {params.beta}, gamma = {params.gamma} "
      f"-> alpha = {alpha:.3f}, {steps} steps to cover horizon 1")

disorder = PSpinDisorder(params.N, params.p, params.stream().substream(1))
_, clock, energies = simulate_clock(disorder, params, steps, params.stream().substream(2))
rescaled = rescale_clock(clock, params)
print(f"deepest visited energy: {energies.min():+.3f} "
      f"(depth e^(-beta sqrt(N) E) = {math.exp(-params.beta * math.sqrt(params.N) * energies.min()):.2e})")
tgrid = np.linspace(0.0, 1.0, 6)
bar = rescaled.value_at(tgrid)
print(f"rescaled clock at t = 1: {bar[-1]:.4f}; largest grid increment "
      f"{np.diff(np.concatenate([[0.0], bar])).max():.4f} of the total")
print()

# The limit object, sampled on its own.
grid = np.linspace(0.0, 1.0, 6)
path = sample_subordinator(alpha, 1.0, grid, RngStream(5, 50).generator())
print(f"one alpha-stable subordinator path on the same horizon (alpha = {alpha:.3f}):")
for t, v in zip(path.grid, path.values):
    print(f"  V({t:.1f}) = {v:.4f}")
print()

est, se = range_miss_prob_mc(alpha, 1.0, 1.0, 20_000, RngStream(5, 51))
pred = float(arcsine_cdf(alpha, 0.5))
print(f"range-miss probability over [t, t+s] = [1, 2]: {est:.4f} +- {se:.4f}")
print(f"arcsine law value at ratio 1/2:              {pred:.4f}")
