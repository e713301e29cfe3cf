"""From a density sample to a white-noise path and back.

Draw n observations, group them into equal-mass cells, smooth the counts with
the hat kernel, and build the reconstructed path Y* from Gaussian increments.

Run: python demos/kernel_pipeline.py
"""
import numpy as np

from densequiv import (GridSpec, build_hat_basis, build_partition, build_y_star_path, cell_probabilities,
                       grouping_statistic, randomization_kernel_draw, sample_density_model,
                       sample_increments, families, uniform)

measure = uniform()
f = families.sinusoidal(measure, amplitude=0.3, frequency=1.0)
n, m, seed = 2000, 8, 7

part = build_partition(measure, m)
basis = build_hat_basis(part)
draw = sample_density_model(f, measure, n, seed)
counts = grouping_statistic(draw.payload, part)
print("cell probabilities:", np.round(cell_probabilities(f, part), 4))
print("observed counts:   ", counts)

x = randomization_kernel_draw(counts, basis, draws=n, seed=seed + 1)
print(f"kernel draws: mean {x.mean():.4f}, counts after regrouping {grouping_statistic(x, part)}")

times = np.linspace(0.0, 1.0, 11)
inc = sample_increments(f, part, n, seed + 2, size=20_000)
Y = build_y_star_path(inc, basis, n, GridSpec(times), seed + 3).values
print("\n   t   Var Y*_t * 4n  (expected t)")
for t, v in zip(times, Y.var(axis=0) * 4 * n):
    print(f"{t:5.2f} {v:14.4f}")
