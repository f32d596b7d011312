"""Tour of the univariate conjugate family and its multivariate extension.

Samples each of the four unit kinds, checks the sample moments against
the closed forms, builds a correlated multivariate version, and shows the
large-shape Gaussian limit.  Run with ``python demos/distribution_tour.py``.
"""

import numpy as np

from cmlatent import (PartitionKind, RngStream, cm_sample, dy_sample,
                      gaussian_limit)
from cmlatent.partition import dy_moments

rng = RngStream(2024)
n = 200_000

print("unit kinds: sample mean/var vs closed form at %d draws" % n)
for kind, (a, k) in [(PartitionKind.NEG_INV_GAMMA, (2.0, 1.5)),
                     (PartitionKind.LOGIT_BETA, (1.0, 3.0)),
                     (PartitionKind.LOG_GAMMA, (2.5, 1.0)),
                     (PartitionKind.QUADRATIC, (1.0, 0.5))]:
    x = dy_sample(kind, a, k, rng, size=n)
    mean, var = dy_moments(kind, a, k)
    print(f"  {kind.name:<14} alpha={a:<4} kappa={k:<4} "
          f"mean {x.mean():+.4f} (exact {mean:+.4f})  "
          f"var {x.var():.4f} (exact {var:.4f})")

print("\nGaussian limit: growing the shape parameter of a correlated")
print("3-vector drives it toward N(mu, V V')")
g = np.random.default_rng(5)
mu = np.array([1.0, -0.5, 0.2])
V = g.normal(size=(3, 3)) + 2.0 * np.eye(3)
target = V @ V.T
for alpha in (10.0, 100.0, 10_000.0):
    params = gaussian_limit(PartitionKind.LOG_GAMMA, mu, V, alpha)
    draws = cm_sample(params, RngStream(7), size=50_000)
    rel = (np.linalg.norm(np.cov(draws.T) - target)
           / np.linalg.norm(target))
    print(f"  alpha {alpha:>8.0f}: mean error "
          f"{np.abs(draws.mean(axis=0) - mu).max():.4f}, "
          f"cov rel Frobenius error {rel:.4f}")
