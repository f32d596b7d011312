"""Head-to-head: conjugate latent model vs a latent Gaussian baseline.

One replicate of the small-n binomial comparison: simulate 30 binomial
observations from a latent process, fit both models at a modest MCMC
budget, and compare total squared prediction error of the posterior mean
of t*p against the truth.  Takes a few minutes because the baseline is a
generic slice sampler.  Run with ``python demos/conjugate_vs_gaussian.py``.
"""

import time
import warnings

import numpy as np

from cmlatent import (DataModel, LCMConfig, LGPConfig, gen_sim_design,
                      lgp_run_chain, run_chain)

warnings.simplefilter("ignore")

d = gen_sim_design(30, 3, 10, 10, seed=42)
dm = DataModel("binomial", t=10)
truth = dm.predict_scale(d.linpred)

t0 = time.time()
lcm = run_chain(LCMConfig(Z=d.Z_binomial, X=d.X, Phi=d.Phi, data_model=dm,
                          burnin=1000, iters=4000, seed=0,
                          store_latent=False))
t_lcm = time.time() - t0

t0 = time.time()
lgp = lgp_run_chain(LGPConfig(Z=d.Z_binomial, X=d.X, Phi=d.Phi,
                              data_model=dm, burnin=1000, iters=4000,
                              seed=0, store_latent=False))
t_lgp = time.time() - t0

e_lcm = float(np.sum((truth - lcm.pred_mean) ** 2))
e_lgp = float(np.sum((truth - lgp.pred_mean) ** 2))
print(f"conjugate model: TSPE {e_lcm:8.2f}  ({t_lcm:.1f}s)")
print(f"gaussian model:  TSPE {e_lgp:8.2f}  ({t_lgp:.1f}s)")
print(f"log TSPE ratio (gaussian over conjugate): "
      f"{np.log(e_lgp / e_lcm):+.3f}  (positive favors the conjugate model)")
