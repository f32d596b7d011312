"""Low-level random variate generation.

Everything downstream draws randomness through :class:`RngStream`, a thin
wrapper around numpy's PCG64 generator keyed by (seed, stream_id).  Distinct
stream ids give statistically independent streams for the same seed, which
is what makes replicate experiments and chain re-runs reproducible.

The log-gamma and logit-beta samplers work entirely in log space so that
tiny shape parameters (which arise when a vague hyperprior pushes a shape
toward zero) do not underflow.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

# Above this shape the log of a gamma draw is Gaussian to within float
# precision (skewness ~ shape^-1/2), and numpy's gamma sampler starts to
# lose accuracy anyway, so switch to a moment-matched normal in log space.
_LOG_GAMMA_NORMAL_SHAPE = 1e12


class SliceStepWarning(UserWarning):
    """Stepping out hit the expansion limit; the point was left unchanged."""


@dataclass
class RngStream:
    """Splittable random stream keyed by (seed, stream_id)."""

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        ss = np.random.SeedSequence(entropy=self.seed,
                                    spawn_key=(self.stream_id,))
        self._gen = np.random.Generator(np.random.PCG64(ss))

    @property
    def gen(self) -> np.random.Generator:
        return self._gen

    def substream(self, stream_id: int) -> "RngStream":
        """Fresh independent stream under the same seed."""
        return RngStream(self.seed, stream_id)


def _broadcast(size, *arrays):
    arrays = [np.asarray(a, dtype=float) for a in arrays]
    shape = np.broadcast_shapes(*(a.shape for a in arrays))
    if size is not None:
        shape = (int(size),) + shape
    return shape, arrays


def sample_log_gamma(shape, rate, rng: RngStream, size=None) -> np.ndarray:
    """Draw log(W) where W ~ Gamma(shape, rate), elementwise.

    Stable for shapes from ~1e-300 up to arbitrarily large values: small
    shapes use the boost identity log W = log W' + log(U)/shape with
    W' ~ Gamma(shape+1), large shapes a moment-matched normal in log space.
    """
    out_shape, (a, r) = _broadcast(size, shape, rate)
    if np.any(a <= 0.0) or np.any(r <= 0.0):
        raise ValueError("gamma shape and rate must be positive")
    a = np.broadcast_to(a, out_shape)
    r = np.broadcast_to(r, out_shape)
    g = rng.gen
    out = np.empty(out_shape, dtype=float)

    small = a < 1.0
    large = a > _LOG_GAMMA_NORMAL_SHAPE
    mid = ~(small | large)

    if np.any(mid):
        am = a[mid]
        draws = g.gamma(am)
        # a >= 1 gamma draws essentially never underflow, but be safe
        bad = draws <= 0.0
        while np.any(bad):
            draws[bad] = g.gamma(am[bad])
            bad = draws <= 0.0
        out[mid] = np.log(draws)
    if np.any(small):
        asm = a[small]
        boost = g.gamma(asm + 1.0)
        bad = boost <= 0.0
        while np.any(bad):
            boost[bad] = g.gamma(asm[bad] + 1.0)
            bad = boost <= 0.0
        u = g.uniform(size=asm.shape)
        bad = u <= 0.0
        while np.any(bad):
            u[bad] = g.uniform(size=int(bad.sum()))
            bad = u <= 0.0
        out[small] = np.log(boost) + np.log(u) / asm
    if np.any(large):
        al = a[large]
        out[large] = special.digamma(al) + np.sqrt(
            special.polygamma(1, al)) * g.standard_normal(al.shape)

    out -= np.log(r)
    if out.shape == ():
        return float(out)
    return out


def sample_logit_beta(a, b, rng: RngStream, size=None) -> np.ndarray:
    """Draw logit(B) where B ~ Beta(a, b), elementwise.

    Uses the representation logit(B) = log G_a - log G_b with independent
    standard gammas, so extreme shapes stay finite in log space.
    """
    la = sample_log_gamma(a, 1.0, rng, size=size)
    lb = sample_log_gamma(b, 1.0, rng, size=size)
    return la - lb


def sample_normal(mean, sd, rng: RngStream, size=None) -> np.ndarray:
    """Normal draws, elementwise over broadcast (mean, sd)."""
    out_shape, (m, s) = _broadcast(size, mean, sd)
    if np.any(s <= 0.0):
        raise ValueError("sd must be positive")
    out = np.broadcast_to(m, out_shape) + \
        np.broadcast_to(s, out_shape) * rng.gen.standard_normal(out_shape)
    if out.shape == ():
        return float(out)
    return out


def slice_sample_1d(log_density, x0: float, rng: RngStream,
                    width: float = 1.0, max_steps: int = 100) -> float:
    """One update of a univariate slice sampler (stepping out + shrinkage).

    Parameters
    ----------
    log_density : callable
        Log of the (unnormalized) target; may return -inf outside the
        support.
    x0 : float
        Current point; must have finite log density.
    width : float
        Initial bracket size for stepping out.
    max_steps : int
        Total expansion budget for the stepping-out phase, split randomly
        between the two sides.  Capping the budget and then shrinking
        within the (possibly truncated) bracket still leaves the target
        invariant, so exhaustion is not an error; it only truncates the
        proposal bracket for this update.
    """
    g = rng.gen
    lf0 = log_density(x0)
    if not np.isfinite(lf0):
        raise ValueError("slice sampler started outside the support")
    level = lf0 - g.standard_exponential()

    # stepping out, expansion budget split randomly between the two sides
    left = x0 - width * g.uniform()
    right = left + width
    j = int(np.floor(max_steps * g.uniform()))
    k = max_steps - 1 - j
    while j > 0 and log_density(left) > level:
        left -= width
        j -= 1
    while k > 0 and log_density(right) > level:
        right += width
        k -= 1
    # shrinkage
    for _ in range(1000):
        x1 = left + (right - left) * g.uniform()
        if log_density(x1) > level:
            return x1
        if x1 < x0:
            left = x1
        else:
            right = x1
    warnings.warn("shrinkage failed to accept; leaving the point unchanged",
                  SliceStepWarning)
    return x0


def slice_sample_vec(log_density, x0, rng: RngStream,
                     width: float = 1.0, max_steps: int = 100) -> np.ndarray:
    """One slice update applied elementwise to a vector of independent
    univariate targets.

    `log_density` maps an array of points to the array of per-coordinate
    log densities; coordinate i of the output depends only on coordinate i
    of the input.  Each coordinate runs the same stepping-out/shrinkage
    scheme as slice_sample_1d, with its own level, bracket, and budget, so
    the update is exchangeable with a loop of scalar slice moves (up to
    the random number stream).  Used where a Gibbs sweep needs one slice
    move for every one of n conditionally independent coordinates.
    """
    g = rng.gen
    x0 = np.asarray(x0, dtype=float)
    f0 = log_density(x0)
    if not np.all(np.isfinite(f0)):
        raise ValueError("slice sampler started outside the support")
    level = f0 - g.standard_exponential(x0.shape)

    left = x0 - width * g.uniform(size=x0.shape)
    right = left + width
    j = np.floor(max_steps * g.uniform(size=x0.shape)).astype(int)
    k = max_steps - 1 - j

    fl = log_density(left)
    while True:
        m = (j > 0) & (fl > level)
        if not m.any():
            break
        left[m] -= width
        j[m] -= 1
        fl = log_density(left)
    fr = log_density(right)
    while True:
        m = (k > 0) & (fr > level)
        if not m.any():
            break
        right[m] += width
        k[m] -= 1
        fr = log_density(right)

    # shrinkage; coordinates that have accepted stop moving
    x1 = x0.copy()
    active = np.ones(x0.shape, dtype=bool)
    for _ in range(1000):
        prop = left + (right - left) * g.uniform(size=x0.shape)
        fp = log_density(prop)
        acc = active & (fp > level)
        x1[acc] = prop[acc]
        active &= ~acc
        if not active.any():
            return x1
        low = active & (prop < x0)
        high = active & ~low
        left[low] = prop[low]
        right[high] = prop[high]
    warnings.warn("shrinkage failed to accept on some coordinates; "
                  "leaving those points unchanged", SliceStepWarning)
    return x1
