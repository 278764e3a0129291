"""Shared quadrature, root finding, and deterministic random streams.

Random streams are counter-based (Philox): a stream is identified by the
value pair (seed, stream_id) and always reproduces the same draw sequence,
independent of process or worker scheduling.  Parallel Monte Carlo callers
assign disjoint stream ids to trials.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import BracketError, NumericalError, ParameterError

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and subdivision budget for adaptive integration."""

    absolute_tol: float = 1e-10
    relative_tol: float = 1e-9
    max_subdivisions: int = 2**16

    def __post_init__(self):
        if self.absolute_tol <= 0 or self.relative_tol <= 0:
            raise ParameterError("quadrature tolerances must be positive")
        if self.max_subdivisions < 4:
            raise ParameterError("max_subdivisions must be at least 4")


DEFAULT_QUADRATURE = QuadratureSpec()


@dataclass(frozen=True)
class RngStream:
    """Value-semantics handle for one reproducible random stream."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64],
                       dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


def as_generator(rng) -> np.random.Generator:
    """Accept either an RngStream or an already-built numpy Generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise ParameterError(f"expected RngStream or numpy Generator, got {type(rng)!r}")


def integrate(f, a, b, spec: QuadratureSpec | None = None, points=None) -> float:
    """Adaptive quadrature of f over [a, b].

    Raises NumericalError (carrying the best estimate and its error bound)
    when the subdivision budget is exhausted before the tolerance is met.
    `points` marks known awkward abscissae (kinks, spikes) for the
    subdivision strategy.
    """
    if not a < b:
        raise ParameterError(f"integration interval requires a < b, got [{a}, {b}]")
    spec = spec or DEFAULT_QUADRATURE
    out = quad(f, a, b,
               epsabs=spec.absolute_tol,
               epsrel=spec.relative_tol,
               limit=spec.max_subdivisions,
               points=points,
               full_output=True)
    value, err = out[0], out[1]
    if len(out) > 3 or not np.isfinite(value):
        raise NumericalError(
            f"quadrature did not converge on [{a}, {b}]: {out[3] if len(out) > 3 else 'non-finite result'}",
            best_estimate=float(value), error_bound=float(err))
    return float(value)


def find_root_monotone(g, lo, hi, tol) -> float:
    """Root of a continuous monotone g on [lo, hi], bracketed to width <= tol.

    Uses Brent's method (bisection with secant/inverse-quadratic steps).
    """
    if tol <= 0:
        raise ParameterError("tol must be positive")
    glo = g(lo)
    ghi = g(hi)
    if glo == 0.0:
        return float(lo)
    if ghi == 0.0:
        return float(hi)
    if np.sign(glo) == np.sign(ghi):
        raise BracketError(
            f"no sign change on [{lo}, {hi}]: g(lo)={glo:g}, g(hi)={ghi:g}")
    return float(brentq(g, lo, hi, xtol=tol))


def _check_probability(p):
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"probability must lie in [0, 1], got {p}")


def sample_binomial(n, p, rng) -> int:
    if n < 0:
        raise ParameterError("n must be non-negative")
    _check_probability(p)
    return int(as_generator(rng).binomial(n, p))


def sample_multinomial(n, probs, rng) -> np.ndarray:
    """Counts over len(probs) categories; counts always sum to n."""
    if n < 0:
        raise ParameterError("n must be non-negative")
    probs = np.asarray(probs, dtype=float)
    if np.any(probs < 0):
        raise ParameterError("probabilities must be non-negative")
    total = probs.sum()
    if abs(total - 1.0) > 1e-12:
        raise ParameterError(f"probabilities must sum to 1 within 1e-12, got {total!r}")
    return as_generator(rng).multinomial(n, probs / total)


def sample_gamma(shape, scale, rng) -> float:
    if shape <= 0:
        raise ParameterError("gamma shape must be positive")
    if scale <= 0:
        raise ParameterError("gamma scale must be positive")
    return float(as_generator(rng).gamma(shape, scale))


def sample_poisson(mean, rng) -> int:
    if mean < 0:
        raise ParameterError("poisson mean must be non-negative")
    return int(as_generator(rng).poisson(mean))
