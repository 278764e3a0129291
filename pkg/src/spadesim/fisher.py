"""Fisher information and Cramer-Rao bounds for two-point separation.

Conventions: two equal sources sit at +/- delta/2, and every Fisher
information here is with respect to the full separation delta, per
detected photon.  The quantum value is the integral of the squared
amplitude derivative and does not depend on delta; the classical value
for direct intensity imaging vanishes at delta = 0 (Rayleigh's curse)
and grows back to the quantum value once the sources are well separated.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .numerics import DEFAULT_QUADRATURE, QuadratureSpec, integrate
from .psf import PsfModel, SincPsf, TabulatedPsf

# Density floor: where the mean intensity profile is below this, the FI
# integrand is defined as zero to avoid 0/0.
_DENSITY_FLOOR = 1e-300

_LOOSE = QuadratureSpec(absolute_tol=1e-12, relative_tol=1e-8,
                        max_subdivisions=2**10)


def quantum_fisher(psf: PsfModel, spec: QuadratureSpec | None = None) -> float:
    """Integral of the squared amplitude derivative (per-photon FI in delta).

    Sinc models are integrated in the frequency domain, where the
    amplitude is a flat band of half-width pi/w and the integral is free
    of truncation error; other models use x-space quadrature over the
    truncation domain.
    """
    spec = spec or DEFAULT_QUADRATURE
    if isinstance(psf, SincPsf):
        a = np.pi / psf.width
        # (1/2pi) * int k^2 |psf_hat(k)|^2 dk with |psf_hat|^2 = w on [-a, a]
        return psf.width / np.pi * integrate(lambda k: k * k, 0.0, a, spec)
    r = psf.truncation_radius
    return integrate(lambda x: float(psf.derivative(x)) ** 2, -r, r, spec)


def qcrlb(psf: PsfModel, n_photons: int) -> float:
    """Quantum Cramer-Rao variance bound for n detected photons."""
    if n_photons < 1:
        raise ParameterError(f"n_photons must be at least 1, got {n_photons}")
    return 1.0 / (n_photons * quantum_fisher(psf))


def _two_source_density(psf, delta):
    half = 0.5 * delta

    def rho(x):
        return 0.5 * (float(psf.intensity(x - half)) + float(psf.intensity(x + half)))

    def drho(x):
        # d/d delta of rho; the intensity derivative is analytic
        return 0.25 * (float(psf.intensity_derivative(x + half))
                       - float(psf.intensity_derivative(x - half)))

    def integrand(x):
        r = rho(x)
        if r < _DENSITY_FLOOR:
            return 0.0
        d = drho(x)
        return d * d / r

    return integrand


def _sinc_fi_halfline(integrand, x_max, w):
    """Piecewise quadrature of the FI integrand on [0, x_max].

    Pieces of half a width keep the oscillatory integrand tame for the
    adaptive rule.
    """
    edges = np.arange(0.0, x_max + 0.25 * w, 0.5 * w)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        total += integrate(integrand, float(a), float(b), _LOOSE)
    return total


def classical_fisher_exact(psf: PsfModel, delta: float,
                           spec: QuadratureSpec | None = None) -> float:
    """Fisher information of ideal (continuum) intensity imaging at delta.

    The integrand is the squared delta-derivative of the two-source mean
    intensity divided by that intensity, with a floor of zero where the
    density underflows.
    """
    if delta < 0:
        raise ParameterError(f"delta must be non-negative, got {delta}")
    if delta == 0.0:
        # the derivative of the symmetric profile vanishes identically
        return 0.0
    spec = spec or DEFAULT_QUADRATURE
    integrand = _two_source_density(psf, delta)

    if isinstance(psf, SincPsf):
        # The integrand decays like 1/x^2, so truncation at X leaves an
        # O(1/X) remainder: extrapolate with integrals to X and 2X, for
        # which 2 F(2X) - F(X) cancels the leading tail exactly.
        x1 = max(psf.truncation_radius, 60.0 * psf.width) + 0.5 * delta
        f1 = 2.0 * _sinc_fi_halfline(integrand, x1, psf.width)
        f2 = 2.0 * _sinc_fi_halfline(integrand, 2.0 * x1, psf.width)
        return 2.0 * f2 - f1

    r = psf.truncation_radius + 0.5 * delta
    pts = [p for p in (-0.5 * delta, 0.0, 0.5 * delta) if -r < p < r]
    return integrate(integrand, -r, r, spec, points=pts)


@dataclass(frozen=True)
class SmallSeparationLaw:
    """Quadratic-law coefficient c with F_classical(delta) ~ c * delta^2.

    `divergent` is set when the defining integral grows without bound as
    the exclusion windows around intensity zeros shrink (the sinc PSF:
    the intensity has isolated zeros where its curvature does not
    vanish).  The coefficient then refers to the truncated domain.
    """

    coefficient: float
    divergent: bool


def _amplitude_zeros(psf: PsfModel) -> np.ndarray:
    """Interior zeros of the amplitude within the truncation domain."""
    if isinstance(psf, SincPsf):
        n = int(np.floor(psf.truncation_radius / psf.width))
        ks = np.arange(1, n + 1) * psf.width
        return np.sort(np.concatenate([-ks, ks]))
    if isinstance(psf, TabulatedPsf):
        r = psf.truncation_radius
        grid = np.linspace(-r, r, 8192)
        amp = np.asarray(psf.amplitude(grid))
        sign = np.sign(amp)
        idx = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
        return 0.5 * (grid[idx] + grid[idx + 1])
    return np.array([])


def _curvature_integral(psf, exclusion) -> float:
    """Integral of I''^2 / I, skipping windows around amplitude zeros."""

    def integrand(x):
        a = float(psf.amplitude(x))
        inten = a * a
        if inten < _DENSITY_FLOOR:
            return 0.0
        d1 = float(psf.derivative(x))
        d2 = float(psf.second_derivative(x))
        ipp = 2.0 * (d1 * d1 + a * d2)
        return ipp * ipp / inten

    r = psf.truncation_radius
    zeros = _amplitude_zeros(psf)
    edges = [-r]
    for z in zeros:
        edges.extend([z - exclusion, z + exclusion])
    edges.append(r)
    total = 0.0
    for a, b in zip(edges[0::2], edges[1::2]):
        if b > a:
            total += integrate(integrand, float(a), float(b), _LOOSE)
    return total


def classical_fisher_smalld(psf: PsfModel) -> SmallSeparationLaw:
    """Coefficient c of the small-separation law F_classical ~ c * delta^2.

    c = (1/16) * integral of I''(x)^2 / I(x).
    """
    eps = 1e-3 * psf.width
    v1 = _curvature_integral(psf, eps) / 16.0
    v2 = _curvature_integral(psf, 0.5 * eps) / 16.0
    divergent = abs(v2 - v1) > 0.1 * abs(v2)
    return SmallSeparationLaw(coefficient=v1, divergent=divergent)


def pixelated_classical_fisher(psf: PsfModel, delta: float,
                               pixel_width: float, n_pixels: int) -> float:
    """Fisher information of a finite-pixel intensity measurement.

    Pixel probabilities come from the intensity CDF; their
    delta-derivatives are exact (differences of the intensity itself at
    the pixel edges), so no numerical differencing enters.
    """
    if delta < 0:
        raise ParameterError("delta must be non-negative")
    if pixel_width <= 0 or n_pixels < 1:
        raise ParameterError("need positive pixel_width and n_pixels >= 1")
    edges = (np.arange(n_pixels + 1) - 0.5 * n_pixels) * pixel_width
    return _pixel_fisher(psf, delta, edges)


def _pixel_probabilities(psf, delta, edges):
    half = 0.5 * delta
    cdf_m = np.asarray(psf.intensity_cdf(edges - half))
    cdf_p = np.asarray(psf.intensity_cdf(edges + half))
    return 0.5 * (np.diff(cdf_m) + np.diff(cdf_p))


def _pixel_fisher(psf, delta, edges):
    q = _pixel_probabilities(psf, delta, edges)
    coverage = float(q.sum())
    if coverage < 0.999:
        raise ParameterError(
            f"pixel grid covers only {coverage:.4%} of the intensity; need >= 99.9%")
    half = 0.5 * delta
    i_p = np.asarray(psf.intensity(edges + half))
    i_m = np.asarray(psf.intensity(edges - half))
    dq = 0.25 * (np.diff(i_p) - np.diff(i_m))
    mask = q > _DENSITY_FLOOR
    return float(np.sum(dq[mask] ** 2 / q[mask]))


@dataclass(frozen=True)
class FisherReport:
    """Summary of the information bounds for one PSF model."""

    quantum_fi_per_photon: float
    qcrlb_per_photon: float
    classical_fi_smalld_coefficient: float
    smalld_divergent: bool
    classical_fi_exact: tuple  # ((delta, fi), ...)


def fisher_report(psf: PsfModel, deltas) -> FisherReport:
    fq = quantum_fisher(psf)
    law = classical_fisher_smalld(psf)
    table = tuple((float(d), classical_fisher_exact(psf, float(d))) for d in deltas)
    return FisherReport(
        quantum_fi_per_photon=fq,
        qcrlb_per_photon=1.0 / fq,
        classical_fi_smalld_coefficient=law.coefficient,
        smalld_divergent=law.divergent,
        classical_fi_exact=table,
    )
