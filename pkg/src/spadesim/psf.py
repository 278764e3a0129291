"""Normalized one-dimensional amplitude point-spread functions.

Every model exposes the amplitude psi(x) with unit intensity norm
(integral of psi^2 equals 1), its first two derivatives, and the
cumulative intensity used for pixel probabilities.  Lengths are in
whatever unit the width was given in; Fisher informations derived from
these models then carry units of inverse length squared.

Models are immutable after construction and safe to share across
concurrent workers.
"""

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import ndtr, sici

from .errors import DataError, ParameterError
from .numerics import DEFAULT_QUADRATURE, integrate

# Gaussian tails beyond 8 sigma hold < 1e-14 of the intensity, so x-space
# quadrature truncated there is exact at the tolerances used here.  The sinc
# intensity decays only like 1/x^2; inner products for sinc models are
# therefore evaluated in the frequency domain (see modes.py), never by
# truncated x-space quadrature.
GAUSSIAN_TRUNCATION_SIGMAS = 8.0
SINC_TRUNCATION_WIDTHS = 60.0

# Below this argument the oscillatory sinc-derivative expressions lose
# precision to cancellation; switch to their Taylor series.
_SERIES_CUTOFF = 1e-3


class PsfModel:
    """Base class; concrete models set kind, width and truncation_radius."""

    kind: str
    width: float
    truncation_radius: float

    def amplitude(self, x):
        raise NotImplementedError

    def derivative(self, x):
        raise NotImplementedError

    def second_derivative(self, x):
        raise NotImplementedError

    def intensity(self, x):
        a = self.amplitude(x)
        return a * a

    def intensity_derivative(self, x):
        return 2.0 * self.amplitude(x) * self.derivative(x)

    def intensity_cdf(self, x):
        """Integral of the intensity from -infinity to x."""
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(width={self.width!r})"


class GaussianPsf(PsfModel):
    """psi(x) = (2 pi sigma^2)^(-1/4) exp(-x^2 / (4 sigma^2))."""

    kind = "gaussian"

    def __init__(self, sigma):
        self.width = float(sigma)
        self.truncation_radius = GAUSSIAN_TRUNCATION_SIGMAS * self.width
        self._norm = (2.0 * np.pi * self.width**2) ** (-0.25)

    def amplitude(self, x):
        x = np.asarray(x, dtype=float)
        return self._norm * np.exp(-x * x / (4.0 * self.width**2))

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return -x / (2.0 * self.width**2) * self.amplitude(x)

    def second_derivative(self, x):
        x = np.asarray(x, dtype=float)
        s2 = self.width**2
        return (x * x / (4.0 * s2 * s2) - 1.0 / (2.0 * s2)) * self.amplitude(x)

    def intensity_cdf(self, x):
        # intensity is a normal density with standard deviation sigma
        return ndtr(np.asarray(x, dtype=float) / self.width)


def _sinc_deriv(u):
    """d/du of sin(u)/u, series-protected near u = 0."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _SERIES_CUTOFF
    us = np.where(small, u, 1.0)
    series = (-us / 3.0 + us**3 / 30.0 - us**5 / 840.0
              + us**7 / 45360.0 - us**9 / 3991680.0)
    ug = np.where(small, 1.0, u)
    with np.errstate(divide="ignore", invalid="ignore"):
        general = (ug * np.cos(ug) - np.sin(ug)) / (ug * ug)
    return np.where(small, series, general)


def _sinc_deriv2(u):
    """Second derivative of sin(u)/u, series-protected near u = 0."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < _SERIES_CUTOFF
    us = np.where(small, u, 1.0)
    series = (-1.0 / 3.0 + us**2 / 10.0 - us**4 / 168.0
              + us**6 / 6480.0 - us**8 / 443520.0)
    ug = np.where(small, 1.0, u)
    with np.errstate(divide="ignore", invalid="ignore"):
        general = (2.0 * np.sin(ug) - 2.0 * ug * np.cos(ug)
                   - ug * ug * np.sin(ug)) / ug**3
    return np.where(small, series, general)


class SincPsf(PsfModel):
    """psi(x) = w^(-1/2) sinc(pi x / w), sinc(u) = sin(u)/u."""

    kind = "sinc"

    def __init__(self, w, truncation_radius=None):
        self.width = float(w)
        self.truncation_radius = (float(truncation_radius)
                                  if truncation_radius is not None
                                  else SINC_TRUNCATION_WIDTHS * self.width)
        if self.truncation_radius <= 0:
            raise ParameterError("truncation_radius must be positive")

    # np.sinc takes the normalized argument: np.sinc(t) = sin(pi t)/(pi t)
    def amplitude(self, x):
        x = np.asarray(x, dtype=float)
        return np.sinc(x / self.width) / np.sqrt(self.width)

    def derivative(self, x):
        u = np.pi * np.asarray(x, dtype=float) / self.width
        return (np.pi / self.width**1.5) * _sinc_deriv(u)

    def second_derivative(self, x):
        u = np.pi * np.asarray(x, dtype=float) / self.width
        return (np.pi**2 / self.width**2.5) * _sinc_deriv2(u)

    def intensity_cdf(self, x):
        u = np.pi * np.asarray(x, dtype=float) / self.width
        si, _ = sici(2.0 * u)
        small = np.abs(u) < 1e-6
        ug = np.where(small, 1.0, u)
        with np.errstate(divide="ignore", invalid="ignore"):
            term = np.where(small, u, np.sin(ug) ** 2 / ug)
        return 0.5 + (si - term) / np.pi


class TabulatedPsf(PsfModel):
    """Cubic-spline interpolant of measured amplitude samples.

    The samples are renormalized so the interpolated intensity integrates
    to one over the sample domain; the amplitude is taken as zero outside
    that domain.
    """

    kind = "tabulated"

    _CDF_GRID = 4096

    def __init__(self, xs, amplitudes):
        xs = np.asarray(xs, dtype=float)
        amps = np.asarray(amplitudes, dtype=float)
        if xs.ndim != 1 or xs.shape != amps.shape:
            raise DataError("samples must be two equal-length 1-D columns")
        if xs.size < 16:
            raise DataError(f"need at least 16 samples, got {xs.size}")
        if np.any(np.diff(xs) <= 0):
            raise DataError("sample abscissae must be strictly increasing")
        if not np.any(amps != 0.0):
            raise DataError("amplitude samples are all zero")

        self._lo = float(xs[0])
        self._hi = float(xs[-1])
        self.truncation_radius = max(abs(self._lo), abs(self._hi))

        raw = CubicSpline(xs, amps)
        norm2 = integrate(lambda t: float(raw(t)) ** 2, self._lo, self._hi)
        if norm2 <= 0:
            raise DataError("interpolated intensity has zero norm")
        self._scale = 1.0 / np.sqrt(norm2)
        self._spline = raw
        self._d1 = raw.derivative(1)
        self._d2 = raw.derivative(2)

        grid = np.linspace(self._lo, self._hi, self._CDF_GRID + 1)
        inten = (self._scale * self._spline(grid)) ** 2
        self._cdf_spline = CubicSpline(grid, inten).antiderivative()
        self._cdf_total = float(self._cdf_spline(self._hi) - self._cdf_spline(self._lo))

        # effective width: rms spot size of the intensity
        mean = integrate(lambda t: t * float(self.intensity(t)), self._lo, self._hi)
        var = integrate(lambda t: (t - mean) ** 2 * float(self.intensity(t)),
                        self._lo, self._hi)
        self.width = float(np.sqrt(max(var, 0.0)))

    def _inside(self, x):
        return (x >= self._lo) & (x <= self._hi)

    def _eval(self, spline, x):
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, self._lo, self._hi)
        return np.where(self._inside(x), self._scale * spline(xc), 0.0)

    def amplitude(self, x):
        return self._eval(self._spline, x)

    def derivative(self, x):
        return self._eval(self._d1, x)

    def second_derivative(self, x):
        return self._eval(self._d2, x)

    def intensity_cdf(self, x):
        x = np.asarray(x, dtype=float)
        xc = np.clip(x, self._lo, self._hi)
        return np.asarray(self._cdf_spline(xc) - self._cdf_spline(self._lo),
                          dtype=float)


def make_gaussian(sigma) -> GaussianPsf:
    """Gaussian PSF of rms width sigma."""
    if not sigma > 0:
        raise ParameterError(f"sigma must be positive, got {sigma}")
    return GaussianPsf(sigma)


def make_sinc(w, truncation_radius=None) -> SincPsf:
    """Sinc PSF with first zero at x = w."""
    if not w > 0:
        raise ParameterError(f"w must be positive, got {w}")
    return SincPsf(w, truncation_radius)


def make_tabulated(samples) -> TabulatedPsf:
    """PSF interpolated from (x, amplitude) sample pairs."""
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DataError("samples must be a sequence of (x, amplitude) pairs")
    return TabulatedPsf(arr[:, 0], arr[:, 1])


def load_tabulated(path) -> TabulatedPsf:
    """Read a two-column text file (x, amplitude); '#' starts a comment."""
    try:
        arr = np.loadtxt(path, comments="#", dtype=float)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read PSF samples from {path}: {exc}") from exc
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DataError(f"{path}: expected two columns (x, amplitude)")
    return TabulatedPsf(arr[:, 0], arr[:, 1])


def norm_check(psf: PsfModel, spec=None) -> float:
    """Quadrature value of the intensity norm over the truncation domain."""
    spec = spec or DEFAULT_QUADRATURE
    r = psf.truncation_radius
    return integrate(lambda x: float(psf.intensity(x)), -r, r, spec)
