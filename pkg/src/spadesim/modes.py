"""Projection modes, modal overlaps, and outcome probabilities.

The monitored measurement projects the image-plane field onto two
orthogonal modes: the PSF itself and the antisymmetric mode proportional
to its derivative.  The antisymmetric channel carries the leading
information about the separation of two symmetric sources.

Sign convention: the antisymmetric mode is oriented so its overlap with
a slightly right-shifted PSF is positive.  Probabilities are insensitive
to this choice.

All sinc-family inner products are evaluated in the frequency domain,
where the sinc amplitude is an exact flat band of half-width pi/w; this
avoids the slow 1/x^2 spatial tails entirely.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateModeError, ModelError, ParameterError
from .fisher import quantum_fisher
from .numerics import DEFAULT_QUADRATURE, find_root_monotone, integrate
from .psf import GaussianPsf, PsfModel, SincPsf

_ORTHO_TOL = 1e-6


class Mode:
    """A normalized real projection wavefunction."""

    label: str
    truncation_radius: float
    norm_check: float

    def amplitude(self, x):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(label={self.label!r}, norm_check={self.norm_check:.9f})"


class PsfMode(Mode):
    """Projection onto the PSF itself (the symmetric channel)."""

    label = "psf"

    def __init__(self, psf: PsfModel):
        self.psf = psf
        self.truncation_radius = psf.truncation_radius
        if isinstance(psf, SincPsf):
            a = np.pi / psf.width
            self.norm_check = psf.width / np.pi * integrate(lambda k: 1.0, 0.0, a)
        else:
            r = psf.truncation_radius
            self.norm_check = integrate(lambda x: float(psf.intensity(x)), -r, r)

    def amplitude(self, x):
        return self.psf.amplitude(x)


class OptimalMode(Mode):
    """Antisymmetric mode: the normalized PSF derivative, sign-fixed."""

    label = "optimal"

    def __init__(self, psf: PsfModel):
        fq = quantum_fisher(psf)
        if not fq > 0 or not np.isfinite(fq):
            raise DegenerateModeError("PSF derivative carries no information")
        self.psf = psf
        self.quantum_fi = fq
        self.truncation_radius = psf.truncation_radius
        self._scale = -1.0 / np.sqrt(fq)
        if isinstance(psf, SincPsf):
            a = np.pi / psf.width
            self.norm_check = (psf.width / (np.pi * fq)
                               * integrate(lambda k: k * k, 0.0, a))
        else:
            r = psf.truncation_radius
            self.norm_check = integrate(
                lambda x: (self._scale * float(psf.derivative(x))) ** 2, -r, r)

    def amplitude(self, x):
        return self._scale * self.psf.derivative(x)


class CustomMode(Mode):
    """User-supplied projection function on a finite support."""

    label = "custom"

    def __init__(self, fn, truncation_radius, normalize=False):
        if truncation_radius <= 0:
            raise ParameterError("truncation_radius must be positive")
        self._fn = fn
        self.truncation_radius = float(truncation_radius)
        r = self.truncation_radius
        norm2 = integrate(lambda x: float(fn(x)) ** 2, -r, r)
        if normalize:
            if norm2 <= 0:
                raise DegenerateModeError("cannot normalize a zero mode")
            self._scale = 1.0 / np.sqrt(norm2)
            self.norm_check = 1.0
        else:
            self._scale = 1.0
            self.norm_check = norm2

    def amplitude(self, x):
        return self._scale * np.asarray(self._fn(x), dtype=float)


def psf_mode(psf: PsfModel) -> PsfMode:
    return PsfMode(psf)


def optimal_mode(psf: PsfModel) -> OptimalMode:
    """Mode attaining the quantum bound: amplitude = -psi'(x)/sqrt(FI)."""
    return OptimalMode(psf)


def _sinc_family(mode: Mode, psf: PsfModel) -> bool:
    return (isinstance(psf, SincPsf)
            and isinstance(mode, (PsfMode, OptimalMode))
            and isinstance(mode.psf, SincPsf)
            and abs(mode.psf.width - psf.width) <= 1e-12 * psf.width)


def overlap(mode: Mode, psf: PsfModel, shift: float) -> float:
    """Inner product of the mode with the PSF displaced by `shift`."""
    if _sinc_family(mode, psf):
        w = psf.width
        a = np.pi / w
        s = float(shift)
        if isinstance(mode, PsfMode):
            return w / np.pi * integrate(lambda k: np.cos(k * s), 0.0, a)
        return (w / (np.pi * np.sqrt(mode.quantum_fi))
                * integrate(lambda k: k * np.sin(k * s), 0.0, a))
    lo = max(-mode.truncation_radius, shift - psf.truncation_radius)
    hi = min(mode.truncation_radius, shift + psf.truncation_radius)
    if lo >= hi:
        return 0.0
    return integrate(
        lambda x: float(mode.amplitude(x)) * float(psf.amplitude(x - shift)),
        lo, hi)


def mode_inner_product(m1: Mode, m2: Mode) -> float:
    """Inner product of two modes.

    Sinc-family pairs go through the frequency domain; everything else
    uses x-space quadrature over the shared support.
    """
    sinc_pair = (isinstance(m1, (PsfMode, OptimalMode))
                 and isinstance(m2, (PsfMode, OptimalMode))
                 and isinstance(m1.psf, SincPsf) and isinstance(m2.psf, SincPsf)
                 and abs(m1.psf.width - m2.psf.width) <= 1e-12 * m1.psf.width)
    if sinc_pair:
        w = m1.psf.width
        a = np.pi / w
        if type(m1) is type(m2):
            return m1.norm_check
        fq = m1.quantum_fi if isinstance(m1, OptimalMode) else m2.quantum_fi
        # cross term is an odd integrand over the symmetric band
        return (w / (2.0 * np.pi * np.sqrt(fq))) * integrate(lambda k: k, -a, a)
    r = min(m1.truncation_radius, m2.truncation_radius)
    return integrate(lambda x: float(m1.amplitude(x)) * float(m2.amplitude(x)),
                     -r, r)


@dataclass(frozen=True)
class OutcomeProbabilities:
    """Channel probabilities of the monitored pair at one separation.

    p_0 is the PSF-mode channel, p_a the antisymmetric channel, p_lost
    the mass in neither monitored mode.
    """

    delta: float
    p_0: float
    p_a: float
    p_lost: float


def outcome_probabilities(psf: PsfModel, modes, delta: float) -> OutcomeProbabilities:
    """Probabilities of each monitored channel for sources at +/- delta/2.

    `modes` must contain exactly the PSF mode and the antisymmetric mode
    (any order); they are checked for orthogonality first because
    non-orthogonal projections would double-count intensity.
    """
    if delta < 0:
        raise ParameterError("delta must be non-negative")
    labels = sorted(m.label for m in modes)
    if labels != ["optimal", "psf"]:
        raise ParameterError(
            "monitored channels are the psf mode and the optimal mode; "
            f"got labels {labels}")
    by_label = {m.label: m for m in modes}
    ip = mode_inner_product(by_label["psf"], by_label["optimal"])
    if abs(ip) > _ORTHO_TOL:
        raise ModelError(
            f"modes are not orthogonal (inner product {ip:.3e}); "
            "probabilities would double-count")

    half = 0.5 * delta
    prob = {}
    for label, m in by_label.items():
        prob[label] = 0.5 * (overlap(m, psf, +half) ** 2
                             + overlap(m, psf, -half) ** 2)
    p_0, p_a = prob["psf"], prob["optimal"]
    p_lost = 1.0 - p_0 - p_a
    if p_lost < -1e-9:
        raise ModelError(f"channel probabilities exceed one by {-p_lost:.3e}")
    return OutcomeProbabilities(delta=float(delta), p_0=p_0, p_a=p_a,
                                p_lost=max(p_lost, 0.0))


class ProbabilityCurves:
    """Fast evaluator of the monitored-pair probabilities versus separation.

    Built-in PSFs use closed forms; anything else falls back to the
    quadrature route of `outcome_probabilities`.  `delta_peak` is the
    separation where the antisymmetric probability is largest, the upper
    end of the monotone branch used for estimator inversion.
    """

    def __init__(self, psf: PsfModel):
        self.psf = psf
        self._kind = psf.kind if isinstance(psf, (GaussianPsf, SincPsf)) else "generic"
        if self._kind == "generic":
            self._modes = [psf_mode(psf), optimal_mode(psf)]
        self.delta_peak = self._find_delta_peak()
        self.f_max = self.conditional(self.delta_peak)

    def p_a(self, delta: float) -> float:
        if self._kind == "gaussian":
            u = delta * delta / (16.0 * self.psf.width**2)
            return u * np.exp(-u)
        if self._kind == "sinc":
            u = 0.5 * np.pi * delta / self.psf.width
            if abs(u) < 1e-3:
                core = u / 3.0 - u**3 / 30.0 + u**5 / 840.0
            else:
                core = (np.sin(u) - u * np.cos(u)) / (u * u)
            return 3.0 * core * core
        return self._generic(delta).p_a

    def p_0(self, delta: float) -> float:
        if self._kind == "gaussian":
            u = delta * delta / (16.0 * self.psf.width**2)
            return np.exp(-u)
        if self._kind == "sinc":
            return float(np.sinc(0.5 * delta / self.psf.width)) ** 2
        return self._generic(delta).p_0

    def p_lost(self, delta: float) -> float:
        return max(1.0 - self.p_0(delta) - self.p_a(delta), 0.0)

    def conditional(self, delta: float) -> float:
        """Probability of the antisymmetric channel given a monitored count."""
        pa = self.p_a(delta)
        p0 = self.p_0(delta)
        return pa / (pa + p0)

    def probabilities(self, delta: float) -> OutcomeProbabilities:
        return OutcomeProbabilities(delta=float(delta), p_0=self.p_0(delta),
                                    p_a=self.p_a(delta),
                                    p_lost=self.p_lost(delta))

    def _generic(self, delta):
        return outcome_probabilities(self.psf, self._modes, delta)

    def _find_delta_peak(self) -> float:
        w = self.psf.width
        if self._kind == "gaussian":
            return 4.0 * w
        if self._kind == "sinc":
            # stationary point of (sin u - u cos u)/u^2
            u_star = find_root_monotone(
                lambda u: u * u * np.sin(u) + 2.0 * u * np.cos(u) - 2.0 * np.sin(u),
                1.5, 3.0, tol=1e-13)
            return 2.0 * u_star * w / np.pi
        # generic: coarse grid then golden-section refinement
        grid = np.linspace(0.0, 4.0 * w, 129)
        vals = [self.p_a(float(d)) for d in grid]
        i = int(np.argmax(vals))
        lo = grid[max(i - 1, 0)]
        hi = grid[min(i + 1, len(grid) - 1)]
        return _golden_max(self.p_a, float(lo), float(hi), 1e-9 * w)


def _golden_max(f, lo, hi, tol):
    ratio = 0.5 * (math.sqrt(5.0) - 1.0)
    a, b = lo, hi
    c = b - ratio * (b - a)
    d = a + ratio * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            a, c, fc = c, d, fd
            d = a + ratio * (b - a)
            fd = f(d)
        else:
            b, d, fd = d, c, fc
            c = b - ratio * (b - a)
            fc = f(c)
    return 0.5 * (a + b)


def binary_outcome_fisher(psf: PsfModel, delta: float,
                          curves: ProbabilityCurves | None = None) -> float:
    """Per-photon FI of the two-outcome measurement {antisymmetric, rest}.

    Below 1e-6 width units the probability is numerically zero and the
    analytic limit (the quantum FI) is returned.
    """
    if delta <= 0:
        raise ParameterError("delta must be positive")
    if delta < 1e-6 * psf.width:
        return quantum_fisher(psf)
    curves = curves or ProbabilityCurves(psf)
    h = 1e-4 * delta
    dp = (curves.p_a(delta + h) - curves.p_a(delta - h)) / (2.0 * h)
    p = curves.p_a(delta)
    return dp * dp / (p * (1.0 - p))


def sample_mode(mode: Mode, n_points: int = 2048):
    """Uniform samples of the mode over its truncation domain."""
    if n_points < 2:
        raise ParameterError("need at least two sample points")
    x = np.linspace(-mode.truncation_radius, mode.truncation_radius, n_points)
    return x, np.asarray(mode.amplitude(x), dtype=float)
