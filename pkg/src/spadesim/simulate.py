"""Photon-counting acquisition simulators.

Two acquisition types are modeled: projection counting on the monitored
mode pair (optionally through an electron-multiplying register with
gamma-distributed gain and Gaussian readout noise), and a pixelated
camera frame for the direct-imaging baseline.

Each acquisition consumes one RngStream value; identical streams give
identical outcomes regardless of how trials are scheduled.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ModelError, ParameterError
from .modes import OutcomeProbabilities
from .numerics import RngStream, as_generator
from .psf import PsfModel, SincPsf

PHOTON_MODELS = ("fixed", "poisson")

# Default camera grids.  The Gaussian grid reaches 8 sigma (tail mass
# ~1e-15).  The sinc intensity sheds mass like 1/x, so reaching 99.9%
# coverage needs a halfwidth above ~101 w; 120 w leaves 0.08% outside.
DEFAULT_CCD_PIXELS_GAUSSIAN = 1024
DEFAULT_CCD_HALFWIDTH_GAUSSIAN = 8.0
DEFAULT_CCD_PIXELS_SINC = 4096
DEFAULT_CCD_HALFWIDTH_SINC = 120.0


@dataclass(frozen=True)
class SceneConfig:
    """One simulated acquisition: two equal sources at +/- delta_true/2."""

    delta_true: float
    psf: PsfModel
    photon_budget: int
    photon_model: str = "poisson"
    equal_intensities: bool = True

    def __post_init__(self):
        if self.delta_true < 0:
            raise ParameterError("delta_true must be non-negative")
        if self.photon_budget < 1:
            raise ParameterError("photon_budget must be at least 1")
        if self.photon_model not in PHOTON_MODELS:
            raise ParameterError(
                f"photon_model must be one of {PHOTON_MODELS}, got {self.photon_model!r}")
        if not self.equal_intensities:
            raise ParameterError("only equal source intensities are modeled")


@dataclass(frozen=True)
class EmccdParams:
    """Electron-multiplying register: per-photon gain is Exponential(g),
    giving the standard sqrt(2) excess-noise factor at high gain."""

    gain: float
    readout_sigma: float = 0.0
    pixel_capacity: float = 1e12

    def __post_init__(self):
        if self.gain < 1.0:
            raise ParameterError("gain must be at least 1")
        if self.readout_sigma < 0:
            raise ParameterError("readout_sigma must be non-negative")
        if self.pixel_capacity <= 0:
            raise ParameterError("pixel_capacity must be positive")


@dataclass(frozen=True)
class ProjectionOutcome:
    """Counts from one projection acquisition.

    n_0 / n_a / n_lost are the generated photon counts per channel and
    always sum to the generated total.  recovered_0 / recovered_a are the
    counts available to the experimenter; with the EMCCD model enabled
    they are rounded post-gain estimates, otherwise they equal the true
    counts.  analog_0 / analog_a hold the post-gain register values when
    the EMCCD model is on.
    """

    n_0: int
    n_a: int
    n_lost: int
    recovered_0: int
    recovered_a: int
    analog_0: Optional[float] = None
    analog_a: Optional[float] = None


@dataclass(frozen=True)
class CcdFrame:
    """Pixelated intensity record: edges (length n+1) and counts (length n)."""

    pixel_edges: np.ndarray
    counts: np.ndarray


def _draw_total(scene: SceneConfig, gen: np.random.Generator) -> int:
    if scene.photon_model == "fixed":
        return scene.photon_budget
    return int(gen.poisson(scene.photon_budget))


def _amplified(n_photons: int, emccd: EmccdParams, gen: np.random.Generator):
    """Analog register value and recovered count for one channel."""
    analog = float(gen.gamma(n_photons, emccd.gain)) if n_photons > 0 else 0.0
    if emccd.readout_sigma > 0:
        analog += float(gen.normal(0.0, emccd.readout_sigma))
    analog = min(max(analog, 0.0), emccd.pixel_capacity)
    recovered = max(int(round(analog / emccd.gain)), 0)
    return analog, recovered


def simulate_projection(scene: SceneConfig, probs: OutcomeProbabilities,
                        emccd: Optional[EmccdParams],
                        rng: RngStream) -> ProjectionOutcome:
    """One projection acquisition at the scene's true separation."""
    if abs(probs.delta - scene.delta_true) > 1e-12 * max(1.0, abs(scene.delta_true)):
        raise ModelError(
            f"probabilities were evaluated at delta={probs.delta}, "
            f"scene has delta_true={scene.delta_true}")
    gen = as_generator(rng)
    total = _draw_total(scene, gen)
    p = np.array([probs.p_0, probs.p_a, probs.p_lost], dtype=float)
    n_0, n_a, n_lost = (int(v) for v in gen.multinomial(total, p / p.sum()))
    if emccd is None:
        return ProjectionOutcome(n_0=n_0, n_a=n_a, n_lost=n_lost,
                                 recovered_0=n_0, recovered_a=n_a)
    analog_0, rec_0 = _amplified(n_0, emccd, gen)
    analog_a, rec_a = _amplified(n_a, emccd, gen)
    return ProjectionOutcome(n_0=n_0, n_a=n_a, n_lost=n_lost,
                             recovered_0=rec_0, recovered_a=rec_a,
                             analog_0=analog_0, analog_a=analog_a)


def default_ccd_edges(psf: PsfModel, n_pixels: Optional[int] = None,
                      halfwidth_widths: Optional[float] = None) -> np.ndarray:
    """Uniform pixel edges for the direct-imaging camera."""
    if isinstance(psf, SincPsf):
        n = n_pixels or DEFAULT_CCD_PIXELS_SINC
        h = (halfwidth_widths or DEFAULT_CCD_HALFWIDTH_SINC) * psf.width
    else:
        n = n_pixels or DEFAULT_CCD_PIXELS_GAUSSIAN
        h = (halfwidth_widths or DEFAULT_CCD_HALFWIDTH_GAUSSIAN) * psf.width
    if n < 1:
        raise ParameterError("need at least one pixel")
    return np.linspace(-h, h, n + 1)


def ccd_pixel_probabilities(psf: PsfModel, delta: float,
                            pixel_edges: np.ndarray) -> np.ndarray:
    """Per-pixel probabilities of the two-source intensity profile."""
    edges = np.asarray(pixel_edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise ParameterError("pixel_edges must be 1-D and strictly increasing")
    half = 0.5 * delta
    cdf_m = np.asarray(psf.intensity_cdf(edges - half))
    cdf_p = np.asarray(psf.intensity_cdf(edges + half))
    q = 0.5 * (np.diff(cdf_m) + np.diff(cdf_p))
    return np.maximum(q, 0.0)


def simulate_ccd(scene: SceneConfig, pixel_edges: np.ndarray,
                 rng: RngStream) -> CcdFrame:
    """One camera frame; photons missing the grid are dropped."""
    q = ccd_pixel_probabilities(scene.psf, scene.delta_true, pixel_edges)
    coverage = float(q.sum())
    if coverage < 0.999:
        raise ParameterError(
            f"pixel grid covers only {coverage:.4%} of the intensity; need >= 99.9%")
    gen = as_generator(rng)
    if scene.photon_model == "fixed":
        probs = np.append(q, max(1.0 - coverage, 0.0))
        counts = gen.multinomial(scene.photon_budget, probs / probs.sum())[:-1]
    else:
        counts = gen.poisson(scene.photon_budget * q)
    return CcdFrame(pixel_edges=np.asarray(pixel_edges, dtype=float),
                    counts=counts.astype(np.int64))
