"""Amplitude hologram masks encoding a projection mode on a carrier.

A mask is the interference pattern of a tilted reference wave with the
target mode, rescaled to transmissions in [0, 1].  Illuminating the mask
and reading the spectral intensity at the carrier frequency returns a
value proportional to the squared overlap of the input field with the
mode; only ratios of readouts are contractually meaningful.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DataError, ParameterError
from .modes import Mode, OptimalMode, PsfMode
from .psf import GaussianPsf, SincPsf

# Carrier must clear the mode spectrum by this factor so diffraction
# orders separate.
_MIN_CARRIER_FACTOR = 4.0
_MIN_SAMPLES_PER_PERIOD = 8.0


@dataclass(frozen=True)
class GridSpec:
    """Uniform sampling grid for mask synthesis."""

    start: float
    stop: float
    n_samples: int

    def __post_init__(self):
        if not self.stop > self.start:
            raise ParameterError("grid stop must exceed start")
        if self.n_samples < 2:
            raise ParameterError("need at least two grid samples")

    @property
    def pitch(self) -> float:
        return (self.stop - self.start) / (self.n_samples - 1)

    @property
    def x(self) -> np.ndarray:
        return self.start + self.pitch * np.arange(self.n_samples)


@dataclass(frozen=True)
class HologramMask:
    samples: np.ndarray          # transmissions in [0, 1]
    x_start: float
    grid_pitch: float
    carrier_frequency: float     # cycles per length unit
    mode_bandwidth: float

    @property
    def x(self) -> np.ndarray:
        return self.x_start + self.grid_pitch * np.arange(len(self.samples))


def mode_bandwidth(mode: Mode) -> float:
    """Spatial-frequency extent of the mode (cycles per length).

    Built-in families have known spectra: sinc modes are band-limited to
    1/(2w) exactly; Gaussian-family spectra fall below 1e-3 of peak near
    3/(2 pi sigma).  Other modes use the 99.9%-energy cutoff of the
    sampled spectrum.
    """
    if isinstance(mode, (PsfMode, OptimalMode)):
        if isinstance(mode.psf, SincPsf):
            return 0.5 / mode.psf.width
        if isinstance(mode.psf, GaussianPsf):
            return 3.0 / (2.0 * np.pi * mode.psf.width)
    n = 4096
    x = np.linspace(-mode.truncation_radius, mode.truncation_radius, n)
    pitch = x[1] - x[0]
    spectrum = np.abs(np.fft.rfft(np.asarray(mode.amplitude(x)))) ** 2
    freqs = np.fft.rfftfreq(n, pitch)
    energy = np.cumsum(spectrum)
    if energy[-1] <= 0:
        return 0.0  # a zero mode occupies no band
    cutoff = int(np.searchsorted(energy, 0.999 * energy[-1]))
    return float(freqs[min(cutoff, len(freqs) - 1)])


def synthesize(mode: Mode, carrier_frequency: float, grid: GridSpec) -> HologramMask:
    """Interfere a tilted reference with the mode and rescale to [0, 1].

    The reference amplitude equals the mode peak, which gives
    full-contrast fringes without clipping.
    """
    if carrier_frequency <= 0:
        raise ParameterError("carrier_frequency must be positive")
    if grid.start > -mode.truncation_radius or grid.stop < mode.truncation_radius:
        raise ParameterError(
            f"grid [{grid.start}, {grid.stop}] must span the mode support "
            f"+/-{mode.truncation_radius}")
    if grid.pitch * carrier_frequency > 1.0 / _MIN_SAMPLES_PER_PERIOD:
        raise ParameterError(
            f"carrier undersampled: {1.0 / (grid.pitch * carrier_frequency):.2f} "
            f"samples per period, need >= {_MIN_SAMPLES_PER_PERIOD:g}")
    bandwidth = mode_bandwidth(mode)
    if carrier_frequency < _MIN_CARRIER_FACTOR * bandwidth:
        raise ParameterError(
            f"carrier {carrier_frequency:g} below {_MIN_CARRIER_FACTOR:g} x "
            f"mode bandwidth {bandwidth:g}; orders would overlap")

    x = grid.x
    m = np.asarray(mode.amplitude(x), dtype=float)
    r = float(np.max(np.abs(m)))
    t = np.abs(r * np.exp(2j * np.pi * carrier_frequency * x) + m) ** 2
    span = t.max() - t.min()
    if span <= 0:
        samples = np.zeros_like(t)
    else:
        samples = (t - t.min()) / span
    return HologramMask(samples=samples, x_start=float(grid.start),
                        grid_pitch=float(grid.pitch),
                        carrier_frequency=float(carrier_frequency),
                        mode_bandwidth=float(bandwidth))


def first_order_readout(mask: HologramMask, input_field) -> float:
    """Spectral intensity at the carrier after the mask.

    `input_field` is a callable evaluated on the mask grid or an array
    already sampled on it.  The diffracted band around the carrier
    (width carrier/4) must clear the zero-order spectrum.
    """
    band_lo = mask.carrier_frequency * (1.0 - 0.125)
    if band_lo <= 2.0 * mask.mode_bandwidth:
        raise ParameterError(
            "first-order band overlaps the zero order: carrier "
            f"{mask.carrier_frequency:g} too low for mode bandwidth "
            f"{mask.mode_bandwidth:g}")
    x = mask.x
    if callable(input_field):
        field = np.asarray(input_field(x), dtype=float)
    else:
        field = np.asarray(input_field, dtype=float)
        if field.shape != mask.samples.shape:
            raise ParameterError(
                f"input field has {field.shape} samples, mask has "
                f"{mask.samples.shape}")
    spot = np.sum(field * mask.samples
                  * np.exp(-2j * np.pi * mask.carrier_frequency * x))
    return float(np.abs(spot * mask.grid_pitch) ** 2)


def write_mask_text(mask: HologramMask, path) -> None:
    """Two-column (x, transmission) text with the carrier in the header."""
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# carrier_frequency = {float(mask.carrier_frequency)!r}\n")
        fh.write(f"# mode_bandwidth = {float(mask.mode_bandwidth)!r}\n")
        for xi, ti in zip(mask.x, mask.samples):
            fh.write(f"{float(xi)!r} {float(ti)!r}\n")


def read_mask_text(path) -> HologramMask:
    carrier = None
    bandwidth = None
    with open(path) as fh:
        for line in fh:
            if line.startswith("#") and "=" in line:
                key, _, value = line.lstrip("#").partition("=")
                key = key.strip()
                if key == "carrier_frequency":
                    carrier = float(value)
                elif key == "mode_bandwidth":
                    bandwidth = float(value)
    if carrier is None or bandwidth is None:
        raise DataError(f"{path}: missing carrier_frequency/mode_bandwidth header")
    arr = np.loadtxt(path, comments="#", dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 2:
        raise DataError(f"{path}: expected two columns (x, transmission)")
    x, t = arr[:, 0], arr[:, 1]
    pitches = np.diff(x)
    if np.any(pitches <= 0) or np.ptp(pitches) > 1e-9 * abs(pitches[0]):
        raise DataError(f"{path}: grid must be uniform and increasing")
    return HologramMask(samples=t, x_start=float(x[0]),
                        grid_pitch=float(pitches[0]),
                        carrier_frequency=carrier, mode_bandwidth=bandwidth)


def write_mask_pgm(mask: HologramMask, path, rows: int = 1) -> None:
    """8-bit portable graymap of the transmission profile."""
    if rows < 1:
        raise ParameterError("rows must be at least 1")
    levels = np.clip(np.round(mask.samples * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{len(levels)} {rows}\n255\n".encode("ascii"))
        fh.write(levels.tobytes() * rows)


def read_field_samples(path, mask: HologramMask) -> np.ndarray:
    """Field samples from two-column text; the grid must match the mask."""
    arr = np.loadtxt(path, comments="#", dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DataError(f"{path}: expected two columns (x, field)")
    x = arr[:, 0]
    if x.shape != mask.x.shape or np.max(np.abs(x - mask.x)) > 1e-9 * max(
            1.0, float(np.max(np.abs(mask.x)))):
        raise DataError(f"{path}: sample grid does not match the mask grid")
    return arr[:, 1]
