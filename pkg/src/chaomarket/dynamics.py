"""Coupled logistic bimap driving agent selection.

The selection dynamics is a two-dimensional coupled logistic system on the
unit square:

    x' = lambda_a * (3*y + 1) * x * (1 - x)
    y' = lambda_b * (3*x + 1) * y * (1 - y)

with both coordinates updated simultaneously from the current state.  For
parameters inside [1.032, 1.0843] the map sustains a bounded chaotic
attractor; outside that window orbits either collapse or leave the unit
square, so parameter validation rejects values beyond it and iteration
treats any exit from [0,1]^2 as a hard error rather than clamping.

When lambda_a == lambda_b the map commutes with the coordinate swap
(x, y) -> (y, x), which makes the attractor symmetric about the diagonal
and the two coordinates statistically equivalent.  Breaking the parameter
symmetry biases the y coordinate, which is what ultimately skews the
market built on top of this map.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

# Parameter window on which the bimap is verified to stay chaotic and
# confined to the unit square (bounds inclusive).
CHAOTIC_LAMBDA_MIN = 1.032
CHAOTIC_LAMBDA_MAX = 1.0843


class DomainEscapeError(RuntimeError):
    """Raised when an iterate leaves the unit square.

    Attributes carry the offending coordinates, the 1-based step index at
    which the escape happened (None for a single-step call), and the phase
    of the computation that was running ("burn-in", "trajectory", or
    "transaction").
    """

    def __init__(self, x: float, y: float, step: int | None = None,
                 phase: str = "iteration"):
        self.x = x
        self.y = y
        self.step = step
        self.phase = phase
        where = f" at {phase} step {step}" if step is not None else ""
        super().__init__(
            f"bimap iterate left the unit square{where}: x={x!r}, y={y!r}")


@dataclass(frozen=True)
class BimapParams:
    """Parameter pair (lambda_a, lambda_b) of the coupled map."""

    lambda_a: float
    lambda_b: float

    def __post_init__(self):
        for name, value in (("lambda_a", self.lambda_a),
                            ("lambda_b", self.lambda_b)):
            if not (CHAOTIC_LAMBDA_MIN <= value <= CHAOTIC_LAMBDA_MAX):
                raise ValueError(
                    f"{name}={value!r} outside the chaotic window "
                    f"[{CHAOTIC_LAMBDA_MIN}, {CHAOTIC_LAMBDA_MAX}]")

    @property
    def symmetric(self) -> bool:
        return self.lambda_a == self.lambda_b


@dataclass(frozen=True)
class BimapState:
    """Position in the unit square."""

    x: float
    y: float

    def __post_init__(self):
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0):
            raise ValueError(
                f"state outside the unit square: x={self.x!r}, y={self.y!r}")


def bimap_step(state: BimapState, params: BimapParams) -> BimapState:
    """Apply one simultaneous update of the coupled map."""
    x, y = state.x, state.y
    nx = params.lambda_a * (3.0 * y + 1.0) * x * (1.0 - x)
    ny = params.lambda_b * (3.0 * x + 1.0) * y * (1.0 - y)
    if not (0.0 <= nx <= 1.0 and 0.0 <= ny <= 1.0):
        raise DomainEscapeError(nx, ny)
    return BimapState(nx, ny)


@dataclass(frozen=True)
class Trajectory:
    """Sampled orbit after burn-in; points[k] is the (k+1)-th kept iterate."""

    points: np.ndarray          # shape (samples, 2), float64
    burn_in_discarded: int

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    def __len__(self) -> int:
        return self.points.shape[0]


@numba.njit(cache=True)
def _iterate(x, y, lambda_a, lambda_b, burn_in, samples, out):
    """Run the map, filling `out`; returns (escape_step, x, y).

    escape_step is 0 on success, otherwise the 1-based global iteration
    index at which the iterate left the unit square (counting burn-in
    iterations first), with the offending coordinates returned alongside.
    """
    for k in range(burn_in):
        nx = lambda_a * (3.0 * y + 1.0) * x * (1.0 - x)
        ny = lambda_b * (3.0 * x + 1.0) * y * (1.0 - y)
        if not (0.0 <= nx <= 1.0 and 0.0 <= ny <= 1.0):
            return k + 1, nx, ny
        x = nx
        y = ny
    for s in range(samples):
        nx = lambda_a * (3.0 * y + 1.0) * x * (1.0 - x)
        ny = lambda_b * (3.0 * x + 1.0) * y * (1.0 - y)
        if not (0.0 <= nx <= 1.0 and 0.0 <= ny <= 1.0):
            return burn_in + s + 1, nx, ny
        x = nx
        y = ny
        out[s, 0] = x
        out[s, 1] = y
    return 0, x, y


def trajectory(initial: BimapState, params: BimapParams, burn_in: int,
               samples: int) -> Trajectory:
    """Iterate the map, discard `burn_in` steps, keep the next `samples`.

    Raises DomainEscapeError (with the global iteration index) if any
    iterate, including one inside the burn-in, leaves the unit square.
    """
    if burn_in < 0:
        raise ValueError(f"burn_in must be >= 0: got {burn_in}")
    if samples < 1:
        raise ValueError(f"samples must be >= 1: got {samples}")
    out = np.empty((samples, 2), dtype=np.float64)
    escape, ex, ey = _iterate(initial.x, initial.y,
                              params.lambda_a, params.lambda_b,
                              burn_in, samples, out)
    if escape:
        phase = "burn-in" if escape <= burn_in else "trajectory"
        raise DomainEscapeError(ex, ey, step=escape, phase=phase)
    return Trajectory(points=out, burn_in_discarded=burn_in)


@dataclass(frozen=True)
class Spectrum:
    """One-sided amplitude spectrum of a real series.

    Frequencies are in cycles per step, running from 0 to 0.5 (the Nyquist
    frequency); magnitudes are the moduli of the FFT of the mean-removed
    series.
    """

    frequencies: np.ndarray
    magnitudes: np.ndarray

    def __len__(self) -> int:
        return self.frequencies.shape[0]


def power_spectrum(series: np.ndarray) -> Spectrum:
    """Fourier magnitudes of the mean-removed series."""
    series = np.asarray(series, dtype=np.float64)
    if series.ndim != 1:
        raise ValueError(f"series must be one-dimensional: got {series.ndim}")
    if series.shape[0] < 2:
        raise ValueError(
            f"series must hold at least 2 samples: got {series.shape[0]}")
    if not np.all(np.isfinite(series)):
        raise ValueError("series contains non-finite values")
    centered = series - series.mean()
    magnitudes = np.abs(np.fft.rfft(centered))
    frequencies = np.fft.rfftfreq(series.shape[0])
    return Spectrum(frequencies=frequencies, magnitudes=magnitudes)


def find_spectral_peak(spectrum: Spectrum) -> tuple[float, float]:
    """Locate the dominant nonzero frequency.

    The zero-frequency bin is excluded (it is ~0 after mean removal anyway);
    among the remaining bins the maximal magnitude wins, ties resolved in
    favor of the lowest frequency.
    """
    if len(spectrum) < 2:
        raise ValueError("spectrum has no nonzero-frequency bins to search")
    magnitudes = spectrum.magnitudes[1:]
    k = int(np.argmax(magnitudes))  # argmax returns the first maximum
    return float(spectrum.frequencies[k + 1]), float(magnitudes[k])
