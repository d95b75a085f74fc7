"""Choose the number of sub-arrays that focuses a single beam peak.

The search doubles the sub-array count, spreads the sub-arrays over the fixed
total aperture, and samples the cross-range gain inside the half-power window
until only one genuine peak remains or the aperture is completely filled with
elements.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from .geometry import Carrier, InfeasibleArrayError, spacing_for_aperture
from .gain import crossrange_gain, half_power_beamwidth

# Peaks shallower than this are treated as numerical ripple. Genuine lobes of
# the cosine-modulated envelope are two orders of magnitude more prominent.
PEAK_PROMINENCE = 1e-2


def count_peaks(samples, prominence: float = PEAK_PROMINENCE, upsample: int = 10) -> int:
    """Count genuine local maxima of uniformly sampled data.

    The samples are resampled to `upsample` times the density with a monotone
    cubic interpolant, consecutive equal values are collapsed into runs (the
    interpolant produces flat two-point plateaus when a symmetric apex falls
    between samples), and a run counts as a peak when it is interior, strictly
    above both neighboring runs, and rises at least `prominence` above the
    higher of its two flanking minima. Window endpoints can serve as flanking
    minima but are never peaks themselves.
    """
    y = np.asarray(samples, dtype=float)
    if y.size < 3:
        raise ValueError("need at least three samples")
    x = np.arange(y.size, dtype=float)
    dense = PchipInterpolator(x, y)(np.linspace(0.0, y.size - 1.0, upsample * y.size))
    keep = np.empty(dense.size, dtype=bool)
    keep[0] = True
    keep[1:] = dense[1:] != dense[:-1]
    runs = dense[keep]
    count = 0
    for i in range(1, runs.size - 1):
        if not (runs[i] > runs[i - 1] and runs[i] > runs[i + 1]):
            continue
        j = i
        while j > 0 and runs[j - 1] < runs[j]:
            j -= 1
        left_min = runs[j]
        j = i
        while j < runs.size - 1 and runs[j + 1] < runs[j]:
            j += 1
        right_min = runs[j]
        if runs[i] - max(left_min, right_min) >= prominence:
            count += 1
    return count


@dataclass(frozen=True)
class DesignInput:
    aperture: float  # meters
    focus: float  # meters
    elements_per_subarray: int
    carrier: Carrier
    spacing: float | None = None  # meters, defaults to half a wavelength
    grid_points: int = 300

    def __post_init__(self):
        if min(self.aperture, self.focus) <= 0 or self.elements_per_subarray < 1:
            raise ValueError("aperture, focus and element count must be positive")
        if self.grid_points < 16:
            raise ValueError("need at least 16 grid points")
        if self.elements_per_subarray * self.element_spacing >= self.aperture:
            raise ValueError("one sub-array already exceeds the aperture")

    @property
    def element_spacing(self) -> float:
        return self.carrier.wavelength / 2 if self.spacing is None else self.spacing


@dataclass(frozen=True)
class DesignResult:
    """Outcome of the sub-array count search.

    peak_trace records (L, peak count) per iteration. aperture_filled marks
    the exit where L*N*delta reached the aperture; a result with
    aperture_filled and final_peak_count > 1 never achieved a single peak
    (the search was guard-limited).
    """

    num_subarrays: int
    gap: float
    half_pitch: float
    final_peak_count: int
    aperture_filled: bool
    peak_trace: list = field(default_factory=list)

    @property
    def single_peak(self) -> bool:
        return self.final_peak_count == 1

    @property
    def guard_limited(self) -> bool:
        return self.aperture_filled and self.final_peak_count > 1


def _window_peak_count(inp: DesignInput, num_subarrays: int, half_pitch: float) -> int:
    bw = half_power_beamwidth(inp.elements_per_subarray, inp.focus)
    xs = np.linspace(-bw / 2, bw / 2, inp.grid_points)
    g, _ = crossrange_gain(num_subarrays, inp.elements_per_subarray, half_pitch,
                           inp.focus, xs, inp.carrier)
    return count_peaks(g)


def design_num_arrays(inp: DesignInput) -> DesignResult:
    """Smallest even sub-array count focusing a single peak in the half-power
    window, with the sub-arrays spread over the full aperture.

    Doubling stops when one peak remains or when the elements fill the
    aperture (L*N*delta >= aperture); in the latter case the last feasible
    layout is returned with its remaining peak count. Raises
    InfeasibleArrayError when not even the first candidate layout fits.
    """
    d = inp.element_spacing
    N = inp.elements_per_subarray
    L = 0
    peaks = None
    trace = []
    result = None
    filled = False
    while peaks is None or peaks > 1:
        if L * N * d >= inp.aperture:
            filled = True
            break
        L += 2
        try:
            gap = spacing_for_aperture(inp.aperture, L, N, d)
        except InfeasibleArrayError:
            if result is None:
                raise
            filled = True  # the next doubling no longer fits; keep the last layout
            break
        half_pitch = (gap + (N - 1) * d) / 2
        peaks = _window_peak_count(inp, L, half_pitch)
        trace.append((L, peaks))
        result = (L, gap, half_pitch, peaks)
    if result is None:
        raise InfeasibleArrayError("no even sub-array count fits the aperture")
    L, gap, half_pitch, peaks = result
    return DesignResult(num_subarrays=L, gap=gap, half_pitch=half_pitch,
                        final_peak_count=peaks,
                        aperture_filled=filled or L * N * d >= inp.aperture,
                        peak_trace=trace)


def design_sweep(aperture: float, focus: float, element_counts, carrier: Carrier,
                 spacing: float | None = None, grid_points: int = 300) -> list:
    """design_num_arrays over several per-sub-array element counts."""
    return [design_num_arrays(DesignInput(aperture, focus, int(n), carrier,
                                          spacing, grid_points))
            for n in element_counts]
