"""Array geometry: element layouts, aperture metrics, Fraunhofer boundaries.

All coordinates are in meters on the x-axis; the array plane is z=0 and the
array is centered on the origin. A modular array is L identical uniform
sub-arrays of N elements each, with intra-array spacing delta and a gap Delta
between the innermost elements of adjacent sub-arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299792458.0


class InfeasibleArrayError(ValueError):
    """Requested layout cannot be realized (sub-arrays would overlap)."""


@dataclass(frozen=True)
class Carrier:
    """Carrier frequency and derived wavelength."""

    frequency: float  # Hz
    wavelength: float  # meters

    def __post_init__(self):
        if self.frequency <= 0 or self.wavelength <= 0:
            raise ValueError("carrier frequency and wavelength must be positive")
        if abs(self.wavelength * self.frequency / SPEED_OF_LIGHT - 1.0) > 1e-9:
            raise ValueError("wavelength * frequency must equal the speed of light")

    @classmethod
    def from_frequency(cls, frequency: float) -> "Carrier":
        return cls(frequency, SPEED_OF_LIGHT / frequency)

    @classmethod
    def from_wavelength(cls, wavelength: float) -> "Carrier":
        return cls(SPEED_OF_LIGHT / wavelength, wavelength)


@dataclass(frozen=True)
class ModularArray:
    """L sub-arrays of N elements; spacing delta within, gap Delta between.

    Delta is measured center-to-center between the innermost elements of
    adjacent sub-arrays. Delta = delta degenerates into one contiguous
    uniform array of L*N elements. L=1 represents a plain uniform array
    (Delta is then unused). Odd L > 1 is geometrically valid here; design
    routines restrict themselves to even L.
    """

    num_subarrays: int
    elements_per_subarray: int
    spacing: float  # delta, meters
    gap: float  # Delta, meters

    def __post_init__(self):
        if self.num_subarrays < 1 or self.elements_per_subarray < 1:
            raise ValueError("need at least one sub-array and one element")
        if self.spacing <= 0:
            raise ValueError("element spacing must be positive")
        if self.num_subarrays > 1 and self.gap < self.spacing:
            raise InfeasibleArrayError("gap between sub-arrays must be >= element spacing")

    @classmethod
    def ula(cls, num_elements: int, spacing: float) -> "ModularArray":
        return cls(1, num_elements, spacing, spacing)

    @property
    def num_elements(self) -> int:
        return self.num_subarrays * self.elements_per_subarray


@dataclass(frozen=True)
class ArrayMetrics:
    """Derived aperture quantities for one array/carrier pair.

    aperture follows the convention that includes one element width,
    aperture = Delta*(L-1) + (L*(N-1)+1)*delta; span = max-min element
    coordinate = aperture - delta is also exposed since both conventions
    appear in the literature. half_pitch is half the center-to-center
    distance between adjacent sub-arrays.
    """

    aperture: float
    span: float
    half_pitch: float
    fraunhofer: float  # 2*aperture^2 / wavelength, whole array
    fraunhofer_subarray: float  # 2*(N*delta)^2 / wavelength, one sub-array

    def __post_init__(self):
        if self.aperture <= 0:
            raise ValueError("aperture must be positive")
        if self.fraunhofer < self.fraunhofer_subarray:
            raise ValueError("whole-array Fraunhofer distance cannot be smaller than sub-array's")


def element_positions(mla: ModularArray) -> np.ndarray:
    """Element x-coordinates, shape (L, N), grouped by sub-array.

    Sub-array ell (1-based) is centered at (ell-(L+1)/2)*(Delta+(N-1)*delta)
    and its elements sit delta apart around that center; the whole layout is
    symmetric about x=0.
    """
    L, N = mla.num_subarrays, mla.elements_per_subarray
    d, D = mla.spacing, mla.gap
    ell = np.arange(1, L + 1)
    n = np.arange(1, N + 1)
    centers = (ell - (L + 1) / 2) * (D + (N - 1) * d)
    return centers[:, None] + (n - (N + 1) / 2)[None, :] * d


def subarray_centers(mla: ModularArray) -> np.ndarray:
    """Center x-coordinate of each sub-array, shape (L,)."""
    L, N = mla.num_subarrays, mla.elements_per_subarray
    ell = np.arange(1, L + 1)
    return (ell - (L + 1) / 2) * (mla.gap + (N - 1) * mla.spacing)


def derived_metrics(mla: ModularArray, carrier: Carrier) -> ArrayMetrics:
    L, N = mla.num_subarrays, mla.elements_per_subarray
    d = mla.spacing
    D = mla.gap if L > 1 else d  # gap is meaningless for a single sub-array
    aperture = D * (L - 1) + (L * (N - 1) + 1) * d
    half_pitch = (D + (N - 1) * d) / 2
    lam = carrier.wavelength
    sub_aperture = N * d
    return ArrayMetrics(
        aperture=aperture,
        span=aperture - d,
        half_pitch=half_pitch,
        fraunhofer=2 * aperture**2 / lam,
        fraunhofer_subarray=2 * sub_aperture**2 / lam,
    )


def spacing_for_aperture(aperture: float, num_subarrays: int, elements_per_subarray: int,
                         spacing: float) -> float:
    """Gap Delta that makes the layout fill the requested aperture exactly.

    Inverts the aperture formula: Delta = (D - (L*(N-1)+1)*delta)/(L-1).
    Raises InfeasibleArrayError when the result would be below the element
    spacing (adjacent sub-arrays would overlap).
    """
    L, N = num_subarrays, elements_per_subarray
    if L < 2:
        raise ValueError("need at least two sub-arrays to solve for the gap")
    gap = (aperture - (L * (N - 1) + 1) * spacing) / (L - 1)
    if gap < spacing:
        raise InfeasibleArrayError(
            f"aperture {aperture} m cannot hold {L} sub-arrays of {N} elements "
            f"at spacing {spacing} m (gap {gap:.6g} m < spacing)")
    return gap
