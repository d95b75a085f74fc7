"""Snapshot synthesis, subspace angle estimation, and position fusion.

Each sub-array sees the user in its own far field, so a per-sub-array angle
spectrum plus a least-squares intersection of the bearing lines recovers the
position. The whole-array near-field grid search is kept as the
accuracy/complexity baseline.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import friis_beta
from .geometry import Carrier, ModularArray, element_positions, subarray_centers

_SPECTRUM_FLOOR = 1e-30


class DegenerateSubspaceError(RuntimeError):
    """Signal and noise eigenvalues coincide; the subspace split is ill-defined."""


class IllConditionedTriangulationError(RuntimeError):
    """Bearing lines are (near-)parallel and no regularizer was requested."""


@dataclass(frozen=True)
class Scenario:
    """One user and the array observing it.

    The user sits at polar (distance, angle) about the array center, angle
    measured from the positive x-axis so broadside is pi/2. Powers are in
    watts; noise_power 0 gives noiseless snapshots.
    """

    mla: ModularArray
    carrier: Carrier
    distance: float
    angle: float
    power: float
    noise_power: float
    num_snapshots: int

    def __post_init__(self):
        if self.distance <= 0 or not 0 < self.angle < math.pi:
            raise ValueError("user must be in front of the array")
        if self.power <= 0 or self.noise_power < 0:
            raise ValueError("powers must be positive (noise may be zero)")
        if self.num_snapshots < 2:
            raise ValueError("covariance estimation needs at least two snapshots")
        if self.mla.elements_per_subarray < 2:
            raise ValueError("angle estimation needs at least two elements per sub-array")

    @property
    def user_xz(self):
        return (self.distance * math.cos(self.angle),
                self.distance * math.sin(self.angle))


@dataclass(frozen=True)
class SnapshotSet:
    """T baseband snapshots per sub-array, shape (L, T, N), plus provenance."""

    data: np.ndarray
    seed: int
    scenario: Scenario

    def __post_init__(self):
        L = self.scenario.mla.num_subarrays
        N = self.scenario.mla.elements_per_subarray
        if self.data.shape != (L, self.scenario.num_snapshots, N):
            raise ValueError("snapshot dimensions do not match the scenario")


@dataclass(frozen=True)
class AngleEstimates:
    """Per-sub-array bearing to the source, radians from the positive x-axis."""

    angles: tuple
    spectra: tuple | None = None


@dataclass(frozen=True)
class PositionEstimate:
    x: float
    z: float
    distance: float
    angle: float
    subarray_angles: tuple | None = None

    def __post_init__(self):
        if abs(self.distance - math.hypot(self.x, self.z)) > 1e-9 * max(1.0, self.distance):
            raise ValueError("polar and cartesian coordinates disagree")


@dataclass
class SearchCounter:
    """Tallies steering-vector projections spent by grid searches."""

    count: int = 0

    def add(self, n: int):
        self.count += int(n)


def far_steering(positions, phi: float, wavelength: float) -> np.ndarray:
    """Plane-wave response of elements at the given x-coordinates: unit-modulus
    phases exp(i * 2 pi / wavelength * x * cos(phi))."""
    x = np.asarray(positions, dtype=float)
    return np.exp(2j * np.pi / wavelength * x * math.cos(phi))


def near_steering(mla: ModularArray, carrier: Carrier, phi: float, d: float) -> np.ndarray:
    """Spherical-wave response of the whole array to a source at polar
    (d, phi): exp(-i * 2 pi / wavelength * r_n) with r_n the exact
    element-to-source distance. Length L*N, unit-modulus entries."""
    if d <= 0:
        raise ValueError("source distance must be positive")
    x = element_positions(mla).ravel()
    r = np.sqrt(d * d + x * x - 2 * x * d * math.cos(phi))
    return np.exp(-2j * np.pi / carrier.wavelength * r)


def synthesize_snapshots(scenario: Scenario, seed: int) -> SnapshotSet:
    """Draw T snapshots per sub-array for one user.

    Signal: sqrt(P * beta) * a(phi_l) * u[t], with the bearing phi_l taken
    from each sub-array's center to the user, a common unit-variance circular
    Gaussian symbol stream u, and one large-scale gain from the user's
    distance to the array center. Noise is i.i.d. circular Gaussian with the
    scenario's noise power. Identical seeds give identical bits.
    """
    rng = np.random.default_rng(seed)
    mla, carrier = scenario.mla, scenario.carrier
    L, N, T = mla.num_subarrays, mla.elements_per_subarray, scenario.num_snapshots
    pos = element_positions(mla)
    centers = subarray_centers(mla)
    ux, uz = scenario.user_xz
    amp = math.sqrt(scenario.power * friis_beta(carrier, scenario.distance))
    nscale = math.sqrt(scenario.noise_power / 2)
    u = (rng.standard_normal(T) + 1j * rng.standard_normal(T)) / math.sqrt(2)
    data = np.empty((L, T, N), dtype=complex)
    for ell in range(L):
        phi_ell = math.atan2(uz, ux - centers[ell])
        a = far_steering(pos[ell], phi_ell, carrier.wavelength)
        noise = nscale * (rng.standard_normal((T, N)) + 1j * rng.standard_normal((T, N)))
        data[ell] = amp * u[:, None] * a[None, :] + noise
    return SnapshotSet(data, int(seed), scenario)


def sample_covariance(snapshots: np.ndarray) -> np.ndarray:
    """Hermitian sample covariance of T x N snapshots (snapshots are rows)."""
    Y = np.asarray(snapshots)
    if Y.ndim != 2 or Y.shape[0] < 1:
        raise ValueError("need a T x N snapshot matrix")
    R = Y.T @ Y.conj() / Y.shape[0]
    return (R + R.conj().T) / 2


def _split_eigh(R: np.ndarray, num_sources: int):
    evals, evecs = np.linalg.eigh(R)  # ascending
    n = R.shape[0]
    if not 0 < num_sources < n:
        raise ValueError("source count must be between 1 and N-1")
    desc = evals[::-1]
    gap = desc[num_sources - 1] - desc[num_sources]
    if gap <= 1e-12 * max(abs(desc[0]), np.finfo(float).tiny):
        raise DegenerateSubspaceError(
            "signal and noise eigenvalues coincide within 1e-12 relative")
    return evals, evecs


def noise_subspace(R: np.ndarray, num_sources: int = 1) -> np.ndarray:
    """Orthonormal basis of the noise subspace: eigenvectors of the N-K
    smallest eigenvalues of the Hermitian covariance."""
    _, evecs = _split_eigh(R, num_sources)
    return evecs[:, : R.shape[0] - num_sources]


def default_angle_grid(step: float = 0.002) -> np.ndarray:
    """Angle grid over the open interval (0, pi)."""
    return np.arange(step, math.pi, step)


def centered_angle_grid(halfwidth: float = 1.1, step: float = 0.002) -> np.ndarray:
    """Angle grid about broadside, pi/2 +- halfwidth."""
    return np.arange(math.pi / 2 - halfwidth, math.pi / 2 + halfwidth, step)


def default_distance_grid(lo: float = 3.8, hi: float = 40.2, step: float = 0.02) -> np.ndarray:
    return np.arange(lo, hi + step / 2, step)


def music_1d(noise_basis: np.ndarray, positions, grid: np.ndarray, wavelength: float,
             counter: SearchCounter | None = None):
    """Angle pseudo-spectrum 1 / ||a(phi)^H U_n||^2 over the grid and its argmax.

    Strictly positive via a tiny floor on the denominator. Returns
    (spectrum, angle_at_argmax).
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or not np.all(np.diff(grid) > 0):
        raise ValueError("angle grid must be non-empty and strictly increasing")
    x = np.asarray(positions, dtype=float)
    A = np.exp(-2j * np.pi / wavelength * np.outer(np.cos(grid), x))  # conj(a) rows
    proj = A @ noise_basis
    denom = (proj.real**2 + proj.imag**2).sum(axis=1)
    spectrum = 1.0 / np.maximum(denom, _SPECTRUM_FLOOR)
    if counter is not None:
        counter.add(grid.size)
    return spectrum, float(grid[int(np.argmax(spectrum))])


def estimate_angles(snapshots: SnapshotSet, grid: np.ndarray | None = None,
                    num_sources: int = 1, counter: SearchCounter | None = None,
                    keep_spectra: bool = False) -> AngleEstimates:
    """Per-sub-array MUSIC angle estimates from one snapshot set."""
    if grid is None:
        grid = default_angle_grid()
    mla = snapshots.scenario.mla
    lam = snapshots.scenario.carrier.wavelength
    pos = element_positions(mla)
    angles, spectra = [], []
    for ell in range(mla.num_subarrays):
        R = sample_covariance(snapshots.data[ell])
        basis = noise_subspace(R, num_sources)
        spectrum, ang = music_1d(basis, pos[ell], grid, lam, counter)
        angles.append(ang)
        if keep_spectra:
            spectra.append(spectrum)
    return AngleEstimates(tuple(angles), tuple(spectra) if keep_spectra else None)


def triangulate(angles, centers, ridge: float = 0.0) -> PositionEstimate:
    """Intersect the per-sub-array bearing lines in the least-squares sense.

    Each sub-array at x-coordinate c seeing the user at bearing phi
    contributes the line tan(phi) * (x - c) = z, stacked and solved through
    the 2x2 normal equations (+ ridge * I when a regularizer is requested).
    Raises IllConditionedTriangulationError for (near-)parallel lines with no
    ridge.
    """
    ang = np.asarray(getattr(angles, "angles", angles), dtype=float)
    c = np.asarray(centers, dtype=float)
    if ang.size < 2 or ang.shape != c.shape:
        raise ValueError("need one bearing per sub-array, at least two")
    if ridge < 0:
        raise ValueError("ridge must be non-negative")
    t = np.tan(ang)
    A = np.stack([t, -np.ones_like(t)], axis=1)
    rhs = c * t
    M = A.T @ A + ridge * np.eye(2)
    if ridge == 0 and np.linalg.cond(M) > 1e12:
        raise IllConditionedTriangulationError("bearing lines are nearly parallel")
    x, z = np.linalg.solve(M, A.T @ rhs)
    return PositionEstimate(float(x), float(z), math.hypot(x, z), math.atan2(z, x),
                            subarray_angles=tuple(ang))


def locate(snapshots: SnapshotSet, grid: np.ndarray | None = None,
           counter: SearchCounter | None = None, ridge: float = 0.0) -> PositionEstimate:
    """Full pipeline: per-sub-array angles, then bearing-line intersection."""
    est = estimate_angles(snapshots, grid, counter=counter)
    centers = subarray_centers(snapshots.scenario.mla)
    return triangulate(est, centers, ridge)


class NearFieldGrid:
    """Precomputed whole-array steering vectors on an (angle, distance) grid.

    The matrix is held in single precision (about a gigabyte at the default
    resolutions) and built once, then shared across trials. Rows are ordered
    angle-major: row = angle_index * len(distance_grid) + distance_index.
    """

    def __init__(self, mla: ModularArray, carrier: Carrier,
                 angle_grid: np.ndarray, distance_grid: np.ndarray):
        self.angle_grid = np.asarray(angle_grid, dtype=float)
        self.distance_grid = np.asarray(distance_grid, dtype=float)
        if self.angle_grid.size == 0 or self.distance_grid.size == 0:
            raise ValueError("grids must be non-empty")
        x = element_positions(mla).ravel()
        k = 2 * np.pi / carrier.wavelength
        gd = self.distance_grid
        self.matrix = np.empty((self.angle_grid.size * gd.size, x.size),
                               dtype=np.complex64)
        d2 = (gd * gd)[:, None]
        for i, phi in enumerate(self.angle_grid):
            r = np.sqrt(d2 + x * x - 2 * np.cos(phi) * gd[:, None] * x)
            self.matrix[i * gd.size:(i + 1) * gd.size] = np.exp(-1j * k * r)

    @property
    def num_points(self) -> int:
        return self.matrix.shape[0]

    def argmax_rank1(self, principal: np.ndarray, chunk: int = 262144):
        """Grid point minimizing ||b||^2 - |u1^H b|^2 for the given principal
        eigenvector; returns (angle, distance)."""
        u = np.conj(principal).astype(np.complex64)
        n = self.matrix.shape[1]
        best_val, best_idx = np.inf, 0
        for start in range(0, self.num_points, chunk):
            p = self.matrix[start:start + chunk] @ u
            denom = n - (p.real**2 + p.imag**2)
            i = int(np.argmin(denom))
            if denom[i] < best_val:
                best_val, best_idx = float(denom[i]), start + i
        ia, idist = divmod(best_idx, self.distance_grid.size)
        return float(self.angle_grid[ia]), float(self.distance_grid[idist])


def music_2d(snapshots: np.ndarray, mla: ModularArray, carrier: Carrier,
             angle_grid: np.ndarray | None = None,
             distance_grid: np.ndarray | None = None,
             precomputed: NearFieldGrid | None = None,
             counter: SearchCounter | None = None):
    """Single-source (angle, distance) estimate treating the modular array as
    one aperture.

    snapshots is the stacked T x (L*N) matrix. With one source the noise
    projector is I - u1 u1^H, so only the principal eigenvector of the sample
    covariance is needed and the spectrum denominator is
    ||b||^2 - |u1^H b|^2 over the precomputed grid.
    """
    if precomputed is None:
        precomputed = NearFieldGrid(mla, carrier,
                                    angle_grid if angle_grid is not None else centered_angle_grid(),
                                    distance_grid if distance_grid is not None else default_distance_grid())
    R = sample_covariance(snapshots)
    _, evecs = _split_eigh(R, 1)
    principal = evecs[:, -1]
    if counter is not None:
        counter.add(precomputed.num_points)
    return precomputed.argmax_rank1(principal)


def nmse(estimates, truths) -> float:
    """Total squared position error over total squared truth norm."""
    e = np.asarray(estimates, dtype=float)
    t = np.asarray(truths, dtype=float)
    if e.shape != t.shape or e.size == 0:
        raise ValueError("need matching non-empty estimate/truth lists")
    return float(((e - t) ** 2).sum() / (t**2).sum())
