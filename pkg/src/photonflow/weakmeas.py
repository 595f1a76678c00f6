"""Calcite weak measurement chain and transverse-momentum extraction.

The simulated chain is the software twin of the polarization readout:

1. ``prepare_diagonal``      photon enters diagonally polarized, H = V.
2. ``apply_calcite``         a thin calcite chip imprints the momentum-linear
   differential phase phi(k_x) = coupling*(k_x/k) + phase_offset between the
   H and V components (the weak coupling).
3. ``circular_intensities``  quarter-wave plate + beam displacer project onto
   the circular basis; the two detected patterns are
   I_R ~ 1 - sin(phi), I_L ~ 1 + sin(phi) for a momentum eigenstate.
4. ``extract_momentum``      inverts the readout per pixel:
   k_x = (k/coupling) * (arcsin((I_L - I_R)/(I_L + I_R)) - phase_offset).

In the weak-coupling limit the extracted profile converges (error O(zeta^2))
to the exact weak momentum Im(dpsi/dx / psi) of the flow module, which is
what makes trajectory reconstruction from these records possible.

Optional shot noise draws independent per-pixel Poisson counts with a
deterministic per-plane stream derived from (master seed, plane index), so
multi-plane datasets are reproducible regardless of execution order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import Grid, OpticalConfig
from .errors import ConfigError, ExtractionError
from .wavefield import PlaneField, _check_aliasing, sample_plane

#: fraction of the peak combined intensity below which extraction is masked
INTENSITY_FLOOR = 1e-8


@dataclass(frozen=True)
class CalciteParams:
    """Weak-coupling parameters of the calcite chip.

    ``coupling`` is the dimensionless strength zeta of the momentum-linear
    phase; ``phase_offset`` [rad] defaults to 0 (the chip is tilted so that
    the offset vanishes).  Extraction needs coupling != 0, and the phase
    |phi| should stay within (-pi/2, pi/2) over the occupied spectrum for an
    unambiguous arcsin inversion (checked by apply_calcite's caller via
    ``phase_bound_ok``).
    """

    coupling: float
    phase_offset: float = 0.0

    def phase(self, k_x, k: float):
        """phi(k_x) = coupling*(k_x/k) + phase_offset [rad]."""
        return self.coupling * (np.asarray(k_x) / k) + self.phase_offset


@dataclass(frozen=True)
class PolarizationPair:
    """H and V complex components on one shared grid at distance z."""

    z: float
    grid: Grid
    psi_h: np.ndarray
    psi_v: np.ndarray

    def __post_init__(self):
        if self.psi_h.shape != (self.grid.n,) or self.psi_v.shape != (self.grid.n,):
            raise ConfigError("polarization components and grid size differ")

    def combined_intensity(self) -> np.ndarray:
        return np.abs(self.psi_h) ** 2 + np.abs(self.psi_v) ** 2

    def power(self) -> float:
        return float(np.trapezoid(self.combined_intensity(), dx=self.grid.dx))


@dataclass(frozen=True)
class WeakMeasurementRecord:
    """Per-plane measurement outcome: two intensity profiles and the
    extracted transverse-momentum profile with its validity bookkeeping."""

    z: float
    grid: Grid
    i_left: np.ndarray
    i_right: np.ndarray
    k_x: np.ndarray
    valid: np.ndarray
    clamped: np.ndarray
    coupling: float
    phase_offset: float
    photon_budget: Optional[int]  # None means noiseless
    seed: Optional[int] = None

    @property
    def noiseless(self) -> bool:
        return self.photon_budget is None


def prepare_diagonal(field: PlaneField) -> PolarizationPair:
    """Split a scalar field into equal H and V components (diagonal state).

    Total power is preserved: each component carries half.
    """
    component = field.values / np.sqrt(2.0)
    return PolarizationPair(z=field.z, grid=field.grid,
                            psi_h=component.copy(), psi_v=component.copy())


def apply_calcite(pair: PolarizationPair, params: CalciteParams,
                  k: float) -> PolarizationPair:
    """Imprint the differential phase exp(-+ i phi(k_x)/2) on H and V.

    Acts diagonally in the transverse-momentum domain (FFT in, multiply,
    FFT back), so it is exactly unitary up to roundoff.  Raises
    AliasingError if the grid under-resolves either component's spectrum.
    """
    k_x = pair.grid.wavenumbers()
    half_phase = 0.5 * params.phase(k_x, k)
    out = []
    for values, sign in ((pair.psi_h, -1.0), (pair.psi_v, +1.0)):
        spectrum = np.fft.fft(values)
        _check_aliasing(spectrum, pair.grid, "apply_calcite")
        out.append(np.fft.ifft(spectrum * np.exp(sign * 1j * half_phase)))
    return PolarizationPair(z=pair.z, grid=pair.grid, psi_h=out[0], psi_v=out[1])


def phase_bound_ok(pair: PolarizationPair, params: CalciteParams, k: float,
                   mass_fraction: float = 1e-6) -> bool:
    """True when |phi(k_x)| < pi/2 over the occupied spectrum.

    'Occupied' means wavenumbers holding all but `mass_fraction` of the
    combined spectral mass; keeps the arcsin inversion single-valued.
    """
    k_x = pair.grid.wavenumbers()
    mass = np.abs(np.fft.fft(pair.psi_h)) ** 2 + np.abs(np.fft.fft(pair.psi_v)) ** 2
    total = mass.sum()
    if total == 0:
        return True
    occupied = mass > mass_fraction * total
    return bool(np.all(np.abs(params.phase(k_x[occupied], k)) < 0.5 * np.pi))


def circular_intensities(pair: PolarizationPair):
    """Project onto the circular basis and detect both patterns.

    E_R = (psi_H + i psi_V)/sqrt(2), E_L = (psi_H - i psi_V)/sqrt(2); returns
    (I_R, I_L) = (|E_R|^2, |E_L|^2).  Pointwise I_R + I_L equals the pair's
    combined intensity (the projection is a basis change).
    """
    e_r = (pair.psi_h + 1j * pair.psi_v) / np.sqrt(2.0)
    e_l = (pair.psi_h - 1j * pair.psi_v) / np.sqrt(2.0)
    return np.abs(e_r) ** 2, np.abs(e_l) ** 2


def extract_momentum(i_left, i_right, params: CalciteParams, k: float,
                     intensity_floor: float = INTENSITY_FLOOR):
    """Invert the two detected patterns into a momentum profile.

    Per pixel: r = (I_L - I_R)/(I_L + I_R), then
    k_x = (k/coupling) * (arcsin(r) - phase_offset).

    Returns
    -------
    k_x : ndarray [1/m]
    valid : ndarray of bool
        False where I_L + I_R is below `intensity_floor` times the peak
        combined intensity (interference node, momentum undefined).
    clamped : ndarray of bool
        True where |r| > 1 had to be clamped to the arcsin domain (possible
        under shot noise; clamped pixels stay valid so reconstruction grids
        remain dense).

    Raises
    ------
    ConfigError        if coupling == 0 (nothing to invert).
    ExtractionError    if every pixel came out masked.
    """
    if params.coupling == 0:
        raise ConfigError("extraction requires a nonzero calcite coupling")
    i_left = np.asarray(i_left, dtype=np.float64)
    i_right = np.asarray(i_right, dtype=np.float64)
    total = i_left + i_right
    peak = total.max() if total.size else 0.0
    valid = total > max(intensity_floor * peak, 0.0)
    if not valid.any():
        raise ExtractionError("momentum extraction produced a fully masked "
                              "profile (no pixel above the intensity floor)")
    ratio = np.zeros_like(total)
    np.divide(i_left - i_right, total, out=ratio, where=valid)
    clamped = np.abs(ratio) > 1.0
    np.clip(ratio, -1.0, 1.0, out=ratio)
    k_x = np.where(valid, (k / params.coupling)
                   * (np.arcsin(ratio) - params.phase_offset), 0.0)
    return k_x, valid, clamped & valid


def plane_rng(master_seed: int, plane_index: int) -> np.random.Generator:
    """Deterministic per-plane random stream from (master_seed, plane_index)."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=(plane_index,)))


def _shot_noise(i_left, i_right, photon_budget: int, rng: np.random.Generator):
    """Per-pixel independent Poisson counts, `photon_budget` expected total."""
    total = i_left.sum() + i_right.sum()
    if photon_budget == 0 or total <= 0:
        return np.zeros_like(i_left), np.zeros_like(i_right)
    scale = photon_budget / total
    counts_l = rng.poisson(i_left * scale).astype(np.float64)
    counts_r = rng.poisson(i_right * scale).astype(np.float64)
    return counts_l, counts_r


def simulate_plane_measurement(config: OpticalConfig, z: float,
                               params: CalciteParams, grid: Grid,
                               photon_budget: Optional[int] = None,
                               master_seed: int = 0, plane_index: int = 0,
                               check_coverage: bool = True) -> WeakMeasurementRecord:
    """Full single-plane measurement: field -> polarization chain -> record.

    ``photon_budget=None`` runs the noiseless chain; an integer budget draws
    per-pixel Poisson counts from the deterministic per-plane stream.  A zero
    budget yields a fully masked record (empty detector), not an error.
    """
    if photon_budget is not None and photon_budget < 0:
        raise ConfigError("photon_budget must be >= 0 or None")
    field = sample_plane(config, z, grid, check_coverage=check_coverage)
    pair = apply_calcite(prepare_diagonal(field), params, config.k)
    i_right, i_left = circular_intensities(pair)
    if photon_budget is not None:
        rng = plane_rng(master_seed, plane_index)
        i_left, i_right = _shot_noise(i_left, i_right, photon_budget, rng)
    try:
        k_x, valid, clamped = extract_momentum(i_left, i_right, params, config.k)
    except ExtractionError:
        n = grid.n
        k_x = np.zeros(n)
        valid = np.zeros(n, dtype=bool)
        clamped = np.zeros(n, dtype=bool)
    return WeakMeasurementRecord(
        z=z, grid=grid, i_left=i_left, i_right=i_right, k_x=k_x, valid=valid,
        clamped=clamped, coupling=params.coupling,
        phase_offset=params.phase_offset, photon_budget=photon_budget,
        seed=None if photon_budget is None else master_seed)
