"""Multi-plane datasets and trajectory reconstruction from momentum maps.

Reconstruction follows the experimental procedure literally: launch a set of
initial positions at the first imaging plane and step plane to plane,

    x[j+1] = x[j] + (z[j+1] - z[j]) * k_x(x[j], z[j]) / k,

where k_x(., z[j]) is interpolated in x from plane j's extracted momentum
profile.  No higher-order multi-plane scheme is used; fidelity comes from
plane density and weak coupling, which is exactly the consistency limit the
comparison report quantifies against RK4 flow lines.

Interpolation is monotone piecewise-cubic (PCHIP) on contiguous runs of
valid pixels; masked gaps narrower than BRIDGE_CELLS cells are bridged
linearly between the bounding valid pixels ("bridge" policy, default) or
truncate the trajectory ("strict" policy).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import flow
from .config import Grid, OpticalConfig
from .errors import ConfigError
from .weakmeas import CalciteParams, WeakMeasurementRecord, simulate_plane_measurement

#: masked gaps narrower than this many grid cells are bridged linearly
BRIDGE_CELLS = 5

POLICY_BRIDGE = "bridge"
POLICY_STRICT = "strict"


@dataclass(frozen=True)
class ImagingPlaneSet:
    """Ordered per-plane measurement records sharing one optical config."""

    config: OpticalConfig
    planes: list[WeakMeasurementRecord]
    master_seed: Optional[int] = None

    def __post_init__(self):
        if len(self.planes) < 2:
            raise ConfigError("need at least 2 imaging planes")
        z = self.z_values
        if not np.all(np.diff(z) > 0):
            raise ConfigError("plane distances must be strictly increasing")

    @property
    def z_values(self) -> np.ndarray:
        return np.array([p.z for p in self.planes])

    def common_range(self):
        """x-interval covered by every plane's grid."""
        lo = max(p.grid.x_min for p in self.planes)
        hi = min(p.grid.x_max for p in self.planes)
        if not lo < hi:
            raise ConfigError("plane grids share no common x-interval")
        return lo, hi


@dataclass(frozen=True)
class ComparisonReport:
    """Reconstructed-vs-exact deviation summary.

    Deviations are |x_reconstructed - x_exact| evaluated at the
    reconstruction planes' z values; per-trajectory RMS and max, plus the
    bundle-level aggregates normalized by ``fringe_spacing_ref``.
    """

    rms: np.ndarray
    max_dev: np.ndarray
    crossing_count: int
    coverage: float
    fringe_spacing_ref: float
    rms_overall: float
    max_overall: float

    @property
    def rms_overall_frac(self) -> float:
        return self.rms_overall / self.fringe_spacing_ref

    def to_dict(self) -> dict:
        out = {
            "n_trajectories": int(self.rms.size),
            "rms_overall_m": self.rms_overall,
            "max_overall_m": self.max_overall,
            "rms_overall_fringe_frac": self.rms_overall_frac,
            "crossing_count": self.crossing_count,
            "coverage": self.coverage,
            "fringe_spacing_ref_m": self.fringe_spacing_ref,
        }
        for i in range(self.rms.size):
            out[f"traj.{i}.rms_m"] = float(self.rms[i])
            out[f"traj.{i}.max_m"] = float(self.max_dev[i])
        return out


def build_dataset(config: OpticalConfig, z_list, params: CalciteParams,
                  grid: Grid, photon_budget: Optional[int] = None,
                  master_seed: int = 0, threads: int = 1) -> ImagingPlaneSet:
    """One simulated measurement per plane distance, deterministic under
    a fixed master seed (per-plane streams are index-derived, so the result
    does not depend on `threads`)."""
    z_list = list(z_list)
    if len(z_list) < 2 or not np.all(np.diff(z_list) > 0):
        raise ConfigError("z_list must be strictly increasing with >= 2 planes")

    def one(index_z):
        index, z = index_z
        try:
            return simulate_plane_measurement(
                config, z, params, grid, photon_budget=photon_budget,
                master_seed=master_seed, plane_index=index)
        except Exception as exc:
            raise type(exc)(f"plane {index} (z={z:g} m): {exc}") from exc

    items = list(enumerate(z_list))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            planes = list(pool.map(one, items))
    else:
        planes = [one(item) for item in items]
    return ImagingPlaneSet(config=config, planes=planes, master_seed=master_seed)


def make_exact_dataset(config: OpticalConfig, z_list, grid: Grid) -> ImagingPlaneSet:
    """Oracle-injected dataset: records carry the exact weak momentum.

    Bypasses the whole measurement chain; used to validate the plane-stepping
    reconstruction against RK4 flow lines independently of the calcite
    simulation.  Intensities are the noiseless |psi|^2 split evenly.
    """
    from .wavefield import energy_density, sample_plane

    planes = []
    for z in z_list:
        f = sample_plane(config, z, grid)
        k_x, valid = flow.weak_momentum_profile(config, grid.points, z)
        half = 0.5 * energy_density(f)
        planes.append(WeakMeasurementRecord(
            z=z, grid=grid, i_left=half, i_right=half.copy(), k_x=k_x,
            valid=valid, clamped=np.zeros(grid.n, dtype=bool),
            coupling=0.0, phase_offset=0.0, photon_budget=None))
    return ImagingPlaneSet(config=config, planes=planes)


class _MomentumProfile:
    """Interpolates one plane's extracted momentum profile in x.

    PCHIP per contiguous valid run; linear bridge across masked gaps
    narrower than `bridge_cells`; queries outside the valid span or across
    wide gaps report not-ok.
    """

    def __init__(self, record: WeakMeasurementRecord, bridge_cells: intizer=BRIDGE_CELLS,
                 strict: bool = False):
        x = record.grid.points
        valid_idx = np.flatnonzero(record.valid)
        if valid_idx.size == 0:
            self._runs = []
            return
        # contiguous runs of valid pixels: [start, end] index pairs
        breaks = np.flatnonzero(np.diff(valid_idx) > 1)
        starts = np.concatenate(([0], breaks + 1))
        ends = np.concatenate((breaks, [valid_idx.size - 1]))
        self._runs = []
        for s, e in zip(starts, ends):
            lo, hi = valid_idx[s], valid_idx[e]
            xs = x[lo:hi + 1][record.valid[lo:hi + 1]]
            ks = record.k_x[lo:hi + 1][record.valid[lo:hi + 1]]
            if xs.size >= 2:
                interp = PchipInterpolator(xs, ks, extrapolate=False)
            else:
                interp = None
            self._runs.append((x[lo], x[hi], interp, float(ks[0]), float(ks[-1])))
        self._strict = strict
        self._bridge_cells = bridge_cells
        self._dx = record.grid.dx

    def __call__(self, xq: float):
        """Returns (k_x, ok)."""
        if not self._runs:
            return 0.0, False
        for idx, (lo, hi, interp, k_first, k_last) in enumerate(self._runs):
            if lo <= xq <= hi:
                if interp is None:
                    return k_first, True
                return float(interp(xq)), True
            if xq < lo:
                if idx == 0 or self._strict:
                    return 0.0, False
                prev_hi = self._runs[idx - 1][1]
                prev_k = self._runs[idx - 1][4]
                gap_cells = (lo - prev_hi) / self._dx - 1.0
                if gap_cells >= self._bridge_cells:
                    return 0.0, False
                t = (xq - prev_hi) / (lo - prev_hi)
                return prev_k + t * (k_first - prev_k), True
        return 0.0, False


def reconstruct_trajectories(dataset: ImagingPlaneSet, initial_positions,
                             policy: str = POLICY_BRIDGE,
                             bridge_cells: int = BRIDGE_CELLS) -> list[flow.Trajectory]:
    """Propagate initial positions through the dataset's momentum maps.

    Trajectories leaving the planes' common x-range or (under the strict
    policy) hitting masked data stop early with status 'out_of_range'; the
    returned list always matches `initial_positions` in length and order.
    """
    if policy not in (POLICY_BRIDGE, POLICY_STRICT):
        raise ConfigError(f"unknown masked-region policy {policy!r}")
    x0 = np.asarray(initial_positions, dtype=np.float64)
    if x0.ndim != 1 or x0.size < 1:
        raise ConfigError("initial_positions must be a non-empty 1D sequence")
    lo, hi = dataset.common_range()
    if np.any((x0 < lo) | (x0 > hi)):
        raise ConfigError("initial positions outside the planes' common x-range")

    k = dataset.config.k
    z = dataset.z_values
    n_planes = z.size
    n = x0.size
    xs = np.empty((n, n_planes))
    xs[:, 0] = x0
    alive = np.ones(n, dtype=bool)
    n_points = np.full(n, n_planes, dtype=np.int64)

    for j in range(n_planes - 1):
        profile = _MomentumProfile(dataset.planes[j], bridge_cells=bridge_cells,
                                   strict=(policy == POLICY_STRICT))
        dz = z[j + 1] - z[j]
        for i in range(n):
            if not alive[i]:
                xs[i, j + 1] = xs[i, j]
                continue
            k_x, ok = profile(xs[i, j])
            if not ok:
                alive[i] = False
                n_points[i] = j + 1
                xs[i, j + 1] = xs[i, j]
                continue
            nxt = xs[i, j] + dz * k_x / k
            if not (lo <= nxt <= hi):
                alive[i] = False
                n_points[i] = j + 1
                xs[i, j + 1] = xs[i, j]
                continue
            xs[i, j + 1] = nxt

    # launch weights read off the first plane's measured combined intensity
    first = dataset.planes[0]
    combined = first.i_left + first.i_right
    weights = np.interp(x0, first.grid.points, combined)

    out = []
    for i in range(n):
        m = int(n_points[i])
        out.append(flow.Trajectory(
            z=z[:m].copy(), x=xs[i, :m].copy(), kind=flow.TRAJ_RECONSTRUCTED,
            weight=float(weights[i]),
            status=flow.STATUS_OK if m == n_planes else flow.STATUS_OUT_OF_RANGE))
    return out


def compare_trajectories(reconstructed: list[flow.Trajectory],
                         exact: list[flow.Trajectory],
                         fringe_spacing_ref: float) -> ComparisonReport:
    """Deviation report of reconstructed flow lines against exact ones.

    Exact trajectories are interpolated at the reconstruction planes' z
    values.  Raises ConfigError when the two bundles do not pair up (length
    or launch-position mismatch beyond 1e-9 m).
    """
    if len(reconstructed) != len(exact):
        raise ConfigError("bundle lengths differ")
    if not reconstructed:
        raise ConfigError("empty bundles")
    rms = np.empty(len(reconstructed))
    max_dev = np.empty(len(reconstructed))
    sq_sum = 0.0
    n_sum = 0
    steps_taken = 0
    steps_possible = 0
    for i, (rec, exa) in enumerate(zip(reconstructed, exact)):
        if abs(rec.x0 - exa.x0) > 1e-9:
            raise ConfigError(
                f"trajectory {i}: initial positions differ "
                f"({rec.x0:g} vs {exa.x0:g})")
        x_exact = np.interp(rec.z, exa.z, exa.x)
        dev = np.abs(rec.x - x_exact)
        rms[i] = np.sqrt(np.mean(dev**2))
        max_dev[i] = dev.max()
        sq_sum += float(np.sum(dev**2))
        n_sum += dev.size
        steps_taken += rec.x.size - 1
        steps_possible += max(len(rec.z), 2) - 1

    # order inversions of the reconstructed bundle across all planes
    crossings = flow.crossing_count(reconstructed)
    n_planes = max(t.z.size for t in reconstructed)
    steps_possible = (n_planes - 1) * len(reconstructed)
    return ComparisonReport(
        rms=rms, max_dev=max_dev, crossing_count=crossings,
        coverage=steps_taken / steps_possible if steps_possible else 0.0,
        fringe_spacing_ref=fringe_spacing_ref,
        rms_overall=float(np.sqrt(sq_sum / n_sum)),
        max_overall=float(max_dev.max()))
