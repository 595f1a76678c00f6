"""Energy-flow velocity field and exact flow-line trajectories.

The local transport velocity of the scalar paraxial field is the ratio of
the transverse energy flux to the energy density, which reduces to
v(x, z) = Im(dpsi/dx / psi) / k; the same quantity times k is the transverse
weak momentum.  Flow lines solve dx/dz = v(x, z) and are integrated with
classic fixed-step RK4 (reproducible, trivially convergence-testable).

Trajectories that enter a node region (intensity below NODE_THRESHOLD of
the plane's peak bound) stop early and are returned as partial results,
never as errors.  Integration is independent per initial condition; bundles
preserve input order and may be computed in parallel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .config import OpticalConfig
from .errors import ConfigError, FlowError
from .wavefield import NODE_THRESHOLD

TRAJ_EXACT = "exact"
TRAJ_RECONSTRUCTED = "reconstructed"

STATUS_OK = "ok"
STATUS_NODE = "node"
STATUS_OUT_OF_RANGE = "out_of_range"


@dataclass(frozen=True)
class VelocitySample:
    """Velocity-field sample at one (x, z) point.

    ``v`` is the dimensionless slope dx/dz, ``k_x_weak = k * v`` the
    transverse weak momentum [1/m].  ``valid`` is False near nodes, where
    both are reported as 0 rather than blowing up.
    """

    x: float
    z: float
    v: float
    k_x_weak: float
    valid: bool


@dataclass
class Trajectory:
    """One flow line: ordered (z, x) samples plus bookkeeping.

    ``weight`` is |psi(x0, z0)|^2 at the launch point, used when a bundle is
    asked to reproduce the intensity profile.  ``status`` records early
    stops ('node' when a node region was entered, 'out_of_range' when a
    reconstruction left its data); partial trajectories are valid results.
    """

    z: np.ndarray
    x: np.ndarray
    kind: str = TRAJ_EXACT
    weight: float = 0.0
    status: str = STATUS_OK

    def __post_init__(self):
        if self.z.shape != self.x.shape:
            raise ConfigError("trajectory z and x must have equal length")

    @property
    def x0(self) -> float:
        return float(self.x[0])

    @property
    def x_final(self) -> float:
        return float(self.x[-1])


def _kernel_args(config: OpticalConfig):
    return (config.k, config.slit_waist, config.slit_separation,
            complex(config.amp_plus), complex(config.amp_minus))


def weak_momentum_exact(config: OpticalConfig, x: float, z: float,
                        node_threshold: float = NODE_THRESHOLD) -> VelocitySample:
    """Exact weak transverse momentum Im(dpsi/dx / psi) at one point.

    Uses the analytic derivative of the closed-form field.  At an exact node
    the sample comes back with valid=False and zero momentum, never an
    exception or an infinity.
    """
    kx, valid = kernels.weak_momentum(np.array([float(x)]), float(z),
                                      *_kernel_args(config), node_threshold)
    return VelocitySample(x=float(x), z=float(z), v=float(kx[0]) / config.k,
                          k_x_weak=float(kx[0]), valid=bool(valid[0]))


def weak_momentum_profile(config: OpticalConfig, x, z: float,
                          node_threshold: float = NODE_THRESHOLD):
    """Vectorized weak momentum: returns (k_x array, valid mask)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    return kernels.weak_momentum(x, float(z), *_kernel_args(config),
                                 node_threshold)


def trace_bundle(config: OpticalConfig, initial_positions, z0: float,
                 z1: float, steps: int,
                 node_threshold: float = NODE_THRESHOLD) -> list[Trajectory]:
    """Integrate one flow line per initial position (order preserved).

    Each trajectory is weighted by |psi(x0, z0)|^2.  Node stops are recorded
    per trajectory without aborting the bundle.

    Raises
    ------
    ConfigError
        If initial positions are not strictly increasing or the z range is
        empty.
    FlowError
        If the integrator produced a non-finite position (should not happen
        for finite inputs; indicates a genuinely broken configuration).
    """
    x0 = np.ascontiguousarray(initial_positions, dtype=np.float64)
    if x0.ndim != 1 or x0.size < 1:
        raise ConfigError("initial_positions must be a non-empty 1D sequence")
    if x0.size > 1 and not np.all(np.diff(x0) > 0):
        raise ConfigError("initial positions must be strictly increasing")
    if not (z1 > z0 >= 0):
        raise ConfigError("need z1 > z0 >= 0")
    if steps < 1:
        raise ConfigError("steps must be >= 1")

    xs, n_points, status = kernels.rk4_bundle(
        x0, float(z0), float(z1), int(steps), *_kernel_args(config),
        node_threshold)
    if np.any(status == kernels.STATUS_NONFINITE):
        bad = int(np.nonzero(status == kernels.STATUS_NONFINITE)[0][0])
        raise FlowError(f"non-finite state while tracing x0={x0[bad]:g}")

    from .wavefield import evaluate_field  # local import avoids a cycle
    weights = np.abs(evaluate_field(config, x0, z0)) ** 2
    z_grid = z0 + (z1 - z0) / steps * np.arange(steps + 1)

    bundle = []
    for i in range(x0.size):
        m = int(n_points[i])
        bundle.append(Trajectory(
            z=z_grid[:m].copy(), x=xs[i, :m].copy(), kind=TRAJ_EXACT,
            weight=float(weights[i]),
            status=STATUS_NODE if status[i] == kernels.STATUS_NODE else STATUS_OK))
    return bundle


def trace_trajectory(config: OpticalConfig, x0: float, z0: float, z1: float,
                     steps: int,
                     node_threshold: float = NODE_THRESHOLD) -> Trajectory:
    """Single flow line from (x0, z0) to z1 with fixed-step RK4."""
    return trace_bundle(config, [x0], z0, z1, steps, node_threshold)[0]


def default_launch_positions(config: OpticalConfig, per_slit: int = 20,
                             spread: float = 2.0) -> np.ndarray:
    """Strictly increasing launch positions, `per_slit` per slit.

    Spread uniformly over +-`spread` waists around each slit center; the
    natural seeding for bundles and reconstruction comparisons.
    """
    if per_slit < 1:
        raise ConfigError("per_slit must be >= 1")
    half = 0.5 * config.slit_separation
    width = spread * config.slit_waist
    around = np.linspace(-width, width, per_slit)
    positions = np.concatenate([around - half, around + half])
    if not np.all(np.diff(positions) > 0):
        raise ConfigError("slit launch windows overlap; reduce spread")
    return positions


def crossing_count(trajectories: list[Trajectory]) -> int:
    """Number of adjacent-pair order inversions summed over recorded steps.

    Trajectories are compared at common step indices while both are alive;
    0 means the bundle's x-ordering is preserved everywhere.
    """
    count = 0
    for a, b in zip(trajectories[:-1], trajectories[1:]):
        m = min(a.x.size, b.x.size)
        count += int(np.count_nonzero(b.x[:m] <= a.x[:m]))
    return count
