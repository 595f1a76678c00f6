"""Optical configuration, transverse grids, and the flat key-value config format.

Conventions used throughout the package:

* All lengths are SI meters; z is the propagation coordinate and plays the
  role of the evolution parameter (paraxial regime).
* ``slit_waist`` is the 1/e^2 *intensity* half-width of each Gaussian slit
  at z = 0, so the initial amplitude of one slit is exp(-u^2 / slit_waist^2).
* The wavenumber is always derived as k = 2*pi/wavelength; it is exposed as
  a property so k*wavelength == 2*pi holds by construction.
* The paraxial Rayleigh range of a single slit is z_R = k*slit_waist^2 / 2,
  the distance scale of the closed-form beam-expansion law
  w(z) = slit_waist * sqrt(1 + (z/z_R)^2).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import cached_property
from importlib import resources

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class OpticalConfig:
    """Two-Gaussian-slit field definition.

    Attributes
    ----------
    wavelength : float
        Vacuum wavelength [m].
    slit_separation : float
        Center-to-center slit distance d [m].
    slit_waist : float
        1/e^2 intensity half-width of one slit at z = 0 [m].
    amp_plus, amp_minus : complex
        Relative complex amplitudes of the upper (+d/2) and lower (-d/2)
        slits.  Not both zero.
    """

    wavelength: float
    slit_separation: float
    slit_waist: float
    amp_plus: complex = 1.0 + 0.0j
    amp_minus: complex = 1.0 + 0.0j

    def __post_init__(self):
        if not (self.wavelength > 0):
            raise ConfigError("wavelength must be > 0")
        if not (self.slit_separation > 0):
            raise ConfigError("slit_separation must be > 0")
        if not (self.slit_waist > 0):
            raise ConfigError("slit_waist must be > 0")
        if self.amp_plus == 0 and self.amp_minus == 0:
            raise ConfigError("slit amplitudes must not both be zero")

    @property
    def k(self) -> float:
        """Wavenumber 2*pi/wavelength [1/m]."""
        return TWO_PI / self.wavelength

    @property
    def rayleigh_range(self) -> float:
        """Paraxial Rayleigh range z_R = k*sigma^2/2 of a single slit [m]."""
        return 0.5 * self.k * self.slit_waist**2

    def beam_width(self, z) -> float:
        """Closed-form 1/e^2 half-width w(z) = sigma*sqrt(1+(z/z_R)^2) [m]."""
        return self.slit_waist * np.sqrt(1.0 + (z / self.rayleigh_range) ** 2)

    def fringe_spacing(self, z: float) -> float:
        """Far-field fringe period wavelength*z/d [m]."""
        return self.wavelength * z / self.slit_separation

    def total_power(self) -> float:
        """Analytic value of the z-invariant integral of |psi|^2 dx.

        For psi = a+ G(x-d/2) + a- G(x+d/2) with G(u,0)=exp(-u^2/sigma^2):
        (|a+|^2 + |a-|^2 + 2 Re(a+ conj(a-)) exp(-d^2/(2 sigma^2))) * sigma*sqrt(pi/2)
        """
        sigma = self.slit_waist
        cross = 2.0 * (self.amp_plus * np.conj(self.amp_minus)).real
        overlap = math.exp(-self.slit_separation**2 / (2.0 * sigma**2))
        direct = abs(self.amp_plus) ** 2 + abs(self.amp_minus) ** 2
        return (direct + cross * overlap) * sigma * math.sqrt(math.pi / 2.0)


@dataclass(frozen=True)
class Grid:
    """Uniform transverse grid.

    Points are generated center-out, ``center + (i - (n-1)/2)*dx``, so grids
    centered on the axis are exactly antisymmetric in floating point (this is
    what makes the mirror-symmetry contracts hold to machine precision).
    """

    center: float
    dx: float
    n: int

    def __post_init__(self):
        if not (self.dx > 0):
            raise ConfigError("grid spacing must be > 0")
        if self.n < 2:
            raise ConfigError("grid needs at least 2 points")

    @cached_property
    def points(self) -> np.ndarray:
        offsets = np.arange(self.n, dtype=np.float64) - 0.5 * (self.n - 1)
        return self.center + offsets * self.dx

    @property
    def x_min(self) -> float:
        return float(self.points[0])

    @property
    def x_max(self) -> float:
        return float(self.points[-1])

    @property
    def halfwidth(self) -> float:
        return 0.5 * (self.n - 1) * self.dx

    @classmethod
    def centered(cls, halfwidth: float, n: int) -> "Grid":
        """Symmetric grid spanning [-halfwidth, +halfwidth] with n points."""
        if n < 2:
            raise ConfigError("grid needs at least 2 points")
        return cls(center=0.0, dx=2.0 * halfwidth / (n - 1), n=n)

    @classmethod
    def from_xmin(cls, x_min: float, dx: float, n: int) -> "Grid":
        return cls(center=x_min + 0.5 * (n - 1) * dx, dx=dx, n=n)

    def wavenumbers(self) -> np.ndarray:
        """FFT-ordered transverse wavenumbers k_x [1/m]."""
        return TWO_PI * np.fft.fftfreq(self.n, d=self.dx)


def auto_grid(config: OpticalConfig, z_max: float, points_per_waist: int = 8,
              min_n: int = 1024) -> Grid:
    """Grid sized to the beam support at the farthest plane of interest.

    Extent heuristic: slit_separation + 8*w(z_max), which keeps the truncated
    power below 1e-6 of the total; n is rounded up to a power of two so the
    waist is sampled with at least `points_per_waist` points.
    """
    extent = config.slit_separation + 8.0 * config.beam_width(z_max)
    dx_target = config.slit_waist / points_per_waist
    n = max(min_n, 1 << math.ceil(math.log2(extent / dx_target)))
    return Grid.centered(0.5 * extent, n)


# --- flat key-value config files -------------------------------------------

#: required keys of the optical config file, in canonical order
REQUIRED_KEYS = (
    "wavelength_m",
    "slit_separation_m",
    "slit_waist_m",
    "amp_plus_re",
    "amp_plus_im",
    "amp_minus_re",
    "amp_minus_im",
    "grid_n",
    "grid_halfwidth_m",
)

#: optional keys (measurement-layout defaults) with their fallback values
OPTIONAL_KEYS = {
    "planes_n": 41,
    "planes_z_min_m": 2.75,
    "planes_z_max_m": 8.2,
    "coupling": 0.1,
    "phase_offset_rad": 0.0,
}

_INT_KEYS = {"grid_n", "planes_n"}


def parse_keyvalue(text: str) -> dict:
    """Parse ``key = value`` lines; '#' starts a comment, blank lines ignored."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def _builtin_config_text(name: str):
    ref = resources.files("photonflow.configs").joinpath(f"{name}.cfg")
    if not ref.is_file():
        return None
    return ref.read_text(encoding="utf-8")


def load_config_file(source) -> dict:
    """Load a config by builtin name ('default') or by filesystem path.

    Returns a dict with all REQUIRED_KEYS plus OPTIONAL_KEYS resolved to
    typed values.  Raises ConfigError naming the first offending key.
    """
    text = _builtin_config_text(str(source))
    if text is None:
        try:
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {source!r}: {exc}") from exc
    raw = parse_keyvalue(text)

    known = set(REQUIRED_KEYS) | set(OPTIONAL_KEYS)
    for key in raw:
        if key not in known:
            raise ConfigError(f"unknown config key {key!r}")
    for key in REQUIRED_KEYS:
        if key not in raw:
            raise ConfigError(f"missing config key {key!r}")

    typed = {}
    for key, value in raw.items():
        try:
            typed[key] = int(value) if key in _INT_KEYS else float(value)
        except ValueError as exc:
            raise ConfigError(f"config key {key!r}: not a number: {value!r}") from exc
    for key, default in OPTIONAL_KEYS.items():
        typed.setdefault(key, default)
    return typed


def optical_config_from_dict(values: dict) -> OpticalConfig:
    return OpticalConfig(
        wavelength=values["wavelength_m"],
        slit_separation=values["slit_separation_m"],
        slit_waist=values["slit_waist_m"],
        amp_plus=complex(values["amp_plus_re"], values["amp_plus_im"]),
        amp_minus=complex(values["amp_minus_re"], values["amp_minus_im"]),
    )


def grid_from_dict(values: dict) -> Grid:
    return Grid.centered(values["grid_halfwidth_m"], values["grid_n"])


def config_hash(values: dict) -> str:
    """sha256 over canonicalized 'key=value' lines; stable under reordering."""
    lines = [f"{key}={values[key]!r}" for key in sorted(values)]
    return hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()
