"""Pure-numpy kernels: analytic field evaluation, weak momentum, RK4 bundles.

This module is the fallback (and the readable definition) of the hot loops
implemented in the `_ckernels` extension; both expose the same functions with
identical semantics.  All of them work on 1D float64 position arrays.

Math notes
----------
A single slit of 1/e^2 intensity half-width sigma, centered at u = 0, has the
closed-form paraxially propagated amplitude

    G(u, z) = (1 + i z/z_R)^(-1/2) * exp(-u^2 / (sigma^2 (1 + i z/z_R)))

with z_R = k sigma^2 / 2.  This is the exact solution of the paraxial
equation 2ik dpsi/dz = -d^2psi/dx^2 for G(u, 0) = exp(-u^2/sigma^2); it
carries the width law w(z) = sigma*sqrt(1+(z/z_R)^2), the quadratic
wavefront phase and the (half-angle, 1D) Gouy phase, so it agrees with the
spectral propagator exp(-i k_x^2 dz / (2k)) to roundoff.

The two-slit field is psi(x,z) = a+ G(x-d/2, z) + a- G(x+d/2, z), and

    dG/du = -2u / (sigma^2 (1 + i z/z_R)) * G(u, z)

gives the analytic transverse derivative.  The local transport slope is
v = Im(dpsi/dx / psi)/k, the flow-line ODE is dx/dz = v(x, z).

Samples are flagged invalid near nodes: |psi|^2 below `node_threshold` times
the envelope bound (|a+|+|a-|)^2 / sqrt(1+(z/z_R)^2) (the peak magnitude of
a single propagated Gaussian times the largest possible constructive sum).
"""

import numpy as np

BACKEND = "reference"

# trajectory status codes shared with the compiled kernel
STATUS_OK = 0
STATUS_NODE = 1
STATUS_NONFINITE = 2


def _beam_factors(z, k, sigma):
    """Complex prefactor and inverse-width of G at distance z."""
    z_r = 0.5 * k * sigma * sigma
    q = 1.0 + 1j * (z / z_r)
    return 1.0 / np.sqrt(q), 1.0 / (sigma * sigma * q)


def eval_field(x, z, k, sigma, d, a_plus, a_minus):
    """Two-slit amplitude psi(x, z) on a float64 array x."""
    pref, cinv = _beam_factors(z, k, sigma)
    up = x - 0.5 * d
    um = x + 0.5 * d
    return pref * (a_plus * np.exp(-(up * up) * cinv)
                   + a_minus * np.exp(-(um * um) * cinv))


def eval_field_gradient(x, z, k, sigma, d, a_plus, a_minus):
    """psi and dpsi/dx, both analytic."""
    pref, cinv = _beam_factors(z, k, sigma)
    up = x - 0.5 * d
    um = x + 0.5 * d
    gp = a_plus * pref * np.exp(-(up * up) * cinv)
    gm = a_minus * pref * np.exp(-(um * um) * cinv)
    return gp + gm, -2.0 * cinv * (up * gp + um * gm)


def peak_intensity_bound(z, k, sigma, a_plus, a_minus):
    """Upper bound on max_x |psi(x,z)|^2, exact in z-scaling."""
    z_r = 0.5 * k * sigma * sigma
    return (abs(a_plus) + abs(a_minus)) ** 2 / np.sqrt(1.0 + (z / z_r) ** 2)


def weak_momentum(x, z, k, sigma, d, a_plus, a_minus, node_threshold):
    """Transverse weak momentum Im(dpsi/dx / psi) with node validity mask.

    Returns (k_x array [1/m], valid bool array).  Invalid samples carry 0.
    """
    psi, dpsi = eval_field_gradient(x, z, k, sigma, d, a_plus, a_minus)
    intensity = psi.real * psi.real + psi.imag * psi.imag
    floor = node_threshold * peak_intensity_bound(z, k, sigma, a_plus, a_minus)
    valid = intensity >= floor
    current = (np.conj(psi) * dpsi).imag
    kx = np.zeros_like(intensity)
    np.divide(current, intensity, out=kx, where=valid)
    return kx, valid


def _slope(x, z, k, sigma, d, a_plus, a_minus, node_threshold):
    kx, valid = weak_momentum(x, z, k, sigma, d, a_plus, a_minus, node_threshold)
    return kx / k, valid


def rk4_bundle(x0, z0, z1, steps, k, sigma, d, a_plus, a_minus, node_threshold):
    """Integrate dx/dz = v(x,z) for all start positions x0 with fixed-step RK4.

    Returns (xs, n_points, status):
      xs        float64 (len(x0), steps+1), row i valid up to n_points[i]
      n_points  recorded points per trajectory (steps+1 when it completed)
      status    STATUS_OK / STATUS_NODE / STATUS_NONFINITE per trajectory

    A trajectory that touches a node-invalid region in any RK4 stage stops
    at the last accepted point (STATUS_NODE); the bundle never aborts.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    n = x0.shape[0]
    h = (z1 - z0) / steps
    xs = np.empty((n, steps + 1), dtype=np.float64)
    xs[:, 0] = x0
    n_points = np.full(n, steps + 1, dtype=np.int64)
    status = np.zeros(n, dtype=np.int8)
    alive = np.ones(n, dtype=bool)
    cur = x0.copy()
    args = (k, sigma, d, a_plus, a_minus, node_threshold)

    for j in range(steps):
        zj = z0 + j * h
        zh = zj + 0.5 * h
        v1, ok1 = _slope(cur, zj, *args)
        v2, ok2 = _slope(cur + 0.5 * h * v1, zh, *args)
        v3, ok3 = _slope(cur + 0.5 * h * v2, zh, *args)
        v4, ok4 = _slope(cur + h * v3, zj + h, *args)
        ok = ok1 & ok2 & ok3 & ok4
        new = cur + (h / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4)
        finite = np.isfinite(new)

        node_stop = alive & ~ok
        n_points[node_stop] = j + 1
        status[node_stop] = STATUS_NODE
        bad = alive & ok & ~finite
        n_points[bad] = j + 1
        status[bad] = STATUS_NONFINITE
        alive &= ok & finite

        cur = np.where(alive, new, cur)
        xs[:, j + 1] = cur
        if not alive.any():
            break
    return xs, n_points, status
