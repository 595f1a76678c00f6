# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; same contract as photonflow.kernels.reference."""

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from "complex.h" nogil:
    double complex cexp(double complex z)
    double complex csqrt(double complex z)
    double creal(double complex z)
    double cimag(double complex z)
    double cabs(double complex z)

cdef extern from "math.h" nogil:
    double sqrt(double x)
    bint isfinite(double x)

BACKEND = "compiled"

STATUS_OK = 0
STATUS_NODE = 1
STATUS_NONFINITE = 2

cdef int _STATUS_NODE = 1
cdef int _STATUS_NONFINITE = 2


cdef inline void _beam_factors(double z, double k, double sigma,
                               double complex *pref, double complex *cinv) nogil:
    cdef double z_r = 0.5 * k * sigma * sigma
    cdef double complex q = 1.0 + 1j * (z / z_r)
    pref[0] = 1.0 / csqrt(q)
    cinv[0] = 1.0 / (sigma * sigma * q)


cdef inline double _peak_bound(double z, double k, double sigma,
                               double amp_sum) nogil:
    cdef double z_r = 0.5 * k * sigma * sigma
    return amp_sum * amp_sum / sqrt(1.0 + (z / z_r) * (z / z_r))


cdef inline double _slope_at(double x, double k, double d,
                             double complex pref, double complex cinv,
                             double complex a_plus, double complex a_minus,
                             double floor, bint *valid) nogil:
    # v = Im(conj(psi) * dpsi) / (|psi|^2 * k); invalid below the node floor
    cdef double up = x - 0.5 * d
    cdef double um = x + 0.5 * d
    cdef double complex gp = a_plus * pref * cexp(-(up * up) * cinv)
    cdef double complex gm = a_minus * pref * cexp(-(um * um) * cinv)
    cdef double complex psi = gp + gm
    cdef double complex dpsi = -2.0 * cinv * (up * gp + um * gm)
    cdef double intensity = creal(psi) * creal(psi) + cimag(psi) * cimag(psi)
    if intensity < floor:
        valid[0] = 0
        return 0.0
    valid[0] = 1
    cdef double current = creal(psi) * cimag(dpsi) - cimag(psi) * creal(dpsi)
    return current / (intensity * k)


def eval_field(cnp.ndarray[double, ndim=1] x, double z, double k, double sigma,
               double d, double complex a_plus, double complex a_minus):
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(n, dtype=np.complex128)
    cdef double complex pref, cinv
    cdef double up, um
    cdef Py_ssize_t i
    _beam_factors(z, k, sigma, &pref, &cinv)
    with nogil:
        for i in range(n):
            up = x[i] - 0.5 * d
            um = x[i] + 0.5 * d
            out[i] = pref * (a_plus * cexp(-(up * up) * cinv)
                             + a_minus * cexp(-(um * um) * cinv))
    return out


def eval_field_gradient(cnp.ndarray[double, ndim=1] x, double z, double k,
                        double sigma, double d, double complex a_plus,
                        double complex a_minus):
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] psi = np.empty(n, dtype=np.complex128)
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] dpsi = np.empty(n, dtype=np.complex128)
    cdef double complex pref, cinv, gp, gm
    cdef double up, um
    cdef Py_ssize_t i
    _beam_factors(z, k, sigma, &pref, &cinv)
    with nogil:
        for i in range(n):
            up = x[i] - 0.5 * d
            um = x[i] + 0.5 * d
            gp = a_plus * pref * cexp(-(up * up) * cinv)
            gm = a_minus * pref * cexp(-(um * um) * cinv)
            psi[i] = gp + gm
            dpsi[i] = -2.0 * cinv * (up * gp + um * gm)
    return psi, dpsi


def peak_intensity_bound(double z, double k, double sigma,
                         double complex a_plus, double complex a_minus):
    return _peak_bound(z, k, sigma, cabs(a_plus) + cabs(a_minus))


def weak_momentum(cnp.ndarray[double, ndim=1] x, double z, double k,
                  double sigma, double d, double complex a_plus,
                  double complex a_minus, double node_threshold):
    cdef Py_ssize_t n = x.shape[0]
    cdef cnp.ndarray[double, ndim=1] kx = np.zeros(n, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] valid = np.zeros(n, dtype=np.uint8)
    cdef double complex pref, cinv
    cdef double floor
    cdef bint ok
    cdef Py_ssize_t i
    _beam_factors(z, k, sigma, &pref, &cinv)
    floor = node_threshold * _peak_bound(z, k, sigma, cabs(a_plus) + cabs(a_minus))
    with nogil:
        for i in range(n):
            kx[i] = k * _slope_at(x[i], k, d, pref, cinv, a_plus, a_minus,
                                  floor, &ok)
            valid[i] = ok
    return kx, valid.view(np.bool_)


def rk4_bundle(cnp.ndarray[double, ndim=1] x0, double z0, double z1, int steps,
               double k, double sigma, double d, double complex a_plus,
               double complex a_minus, double node_threshold):
    cdef Py_ssize_t n = x0.shape[0]
    cdef double h = (z1 - z0) / steps
    cdef cnp.ndarray[double, ndim=2] xs = np.empty((n, steps + 1), dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] n_points = np.full(n, steps + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int8_t, ndim=1] status = np.zeros(n, dtype=np.int8)
    cdef double amp_sum = cabs(a_plus) + cabs(a_minus)
    cdef double complex pref1, cinv1, prefh, cinvh, pref4, cinv4
    cdef double floor1, floorh, floor4
    cdef double zj, cur, new, v1, v2, v3, v4
    cdef bint ok1, ok2, ok3, ok4
    cdef Py_ssize_t i, j

    with nogil:
        for i in range(n):
            xs[i, 0] = x0[i]
        for j in range(steps):
            zj = z0 + j * h
            # stage factors depend on z only: computed once per step
            _beam_factors(zj, k, sigma, &pref1, &cinv1)
            _beam_factors(zj + 0.5 * h, k, sigma, &prefh, &cinvh)
            _beam_factors(zj + h, k, sigma, &pref4, &cinv4)
            floor1 = node_threshold * _peak_bound(zj, k, sigma, amp_sum)
            floorh = node_threshold * _peak_bound(zj + 0.5 * h, k, sigma, amp_sum)
            floor4 = node_threshold * _peak_bound(zj + h, k, sigma, amp_sum)
            for i in range(n):
                if status[i] != 0:
                    xs[i, j + 1] = xs[i, j]
                    continue
                cur = xs[i, j]
                v1 = _slope_at(cur, k, d, pref1, cinv1, a_plus, a_minus, floor1, &ok1)
                v2 = _slope_at(cur + 0.5 * h * v1, k, d, prefh, cinvh, a_plus,
                               a_minus, floorh, &ok2)
                v3 = _slope_at(cur + 0.5 * h * v2, k, d, prefh, cinvh, a_plus,
                               a_minus, floorh, &ok3)
                v4 = _slope_at(cur + h * v3, k, d, pref4, cinv4, a_plus,
                               a_minus, floor4, &ok4)
                new = cur + (h / 6.0) * (v1 + 2.0 * v2 + 2.0 * v3 + v4)
                if not (ok1 and ok2 and ok3 and ok4):
                    n_points[i] = j + 1
                    status[i] = _STATUS_NODE
                    xs[i, j + 1] = cur
                elif not isfinite(new):
                    n_points[i] = j + 1
                    status[i] = _STATUS_NONFINITE
                    xs[i, j + 1] = cur
                else:
                    xs[i, j + 1] = new
    return xs, n_points, status
