# cython: boundscheck=False, wraparound=False, cdivision=True
"""Cython implementations of the hot kernels (see _numpy.py for contracts)."""

import numpy as np

cimport cython
from libc.math cimport cos, sin, sqrt

ctypedef fused real:
    float
    double

TWO_PI = 2.0 * np.pi


def conv1d_fwd(real[:, :, ::1] x, real[:, :, ::1] w, real[::1] b, int stride):
    cdef Py_ssize_t B = x.shape[0], L = x.shape[1], c_in = x.shape[2]
    cdef Py_ssize_t c_out = w.shape[0], k = w.shape[2]
    cdef Py_ssize_t l_out = (L - k) // stride + 1
    if real is float:
        dtype = np.float32
    else:
        dtype = np.float64
    z_arr = np.empty((B, l_out, c_out), dtype=dtype)
    cdef real[:, :, ::1] z = z_arr
    cdef Py_ssize_t bi, t, o, c, tau, base
    cdef real acc
    for bi in range(B):
        for t in range(l_out):
            base = t * stride
            for o in range(c_out):
                acc = b[o]
                for c in range(c_in):
                    for tau in range(k):
                        acc = acc + w[o, c, tau] * x[bi, base + tau, c]
                z[bi, t, o] = acc
    return z_arr


def conv1d_bwd(real[:, :, ::1] x, real[:, :, ::1] w, int stride, real[:, :, ::1] gz):
    cdef Py_ssize_t B = x.shape[0], L = x.shape[1], c_in = x.shape[2]
    cdef Py_ssize_t c_out = w.shape[0], k = w.shape[2]
    cdef Py_ssize_t l_out = gz.shape[1]
    if real is float:
        dtype = np.float32
    else:
        dtype = np.float64
    gx_arr = np.zeros((B, L, c_in), dtype=dtype)
    gw_arr = np.zeros((c_out, c_in, k), dtype=dtype)
    gb_arr = np.zeros(c_out, dtype=dtype)
    cdef real[:, :, ::1] gx = gx_arr
    cdef real[:, :, ::1] gw = gw_arr
    cdef real[::1] gb = gb_arr
    cdef Py_ssize_t bi, t, o, c, tau, base
    cdef real g
    for bi in range(B):
        for t in range(l_out):
            base = t * stride
            for o in range(c_out):
                g = gz[bi, t, o]
                gb[o] = gb[o] + g
                for c in range(c_in):
                    for tau in range(k):
                        gw[o, c, tau] = gw[o, c, tau] + g * x[bi, base + tau, c]
                        gx[bi, base + tau, c] = gx[bi, base + tau, c] + g * w[o, c, tau]
    return gx_arr, gw_arr, gb_arr


def fading_powers(double[:, ::1] phases, double los_phase,
                  double[::1] cluster_dopplers, double los_doppler,
                  double k_lin, double dt, Py_ssize_t n_slots):
    cdef Py_ssize_t s = phases.shape[0], c = phases.shape[1]
    cdef double a_los = sqrt(k_lin / (k_lin + 1.0))
    cdef double a_sc = sqrt(1.0 / ((k_lin + 1.0) * c))
    cdef double two_pi = TWO_PI

    powers_arr = np.empty(n_slots, dtype=np.float64)
    cdef double[::1] powers = powers_arr
    cdef Py_ssize_t i, si, ci
    cdef double t, re, im, ang, acc
    for i in range(n_slots):
        t = i * dt
        acc = 0.0
        for si in range(s):
            ang = los_phase + two_pi * los_doppler * t
            re = a_los * cos(ang)
            im = a_los * sin(ang)
            for ci in range(c):
                ang = phases[si, ci] + two_pi * cluster_dopplers[ci] * t
                re = re + a_sc * cos(ang)
                im = im + a_sc * sin(ang)
            acc = acc + re * re + im * im
        powers[i] = acc / s

    cdef double span = two_pi * n_slots * dt
    phases_out_arr = np.empty((s, c), dtype=np.float64)
    cdef double[:, ::1] phases_out = phases_out_arr
    for si in range(s):
        for ci in range(c):
            phases_out[si, ci] = phases[si, ci] + span * cluster_dopplers[ci]
    cdef double los_phase_out = los_phase + span * los_doppler
    return powers_arr, phases_out_arr, los_phase_out
