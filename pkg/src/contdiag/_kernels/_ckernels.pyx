# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the grid kernels in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, frexp, hypot, isfinite, ldexp, sqrt

cnp.import_array()


def closed_form(f, g, hr, hc):
    f, g, hr, hc = np.broadcast_arrays(*(np.asarray(x, dtype=np.float64) for x in (f, g, hr, hc)))
    shape = f.shape
    cdef const double[::1] fv = np.ascontiguousarray(f).ravel()
    cdef const double[::1] gv = np.ascontiguousarray(g).ravel()
    cdef const double[::1] hrv = np.ascontiguousarray(hr).ravel()
    cdef const double[::1] hcv = np.ascontiguousarray(hc).ravel()
    cdef Py_ssize_t n = fv.shape[0], i
    lp_a = np.empty(n)
    lm_a = np.empty(n)
    p_a = np.empty(n)
    q_a = np.empty(n)
    gap_a = np.empty(n)
    cdef double[::1] lp = lp_a, lm = lm_a, p = p_a, q = q_a, gp = gap_a
    cdef double s, delta, habs, gap, h2, det, big, small, lplus, lminus
    cdef double fi, gi, hri, hci, m, sc
    cdef int e
    with nogil:
        for i in range(n):
            m = fabs(fv[i])
            if fabs(gv[i]) > m:
                m = fabs(gv[i])
            if fabs(hrv[i]) > m:
                m = fabs(hrv[i])
            if fabs(hcv[i]) > m:
                m = fabs(hcv[i])
            sc = 1.0
            if m > 0 and isfinite(m):
                frexp(m, &e)
                sc = ldexp(1.0, e)
            fi = fv[i] / sc
            gi = gv[i] / sc
            hri = hrv[i] / sc
            hci = hcv[i] / sc
            s = fi + gi
            delta = fi - gi
            habs = hypot(hri, hci)
            gap = hypot(delta, 2.0 * habs)
            h2 = hri * hri + hci * hci
            det = fi * gi - h2
            if s >= 0:
                big = 0.5 * (s + gap)
            else:
                big = 0.5 * (s - gap)
            if big != 0:
                small = det / big
            else:
                small = 0.0
            if s >= 0:
                lplus = big * sc
                lminus = small * sc
            else:
                lplus = small * sc
                lminus = big * sc
            if lplus >= lminus:
                lp[i] = lplus
                lm[i] = lminus
            else:
                lp[i] = lminus
                lm[i] = lplus
            if delta >= 0:
                p[i] = 0.5 * (gap + delta) * sc
            else:
                p[i] = 2.0 * h2 / (gap - delta) * sc
            if delta <= 0:
                q[i] = 0.5 * (gap - delta) * sc
            else:
                q[i] = 2.0 * h2 / (gap + delta) * sc
            gp[i] = gap * sc
    return (lp_a.reshape(shape), lm_a.reshape(shape), p_a.reshape(shape),
            q_a.reshape(shape), gap_a.reshape(shape))


def greedy_align(vectors):
    out_a = np.array(vectors, dtype=np.complex128, copy=True, order="C")
    cdef double complex[:, :, ::1] out = out_a
    cdef Py_ssize_t n = out.shape[0], i, j, r
    jumps_a = np.zeros(max(n - 1, 0))
    cdef double[::1] jumps = jumps_a
    cdef double complex o00, o01, o10, o11, tmp, c, ph
    cdef double acc, ac
    with nogil:
        for i in range(1, n):
            o00 = out[i - 1, 0, 0].conjugate() * out[i, 0, 0] + out[i - 1, 1, 0].conjugate() * out[i, 1, 0]
            o01 = out[i - 1, 0, 0].conjugate() * out[i, 0, 1] + out[i - 1, 1, 0].conjugate() * out[i, 1, 1]
            o10 = out[i - 1, 0, 1].conjugate() * out[i, 0, 0] + out[i - 1, 1, 1].conjugate() * out[i, 1, 0]
            o11 = out[i - 1, 0, 1].conjugate() * out[i, 0, 1] + out[i - 1, 1, 1].conjugate() * out[i, 1, 1]
            if abs(o01) + abs(o10) > abs(o00) + abs(o11):
                for r in range(2):
                    tmp = out[i, r, 0]
                    out[i, r, 0] = out[i, r, 1]
                    out[i, r, 1] = tmp
                o00 = o01
                o11 = o10
            for j in range(2):
                if j == 0:
                    c = o00
                else:
                    c = o11
                ac = abs(c)
                if ac != 0:
                    ph = c.conjugate() / ac
                    out[i, 0, j] = out[i, 0, j] * ph
                    out[i, 1, j] = out[i, 1, j] * ph
            acc = 0.0
            for r in range(2):
                for j in range(2):
                    tmp = out[i, r, j] - out[i - 1, r, j]
                    acc += tmp.real * tmp.real + tmp.imag * tmp.imag
            jumps[i - 1] = sqrt(acc)
    return out_a, jumps_a


def hermitian_metrics(U, f, g, hr, hc):
    cdef const double complex[:, :, ::1] u = np.ascontiguousarray(U, dtype=np.complex128)
    cdef const double[::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef const double[::1] gv = np.ascontiguousarray(g, dtype=np.float64)
    cdef const double[::1] hrv = np.ascontiguousarray(hr, dtype=np.float64)
    cdef const double[::1] hcv = np.ascontiguousarray(hc, dtype=np.float64)
    cdef Py_ssize_t n = u.shape[0], i
    defect_a = np.empty(n)
    off_a = np.empty(n)
    d1_a = np.empty(n)
    d2_a = np.empty(n)
    cdef double[::1] defect = defect_a, off = off_a, d1 = d1_a, d2 = d2_a
    cdef double complex h, a00, a01, a10, a11, au00, au01, au10, au11, m01, m10
    cdef double complex g00, g01, g11, m00, m11
    cdef double x01, x10
    with nogil:
        for i in range(n):
            h = hrv[i] + 1j * hcv[i]
            # A U
            au00 = fv[i] * u[i, 0, 0] + h * u[i, 1, 0]
            au10 = h.conjugate() * u[i, 0, 0] + gv[i] * u[i, 1, 0]
            au01 = fv[i] * u[i, 0, 1] + h * u[i, 1, 1]
            au11 = h.conjugate() * u[i, 0, 1] + gv[i] * u[i, 1, 1]
            m00 = u[i, 0, 0].conjugate() * au00 + u[i, 1, 0].conjugate() * au10
            m01 = u[i, 0, 0].conjugate() * au01 + u[i, 1, 0].conjugate() * au11
            m10 = u[i, 0, 1].conjugate() * au00 + u[i, 1, 1].conjugate() * au10
            m11 = u[i, 0, 1].conjugate() * au01 + u[i, 1, 1].conjugate() * au11
            g00 = u[i, 0, 0].conjugate() * u[i, 0, 0] + u[i, 1, 0].conjugate() * u[i, 1, 0] - 1.0
            g01 = u[i, 0, 0].conjugate() * u[i, 0, 1] + u[i, 1, 0].conjugate() * u[i, 1, 1]
            g11 = u[i, 0, 1].conjugate() * u[i, 0, 1] + u[i, 1, 1].conjugate() * u[i, 1, 1] - 1.0
            defect[i] = sqrt(g00.real * g00.real + g00.imag * g00.imag
                             + 2.0 * (g01.real * g01.real + g01.imag * g01.imag)
                             + g11.real * g11.real + g11.imag * g11.imag)
            x01 = abs(m01)
            x10 = abs(m10)
            off[i] = x01 if x01 >= x10 else x10
            d1[i] = m00.real
            d2[i] = m11.real
    return defect_a, off_a, d1_a, d2_a


def step_jumps(U):
    cdef const double complex[:, :, ::1] u = np.ascontiguousarray(U, dtype=np.complex128)
    cdef Py_ssize_t n = u.shape[0], i, r, c
    out_a = np.zeros(max(n - 1, 0))
    cdef double[::1] out = out_a
    cdef double complex d
    cdef double acc
    with nogil:
        for i in range(n - 1):
            acc = 0.0
            for r in range(2):
                for c in range(2):
                    d = u[i + 1, r, c] - u[i, r, c]
                    acc += d.real * d.real + d.imag * d.imag
            out[i] = sqrt(acc)
    return out_a
