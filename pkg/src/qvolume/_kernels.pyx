# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled sampler kernels.

Mirrors ``_pykernels`` exactly: same entry points, same random-number
consumption order, same positivity decisions (Newton identities with
power traces from Hilbert-Schmidt pairings of matrix powers, early exit
on the first negative coefficient).
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt, pow, fabs

from .errors import DegenerateDirectionError

cnp.import_array()

BACKEND_NAME = "cython"

DEF MAX_N = 12           # matrix dimension cap (largest family is 9)
DEF MAX_NN = 144
DEF MAX_D = 96           # coordinate dimension cap (largest family is 80)
DEF MAX_POW = 6          # ceil(MAX_N / 2)

cdef double MIN_DIRECTION_NORM = 1e-300
cdef double BOUND_FLOOR = 1e-12
cdef int MAX_DEGENERATE = 1000
cdef double NEWTON_NOISE = 1e-15


cdef class _Rand:
    """Buffered scalar access to an RngStream's normal/uniform substreams."""
    cdef object stream
    cdef double[::1] nbuf, ubuf
    cdef Py_ssize_t ncur, ucur

    def __init__(self, stream):
        self.stream = stream
        self.nbuf = stream.take_normals(0)
        self.ubuf = stream.take_uniforms(0)
        self.ncur = 0
        self.ucur = 0

    cdef double next_normal(self):
        if self.ncur >= self.nbuf.shape[0]:
            self.nbuf = self.stream.normal_block()
            self.ncur = 0
        self.ncur += 1
        return self.nbuf[self.ncur - 1]

    cdef double next_uniform(self):
        if self.ucur >= self.ubuf.shape[0]:
            self.ubuf = self.stream.uniform_block()
            self.ucur = 0
        self.ucur += 1
        return self.ubuf[self.ucur - 1]


cdef bint _psd_ok(double complex* m, int n, double tol,
                  double complex* work) noexcept:
    """PSD test via Newton identities; work must hold (MAX_POW-1)*n*n."""
    cdef int nn = n * n
    cdef int n_half = (n + 1) // 2
    cdef double complex* pw[MAX_POW]
    cdef int i, j, k, l, hi, lo
    cdef double complex acc
    cdef double p[MAX_N]
    cdef double c[MAX_N + 1]
    cdef double s, term, mag

    pw[0] = m
    for k in range(1, n_half):
        pw[k] = work + (k - 1) * nn
        # pw[k] = pw[k-1] @ m
        for i in range(n):
            for j in range(n):
                acc = 0
                for l in range(n):
                    acc = acc + pw[k - 1][i * n + l] * m[l * n + j]
                pw[k][i * n + j] = acc
    # p_1 = Tr m; p_k = <m^{k//2}, m^{(k+1)//2}>_HS
    s = 0
    for i in range(n):
        s += m[i * n + i].real
    p[0] = s
    for k in range(2, n + 1):
        hi = (k + 1) // 2
        lo = k // 2
        s = 0
        for i in range(nn):
            s += (pw[hi - 1][i].real * pw[lo - 1][i].real
                  + pw[hi - 1][i].imag * pw[lo - 1][i].imag)
        p[k - 1] = s
    c[0] = 1.0
    for k in range(1, n + 1):
        s = 0
        mag = 0
        for i in range(1, k + 1):
            term = p[i - 1] * c[k - i]
            if i % 2 == 1:
                s += term
            else:
                s -= term
            mag += fabs(term)
        c[k] = s / k
        # tol slack scales with |c_{k-1}| (the coefficient's sensitivity
        # to the smallest eigenvalue), plus a roundoff guard on the
        # cancelling recursion terms; an absolute threshold would fatten
        # the body at large n where coefficients shrink like eigenvalue
        # products
        if c[k] < -(tol * fabs(c[k - 1]) + NEWTON_NOISE * mag) / k:
            return False
    return True


cdef void _build_state(double complex* out, double complex* gens,
                       double* coords, int d, int n) noexcept:
    cdef int nn = n * n
    cdef int i, j
    cdef double a
    for j in range(nn):
        out[j] = 0
    for i in range(d):
        a = coords[i]
        for j in range(nn):
            out[j] = out[j] + a * gens[i * nn + j]
    for i in range(n):
        out[i * n + i] = out[i * n + i] + 1.0 / n


cdef void _add_scaled(double complex* out, double complex* base,
                      double complex* step, double t, int nn) noexcept:
    cdef int j
    for j in range(nn):
        out[j] = base[j] + t * step[j]


cdef double _segment_bound(double complex* m_cur, double complex* d_mat,
                           double b0, double tol, double sign, int n,
                           double complex* cand, double complex* work) noexcept:
    cdef int nn = n * n
    cdef double b = b0
    cdef double b_prev
    _add_scaled(cand, m_cur, d_mat, sign * b, nn)
    if _psd_ok(cand, n, tol, work):
        return 2.0 * b
    while True:
        b_prev = b
        b *= 0.5
        if b < BOUND_FLOOR:
            return 0.0
        _add_scaled(cand, m_cur, d_mat, sign * b, nn)
        if _psd_ok(cand, n, tol, work):
            return b_prev


def run_chain(gens, pt_gens, double b0, long n_steps, int mode,
              double psd_tol, stream, start_coords, long rebuild_every=8192):
    """Hit-and-run chain; see the fallback backend for the contract."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] g = \
        np.ascontiguousarray(gens, dtype=complex)
    cdef int d = g.shape[0]
    cdef int n = g.shape[1]
    cdef int nn = n * n
    if n > MAX_N or d > MAX_D:
        raise ValueError(f"dimensions ({n}, {d}) exceed compiled caps")
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] gpt
    cdef double complex* gpt_ptr = NULL
    if mode == 1:
        gpt = np.ascontiguousarray(pt_gens, dtype=complex)
        gpt_ptr = <double complex*> gpt.data

    cdef cnp.ndarray[cnp.float64_t, ndim=1] a_arr = \
        np.array(start_coords, dtype=float)
    cdef double* a = <double*> a_arr.data
    cdef double complex* gp = <double complex*> g.data

    cdef double complex m_cur[MAX_NN]
    cdef double complex m_cand[MAX_NN]
    cdef double complex d_mat[MAX_NN]
    cdef double complex work[(MAX_POW - 1) * MAX_NN]
    cdef double x[MAX_D]

    _build_state(m_cur, gp, a, d, n)

    cdef cnp.ndarray[cnp.float64_t, ndim=2] coords_out = None
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] bits_out = None
    if mode == 0:
        coords_out = np.empty((n_steps, d))
    else:
        bits_out = np.empty(n_steps, dtype=np.uint8)

    cdef _Rand rnd = _Rand(stream)
    cdef long rejection_draws = 0
    cdef long degenerate = 0
    cdef int consec = 0
    cdef long step
    cdef int i, j
    cdef double norm, b_plus, b_minus, u, t

    for step in range(n_steps):
        while True:
            norm = 0
            for i in range(d):
                x[i] = rnd.next_normal()
                norm += x[i] * x[i]
            norm = sqrt(norm)
            if norm < MIN_DIRECTION_NORM:
                degenerate += 1
                consec += 1
                if consec > MAX_DEGENERATE:
                    raise DegenerateDirectionError(
                        f"{consec} degenerate directions in a row")
                continue
            for i in range(d):
                x[i] /= norm
            for j in range(nn):
                d_mat[j] = 0
            for i in range(d):
                for j in range(nn):
                    d_mat[j] = d_mat[j] + x[i] * gp[i * nn + j]
            b_plus = _segment_bound(m_cur, d_mat, b0, psd_tol, 1.0, n,
                                    m_cand, work)
            b_minus = _segment_bound(m_cur, d_mat, b0, psd_tol, -1.0, n,
                                     m_cand, work)
            if b_plus == 0.0 and b_minus == 0.0:
                degenerate += 1
                consec += 1
                if consec > MAX_DEGENERATE:
                    raise DegenerateDirectionError(
                        f"{consec} degenerate directions in a row")
                continue
            consec = 0
            break
        while True:
            u = rnd.next_uniform()
            t = -b_minus + u * (b_plus + b_minus)
            rejection_draws += 1
            _add_scaled(m_cand, m_cur, d_mat, t, nn)
            if _psd_ok(m_cand, n, psd_tol, work):
                break
        for i in range(d):
            a[i] += t * x[i]
        for j in range(nn):
            m_cur[j] = m_cand[j]
        if mode == 0:
            for i in range(d):
                coords_out[step, i] = a[i]
        else:
            _build_state(m_cand, gpt_ptr, a, d, n)
            bits_out[step] = _psd_ok(m_cand, n, psd_tol, work)
        if (step + 1) % rebuild_every == 0:
            _build_state(m_cur, gp, a, d, n)

    diag = {
        "rejection_draws": rejection_draws,
        "degenerate_directions": degenerate,
    }
    if mode == 0:
        return coords_out, a_arr, diag
    return bits_out, a_arr, diag


def muller_phase(gens, pt_gens, double r, long n_samples, int mode,
                 double psd_tol, stream):
    """Uniform ball sampling; see the fallback backend for the contract."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] g = \
        np.ascontiguousarray(gens, dtype=complex)
    cdef int d = g.shape[0]
    cdef int n = g.shape[1]
    cdef int nn = n * n
    if n > MAX_N or d > MAX_D:
        raise ValueError(f"dimensions ({n}, {d}) exceed compiled caps")
    cdef double complex* gp = <double complex*> g.data
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] gpt
    cdef double complex* gpt_ptr = NULL
    if mode == 1:
        gpt = np.ascontiguousarray(pt_gens, dtype=complex)
        gpt_ptr = <double complex*> gpt.data

    cdef cnp.ndarray[cnp.float64_t, ndim=2] coords_out = None
    if mode == 0:
        coords_out = np.empty((n_samples, d))

    cdef double complex m[MAX_NN]
    cdef double complex work[(MAX_POW - 1) * MAX_NN]
    cdef double v[MAX_D]
    cdef double a[MAX_D]
    cdef _Rand rnd = _Rand(stream)
    cdef long n_states = 0, n_ppt = 0
    cdef long s
    cdef int i
    cdef double norm, u, scale
    cdef double inv_d = 1.0 / d

    for s in range(n_samples):
        norm = 0
        for i in range(d):
            v[i] = rnd.next_normal()
            norm += v[i] * v[i]
        norm = sqrt(norm)
        u = rnd.next_uniform()
        if norm < MIN_DIRECTION_NORM:
            continue
        scale = r * pow(u, inv_d) / norm
        for i in range(d):
            a[i] = scale * v[i]
        _build_state(m, gp, a, d, n)
        if not _psd_ok(m, n, psd_tol, work):
            continue
        if mode == 1:
            n_states += 1
            _build_state(m, gpt_ptr, a, d, n)
            if _psd_ok(m, n, psd_tol, work):
                n_ppt += 1
        else:
            for i in range(d):
                coords_out[n_states, i] = a[i]
            n_states += 1

    if mode == 1:
        return n_states, n_ppt
    return n_states, coords_out[:n_states].copy()


def psd_bits(gens, coords, double tol):
    """PSD classification of a (B, d) coordinate batch (uint8)."""
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] g = \
        np.ascontiguousarray(gens, dtype=complex)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] c = \
        np.ascontiguousarray(np.atleast_2d(coords), dtype=float)
    cdef int d = g.shape[0]
    cdef int n = g.shape[1]
    if n > MAX_N or d > MAX_D:
        raise ValueError(f"dimensions ({n}, {d}) exceed compiled caps")
    cdef double complex* gp = <double complex*> g.data
    cdef Py_ssize_t nb = c.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] bits = np.empty(nb, dtype=np.uint8)
    cdef double complex m[MAX_NN]
    cdef double complex work[(MAX_POW - 1) * MAX_NN]
    cdef Py_ssize_t b
    for b in range(nb):
        _build_state(m, gp, &c[b, 0], d, n)
        bits[b] = _psd_ok(m, n, tol, work)
    return bits
