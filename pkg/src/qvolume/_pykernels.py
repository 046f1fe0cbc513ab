"""Pure-numpy sampler kernels; reference backend.

The compiled backend (``_kernels``) implements the same three entry
points with identical random-number consumption, so a fixed (seed,
stream_id) yields the same accept/reject decisions on either backend
and trajectories that agree to floating-point roundoff (summation
order differs between BLAS and the compiled loops, so bit-for-bit
equality is only guaranteed within one backend):

* hit-and-run step: d normals for the direction, then one uniform per
  rejection draw, all from the stream's dedicated substreams;
* ball sample: d normals then exactly one uniform.

Mode 0 collects accepted coordinate vectors, mode 1 classifies them
in place (hit-and-run: positivity of the partial transpose; ball
sampling: counts instead of coordinates).
"""

import numpy as np

from .errors import DegenerateDirectionError

BACKEND_NAME = "python"

_MIN_DIRECTION_NORM = 1e-300
_BOUND_FLOOR = 1e-12
_MAX_DEGENERATE = 1000
_MULLER_CHUNK = 8192
# roundoff guard for the Newton recursion's cancelling terms
_NEWTON_NOISE = 1e-15


def _psd_ok(m: np.ndarray, tol: float) -> bool:
    """Newton-identity PSD check of one unit-trace Hermitian matrix.

    Power traces come from matrix powers up to ceil(n/2) through
    Hilbert-Schmidt pairings; bails out on the first negative
    coefficient like the compiled kernel.
    """
    n = m.shape[0]
    n_half = (n + 1) // 2
    powers = [m]
    for _ in range(1, n_half):
        powers.append(powers[-1] @ m)
    p = np.empty(n)
    p[0] = np.trace(m).real
    for k in range(2, n + 1):
        hi, lo = (k + 1) // 2, k // 2
        p[k - 1] = np.vdot(powers[lo - 1], powers[hi - 1]).real
    c = np.zeros(n + 1)
    c[0] = 1.0
    for k in range(1, n + 1):
        acc = 0.0
        mag = 0.0
        for i in range(1, k + 1):
            term = p[i - 1] * c[k - i]
            acc += term if i % 2 == 1 else -term
            mag += abs(term)
        c[k] = acc / k
        # tol slack scales with |c_{k-1}| (the coefficient's sensitivity
        # to the smallest eigenvalue), plus a roundoff guard on the
        # cancelling recursion terms; an absolute threshold would fatten
        # the body at large n where coefficients shrink like eigenvalue
        # products
        if c[k] < -(tol * abs(c[k - 1]) + _NEWTON_NOISE * mag) / k:
            return False
    return True


def _build_state(gens, coords):
    n = gens.shape[1]
    m = np.tensordot(coords, gens, axes=(0, 0))
    m += np.eye(n) / n
    return m


def _segment_bound(m_cur, d_mat, b0, tol, sign):
    """Largest-step search along ``sign * direction`` from the current state.

    Starts at b0; if still a state there, doubles once and returns.
    Otherwise halves until a state is found and returns the last failing
    step, or 0.0 once the floor is crossed.
    """
    b = b0
    if _psd_ok(m_cur + (sign * b) * d_mat, tol):
        return 2.0 * b
    while True:
        b_prev = b
        b *= 0.5
        if b < _BOUND_FLOOR:
            return 0.0
        if _psd_ok(m_cur + (sign * b) * d_mat, tol):
            return b_prev


def run_chain(gens, pt_gens, b0, n_steps, mode, psd_tol, stream,
              start_coords, rebuild_every=8192):
    """Hit-and-run chain over the state body in generator coordinates.

    Returns (out, final_coords, diagnostics) where out is the (n_steps, d)
    coordinate record (mode 0) or a uint8 PPT-bit vector (mode 1).
    """
    gens = np.ascontiguousarray(gens, dtype=complex)
    d, n, _ = gens.shape
    a = np.array(start_coords, dtype=float)
    m_cur = _build_state(gens, a)
    if mode == 0:
        out = np.empty((n_steps, d))
    else:
        pt_gens = np.ascontiguousarray(pt_gens, dtype=complex)
        out = np.empty(n_steps, dtype=np.uint8)
    rejection_draws = 0
    degenerate = 0
    consec = 0
    for step in range(n_steps):
        while True:
            v = stream.take_normals(d)
            norm = np.linalg.norm(v)
            if norm < _MIN_DIRECTION_NORM:
                degenerate += 1
                consec += 1
                if consec > _MAX_DEGENERATE:
                    raise DegenerateDirectionError(
                        f"{consec} degenerate directions in a row")
                continue
            x = v / norm
            d_mat = np.tensordot(x, gens, axes=(0, 0))
            b_plus = _segment_bound(m_cur, d_mat, b0, psd_tol, 1.0)
            b_minus = _segment_bound(m_cur, d_mat, b0, psd_tol, -1.0)
            if b_plus == 0.0 and b_minus == 0.0:
                degenerate += 1
                consec += 1
                if consec > _MAX_DEGENERATE:
                    raise DegenerateDirectionError(
                        f"{consec} degenerate directions in a row")
                continue
            consec = 0
            break
        while True:
            u = stream.take_uniform()
            t = -b_minus + u * (b_plus + b_minus)
            rejection_draws += 1
            m_cand = m_cur + t * d_mat
            if _psd_ok(m_cand, psd_tol):
                break
        a = a + t * x
        m_cur = m_cand
        if mode == 0:
            out[step] = a
        else:
            out[step] = _psd_ok(_build_state(pt_gens, a), psd_tol)
        if (step + 1) % rebuild_every == 0:
            m_cur = _build_state(gens, a)
    diag = {
        "rejection_draws": rejection_draws,
        "degenerate_directions": degenerate,
    }
    return out, a, diag


def muller_phase(gens, pt_gens, r, n_samples, mode, psd_tol, stream):
    """Uniform ball sampling of radius r around the maximally mixed state.

    Mode 1 returns (n_states, n_ppt); mode 0 returns (n_states, coords)
    with the coordinates of the samples that landed inside the state body.
    """
    gens = np.ascontiguousarray(gens, dtype=complex)
    d = gens.shape[0]
    n_states = 0
    n_ppt = 0
    kept = []
    remaining = n_samples
    while remaining > 0:
        chunk = min(remaining, _MULLER_CHUNK)
        v = stream.take_normals(chunk * d).reshape(chunk, d)
        u = stream.take_uniforms(chunk)
        norms = np.linalg.norm(v, axis=1)
        valid = norms >= _MIN_DIRECTION_NORM
        scale = np.zeros(chunk)
        scale[valid] = r * u[valid] ** (1.0 / d) / norms[valid]
        coords = scale[:, None] * v
        from .positivity import _batch_newton_bits
        state_bits = _batch_newton_bits(
            _build_batch(gens, coords), psd_tol) & valid
        n_states += int(state_bits.sum())
        if mode == 1:
            if state_bits.any():
                ppt_bits = _batch_newton_bits(
                    _build_batch(pt_gens, coords[state_bits]), psd_tol)
                n_ppt += int(ppt_bits.sum())
        else:
            if state_bits.any():
                kept.append(coords[state_bits])
        remaining -= chunk
    if mode == 1:
        return n_states, n_ppt
    coords = np.concatenate(kept) if kept else np.empty((0, d))
    return n_states, coords


def _build_batch(gens, coords):
    n = gens.shape[1]
    m = np.tensordot(coords, gens, axes=(1, 0))
    m += np.eye(n) / n
    return m


def psd_bits(gens, coords, tol):
    """PSD classification of a (B, d) coordinate batch (uint8)."""
    from .positivity import psd_bits_batch
    return psd_bits_batch(np.asarray(gens), coords, tol).astype(np.uint8)
