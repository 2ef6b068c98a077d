"""Pure-numpy kernels, selected with ``DFTLAB_BACKEND=numpy``.

Same signatures and contracts as the numba kernels. Stream words are bitwise
identical across backends; phases here are evaluated directly instead of by
recurrence, so scan results agree with the numba path to rounding only.
"""

import itertools
import math

import numpy as np

from ._common import GOLDEN_GAMMA, MIX_A, MIX_B, SPLITTER, TWO_M53

CHUNK = 1 << 16
BLOCK_CELLS = 1 << 21


def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * MIX_A
    z = (z ^ (z >> np.uint64(27))) * MIX_B
    return z ^ (z >> np.uint64(31))


def _words(seeds, ks):
    return _mix64(seeds[:, None] + ks[None, :] * GOLDEN_GAMMA)


def _direct_phases(ks, t):
    k = ks.astype(np.float64)
    p = k * t
    c = SPLITTER * k
    kh = c - (c - k)
    kl = k - kh
    c = SPLITTER * t
    th = c - (c - t)
    tl = t - th
    e = ((kh * th - p) + kh * tl + kl * th) + kl * tl
    cs = np.cos(p)
    sn = np.sin(p)
    return cs - e * sn, sn + e * cs


def uniform_sign_block(seeds, k0, count):
    z = _words(np.asarray(seeds, dtype=np.uint64), np.arange(k0, k0 + count, dtype=np.uint64))
    u = ((z >> np.uint64(11)).astype(np.float64) + 1.0) * TWO_M53
    sg = 1.0 - 2.0 * (z & np.uint64(1)).astype(np.float64)
    return u, sg


def pairwise_block(seeds, m, k0, count):
    seeds = np.asarray(seeds, dtype=np.uint64)
    w = _words(seeds, np.arange(1, m + 1, dtype=np.uint64))
    bits = (w & np.uint64(1)) << np.arange(m, dtype=np.uint64)[None, :]
    masks = np.bitwise_or.reduce(bits, axis=1)
    ks = np.arange(k0, k0 + count, dtype=np.uint64)
    par = np.bitwise_count(ks[None, :] & masks[:, None]) & 1
    return 1.0 - 2.0 * par.astype(np.float64)


def scan(xs, t, ck):
    n = xs.size
    ta = abs(t)
    sr = 0.0
    si = 0.0
    best = 0.0
    out_r = np.zeros(ck.size)
    out_i = np.zeros(ck.size)
    for k0 in range(1, n + 1, CHUNK):
        ks = np.arange(k0, min(n, k0 + CHUNK - 1) + 1, dtype=np.int64)
        pr, pi = _direct_phases(ks, ta)
        x = xs[k0 - 1 : k0 - 1 + ks.size]
        cr = sr + np.cumsum(pr * x)
        ci = si + np.cumsum(pi * x)
        best = max(best, float(np.max(cr * cr + ci * ci)))
        sel = (ck >= ks[0]) & (ck <= ks[-1])
        out_r[sel] = cr[ck[sel] - ks[0]]
        out_i[sel] = ci[ck[sel] - ks[0]]
        sr = float(cr[-1])
        si = float(ci[-1])
    if t < 0:
        si = -si
        out_i = -out_i
    return sr, si, best, out_r, out_i


def phase_block(ta, k0, count, zr, zi):
    # direct evaluation; the carried state is accepted for interface parity only
    ks = np.arange(k0, k0 + count + 1, dtype=np.int64)
    pr, pi = _direct_phases(ks, ta)
    return pr[:-1] + 1j * pi[:-1], float(pr[-1]), float(pi[-1])


def accumulate_rows(xs, ph, sr, si, hit, thr):
    thr2 = thr * thr * (1.0 - 1e-12)
    live = np.flatnonzero(hit == 0)
    if live.size == 0:
        return
    x = xs[live]
    cr = sr[live, None] + np.cumsum(ph.real[None, :] * x, axis=1)
    ci = si[live, None] + np.cumsum(ph.imag[None, :] * x, axis=1)
    mm = cr * cr + ci * ci
    over = (mm > thr2) & (np.sqrt(mm) > thr)
    hit[live] = np.any(over, axis=1)
    sr[live] = cr[:, -1]
    si[live] = ci[:, -1]


def grid_max_sq(xs, M):
    n = xs.size
    two_m = 2 * M
    q = np.arange(two_m)
    rr = np.cos(np.pi * q / M)
    ri = np.sin(np.pi * q / M)
    maxsq = np.zeros(M)
    endsq = np.zeros(M)
    ks = np.arange(1, n + 1, dtype=np.int64)
    block = max(1, BLOCK_CELLS // max(n, 1))
    for j0 in range(0, M, block):
        js = np.arange(j0, min(M, j0 + block), dtype=np.int64)
        steps = (2 * js - M) % two_m
        idx = (steps[:, None] * ks[None, :]) % two_m
        cr = np.cumsum(rr[idx] * xs[None, :], axis=1)
        ci = np.cumsum(ri[idx] * xs[None, :], axis=1)
        mm = cr * cr + ci * ci
        maxsq[js] = mm.max(axis=1)
        endsq[js] = mm[:, -1]
    return maxsq, endsq


def enumerate_prefix_max(support, probs, ph_r, ph_i):
    s = support.size
    n = ph_r.size
    tail = 1
    while tail < n and s ** (tail + 1) * n <= BLOCK_CELLS:
        tail += 1
    head = n - tail
    suffixes = np.array(list(itertools.product(range(s), repeat=tail)), dtype=np.int64).reshape(-1, tail)
    cr_suf = np.cumsum(support[suffixes] * ph_r[head:][None, :], axis=1)
    ci_suf = np.cumsum(support[suffixes] * ph_i[head:][None, :], axis=1)
    smass = np.prod(probs[suffixes], axis=1)
    values = np.empty(s**n)
    masses = np.empty(s**n)
    pos = 0
    for prefix in itertools.product(range(s), repeat=head):
        sr = 0.0
        si = 0.0
        mx = 0.0
        pm = 1.0
        for lev, d in enumerate(prefix):
            sr += ph_r[lev] * support[d]
            si += ph_i[lev] * support[d]
            mx = max(mx, math.sqrt(sr * sr + si * si))
            pm *= probs[d]
        cr = sr + cr_suf
        ci = si + ci_suf
        mags = np.sqrt(cr * cr + ci * ci).max(axis=1)
        values[pos : pos + mags.size] = np.maximum(mags, mx)
        masses[pos : pos + mags.size] = pm * smass
        pos += mags.size
    return values, masses


def grouped_sums(values, masses, rel_tol):
    if values.size == 0:
        return values.copy(), masses.copy()
    gaps = np.diff(values) > rel_tol * np.maximum(1.0, np.abs(values[:-1]))
    starts = np.concatenate(([0], np.flatnonzero(gaps) + 1))
    ends = np.concatenate((starts[1:], [values.size]))
    tot = np.array([math.fsum(masses[a:b]) for a, b in zip(starts, ends)])
    return values[starts].copy(), tot
