"""numba kernels."""

import math

import numpy as np
from numba import njit, prange

from ._common import (
    GOLDEN_GAMMA,
    MIX_A,
    MIX_B,
    RENORM_EVERY,
    RESYNC_EVERY,
    SPLITTER,
    TWO_M53,
)

_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)
_U1 = np.uint64(1)
_U0 = np.uint64(0)


@njit(inline="always")
def _mix64(z):
    z = (z ^ (z >> _U30)) * MIX_A
    z = (z ^ (z >> _U27)) * MIX_B
    return z ^ (z >> _U31)


@njit(inline="always")
def _word(seed, k):
    return _mix64(seed + np.uint64(k) * GOLDEN_GAMMA)


@njit(inline="always")
def _two_prod_err(a, b, p):
    # Dekker: exact a*b - p for p = fl(a*b)
    c = SPLITTER * a
    ah = c - (c - a)
    al = a - ah
    c = SPLITTER * b
    bh = c - (c - b)
    bl = b - bh
    return ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit(inline="always")
def _direct_phase(k, t):
    p = k * t
    e = _two_prod_err(float(k), t, p)
    c = math.cos(p)
    s = math.sin(p)
    return c - e * s, s + e * c


@njit(cache=True, parallel=True)
def uniform_sign_block(seeds, k0, count):
    """Stream words for k = k0 .. k0+count-1 of each seed, as (U, sign).

    U = ((word >> 11) + 1) * 2**-53 in (0, 1]; sign = -1 where bit 0 is set.
    """
    b = seeds.size
    u = np.empty((b, count))
    sg = np.empty((b, count))
    for i in prange(b):
        seed = seeds[i]
        for j in range(count):
            z = _word(seed, k0 + j)
            u[i, j] = (float(z >> _U11) + 1.0) * TWO_M53
            sg[i, j] = -1.0 if z & _U1 else 1.0
    return u, sg


@njit(cache=True)
def pairwise_block(seeds, m, k0, count):
    """X_k = prod_{i in bits(k)} B_i with B_i the sign of stream word i."""
    b = seeds.size
    out = np.empty((b, count))
    for i in range(b):
        seed = seeds[i]
        mask = _U0
        for q in range(1, m + 1):
            if _word(seed, q) & _U1:
                mask |= _U1 << np.uint64(q - 1)
        for j in range(count):
            v = np.uint64(k0 + j) & mask
            par = 0
            while v:
                v &= v - _U1
                par ^= 1
            out[i, j] = -1.0 if par else 1.0
    return out


@njit(cache=True)
def scan(xs, t, ck):
    """Prefix scan of sum_k e^{ikt} x_k with exact running max of |S_k|^2."""
    n = xs.size
    ta = abs(t)
    wr = math.cos(ta)
    wi = math.sin(ta)
    zr = wr
    zi = wi
    sr = 0.0
    si = 0.0
    best = 0.0
    nck = ck.size
    out_r = np.zeros(nck)
    out_i = np.zeros(nck)
    ci = 0
    renorm = 0
    resync = 0
    for k in range(1, n + 1):
        if k > 1:
            renorm += 1
            resync += 1
            if resync == RESYNC_EVERY:
                zr, zi = _direct_phase(k, ta)
                resync = 0
                renorm = 0
            elif renorm == RENORM_EVERY:
                inv = 1.0 / math.sqrt(zr * zr + zi * zi)
                zr *= inv
                zi *= inv
                renorm = 0
        x = xs[k - 1]
        sr += zr * x
        si += zi * x
        mm = sr * sr + si * si
        if mm > best:
            best = mm
        while ci < nck and ck[ci] == k:
            out_r[ci] = sr
            out_i[ci] = si
            ci += 1
        zr, zi = zr * wr - zi * wi, zr * wi + zi * wr
    if t < 0:
        si = -si
        for j in range(nck):
            out_i[j] = -out_i[j]
    return sr, si, best, out_r, out_i


@njit(cache=True)
def phase_block(ta, k0, count, zr, zi):
    """Continue the scan's phase recurrence: (zr, zi) is e^{i k0 ta}.

    Returns e^{ik ta} for k = k0 .. k0+count-1 and the phase at k0+count,
    bit-identical to what ``scan`` uses at the same k.
    """
    wr = math.cos(ta)
    wi = math.sin(ta)
    out = np.empty(count, dtype=np.complex128)
    for j in range(count):
        k = k0 + j
        if k > 1:
            if (k - 1) % RESYNC_EVERY == 0:
                zr, zi = _direct_phase(k, ta)
            elif (k - 1) % RENORM_EVERY == 0:
                inv = 1.0 / math.sqrt(zr * zr + zi * zi)
                zr *= inv
                zi *= inv
        out[j] = complex(zr, zi)
        zr, zi = zr * wr - zi * wi, zr * wi + zi * wr
    return out, zr, zi


@njit(cache=True, parallel=True)
def accumulate_rows(xs, ph, sr, si, hit, thr):
    """Advance each unfinished row's prefix sum over one block; flag |S_k| > thr."""
    thr2 = thr * thr * (1.0 - 1e-12)
    pr = ph.real.copy()
    pi = ph.imag.copy()
    for i in prange(xs.shape[0]):
        if hit[i]:
            continue
        a = sr[i]
        b = si[i]
        for j in range(xs.shape[1]):
            x = xs[i, j]
            a += pr[j] * x
            b += pi[j] * x
            mm = a * a + b * b
            if mm > thr2 and math.sqrt(mm) > thr:
                hit[i] = 1
                break
        sr[i] = a
        si[i] = b


@njit(cache=True, parallel=True)
def grid_max_sq(xs, M):
    """Per-node max_k |S_k(t_j)|^2 and |S_n(t_j)|^2 on t_j = -pi + 2 pi j / M.

    e^{i k t_j} = e^{i pi k (2j - M) / M}, read from a table of the 2M-th roots
    of unity so no phase error accumulates along k.
    """
    n = xs.size
    two_m = 2 * M
    rr = np.empty(two_m)
    ri = np.empty(two_m)
    for q in range(two_m):
        ang = math.pi * q / M
        rr[q] = math.cos(ang)
        ri[q] = math.sin(ang)
    maxsq = np.zeros(M)
    endsq = np.zeros(M)
    for j in prange(M):
        step = (2 * j - M) % two_m
        idx = 0
        sr = 0.0
        si = 0.0
        best = 0.0
        for k in range(n):
            idx += step
            if idx >= two_m:
                idx -= two_m
            x = xs[k]
            sr += rr[idx] * x
            si += ri[idx] * x
            mm = sr * sr + si * si
            if mm > best:
                best = mm
        maxsq[j] = best
        endsq[j] = sr * sr + si * si
    return maxsq, endsq


@njit(cache=True, parallel=True)
def enumerate_prefix_max(support, probs, ph_r, ph_i):
    """max_k |S_k| and probability for every outcome tuple, lexicographic order.

    Subtrees under each first coordinate fill disjoint output slices.
    """
    s = support.size
    n = ph_r.size
    sub = s ** (n - 1)
    values = np.empty(s * sub)
    masses = np.empty(s * sub)
    for d0 in prange(s):
        digits = np.zeros(n, dtype=np.int64)
        digits[0] = d0
        sr = np.zeros(n + 1)
        si = np.zeros(n + 1)
        mx = np.zeros(n + 1)
        pm = np.ones(n + 1)
        lev0 = 0
        base = d0 * sub
        for leaf in range(sub):
            for lev in range(lev0, n):
                d = digits[lev]
                v = support[d]
                sr[lev + 1] = sr[lev] + ph_r[lev] * v
                si[lev + 1] = si[lev] + ph_i[lev] * v
                mag = math.sqrt(sr[lev + 1] ** 2 + si[lev + 1] ** 2)
                mx[lev + 1] = mag if mag > mx[lev] else mx[lev]
                pm[lev + 1] = pm[lev] * probs[d]
            values[base + leaf] = mx[n]
            masses[base + leaf] = pm[n]
            lev = n - 1
            while lev >= 1:
                digits[lev] += 1
                if digits[lev] < s:
                    break
                digits[lev] = 0
                lev -= 1
            lev0 = lev
    return values, masses


@njit(cache=True)
def grouped_sums(values, masses, rel_tol):
    """Merge sorted values whose consecutive gaps are within rel_tol.

    Returns the first value of each group and its Neumaier-compensated mass.
    """
    n = values.size
    reps = np.empty(n)
    tot = np.empty(n)
    g = -1
    acc = 0.0
    comp = 0.0
    for i in range(n):
        v = values[i]
        if i == 0 or v - values[i - 1] > rel_tol * max(1.0, abs(values[i - 1])):
            if g >= 0:
                tot[g] = acc + comp
            g += 1
            reps[g] = v
            acc = 0.0
            comp = 0.0
        w = masses[i]
        s = acc + w
        if abs(acc) >= abs(w):
            comp += (acc - s) + w
        else:
            comp += (w - s) + acc
        acc = s
    if g >= 0:
        tot[g] = acc + comp
    return reps[: g + 1].copy(), tot[: g + 1].copy()
