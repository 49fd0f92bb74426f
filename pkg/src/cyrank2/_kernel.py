"""Compiled inner loop of the candidate search.

Works on free parts only.  Weights are indices into a point list sorted
counter-clockwise and by height, so non-decreasing index tuples are exactly
the normal-form orderings.  Mode 0 applies every test exactly for K = Z^2;
mode 1 keeps only the tests that stay necessary for every torsion order and
adds that mu lies in every chamber.
"""

from __future__ import annotations

import numba as nb
import numpy as np


@nb.njit(cache=True)
def _gcd(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return a


@nb.njit(cache=True)
def _det(ax, ay, bx, by):
    return ax * by - ay * bx


@nb.njit(cache=True)
def _pair_monomial(ux, uy, vx, vy, mx, my):
    """mu = x u + y v with integers x, y >= 0 (u, v independent)."""
    d = _det(ux, uy, vx, vy)
    if d == 0:
        return False
    na = _det(mx, my, vx, vy)
    nb_ = _det(ux, uy, mx, my)
    if d < 0:
        d, na, nb_ = -d, -na, -nb_
    return na >= 0 and nb_ >= 0 and na % d == 0 and nb_ % d == 0


@nb.njit(cache=True)
def _ray_multiple(ux, uy, mx, my):
    """l with mu = l u, or 0."""
    if _det(ux, uy, mx, my) != 0:
        return 0
    if ux != 0:
        if mx % ux:
            return 0
        l = mx // ux
    else:
        if my % uy:
            return 0
        l = my // uy
    if l <= 0 or l * ux != mx or l * uy != my:
        return 0
    return l


@nb.njit(cache=True)
def _subset_generates(U, mask):
    g = 0
    for p in range(6):
        if not (mask >> p) & 1:
            continue
        for q in range(p + 1, 6):
            if (mask >> q) & 1:
                g = _gcd(g, _det(U[p, 0], U[p, 1], U[q, 0], U[q, 1]))
    return g == 1


@nb.njit(cache=True)
def _count_capped(U, mask, mx, my, buf):
    """Number of monomials of degree mu on the subset, capped at 2."""
    W = mx + 1
    H = my + 1
    for k in range(W * H):
        buf[k] = 0
    buf[0] = 1
    for p in range(6):
        if not (mask >> p) & 1:
            continue
        ux = U[p, 0]
        uy = U[p, 1]
        # unbounded knapsack over the grid; weights have ux, uy >= 0, not both 0
        for x in range(ux, W):
            for y in range(uy, H):
                c = buf[(x - ux) * H + (y - uy)]
                if c:
                    v = buf[x * H + y] + c
                    buf[x * H + y] = 2 if v > 2 else v
    return buf[mx * H + my]


@nb.njit(cache=True)
def _image_contains(U, mask, ax, ay, bx, by):
    """cone(u_i : i in mask) contains cone(a, b) (2-dimensional)."""
    lo = -1
    hi = -1
    for p in range(6):
        if (mask >> p) & 1:
            if lo < 0:
                lo = p
            hi = p
    if lo < 0:
        return False
    if _det(U[lo, 0], U[lo, 1], U[hi, 0], U[hi, 1]) <= 0:
        return False
    return _det(U[lo, 0], U[lo, 1], ax, ay) >= 0 and _det(bx, by, U[hi, 0], U[hi, 1]) >= 0


@nb.njit(cache=True)
def _chamber_ok(U, rid, p, q, ax, ay, bx, by, mx, my, mode, buf):
    mu_in = _det(ax, ay, mx, my) >= 0 and _det(mx, my, bx, by) >= 0
    if mode == 1 and not mu_in:
        return False
    # pairs around the chamber: generate or carry exactly one monomial
    for i in range(6):
        if _det(U[i, 0], U[i, 1], ax, ay) < 0:
            continue
        for j in range(6):
            if _det(bx, by, U[j, 0], U[j, 1]) < 0:
                continue
            d = _det(U[i, 0], U[i, 1], U[j, 0], U[j, 1])
            if mode == 0 and d == 1:
                continue
            if not _pair_monomial(U[i, 0], U[i, 1], U[j, 0], U[j, 1], mx, my):
                return False
    if mu_in:
        # every pair whose cone meets the chamber interior carries a monomial
        for i in range(6):
            for j in range(i + 1, 6):
                if _det(U[i, 0], U[i, 1], U[j, 0], U[j, 1]) <= 0:
                    continue
                if _det(U[i, 0], U[i, 1], bx, by) > 0 and _det(ax, ay, U[j, 0], U[j, 1]) > 0:
                    if not _pair_monomial(U[i, 0], U[i, 1], U[j, 0], U[j, 1], mx, my):
                        return False
        # an interior weight needs a pure power divisible by det(u_i, u_k)
        for k in range(6):
            if rid[k] > p and rid[k] < q:
                l = _ray_multiple(U[k, 0], U[k, 1], mx, my)
                if l == 0:
                    return False
                for i in range(6):
                    if rid[i] > p:
                        continue
                    for j in range(6):
                        if rid[j] < q:
                            continue
                        d = _det(U[i, 0], U[i, 1], U[j, 0], U[j, 1])
                        if d > 0 and l % d:
                            return False
    # local factoriality on every relevant face
    for mask in range(1, 64):
        if not _image_contains(U, mask, ax, ay, bx, by):
            continue
        if _subset_generates(U, mask):
            continue
        c = _count_capped(U, mask, mx, my, buf)
        if mode == 0 and c != 1:
            return False
        if mode == 1 and c == 0:
            return False
    return True


@nb.njit(cache=True)
def _chambers_ok(U, rid, nr, cnt, mx, my, mode, buf):
    lo = rid[1]
    hi = rid[4]
    if lo >= hi:
        return 0
    rep = np.zeros((nr, 2), np.int64)
    for k in range(6):
        rep[rid[k], 0] = U[k, 0]
        rep[rid[k], 1] = U[k, 1]
    found = 0
    for p in range(lo, hi + 1):
        for q in range(p + 1, hi + 1):
            ax = rep[p, 0]
            ay = rep[p, 1]
            bx = rep[q, 0]
            by = rep[q, 1]
            inner = 0
            inner_on_mu = True
            for k in range(6):
                if rid[k] > p and rid[k] < q:
                    inner += 1
                    if _det(U[k, 0], U[k, 1], mx, my) != 0:
                        inner_on_mu = False
            on_a = _det(ax, ay, mx, my) == 0
            on_b = _det(bx, by, mx, my) == 0
            inside = _det(ax, ay, mx, my) > 0 and _det(mx, my, bx, by) > 0
            closed = _det(ax, ay, mx, my) >= 0 and _det(mx, my, bx, by) >= 0
            ok = False
            if on_a and cnt[p] >= 2 and inner == 0:
                ok = True
            elif on_b and cnt[q] >= 2 and inner == 0:
                ok = True
            elif inside and (inner == 0 or (inner == 1 and inner_on_mu)):
                ok = True
            elif (not closed) and inner == 0:
                ok = True
            if not ok:
                continue
            if not _chamber_ok(U, rid, p, q, ax, ay, bx, by, mx, my, mode, buf):
                return -1
            found += 1
    return found


@nb.njit(cache=True)
def search_frame(P, ray0, rayL, modes, out, maxout):
    """Fill ``out`` with index 6-tuples passing the filters; return the count.

    ``modes`` is a bit mask: bit 0 asks for the strict free tests, bit 1 for
    the torsion-compatible ones.  Column 6 of ``out`` gets the bits passed.
    """
    n = P.shape[0]
    cnt_out = 0
    U = np.zeros((6, 2), np.int64)
    rid = np.zeros(6, np.int64)
    rc = np.zeros(6, np.int64)
    ids = np.zeros(6, np.int64)
    side = 6 * (np.max(P) + 1)
    buf = np.zeros(side * side, np.int64)
    for i1 in ray0:
        for i6 in rayL:
            for i2 in range(i1, n):
                for i5 in range(i2, i6 + 1):
                    if _det(P[i2, 0], P[i2, 1], P[i5, 0], P[i5, 1]) <= 0:
                        continue
                    sx = P[i1, 0] + P[i2, 0] + P[i5, 0] + P[i6, 0]
                    sy = P[i1, 1] + P[i2, 1] + P[i5, 1] + P[i6, 1]
                    for i3 in range(i2, i5 + 1):
                        tx = sx + P[i3, 0]
                        ty = sy + P[i3, 1]
                        for i4 in range(i3, i5 + 1):
                            mx = tx + P[i4, 0]
                            my = ty + P[i4, 1]
                            # window and interior of Eff
                            if _det(P[i3, 0], P[i3, 1], mx, my) < 0:
                                continue
                            if _det(mx, my, P[i4, 0], P[i4, 1]) < 0:
                                continue
                            if _det(P[i1, 0], P[i1, 1], mx, my) <= 0 or _det(mx, my, P[i6, 0], P[i6, 1]) <= 0:
                                continue
                            ids[0] = i1
                            ids[1] = i2
                            ids[2] = i3
                            ids[3] = i4
                            ids[4] = i5
                            ids[5] = i6
                            for k in range(6):
                                U[k, 0] = P[ids[k], 0]
                                U[k, 1] = P[ids[k], 1]
                            bad = False
                            for k in range(6):
                                if _det(U[k, 0], U[k, 1], mx, my) == 0:
                                    l = _ray_multiple(U[k, 0], U[k, 1], mx, my)
                                    if l < 2:
                                        bad = True
                            if bad:
                                continue
                            # u1, u2 lie below and u5, u6 above every chamber
                            live = modes
                            for i in range(2):
                                for j in range(4, 6):
                                    if _pair_monomial(U[i, 0], U[i, 1], U[j, 0], U[j, 1], mx, my):
                                        continue
                                    live &= 1
                                    if _det(U[i, 0], U[i, 1], U[j, 0], U[j, 1]) != 1:
                                        live = 0
                            if live == 0:
                                continue
                            # almost free
                            ok = True
                            for skip in range(6):
                                if not _subset_generates(U, 63 ^ (1 << skip)):
                                    ok = False
                                    break
                            if not ok:
                                continue
                            nr = 0
                            for k in range(6):
                                if k > 0 and _det(U[k - 1, 0], U[k - 1, 1], U[k, 0], U[k, 1]) == 0:
                                    rid[k] = nr - 1
                                else:
                                    rid[k] = nr
                                    nr += 1
                            for r in range(6):
                                rc[r] = 0
                            for k in range(6):
                                rc[rid[k]] += 1
                            flags = 0
                            for m in range(2):
                                if (live >> m) & 1:
                                    if _chambers_ok(U, rid, nr, rc, mx, my, m, buf) > 0:
                                        flags |= 1 << m
                            if flags == 0:
                                continue
                            if cnt_out < maxout:
                                for k in range(6):
                                    out[cnt_out, k] = ids[k]
                                out[cnt_out, 6] = flags
                            cnt_out += 1
    return cnt_out
