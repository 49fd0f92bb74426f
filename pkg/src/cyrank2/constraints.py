"""Degree-level constraint predicates used to prune candidate gradings.

Every predicate works on degree data only: it asks which monomials of
degree mu exist, never which ones a particular relation actually uses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .gitfan import Chamber, effective_cone, moving_cone
from .grading import DegreeMatrix, GradingGroup, Weight, det2, generates_group, is_primitive, same_ray, subgroup_index


@dataclass(frozen=True)
class ConstraintReport:
    name: str
    holds: bool
    witness: dict | None = None
    applicable: bool = True

    def to_json(self) -> dict:
        return {"name": self.name, "holds": self.holds, "applicable": self.applicable,
                "witness": self.witness}


def _as_weight(w, t: int) -> Weight:
    if isinstance(w, Weight):
        return w
    return Weight.make(w, 0, t)


def positive_functional(Q: DegreeMatrix) -> tuple[int, int]:
    """Integer functional strictly positive on every nonzero free part."""
    eff = effective_cone(Q)
    if eff.dim == 1:
        return eff.rays[0]
    p, q = eff.rays
    # det(p, x) + det(x, q) is positive on the pointed cone minus the origin
    return (q[1] - p[1], p[0] - q[0])


def monomials_of_degree(Q: DegreeMatrix, w, support: Iterable[int] | None = None) -> list[tuple[int, ...]]:
    """All exponent vectors nu >= 0 with support in ``support`` and Q(nu) = w."""
    t = Q.t
    w = _as_weight(w, t)
    idx = sorted(range(Q.r) if support is None else set(support))
    if not idx:
        return [tuple([0] * Q.r)] if w.u == (0, 0) and w.zeta % t == 0 else []
    phi = positive_functional(Q)
    val = [phi[0] * Q.weights[i].u[0] + phi[1] * Q.weights[i].u[1] for i in idx]
    target = phi[0] * w.u[0] + phi[1] * w.u[1]
    if target < 0 or any(v <= 0 for v in val):
        return []
    out = []
    nu = [0] * Q.r
    ws = [Q.weights[i] for i in idx]

    def rec(k, rx, ry, rz, budget):
        if k == len(idx) - 1:
            wk = ws[k]
            # remaining degree must be a non-negative multiple of w_k
            if budget % val[k]:
                return
            n = budget // val[k]
            if n * wk.u[0] == rx and n * wk.u[1] == ry and (n * wk.zeta - rz) % t == 0:
                nu[idx[k]] = n
                out.append(tuple(nu))
                nu[idx[k]] = 0
            return
        wk = ws[k]
        for n in range(budget // val[k] + 1):
            nu[idx[k]] = n
            rec(k + 1, rx - n * wk.u[0], ry - n * wk.u[1], rz - n * wk.zeta, budget - n * val[k])
        nu[idx[k]] = 0

    rec(0, w.u[0], w.u[1], w.zeta, target)
    return sorted(out)


def support_mask(nu: Sequence[int]) -> int:
    m = 0
    for i, x in enumerate(nu):
        if x:
            m |= 1 << i
    return m


class Fiber:
    """Monomials of one degree, with fast counting per variable subset."""

    def __init__(self, Q: DegreeMatrix, w):
        self.Q = Q
        self.monomials = monomials_of_degree(Q, w)
        self.masks = [support_mask(m) for m in self.monomials]

    def count(self, subset_mask: int, limit: int | None = None) -> int:
        c = 0
        for m in self.masks:
            if m & ~subset_mask == 0:
                c += 1
                if limit is not None and c >= limit:
                    return c
        return c

    def on(self, subset: Iterable[int]) -> list[tuple[int, ...]]:
        mask = sum(1 << i for i in subset)
        return [m for m, s in zip(self.monomials, self.masks) if s & ~mask == 0]


def is_weakly_calabi_yau(Q: DegreeMatrix, mu) -> bool:
    mu = _as_weight(mu, Q.t)
    total = Q.total()
    return total.u == mu.u and total.zeta % Q.t == mu.zeta % Q.t


def mu_in_window(Q: DegreeMatrix, mu) -> bool:
    """mu lies in cone(w_3, w_{r-2}) (closed)."""
    mu = _as_weight(mu, Q.t)
    if Q.r < 5:
        return False
    a, b = Q.free[2], Q.free[Q.r - 3]
    return det2(a, mu.u) >= 0 and det2(mu.u, b) >= 0 and det2(a, b) >= 0


def _chamber_covered(Q: DegreeMatrix, chamber: Chamber, i: int, j: int) -> bool:
    a, b = chamber.cone.rays
    return det2(Q.free[i], a) >= 0 and det2(b, Q.free[j]) >= 0 and det2(Q.free[i], Q.free[j]) > 0


def lemma_two_faces(Q: DegreeMatrix, mu, chamber: Chamber, i: int, j: int) -> ConstraintReport:
    if not _chamber_covered(Q, chamber, i, j):
        return ConstraintReport("twofaces", False, {"error": "chamber not inside cone(w_i, w_j)",
                                                    "i": i, "j": j}, applicable=False)
    if generates_group(Q.group, [Q.weights[i], Q.weights[j]]):
        return ConstraintReport("twofaces", True)
    mons = monomials_of_degree(Q, mu, [i, j])
    if len(mons) == 1:
        return ConstraintReport("twofaces", True, {"monomial": list(mons[0])})
    return ConstraintReport("twofaces", False, {"i": i, "j": j, "monomials": [list(m) for m in mons],
                                                 "index": subgroup_index(Q.group, [Q.weights[i], Q.weights[j]])})


def _position(Q: DegreeMatrix, chamber: Chamber, k: int) -> str:
    if k in chamber.lambda_minus:
        return "-"
    if k in chamber.lambda_plus:
        return "+"
    return "o"


def three_generate_hypothesis(Q: DegreeMatrix, mu, chamber: Chamber, i: int, j: int, k: int) -> str | None:
    """Which of the three hypotheses of the triple lemma applies, if any."""
    if not i < j < k:
        return None
    pi, pj, pk = (_position(Q, chamber, x) for x in (i, j, k))
    if pi == "-" and pj == "-" and pk == "+":
        if not any(m[k] and sum(m) == m[k] for m in monomials_of_degree(Q, mu, [k])):
            return "i"
    if pi == "-" and pj == "+" and pk == "+":
        if not any(m[i] and sum(m) == m[i] for m in monomials_of_degree(Q, mu, [i])):
            return "ii"
    if pi == "-" and pj == "o" and pk == "+":
        return "iii"
    return None


def lemma_three_generate(Q: DegreeMatrix, mu, chamber: Chamber, i: int, j: int, k: int) -> ConstraintReport:
    hyp = three_generate_hypothesis(Q, mu, chamber, i, j, k)
    if hyp is None:
        return ConstraintReport("threegenerate", False, {"error": "no hypothesis applies",
                                                         "triple": [i, j, k]}, applicable=False)
    ws = [Q.weights[x] for x in (i, j, k)]
    if not generates_group(Q.group, ws):
        return ConstraintReport("threegenerate", False, {"triple": [i, j, k], "hypothesis": hyp,
                                                         "index": subgroup_index(Q.group, ws)})
    if hyp == "iii":
        order = subgroup_index(Q.group, [Q.weights[i], Q.weights[k]])
        pure = [m[j] for m in monomials_of_degree(Q, mu, [j])]
        good = [l for l in pure if l > 0 and order and l % order == 0]
        if not good:
            return ConstraintReport("threegenerate", False, {"triple": [i, j, k], "hypothesis": hyp,
                                                             "order": order, "powers": pure})
        return ConstraintReport("threegenerate", True, {"hypothesis": hyp, "power": good[0]})
    return ConstraintReport("threegenerate", True, {"hypothesis": hyp})


def pure_powers(Q: DegreeMatrix, mu, i: int) -> list[int]:
    """Exponents l with l * w_i = mu, torsion included."""
    return [m[i] for m in monomials_of_degree(Q, mu, [i]) if m[i] > 0]


def lemma_ray_power(Q: DegreeMatrix, mu, i: int) -> ConstraintReport:
    mu = _as_weight(mu, Q.t)
    if not same_ray(Q.free[i], mu.u):
        return ConstraintReport("raypower", False, {"error": "w_i not on the ray through mu"},
                                applicable=False)
    ls = [l for l in pure_powers(Q, mu, i) if l >= 2]
    if ls:
        return ConstraintReport("raypower", True, {"l": ls[0]})
    return ConstraintReport("raypower", False, {"i": i})


def lemma_combminray(Q: DegreeMatrix, mu) -> ConstraintReport:
    mu = _as_weight(mu, Q.t)
    eff, mov = effective_cone(Q), moving_cone(Q)
    if eff != mov or not eff.contains_interior(mu.u):
        return ConstraintReport("combminray", False, {"error": "needs Mov = Eff and mu interior"},
                                applicable=False)
    u1, ur = Q.free[0], Q.free[-1]
    if det2(u1, ur) != 1:
        return ConstraintReport("combminray", False, {"det": det2(u1, ur)})
    for i, u in enumerate(Q.free):
        if eff.on_boundary(u) and not is_primitive(u):
            return ConstraintReport("combminray", False, {"non_primitive": i})
    for i, u in enumerate(Q.free):
        if eff.contains_interior(u):
            if u == (u1[0] + ur[0], u1[1] + ur[1]):
                continue
            if not pure_powers(Q, mu, i):
                return ConstraintReport("combminray", False, {"interior_without_power": i})
    return ConstraintReport("combminray", True)


def lemma_w4_on_rho2(Q: DegreeMatrix, mu) -> ConstraintReport:
    """If w_2 = w_3 and mu lies on their ray then w_4 lies there too."""
    mu = _as_weight(mu, Q.t)
    if Q.r < 4 or Q.weights[1] != Q.weights[2] or not same_ray(Q.free[1], mu.u):
        return ConstraintReport("w4onrho2", True, applicable=False)
    ok = same_ray(Q.free[3], Q.free[1])
    return ConstraintReport("w4onrho2", ok, None if ok else {"w4": list(Q.free[3])})


def lemma_two_on_one_ray(u: Sequence[int], w1: Sequence[int], w2: Sequence[int]) -> ConstraintReport:
    """If u, w1, w2 generate Z^2 with w1, w2 on one ray, u is primitive and completes a basis."""
    from math import gcd

    g = 0
    for a, b in ((u, w1), (u, w2), (w1, w2)):
        g = gcd(g, abs(det2(a, b)))
    if g != 1 or det2(w1, w2) != 0:
        return ConstraintReport("2on1ray", True, applicable=False)
    from .grading import primitive

    w = primitive(w1)
    ok = abs(det2(u, w)) == 1 and is_primitive(u)
    return ConstraintReport("2on1ray", ok, None if ok else {"u": list(u), "w": list(w)})


# --- torsion bounds -------------------------------------------------------

def _divisors(n: int) -> set[int]:
    n = abs(n)
    return {d for d in range(1, n + 1) if n % d == 0}


def torsion_bound(Q: DegreeMatrix, mu, chambers: Sequence[Chamber] | None = None,
                  t_max: int = 12) -> tuple[set[int], list[ConstraintReport]]:
    """Torsion orders in 1..t_max not excluded by the torsion lemmas.

    Only free parts are used.  Generating triples come from the triple
    lemma, monomials of degree mu from the two-variable lemma, and the
    bounds from the torsion lemmas, exactly as in the case analysis.
    """
    from .gitfan import chambers as all_chambers

    mu = _as_weight(mu, Q.t)
    free = DegreeMatrix(GradingGroup(1), tuple(Weight(w.u, 0) for w in Q.weights))
    mu0 = Weight(mu.u, 0)
    allowed = set(range(1, t_max + 1))
    reports = []
    chs = list(chambers) if chambers is not None else all_chambers(free, mu0)
    for ch in chs:
        if not ch.cone.contains(mu.u):
            reports.append(ConstraintReport("torsfree", True, {"chamber": ch.cone.to_json()}))
            return {1}, reports
    us = free.free
    r = free.r
    for ch in chs:
        triples = [(i, j, k) for i in range(r) for j in range(i + 1, r) for k in range(j + 1, r)
                   if three_generate_hypothesis(free, mu0, ch, i, j, k)]
        for tri in triples:
            for a, b in ((0, 1), (0, 2), (1, 2)):
                i, j = tri[a], tri[b]
                k = tri[3 - a - b]
                if abs(det2(us[i], us[j])) != 1 or not _cone_meets(us[i], us[j], ch, ordered=False):
                    continue
                for x in (i, j):
                    if not _cone_meets(us[x], us[k], ch, ordered=False):
                        continue
                    for m in monomials_of_degree(free, mu0, [x, k]):
                        if m[k] > 0:
                            allowed &= _divisors(m[k])
                            reports.append(ConstraintReport("rho2torsbound", True,
                                                            {"triple": list(tri), "l": m[k]}))
    if det2(us[0], us[-1]) == 1:
        for k in range(r):
            l = _multiple(us[k], mu.u)
            if l is not None:
                allowed &= _divisors(l)
                reports.append(ConstraintReport("torsboundpower", True, {"k": k, "l": l}))
        if any(us[i] == us[j] for i in range(1, r - 1) for j in range(i + 1, r - 1)):
            allowed -= {2, 4}
            reports.append(ConstraintReport("tors24", True))
    allowed.add(1)
    return allowed, reports


def _multiple(u, v) -> int | None:
    """l > 0 with v = l * u, if any."""
    for a, b in zip(u, v):
        if a != 0:
            if b % a:
                return None
            l = b // a
            return l if l > 0 and (l * u[0], l * u[1]) == tuple(v) else None
    return None


def _cone_meets(a, b, ch: Chamber, ordered: bool = True) -> bool:
    """The 2-dim cone spanned by a and b meets the chamber interior."""
    if not ordered and det2(a, b) < 0:
        a, b = b, a
    if det2(a, b) <= 0:
        return False
    p, q = ch.cone.rays
    return det2(a, q) > 0 and det2(p, b) > 0


# --- sum-product inequality ----------------------------------------------

def solve_sum_product(n: int, bound: int = 64) -> list[tuple]:
    """Ascending solutions of x_1 ... x_n <= x_1 + ... + x_n over positive integers.

    A trailing ``'*'`` marks a family where the last entry is arbitrary.
    Families are detected as sequences whose first n-1 entries are all 1.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    out: list[tuple] = []
    ones = tuple([1] * (n - 1))
    out.append(ones + ("*",))

    def rec(prefix, start):
        if len(prefix) == n:
            if tuple(prefix[: n - 1]) == ones:
                return
            p = 1
            for x in prefix:
                p *= x
            if p <= sum(prefix):
                out.append(tuple(prefix))
            return
        for x in range(start, bound + 1):
            # product grows faster than sum; stop once even minimal completion fails
            rest = n - len(prefix) - 1
            p = 1
            for y in prefix:
                p *= y
            if p * x * x ** rest > sum(prefix) + x * (rest + 1):
                break
            rec(prefix + [x], x)

    rec([], 1)
    return out
