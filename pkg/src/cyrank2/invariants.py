"""Invariants that tell the varieties of the table apart.

Intersection numbers are computed on the toric ambient variety of the
polynomial-ring chamber containing the ample class: nef classes give
divisor polytopes in the character lattice, and products of nef classes
are normalized mixed volumes of those polytopes.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from itertools import product
from math import comb
from typing import Sequence

from .constraints import _as_weight, monomials_of_degree
from .gitfan import Chamber, GitFanError, chamber_containing, s_chamber_containing, s_chambers
from .grading import DegreeMatrix, SpecifyingData, Weight, det2, gale_dual, weight_sum
from .polytope import PolytopeError, RationalPolytope, mixed_intersection


def graded_dimension(Q: DegreeMatrix, w) -> int:
    return len(monomials_of_degree(Q, _as_weight(w, Q.t)))


def generator_degree_dimension_tuple(Q: DegreeMatrix) -> tuple[int, tuple[int, ...]]:
    """(l, sorted dimensions) over the distinct generator degrees."""
    distinct = sorted(set((w.u, w.zeta % Q.t) for w in Q.weights))
    dims = sorted(graded_dimension(Q, Weight(u, z)) for u, z in distinct)
    return len(distinct), tuple(dims)


def generator_degrees_below_mu(Q: DegreeMatrix, mu) -> bool:
    """No monomial of a generator degree is divisible by one of degree mu.

    Then the graded pieces of S and of S/<g> agree in generator degrees.
    """
    mu = _as_weight(mu, Q.t)
    for w in Q.weights:
        rest = Weight((w.u[0] - mu.u[0], w.u[1] - mu.u[1]), (w.zeta - mu.zeta) % Q.t)
        if monomials_of_degree(Q, rest):
            return False
    return True


def anticanonical_class(Q: DegreeMatrix, mu) -> Weight:
    mu = _as_weight(mu, Q.t)
    s = weight_sum(Q.weights, Q.t)
    return Weight((s.u[0] - mu.u[0], s.u[1] - mu.u[1]), (s.zeta - mu.zeta) % Q.t)


def nef_basis(chamber: Chamber) -> tuple[tuple[int, int], tuple[int, int]]:
    if chamber.cone.dim != 2:
        raise GitFanError("chamber is not full-dimensional")
    a, b = chamber.cone.rays
    return a, b


def _preimage(Q: DegreeMatrix, u: Sequence[int]) -> list[Fraction]:
    """Some rational a with Q0(a) = u, supported on two independent weights."""
    us = Q.free
    for i in range(Q.r):
        for j in range(i + 1, Q.r):
            d = det2(us[i], us[j])
            if d:
                x = Fraction(det2(u, us[j]), d)
                y = Fraction(det2(us[i], u), d)
                a = [Fraction(0)] * Q.r
                a[i], a[j] = x, y
                return a
    raise GitFanError("weights do not span the plane")


def divisor_polytope(P: Sequence[Sequence[int]], a: Sequence) -> RationalPolytope:
    """{m : <m, v_i> >= -a_i} where v_i are the columns of P."""
    n, r = len(P), len(P[0])
    ineqs = [(tuple(P[k][i] for k in range(n)), -Fraction(a[i])) for i in range(r)]
    return RationalPolytope.from_halfspaces(ineqs, n=n)


def class_polytope(Q: DegreeMatrix, u: Sequence[int], P=None) -> RationalPolytope:
    if P is None:
        P = gale_dual(Q)
    return divisor_polytope(P, _preimage(Q, u))


def _decompose(u, n1, n2) -> tuple[Fraction, Fraction]:
    d = det2(n1, n2)
    return Fraction(det2(u, n2), d), Fraction(det2(n1, u), d)


def ambient_chamber(sd: SpecifyingData) -> Chamber:
    """The polynomial-ring chamber whose toric variety hosts X.

    If the ample class sits on a wall between two such chambers, both lie
    in the same chamber of X and either one serves.
    """
    try:
        return s_chamber_containing(sd.Q, sd.ample.u)
    except GitFanError:
        lam = chamber_containing(sd.Q, sd.mu, sd.ample.u)
        return next(s for s in s_chambers(sd.Q) if lam.cone.contains_cone(s.cone))


def nef_products(Q: DegreeMatrix, chamber: Chamber) -> list[Fraction]:
    """[n1^k n2^(4-k) for k = 0..4] on the toric variety of the chamber."""
    return list(_nef_products(Q, chamber))


@lru_cache(maxsize=256)
def _nef_products(Q: DegreeMatrix, chamber: Chamber) -> tuple[Fraction, ...]:
    n1, n2 = nef_basis(chamber)
    P = gale_dual(Q)
    A, B = class_polytope(Q, n1, P), class_polytope(Q, n2, P)
    if A.is_empty or B.is_empty:
        raise PolytopeError("nef class with empty polytope")
    return tuple(mixed_intersection([A] * k + [B] * (4 - k)) for k in range(5))


def intersection_number(sd: SpecifyingData, classes: Sequence, chamber: Chamber | None = None) -> Fraction:
    """Multilinear intersection of four classes (torsion parts are ignored)."""
    Q = sd.Q
    if len(classes) != 4:
        raise ValueError("need four classes")
    ch = chamber or ambient_chamber(sd)
    n1, n2 = nef_basis(ch)
    prods = nef_products(Q, ch)
    coeffs = [_decompose(_as_weight(c, Q.t).u, n1, n2) for c in classes]
    total = Fraction(0)
    for pick in product((0, 1), repeat=4):
        k = sum(1 for p in pick if p == 0)
        term = Fraction(1)
        for c, p in zip(coeffs, pick):
            term *= c[p]
        total += term * prods[k]
    return total


def mu_cubed(sd: SpecifyingData, chamber: Chamber | None = None) -> Fraction:
    Q = sd.Q
    ch = chamber or ambient_chamber(sd)
    n1, n2 = nef_basis(ch)
    c1, c2 = _decompose(sd.mu.u, n1, n2)
    prods = nef_products(Q, ch)
    return sum(comb(4, k) * c1 ** k * c2 ** (4 - k) * prods[k] for k in range(5))


def invariant_row(sd: SpecifyingData) -> dict:
    l, dims = generator_degree_dimension_tuple(sd.Q)
    return {"l": l, "dims": list(dims), "mu3": mu_cubed(sd),
            "anticanonical": anticanonical_class(sd.Q, sd.mu)}


def distinguish_families(rows: Sequence[SpecifyingData], labels: Sequence | None = None) -> dict:
    """Group rows by generator degree dimension tuple and split groups by mu^3."""
    if labels is None:
        labels = list(range(1, len(rows) + 1))
    groups: dict = {}
    for lab, sd in zip(labels, rows):
        groups.setdefault(generator_degree_dimension_tuple(sd.Q), []).append((lab, sd))
    pairs, resolved, unresolved = [], [], []
    for key, members in groups.items():
        if len(members) < 2:
            continue
        pairs.append([m[0] for m in members])
        vals = [mu_cubed(sd) for _, sd in members]
        if len(set(vals)) == len(vals):
            resolved.append([m[0] for m in members])
        else:
            unresolved.append([m[0] for m in members])
    return {"tuple_equal": sorted(pairs), "resolved": sorted(resolved), "unresolved": sorted(unresolved)}
