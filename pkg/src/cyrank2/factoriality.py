"""Factoriality and primeness criteria for general hypersurface Cox rings.

Four routes certify that R_g is factorial for general g of degree mu:
the Dolgachev polytope test, base point freeness on a ray chamber, the
blow-up shape criterion, and simplex certificates via Sigma-degrees.
Primeness of the variables comes from prime binomials not involving them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from itertools import combinations
from fractions import Fraction
from math import gcd
from typing import Sequence

from .constraints import _as_weight, monomials_of_degree
from .gitfan import Cone2, distinct_rays, moving_cone
from .grading import (DegreeMatrix, GradingError, SpecifyingData, Weight, _ext_gcd, canonical_form,
                      degree_matrix_of_fan, det2, generates_group, is_primitive, same_ray)
from .polytope import (ConeN, Fan, RationalPolytope, dual_cone, fan_refines, fiber_polytope,
                       is_regular_cone, normal_fan, stellar_subdivision)
from .smoothness import is_base_point_free


# --- Dolgachev ------------------------------------------------------------

def edge_dual_cones(P: RationalPolytope) -> list[tuple[tuple[int, int], ConeN]]:
    """Dual of the tangent cone cone(P - u : u in edge) for every edge."""
    out = []
    V = P.vertices
    for i, j in P.edges():
        gens = []
        for k, v in enumerate(V):
            if k not in (i, j):
                gens.append(_int_dir(V[i], v))
        line = [_int_dir(V[i], V[j])]
        tangent = ConeN.of(gens, line, n=P.ambient_dim)
        out.append(((i, j), dual_cone(tangent)))
    return out


def _int_dir(a, b) -> tuple[int, ...]:
    from fractions import Fraction
    from math import lcm

    d = [Fraction(y) - Fraction(x) for x, y in zip(a, b)]
    m = 1
    for x in d:
        m = lcm(m, x.denominator)
    return tuple(int(x * m) for x in d)


def is_dolgachev_polytope(P: RationalPolytope) -> bool:
    if P.is_empty or P.dim < 4:
        return False
    n = P.ambient_dim
    if any(any(x < 0 for x in v) for v in P.vertices):
        return False
    for i in range(n):
        if not any(v[i] == 0 for v in P.vertices):
            return False
    return all(is_regular_cone(C) for _, C in edge_dual_cones(P))


def check_ufd_dolgachev(Q: DegreeMatrix, mu) -> bool:
    return is_dolgachev_polytope(fiber_polytope(Q, _as_weight(mu, Q.t)))


# --- base point freeness on a ray chamber ---------------------------------

def bpf_rays(Q: DegreeMatrix, mu) -> list[tuple[int, int]]:
    """Weight rays through mu in the interior of Mov on which mu is base point free.

    The toric variety of such a ray chamber is usually singular; only base
    point freeness of mu is needed there.
    """
    mu = _as_weight(mu, Q.t)
    mov = moving_cone(Q)
    if Q.t != 1 or Q.r < 6 or mov.dim < 2:
        return []
    return [ray for ray in distinct_rays(Q)
            if mov.contains_interior(ray) and same_ray(ray, mu.u)
            and is_base_point_free(Q, mu, Cone2((ray,)))]


def check_ufd_bpf(Q: DegreeMatrix, mu, witnesses: dict | None = None) -> bool:
    """Torsion free K, a bpf ray chamber through mu, and prime variables."""
    if not bpf_rays(Q, mu):
        return False
    vp = variables_prime(Q, mu, witnesses)
    return all(v in ("binomial", "fallback") for v in vp.values())


# --- blow-up shape --------------------------------------------------------

@dataclass(frozen=True)
class BlowupPresentation:
    k: int
    matrix: tuple  # 2x2 integer matrix applied to free parts
    x: tuple
    d: tuple
    mu: tuple
    min_value: int

    def to_json(self) -> dict:
        return {"k": self.k + 1, "matrix": [list(r) for r in self.matrix], "x": list(self.x),
                "d": list(self.d), "mu": list(self.mu), "min": self.min_value}


def _min_weighted(x: Sequence[int], d: Sequence[int], total: int) -> int | None:
    """min sum d_i nu_i subject to sum x_i nu_i = total, nu >= 0."""
    best: list[int | None] = [None] * (total + 1)
    best[0] = 0
    for s in range(1, total + 1):
        for xi, di in zip(x, d):
            if xi <= s and best[s - xi] is not None:
                v = best[s - xi] + di
                if best[s] is None or v < best[s]:
                    best[s] = v
    return best[total]


def blowup_presentations(Q: DegreeMatrix, mu) -> list[BlowupPresentation]:
    """All ways to bring Q into the blow-up shape, one per special column.

    The shear fixing the special column changes mu_2 and the minimum by the
    same amount, so one shear per column decides the conditions.
    """
    mu = _as_weight(mu, Q.t)
    us = Q.free
    out = []
    for k, w in enumerate(us):
        if not is_primitive(w):
            continue
        others = [i for i in range(Q.r) if i != k]
        dets = [det2(w, us[i]) for i in others]
        if any(v == 0 for v in dets) or (min(dets) < 0 < max(dets)):
            continue
        p, q = w
        f = (q, -p) if dets[0] < 0 else (-q, p)
        _, s1, s2 = _ext_gcd(p, q)
        g = (s1, s2)  # g.w = 1
        xs = [f[0] * us[i][0] + f[1] * us[i][1] for i in others]
        ys = [g[0] * us[i][0] + g[1] * us[i][1] for i in others]
        # shear g by c*f so that every y_i + c x_i <= 0
        c = min((-y) // x for x, y in zip(xs, ys))
        g = (g[0] + c * f[0], g[1] + c * f[1])
        ds = [-(g[0] * us[i][0] + g[1] * us[i][1]) for i in others]
        m1 = f[0] * mu.u[0] + f[1] * mu.u[1]
        m2 = g[0] * mu.u[0] + g[1] * mu.u[1]
        mn = _min_weighted(xs, ds, m1) if m1 >= 0 else None
        out.append(BlowupPresentation(k, (f, g), tuple(xs), tuple(ds), (m1, m2),
                                      -1 if mn is None else mn))
    return out


def blowup_conditions(pres: BlowupPresentation) -> dict:
    m1, m2 = pres.mu
    return {
        "shape": all(x >= 1 for x in pres.x) and all(d >= 0 for d in pres.d),
        "divides": m1 > 0 and all(m1 % x == 0 for x in pres.x),
        "minimum": pres.min_value >= 0 and m2 == -pres.min_value,
    }


def check_ufd_blowup(Q: DegreeMatrix, mu, witnesses: dict | None = None):
    """True, False, or "not applicable" when no blow-up shape is reachable."""
    if Q.t != 1 or Q.r < 6:
        return "not applicable"
    pres = blowup_presentations(Q, mu)
    if not pres:
        return "not applicable"
    if not any(all(blowup_conditions(p).values()) for p in pres):
        return False
    if witnesses is None:
        witnesses = find_prime_binomial_witnesses(Q, mu)
    vp = variables_prime(Q, mu, witnesses)
    return all(v in ("binomial", "fallback") for v in vp.values())


# --- Sigma-degrees and simplex certificates -------------------------------

def sigma_vector(F: Fan, B: RationalPolytope) -> list[int]:
    """a_i = -min over B of <u, v_i>, one entry per ray of F."""
    out = []
    for v in F.rays:
        m = min(sum(a * b for a, b in zip(u, v)) for u in B.vertices)
        if m != int(m):
            raise GradingError("polytope is not integral")
        out.append(-int(m))
    return out


def sigma_degree(F: Fan, B: RationalPolytope, Q_of_fan: DegreeMatrix | None = None,
                 order: Sequence[int] | None = None) -> Weight:
    """The Sigma-degree Q(a(Sigma)) of B.

    Without an explicit degree matrix the Gale dual of F's rays is used;
    ``order`` maps weight positions to ray indices of F.
    """
    if not fan_refines(F, normal_fan(B)):
        raise GradingError("fan does not refine the normal fan of B")
    a = sigma_vector(F, B)
    if Q_of_fan is None:
        Q_of_fan, order = degree_matrix_of_fan(F.ray_matrix())
    if order is None:
        order = list(range(len(a)))
    return Q_of_fan.degree([a[j] for j in order])


@dataclass(frozen=True)
class SimplexCertificate:
    B_vertices: tuple
    subdivision_ray: tuple
    expected_Q: DegreeMatrix
    expected_mu: Weight
    row: int | None = None

    @classmethod
    def from_json(cls, d: dict) -> "SimplexCertificate":
        Q = DegreeMatrix.from_rows(d["Q"]["Q0"], d["Q"].get("zeta"), d["Q"].get("t", 1), check=False)
        mu = Weight.from_json(d["mu"], Q.t)
        return cls(tuple(tuple(v) for v in d["B"]), tuple(d["ray"]), Q, mu, d.get("row"))

    def to_json(self) -> dict:
        return {"B": [list(v) for v in self.B_vertices], "ray": list(self.subdivision_ray),
                "Q": {"t": self.expected_Q.t, "Q0": self.expected_Q.rows(),
                      "zeta": self.expected_Q.zetas},
                "mu": self.expected_mu.to_json(), "row": self.row}


def data_key(Q: DegreeMatrix, mu) -> tuple:
    """Canonical (Q, mu) ignoring the ample class.

    The canonical form minimises the weights first and mu second, so this
    part of it does not depend on which ample class is supplied.
    """
    mu = _as_weight(mu, Q.t)
    cf = canonical_form(SpecifyingData(Q, mu, Weight(mu.u, 0)))
    return (cf.Q.t, tuple((w.u, w.zeta) for w in cf.Q.weights), (cf.mu.u, cf.mu.zeta))


def same_data(Q1: DegreeMatrix, mu1, Q2: DegreeMatrix, mu2) -> bool:
    return data_key(Q1, mu1) == data_key(Q2, mu2)


def same_q(Q1: DegreeMatrix, Q2: DegreeMatrix) -> bool:
    """Equality of degree matrices up to admissible coordinate changes."""
    return data_key(Q1, Q1.total())[:2] == data_key(Q2, Q2.total())[:2]


def simplex_certificate_report(cert: SimplexCertificate) -> dict:
    rep = {"simplex": False, "refines": False, "degree_data": False, "sigma_degree": False}
    B = RationalPolytope.from_points(cert.B_vertices)
    n = B.ambient_dim
    rep["simplex"] = (n >= 4 and B.dim == n and len(B.vertices) == n + 1
                      and all(x.denominator == 1 for v in B.vertices for x in map(Fraction, v)))
    if not rep["simplex"]:
        return rep
    F1 = normal_fan(B)
    try:
        F2 = stellar_subdivision(F1, cert.subdivision_ray)
        Q2, order = degree_matrix_of_fan(F2.ray_matrix())
    except ValueError as e:
        rep["error"] = str(e)
        return rep
    rep["refines"] = fan_refines(F2, F1)
    a = sigma_vector(F2, B)
    mu2 = Q2.degree([a[j] for j in order])
    rep["a"] = a
    rep["Q2"] = {"t": Q2.t, "Q0": Q2.rows(), "zeta": Q2.zetas}
    rep["mu2"] = mu2.to_json()
    rep["degree_data"] = same_q(Q2, cert.expected_Q)
    rep["sigma_degree"] = rep["degree_data"] and same_data(Q2, mu2, cert.expected_Q, cert.expected_mu)
    return rep


def verify_simplex_certificate(cert: SimplexCertificate) -> bool:
    rep = simplex_certificate_report(cert)
    return all(rep[k] for k in ("simplex", "refines", "degree_data", "sigma_degree"))


@lru_cache(maxsize=1)
def builtin_certificates() -> tuple[SimplexCertificate, ...]:
    text = resources.files("cyrank2.data").joinpath("certificates.json").read_text()
    return tuple(SimplexCertificate.from_json(d) for d in json.loads(text))


def certificate_for(Q: DegreeMatrix, mu) -> SimplexCertificate | None:
    key = data_key(Q, mu)
    for cert in builtin_certificates():
        if key == data_key(cert.expected_Q, cert.expected_mu):
            return cert
    return None


# --- normality, generation, primeness -------------------------------------

def check_normality_bechtold(Q: DegreeMatrix) -> bool:
    return all(generates_group(Q.group, [Q.weights[j] for j in sub])
               for sub in combinations(range(Q.r), Q.r - 1))


def check_minimal_generation(Q: DegreeMatrix, mu) -> bool:
    mu = _as_weight(mu, Q.t)
    return all(w.u != mu.u or (w.zeta - mu.zeta) % Q.t != 0 for w in Q.weights)


def binomial_is_prime(kappa: Sequence[int], nu: Sequence[int]) -> bool:
    if all(a == b for a, b in zip(kappa, nu)):
        return False
    if any(a and b for a, b in zip(kappa, nu)):
        return False
    g = 0
    for a, b in zip(kappa, nu):
        g = gcd(g, a - b)
    return g == 1


def find_prime_binomial_witnesses(Q: DegreeMatrix, mu) -> dict:
    """Map i -> (kappa, nu) of a prime binomial of degree mu free of T_i, or None."""
    mons = monomials_of_degree(Q, _as_weight(mu, Q.t))
    out = {}
    for i in range(Q.r):
        pool = [m for m in mons if m[i] == 0]
        found = None
        for a, b in combinations(pool, 2):
            if binomial_is_prime(a, b):
                found = (a, b)
                break
        out[i] = found
    return out


def _weight_order(Q: DegreeMatrix, w: Weight) -> int:
    """Order of w in K; 0 for infinite order."""
    if w.u != (0, 0):
        return 0
    t = Q.t
    return t // gcd(t, w.zeta % t) if w.zeta % t else 1


def two_monomial_fallback(Q: DegreeMatrix, mu, i: int) -> bool:
    """K-irreducibility of g with T_i set to zero when only two pure powers remain.

    If the monomials of degree mu free of T_i are exactly T_a^p and T_b^q,
    a spread g restricts to a T_a^p - b T_b^q.  With d = gcd(p, q) it splits
    into d factors over the algebraic closure and is K-irreducible iff the
    class (p/d) w_a - (q/d) w_b has order exactly d.
    """
    mu = _as_weight(mu, Q.t)
    pool = [m for m in monomials_of_degree(Q, mu) if m[i] == 0]
    if len(pool) != 2:
        return False
    sup = [[j for j, x in enumerate(m) if x] for m in pool]
    if any(len(s) != 1 for s in sup) or sup[0] == sup[1]:
        return False
    a, b = sup[0][0], sup[1][0]
    p, q = pool[0][a], pool[1][b]
    d = gcd(p, q)
    wa, wb = Q.weights[a], Q.weights[b]
    delta = Weight(((p // d) * wa.u[0] - (q // d) * wb.u[0], (p // d) * wa.u[1] - (q // d) * wb.u[1]),
                   ((p // d) * wa.zeta - (q // d) * wb.zeta) % Q.t)
    return _weight_order(Q, delta) == d


def is_indecomposable(Q: DegreeMatrix, i: int) -> bool:
    """w_i is not a sum of two or more generator degrees."""
    return all(sum(m) == 1 for m in monomials_of_degree(Q, Q.weights[i]))


def variables_prime(Q: DegreeMatrix, mu, witnesses: dict | None = None) -> dict:
    """Per variable: "binomial", "fallback", "indecomposable" or None.

    "indecomposable" only gives K-irreducibility of T_i; it turns into
    K-primeness once R_g is known to be K-factorial by a route that does
    not assume prime variables.
    """
    if witnesses is None:
        witnesses = find_prime_binomial_witnesses(Q, mu)
    out = {}
    for i in range(Q.r):
        if witnesses.get(i) is not None:
            out[i] = "binomial"
        elif two_monomial_fallback(Q, mu, i):
            out[i] = "fallback"
        elif is_indecomposable(Q, i):
            out[i] = "indecomposable"
        else:
            out[i] = None
    return out


def not_prime_certificate(Q: DegreeMatrix, mu, i: int) -> str | None:
    """Reason why T_i cannot be prime in R, if a simple one exists.

    Setting T_i = 0 leaves a form in the monomials of degree mu free of T_i.
    It is reducible when all of them share a variable, or when they only
    involve T_a, T_b with w_b = k w_a and mu = l w_b, l >= 2: then it is a
    binary form of degree l in T_a^k and T_b.
    """
    mu = _as_weight(mu, Q.t)
    pool = [m for m in monomials_of_degree(Q, mu) if m[i] == 0]
    if not pool:
        return "g lies in the ideal of T_i"
    common = [j for j in range(Q.r) if all(m[j] for m in pool)]
    if common:
        return f"restriction is divisible by T{common[0] + 1}"
    used = sorted({j for m in pool for j, x in enumerate(m) if x})
    if len(used) == 2:
        for a, b in (used, used[::-1]):
            wa, wb = Q.weights[a], Q.weights[b]
            k = _multiple_of(Q, wa, wb)
            l = _multiple_of(Q, wb, mu)
            if k and l and l >= 2:
                return f"restriction is a binary form in T{a + 1}^{k}, T{b + 1}"
    return None


def _multiple_of(Q: DegreeMatrix, w: Weight, v: Weight) -> int | None:
    """k >= 1 with v = k w in K."""
    for x, y in zip(w.u, v.u):
        if x:
            if y % x:
                return None
            k = y // x
            break
    else:
        return None
    if k < 1 or (k * w.u[0], k * w.u[1]) != tuple(v.u) or (k * w.zeta - v.zeta) % Q.t:
        return None
    return k


# --- routing --------------------------------------------------------------

@dataclass
class RouteRecord:
    route: str
    dolgachev: bool = False
    bpf: bool = False
    blowup: object = "not applicable"
    simplex: bool | None = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"route": self.route, "dolgachev": self.dolgachev, "bpf": self.bpf,
                "blowup": self.blowup, "simplex": self.simplex, "details": self.details}


def factoriality_route(sd: SpecifyingData, witnesses: dict | None = None) -> RouteRecord:
    Q, mu = sd.Q, sd.mu
    rec = RouteRecord("unresolved")
    rec.dolgachev = check_ufd_dolgachev(Q, mu)
    rays = bpf_rays(Q, mu)
    rec.bpf = check_ufd_bpf(Q, mu, witnesses)
    if rays:
        rec.details["bpf_rays"] = [list(r) for r in rays]
    rec.blowup = check_ufd_blowup(Q, mu, witnesses)
    cert = certificate_for(Q, mu)
    if cert is not None:
        rec.simplex = verify_simplex_certificate(cert)
        rec.details["certificate_row"] = cert.row
    if rec.dolgachev:
        rec.route = "dolgachev"
    elif rec.bpf:
        rec.route = "bpf"
    elif rec.blowup is True:
        rec.route = "blowup"
    elif rec.simplex:
        rec.route = "simplex-certificate"
    return rec
