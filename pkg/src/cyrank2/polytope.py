"""Exact rational convex geometry.

Polytopes keep both a vertex and a halfspace description.  The conversion
between them goes through cdd in exact fraction mode; volumes come from a
pulling triangulation, mixed volumes from inclusion-exclusion over
Minkowski sums.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from math import factorial, gcd, lcm
from typing import Iterable, Sequence

import cdd
from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_decomp


class PolytopeError(ValueError):
    pass


Vec = tuple


# --- small exact linear algebra ------------------------------------------

def _frac_vec(v) -> tuple[Fraction, ...]:
    return tuple(Fraction(x) for x in v)


def row_echelon(rows: Sequence[Sequence]) -> list[list[Fraction]]:
    """Reduced row echelon form over Q, zero rows dropped."""
    M = [[Fraction(x) for x in r] for r in rows]
    if not M:
        return []
    ncol = len(M[0])
    r = 0
    for c in range(ncol):
        piv = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        p = M[r][c]
        M[r] = [x / p for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        r += 1
        if r == len(M):
            break
    return [row for row in M[:r]]


def rank(rows: Sequence[Sequence]) -> int:
    return len(row_echelon(rows))


def det(rows: Sequence[Sequence]) -> Fraction:
    M = [[Fraction(x) for x in r] for r in rows]
    n = len(M)
    d = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if M[i][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            M[c], M[piv] = M[piv], M[c]
            d = -d
        d *= M[c][c]
        for i in range(c + 1, n):
            if M[i][c] != 0:
                f = M[i][c] / M[c][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[c])]
    return d


def solve(A_cols: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """Solve sum x_k * A_cols[k] = b exactly; None if inconsistent."""
    n = len(b)
    k = len(A_cols)
    aug = [[Fraction(A_cols[j][i]) for j in range(k)] + [Fraction(b[i])] for i in range(n)]
    R = row_echelon(aug)
    x = [Fraction(0)] * k
    for row in R:
        lead = next(i for i, v in enumerate(row) if v != 0)
        if lead == k:
            return None
        x[lead] = row[k]
    return x


def primitive_int(v: Sequence) -> tuple[int, ...]:
    """Smallest positive multiple of a rational vector that is integral."""
    fr = _frac_vec(v)
    den = reduce(lcm, (x.denominator for x in fr), 1)
    ints = [int(x * den) for x in fr]
    g = reduce(gcd, (abs(x) for x in ints), 0)
    if g == 0:
        raise PolytopeError("zero vector")
    return tuple(x // g for x in ints)


def integer_kernel(rows: Sequence[Sequence[int]], n: int) -> list[tuple[int, ...]]:
    """Lattice basis of {x in Z^n : rows . x = 0} (saturated)."""
    if not rows:
        return [tuple(1 if i == j else 0 for i in range(n)) for j in range(n)]
    A = Matrix([[int(x) for x in r] for r in rows])
    D, U, V = smith_normal_decomp(A)
    rk = sum(1 for i in range(min(D.rows, D.cols)) if D[i, i] != 0)
    return [tuple(int(x) for x in V[:, j]) for j in range(rk, n)]


def lattice_index(rows: Sequence[Sequence[int]]) -> int:
    """gcd of maximal minors of a full-row-rank integer matrix (0 if deficient)."""
    rows = [list(r) for r in rows]
    k = len(rows)
    if k == 0:
        return 1
    n = len(rows[0])
    if k > n:
        return 0
    g = 0
    for cols in itertools.combinations(range(n), k):
        g = gcd(g, abs(int(det([[r[c] for c in cols] for r in rows]))))
        if g == 1:
            return 1
    return g


# --- cdd glue -------------------------------------------------------------

def _cdd_from_v(points, rays=(), lines=()):
    rows = [[1] + list(p) for p in points] + [[0] + list(r) for r in rays]
    lin = []
    for l in lines:
        lin.append(len(rows))
        rows.append([0] + list(l))
    m = cdd.Matrix(rows, number_type="fraction")
    m.rep_type = cdd.RepType.GENERATOR
    if lin:
        m.lin_set = frozenset(lin)
    return cdd.Polyhedron(m)


def _cdd_from_h(ineqs, eqs=()):
    # rows [b, a] mean b + a.x >= 0
    rows = [[-Fraction(off)] + list(a) for a, off in ineqs]
    lin = []
    for a, off in eqs:
        lin.append(len(rows))
        rows.append([-Fraction(off)] + list(a))
    m = cdd.Matrix(rows, number_type="fraction")
    m.rep_type = cdd.RepType.INEQUALITY
    if lin:
        m.lin_set = frozenset(lin)
    return cdd.Polyhedron(m)


def _h_of(poly):
    H = poly.get_inequalities()
    ineqs, eqs = [], []
    for i in range(H.row_size):
        row = [Fraction(x) for x in H[i]]
        b, a = row[0], row[1:]
        if all(x == 0 for x in a):
            if b < 0:
                raise PolytopeError("infeasible row")
            continue
        if i in H.lin_set:
            eqs.append((a, -b))
        else:
            ineqs.append((a, -b))
    return ineqs, eqs


def _v_of(poly):
    G = poly.get_generators()
    pts, rays, lines = [], [], []
    for i in range(G.row_size):
        row = [Fraction(x) for x in G[i]]
        if i in G.lin_set:
            lines.append(tuple(row[1:]))
        elif row[0] == 0:
            rays.append(tuple(row[1:]))
        else:
            pts.append(tuple(x / row[0] for x in row[1:]))
    return pts, rays, lines


def _normalise_halfspace(a, off):
    """Scale a.x >= off so that a is a primitive integer vector."""
    den = reduce(lcm, (Fraction(x).denominator for x in a), 1)
    ai = [int(Fraction(x) * den) for x in a]
    g = reduce(gcd, (abs(x) for x in ai), 0)
    return tuple(x // g for x in ai), Fraction(off) * den / g


# --- polytopes ------------------------------------------------------------

@dataclass(frozen=True)
class RationalPolytope:
    """Bounded polytope; halfspaces read <normal, x> >= offset."""
    ambient_dim: int
    vertices: tuple
    halfspaces: tuple
    equations: tuple = ()

    @classmethod
    def empty(cls, n: int) -> "RationalPolytope":
        return cls(n, (), (), ())

    @classmethod
    def from_points(cls, points: Iterable[Sequence]) -> "RationalPolytope":
        pts = sorted(set(_frac_vec(p) for p in points))
        if not pts:
            raise PolytopeError("use RationalPolytope.empty for the empty polytope")
        n = len(pts[0])
        if len(pts) == 1:
            p = pts[0]
            eqs = tuple((tuple(1 if i == j else 0 for j in range(n)), p[i]) for i in range(n))
            return cls(n, (p,), (), eqs)
        poly = _cdd_from_v(pts)
        ineqs, eqs = _h_of(poly)
        verts, rays, lines = _v_of(_cdd_from_h(ineqs, eqs))
        return cls._build(n, verts, ineqs, eqs)

    @classmethod
    def from_halfspaces(cls, ineqs, eqs=(), n: int | None = None) -> "RationalPolytope":
        ineqs = [(tuple(a), Fraction(o)) for a, o in ineqs]
        eqs = [(tuple(a), Fraction(o)) for a, o in eqs]
        if n is None:
            n = len((ineqs or eqs)[0][0])
        try:
            poly = _cdd_from_h(ineqs, eqs)
            verts, rays, lines = _v_of(poly)
        except (RuntimeError, PolytopeError):
            return cls.empty(n)
        if rays or lines:
            raise PolytopeError("halfspaces describe an unbounded polyhedron")
        if not verts:
            return cls.empty(n)
        return cls.from_points(verts)

    @classmethod
    def _build(cls, n, verts, ineqs, eqs):
        hs = sorted(set(_normalise_halfspace(a, o) for a, o in ineqs))
        es = []
        for a, o in eqs:
            a2, o2 = _normalise_halfspace(a, o)
            es.append((a2, o2))
        return cls(n, tuple(sorted(set(verts))), tuple(hs), tuple(sorted(set(es))))

    # basic queries
    @property
    def is_empty(self) -> bool:
        return not self.vertices

    @property
    def dim(self) -> int:
        if self.is_empty:
            return -1
        v0 = self.vertices[0]
        return rank([[a - b for a, b in zip(v, v0)] for v in self.vertices[1:]])

    def contains(self, x: Sequence) -> bool:
        x = _frac_vec(x)
        if self.is_empty:
            return False
        for a, o in self.halfspaces:
            if sum(ai * xi for ai, xi in zip(a, x)) < o:
                return False
        for a, o in self.equations:
            if sum(ai * xi for ai, xi in zip(a, x)) != o:
                return False
        return True

    def facet_incidence(self) -> list[frozenset[int]]:
        out = []
        for a, o in self.halfspaces:
            s = frozenset(i for i, v in enumerate(self.vertices)
                          if sum(ai * vi for ai, vi in zip(a, v)) == o)
            out.append(s)
        return out

    def edges(self) -> list[tuple[int, int]]:
        """Pairs of vertex indices spanning a one-dimensional face."""
        d = self.dim
        inc = self.facet_incidence()
        eq_rows = [a for a, _ in self.equations]
        out = []
        for i, j in itertools.combinations(range(len(self.vertices)), 2):
            tight = [self.halfspaces[k][0] for k, s in enumerate(inc) if i in s and j in s]
            if rank(eq_rows + tight) == self.ambient_dim - 1 and d >= 1:
                out.append((i, j))
        return out

    def minkowski_sum(self, other: "RationalPolytope") -> "RationalPolytope":
        if self.is_empty or other.is_empty:
            return RationalPolytope.empty(self.ambient_dim)
        return RationalPolytope.from_points(
            tuple(a + b for a, b in zip(p, q)) for p in self.vertices for q in other.vertices)

    def scaled(self, k) -> "RationalPolytope":
        k = Fraction(k)
        if self.is_empty:
            return self
        return RationalPolytope.from_points(tuple(k * x for x in v) for v in self.vertices)

    def lattice_points(self) -> list[tuple[int, ...]]:
        """All integer points, by box enumeration (small instances only)."""
        if self.is_empty:
            return []
        n = self.ambient_dim
        lo = [min(v[i] for v in self.vertices) for i in range(n)]
        hi = [max(v[i] for v in self.vertices) for i in range(n)]
        ranges = [range(-((-l.numerator) // l.denominator), h.numerator // h.denominator + 1)
                  for l, h in zip(lo, hi)]
        return [p for p in itertools.product(*ranges) if self.contains(p)]

    def to_json(self) -> dict:
        def fr(x):
            return [x.numerator, x.denominator]
        return {
            "ambient_dim": self.ambient_dim,
            "vertices": [[fr(x) for x in v] for v in self.vertices],
            "halfspaces": [{"normal": list(a), "offset": fr(o)} for a, o in self.halfspaces],
            "equations": [{"normal": list(a), "offset": fr(o)} for a, o in self.equations],
        }


def affine_lattice_coordinates(P: RationalPolytope):
    """Vertices of P in a basis of the saturated lattice parallel to its affine span.

    Returns ``(coords, basis)``; coords are relative to the first vertex.
    """
    n = P.ambient_dim
    eq_rows = [primitive_int(a) for a, _ in P.equations]
    basis = integer_kernel(eq_rows, n) if eq_rows else [
        tuple(1 if i == j else 0 for i in range(n)) for j in range(n)]
    v0 = P.vertices[0]
    coords = []
    for v in P.vertices:
        diff = [a - b for a, b in zip(v, v0)]
        c = solve(basis, diff)
        if c is None:
            raise PolytopeError("vertex outside the affine span lattice")
        coords.append(tuple(c))
    return coords, basis


def _triangulate(points: list, facets: list[frozenset[int]], face: frozenset[int], k: int,
                 cache: dict) -> list[frozenset[int]]:
    if len(face) == k + 1:
        return [face]
    v0 = min(face)
    subs = set()
    for F in facets:
        G = face & F
        if len(G) < k or G == face:
            continue
        key = G
        if key not in cache:
            g0 = points[min(G)]
            cache[key] = rank([[a - b for a, b in zip(points[i], g0)] for i in G])
        if cache[key] == k - 1:
            subs.add(G)
    out = []
    for G in subs:
        if v0 in G:
            continue
        for s in _triangulate(points, facets, G, k - 1, cache):
            out.append(s | {v0})
    return out


def _full_dim_normalized_volume(points: list) -> Fraction:
    d = len(points[0])
    if d == 0:
        return Fraction(1)
    if d == 1:
        xs = [p[0] for p in points]
        return max(xs) - min(xs)
    Q = RationalPolytope.from_points(points)
    pts = list(Q.vertices)
    facets = Q.facet_incidence()
    simplices = _triangulate(pts, facets, frozenset(range(len(pts))), d, {})
    total = Fraction(0)
    for s in simplices:
        s = sorted(s)
        p0 = pts[s[0]]
        total += abs(det([[a - b for a, b in zip(pts[i], p0)] for i in s[1:]]))
    return total


def normalized_volume(P: RationalPolytope) -> Fraction:
    """dim(P)! times the volume, measured in the lattice of the affine span."""
    if P.is_empty:
        return Fraction(0)
    d = P.dim
    if d == 0:
        return Fraction(1)
    coords, basis = affine_lattice_coordinates(P)
    return _full_dim_normalized_volume(coords)


def lattice_volume(P: RationalPolytope) -> Fraction:
    """n! times the Euclidean volume in the ambient lattice; 0 if not full-dimensional."""
    if P.is_empty or P.dim < P.ambient_dim:
        return Fraction(0)
    return _full_dim_normalized_volume(list(P.vertices))


def mixed_intersection(polytopes: Sequence[RationalPolytope]) -> Fraction:
    """Normalized mixed volume; equals lattice_volume(P) for n copies of P."""
    n = len(polytopes)
    if n == 0:
        raise PolytopeError("need at least one polytope")
    dim = polytopes[0].ambient_dim
    if n != dim:
        raise PolytopeError(f"need {dim} polytopes, got {n}")
    if any(p.is_empty for p in polytopes):
        return Fraction(0)
    total = Fraction(0)
    cache: dict = {}
    for k in range(1, n + 1):
        for S in itertools.combinations(range(n), k):
            key = tuple(sorted(id(polytopes[i]) for i in S))
            if key not in cache:
                acc = polytopes[S[0]]
                for i in S[1:]:
                    acc = acc.minkowski_sum(polytopes[i])
                cache[key] = lattice_volume(acc)
            total += (-1) ** (n - k) * cache[key]
    return total / factorial(n)


# --- cones and fans -------------------------------------------------------

@dataclass(frozen=True)
class ConeN:
    ambient_dim: int
    generators: tuple
    lineality: tuple = ()

    @classmethod
    def of(cls, gens: Iterable[Sequence[int]], lineality: Iterable[Sequence[int]] = (),
           n: int | None = None) -> "ConeN":
        gens = tuple(tuple(int(x) for x in g) for g in gens)
        lin = tuple(tuple(int(x) for x in g) for g in lineality)
        if n is None:
            n = len((gens or lin)[0])
        return cls(n, gens, lin)

    @classmethod
    def full(cls, n: int) -> "ConeN":
        return cls(n, (), tuple(tuple(1 if i == j else 0 for i in range(n)) for j in range(n)))

    @classmethod
    def zero(cls, n: int) -> "ConeN":
        return cls(n, (), ())

    def inequalities(self) -> tuple[list, list]:
        """Rows a with a.x >= 0 (and equations a.x = 0) cutting out the cone."""
        if not self.generators and not self.lineality:
            eye = [tuple(1 if i == j else 0 for j in range(self.ambient_dim))
                   for i in range(self.ambient_dim)]
            return [], eye
        poly = _cdd_from_v([tuple([0] * self.ambient_dim)], self.generators, self.lineality)
        ineqs, eqs = _h_of(poly)
        return [primitive_int(a) for a, _ in ineqs], [primitive_int(a) for a, _ in eqs]

    def contains(self, x: Sequence) -> bool:
        ineqs, eqs = self.inequalities()
        return (all(sum(a * b for a, b in zip(r, x)) >= 0 for r in ineqs)
                and all(sum(a * b for a, b in zip(r, x)) == 0 for r in eqs))

    @property
    def dim(self) -> int:
        return rank(list(self.generators) + list(self.lineality)) if (self.generators or self.lineality) else 0


def dual_cone(C: ConeN) -> ConeN:
    ineqs, eqs = C.inequalities()
    return ConeN(C.ambient_dim, tuple(sorted(set(ineqs))), tuple(eqs))


def _quotient_coordinates(lin: Sequence[Sequence[int]], n: int):
    """Map x to its coordinates in Z^n / (saturated span of lin)."""
    if not lin:
        return lambda x: tuple(Fraction(v) for v in x), n
    basis = integer_kernel(integer_kernel(lin, n), n)  # saturation of span(lin)
    A = Matrix([list(b) for b in basis])
    D, U, V = smith_normal_decomp(A)
    l = len(basis)

    def coords(x):
        c = Matrix([list(x)]) * V
        return tuple(Fraction(c[0, j]) for j in range(l, n))

    return coords, n - l


def is_regular_cone(C: ConeN) -> bool:
    """Generators (modulo lineality) form part of a lattice basis."""
    if not C.generators:
        return True
    coords, m = _quotient_coordinates(C.lineality, C.ambient_dim)
    gens = [coords(g) for g in C.generators]
    if any(all(x == 0 for x in g) for g in gens):
        return False
    if C.lineality:
        gens = [primitive_int(g) for g in gens]
    else:
        gens = [tuple(int(x) for x in g) for g in gens]
    if rank(gens) != len(gens):
        return False
    return lattice_index(gens) == 1


@dataclass(frozen=True)
class Fan:
    ambient_dim: int
    rays: tuple
    cones: tuple  # tuples of ray indices, one per maximal cone

    @property
    def maximal_cones(self) -> list[ConeN]:
        return [ConeN.of([self.rays[i] for i in c], n=self.ambient_dim) for c in self.cones]

    def ray_matrix(self) -> list[list[int]]:
        """n x r matrix whose columns are the rays."""
        return [[r[k] for r in self.rays] for k in range(self.ambient_dim)]

    def to_json(self) -> dict:
        return {"ambient_dim": self.ambient_dim, "rays": [list(r) for r in self.rays],
                "cones": [list(c) for c in self.cones]}


def normal_fan(P: RationalPolytope) -> Fan:
    """Inner normal fan of a full-dimensional polytope."""
    if P.is_empty or P.dim != P.ambient_dim:
        raise PolytopeError("normal fan needs a full-dimensional polytope")
    rays = [a for a, _ in P.halfspaces]
    inc = P.facet_incidence()
    cones = []
    for vi in range(len(P.vertices)):
        cones.append(tuple(k for k, s in enumerate(inc) if vi in s))
    return Fan(P.ambient_dim, tuple(tuple(r) for r in rays), tuple(cones))


def stellar_subdivision(F: Fan, v: Sequence[int]) -> Fan:
    v = tuple(int(x) for x in v)
    if v in F.rays:
        return F
    rays = list(F.rays) + [v]
    new = len(rays) - 1
    cones = []
    hit = False
    for c in F.cones:
        cone = ConeN.of([F.rays[i] for i in c], n=F.ambient_dim)
        ineqs, eqs = cone.inequalities()
        inside = all(sum(a * b for a, b in zip(r, v)) >= 0 for r in ineqs) and \
            all(sum(a * b for a, b in zip(r, v)) == 0 for r in eqs)
        if not inside:
            cones.append(c)
            continue
        hit = True
        for r in ineqs:
            if sum(a * b for a, b in zip(r, v)) > 0:
                facet = tuple(i for i in c if sum(a * b for a, b in zip(r, F.rays[i])) == 0)
                cones.append(tuple(sorted(facet + (new,))))
    if not hit:
        raise PolytopeError(f"vector {v} is not in the support of the fan")
    return Fan(F.ambient_dim, tuple(rays), tuple(cones))


def fan_refines(F: Fan, G: Fan) -> bool:
    """Every maximal cone of F lies in some maximal cone of G."""
    gcones = G.maximal_cones
    for c in F.cones:
        rs = [F.rays[i] for i in c]
        if not any(all(g.contains(r) for r in rs) for g in gcones):
            return False
    return True


def fiber_polytope(Q, mu) -> RationalPolytope:
    """Convex hull of the exponent vectors of degree mu."""
    from .constraints import monomials_of_degree

    pts = monomials_of_degree(Q, mu)
    if not pts:
        return RationalPolytope.empty(Q.r)
    return RationalPolytope.from_points(pts)
