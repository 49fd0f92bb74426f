import itertools

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from cyrank2.constraints import monomials_of_degree
from cyrank2.grading import DegreeMatrix, Weight
from cyrank2.polytope import (
    ConeN,
    Fan,
    PolytopeError,
    RationalPolytope,
    dual_cone,
    fan_refines,
    fiber_polytope,
    is_regular_cone,
    lattice_volume,
    mixed_intersection,
    normal_fan,
    normalized_volume,
    stellar_subdivision,
)

E = [tuple(1 if i == j else 0 for j in range(4)) for i in range(4)]
ZERO = (0, 0, 0, 0)


def simplex(k=1):
    return RationalPolytope.from_points([ZERO] + [tuple(k * x for x in e) for e in E])


def h1():
    return RationalPolytope.from_points([ZERO, E[0], E[1]])


def h2():
    return RationalPolytope.from_points([ZERO, E[2], E[3]])


# --- fiber polytopes -------------------------------------------------------

def test_fiber_polytope_row1(table):
    sd = table[1]
    P = fiber_polytope(sd.Q, sd.mu)
    assert P.dim == 4
    # pure cubes T_i^3 T_j^3 with i <= 3 < j
    assert len(P.vertices) == 9
    assert len(P.lattice_points()) == 100


def test_fiber_polytope_torsion_has_fewer_points(table):
    Q7 = table[7].Q
    free = DegreeMatrix.from_rows(Q7.rows())
    mu = table[7].mu
    pts_t = fiber_polytope(Q7, mu).lattice_points()
    pts_t = [p for p in pts_t if Q7.degree(p) == mu]
    pts_1 = fiber_polytope(free, Weight(mu.u)).lattice_points()
    assert len(pts_t) < len(pts_1)


def test_fiber_polytope_empty(table):
    assert fiber_polytope(table[1].Q, Weight((-1, 1))).is_empty


def test_fiber_lattice_points_are_monomials(table):
    for no in (1, 3, 5, 11, 13):
        Q, mu = table[no].Q, table[no].mu
        P = fiber_polytope(Q, mu)
        assert sorted(P.lattice_points()) == monomials_of_degree(Q, mu)


# --- V and H descriptions --------------------------------------------------

@given(st.lists(st.tuples(*[st.integers(-4, 4)] * 3), min_size=4, max_size=9))
@settings(max_examples=40)
def test_v_h_roundtrip(points):
    P = RationalPolytope.from_points(points)
    if P.dim < 3:
        return
    Q = RationalPolytope.from_halfspaces(P.halfspaces, P.equations)
    assert set(Q.vertices) == set(P.vertices)
    assert all(P.contains(p) for p in points)


def test_unbounded_rejected():
    with pytest.raises(PolytopeError):
        RationalPolytope.from_halfspaces([((1, 0), 0), ((0, 1), 0)])


def test_edges_of_square():
    P = RationalPolytope.from_points([(0, 0), (1, 0), (0, 1), (1, 1)])
    assert len(P.edges()) == 4


# --- cones -----------------------------------------------------------------

def test_dual_cone_examples():
    orth = ConeN.of([(1, 0), (0, 1)])
    assert set(dual_cone(orth).generators) == {(1, 0), (0, 1)}
    d = dual_cone(ConeN.of([(1, 0), (1, 2)]))
    assert set(d.generators) == {(0, 1), (2, -1)}
    full = dual_cone(ConeN.full(2))
    assert full.dim == 0


@given(st.lists(st.tuples(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5)), min_size=1, max_size=5),
       st.tuples(st.integers(-6, 6), st.integers(-6, 6), st.integers(-6, 6)))
@settings(max_examples=60)
def test_dual_cone_definition(gens, x):
    gens = [g for g in gens if any(g)]
    if not gens:
        return
    C = ConeN.of(gens)
    D = dual_cone(C)
    # x is in the dual iff it is nonnegative on all generators
    assert D.contains(x) == all(sum(a * b for a, b in zip(x, g)) >= 0 for g in gens)


def test_regularity_examples():
    assert is_regular_cone(ConeN.of([(1, 0, 0), (0, 1, 0)]))
    assert not is_regular_cone(ConeN.of([(1, 0), (1, 2)]))
    assert not is_regular_cone(ConeN.of([(2, 0)]))


# --- volumes ---------------------------------------------------------------

def test_volume_examples():
    cube = RationalPolytope.from_points(itertools.product((0, 1), repeat=4))
    assert normalized_volume(cube) == 24
    assert normalized_volume(simplex()) == 1
    prod = RationalPolytope.from_points(
        [(a[0], a[1], b[0], b[1]) for a in ((0, 0), (3, 0), (0, 3)) for b in ((0, 0), (3, 0), (0, 3))])
    assert normalized_volume(prod) == 486


def test_volume_lower_dimensional_uses_span_lattice():
    seg = RationalPolytope.from_points([(0, 0), (2, 2)])
    assert normalized_volume(seg) == 2
    assert lattice_volume(seg) == 0


def test_volume_invariant_under_unimodular_maps(rng):
    P = RationalPolytope.from_points([(0, 0, 0), (2, 0, 1), (0, 3, 0), (1, 1, 2), (0, 0, 1)])
    vol = normalized_volume(P)
    for _ in range(10):
        A = sympy.eye(3)
        for _ in range(4):
            i, j = rng.sample(range(3), 2)
            E_ = sympy.eye(3)
            E_[i, j] = rng.randint(-2, 2)
            A = A * E_
        img = [tuple(int(x) for x in A * sympy.Matrix(v)) for v in P.vertices]
        assert normalized_volume(RationalPolytope.from_points(img)) == vol


def test_volume_additive_under_subdivision():
    cube = RationalPolytope.from_points(itertools.product((0, 2), repeat=3))
    half1 = RationalPolytope.from_halfspaces(list(cube.halfspaces) + [((-1, 0, 0), -1)])
    half2 = RationalPolytope.from_halfspaces(list(cube.halfspaces) + [((1, 0, 0), 1)])
    assert normalized_volume(half1) + normalized_volume(half2) == normalized_volume(cube)


# --- mixed volumes ---------------------------------------------------------

def test_mixed_examples():
    P = simplex(2)
    assert mixed_intersection([P, P, P, P]) == normalized_volume(P)
    assert mixed_intersection([h1(), h1(), h2(), h2()]) == 1
    assert mixed_intersection([h1(), h1(), h1(), h2()]) == 0


def _multinomial_oracle(a, b):
    """(a1 H1 + b1 H2)...(a4 H1 + b4 H2) on P^2 x P^2: only H1^2 H2^2 = 1 survives."""
    total = 0
    for S in itertools.combinations(range(4), 2):
        term = 1
        for i in range(4):
            term *= a[i] if i in S else b[i]
        total += term
    return total


def test_mixed_product_of_simplices_matches_multinomial(rng):
    for _ in range(6):
        a = [rng.randint(0, 2) for _ in range(4)]
        b = [rng.randint(0, 2) for _ in range(4)]
        polys = []
        for x, y in zip(a, b):
            pts = [(p[0], p[1], q[0], q[1]) for p in ((0, 0), (x, 0), (0, x)) for q in ((0, 0), (y, 0), (0, y))]
            polys.append(RationalPolytope.from_points(pts))
        assert mixed_intersection(polys) == _multinomial_oracle(a, b)


def test_mixed_symmetric_and_scaling(rng):
    polys = [h1(), h2(), simplex(), RationalPolytope.from_points([ZERO, E[0], E[3]])]
    base = mixed_intersection(polys)
    for perm in itertools.permutations(range(4)):
        assert mixed_intersection([polys[i] for i in perm]) == base
    k = rng.randint(2, 3)
    scaled = [polys[0].scaled(k)] + polys[1:]
    assert mixed_intersection(scaled) == k * base


# --- fans ------------------------------------------------------------------

def test_normal_fan_square_and_simplex():
    sq = RationalPolytope.from_points([(0, 0), (1, 0), (0, 1), (1, 1)])
    F = normal_fan(sq)
    assert set(F.rays) == {(1, 0), (0, 1), (-1, 0), (0, -1)} and len(F.cones) == 4
    F = normal_fan(simplex())
    assert set(F.rays) == set(E) | {(-1, -1, -1, -1)} and len(F.cones) == 5


def test_normal_fan_row7_simplex():
    B = RationalPolytope.from_points([(0, 0, 0, 0), (0, 0, 0, 3), (0, 0, 9, -3), (3, 0, 3, -1), (3, 3, 3, -2)])
    P1 = [[-2, 0, -1, 0, 1], [-1, 1, 0, 1, -1], [-2, 1, 1, 0, 0], [-3, 3, 0, 0, 0]]
    F = normal_fan(B)
    assert set(F.rays) == set(zip(*P1))
    F2 = stellar_subdivision(F, (-1, 0, 0, 0))
    P2 = [[-2, 0, -1, 0, 1, -1], [-1, 1, 0, 1, -1, 0], [-2, 1, 1, 0, 0, 0], [-3, 3, 0, 0, 0, 0]]
    assert set(F2.rays) == set(zip(*P2))
    assert fan_refines(F2, F)


def _unimodular_match(src, dst):
    """Some GL(4, Z) map sends the ray set src onto dst."""
    for perm in itertools.permutations(dst):
        A = sympy.Matrix(src[:4]).T
        B = sympy.Matrix(perm[:4]).T
        if A.det() == 0:
            continue
        M = B * A.inv()
        if not all(x.is_integer for x in M) or abs(M.det()) != 1:
            continue
        if all(tuple(M * sympy.Matrix(s)) == tuple(perm[i]) for i, s in enumerate(src)):
            return True
    return False


def test_normal_fan_row26_simplex_up_to_lattice_map():
    B = RationalPolytope.from_points([(0, 0, 0, 0), (0, 0, 0, 8), (0, 8, 0, 0), (0, 0, 4, 0), (2, 2, 1, 2)])
    P1 = [[0, 0, 1, -1, 3], [1, 0, 2, -1, 1], [0, 1, 2, -1, 1], [0, 0, 3, -1, 1]]
    F = normal_fan(B)
    assert _unimodular_match(list(F.rays), list(zip(*P1)))


def test_stellar_subdivision_p4():
    F = normal_fan(simplex())
    G = stellar_subdivision(F, (1, 1, 0, 0))
    assert len(G.rays) == 6
    assert fan_refines(G, F)
    # the three maximal cones containing e1, e2 each split in two
    assert len(G.cones) == len(F.cones) + 3
    with pytest.raises(PolytopeError):
        stellar_subdivision(Fan(2, ((1, 0), (0, 1)), ((0, 1),)), (-1, -1))


def test_polytope_json():
    js = simplex().to_json()
    assert js["ambient_dim"] == 4 and len(js["vertices"]) == 5
    assert all(len(x) == 2 for v in js["vertices"] for x in v)
