import itertools
import random

import pytest
from hypothesis import given, strategies as st

from cyrank2.grading import (
    DegreeMatrix,
    GradingError,
    GradingGroup,
    SpecifyingData,
    Weight,
    canonical_form,
    det2,
    gale_dual,
    generates_group,
    is_primitive,
    make_sd,
    smith_normal_form,
    subgroup_index,
)

import oracles

ints = st.integers(-50, 50)
pairs = st.tuples(ints, ints)


def _matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def _det(M):
    import sympy

    return sympy.Matrix(M).det()


# --- det2 -----------------------------------------------------------------

@pytest.mark.parametrize("a,b,expected", [((1, 0), (0, 1), 1), ((1, 1), (4, 3), -1), ((2, 1), (4, 2), 0)])
def test_det2_examples(a, b, expected):
    assert det2(a, b) == expected


@given(pairs, pairs)
def test_det2_antisymmetric(a, b):
    assert det2(a, b) == -det2(b, a)
    assert det2(a, a) == 0


# --- Smith normal form ----------------------------------------------------

def test_snf_diag_2_3():
    D, U, V = smith_normal_form([[2, 0], [0, 3]])
    assert D == [[1, 0], [0, 6]]


def test_snf_identity_and_zero():
    I3 = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    assert smith_normal_form(I3)[0] == I3
    assert smith_normal_form([[0, 0], [0, 0]])[0] == [[0, 0], [0, 0]]


@given(st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=2, max_size=3))
def test_snf_properties(M):
    D, U, V = smith_normal_form(M)
    assert _matmul(_matmul(U, M), V) == D
    assert abs(_det(U)) == 1 and abs(_det(V)) == 1
    diag = [D[i][i] for i in range(min(len(D), len(D[0])))]
    assert all(D[i][j] == 0 for i in range(len(D)) for j in range(len(D[0])) if i != j)
    for a, b in zip(diag, diag[1:]):
        assert (b == 0) if a == 0 else b % a == 0


# --- group generation -----------------------------------------------------

def test_generates_group_examples():
    assert generates_group(GradingGroup(1), [Weight((1, 0)), Weight((0, 1))])
    assert not generates_group(GradingGroup(3), [Weight((1, 0), 0), Weight((0, 1), 0)])
    assert generates_group(GradingGroup(3), [Weight((1, 0), 0), Weight((1, 0), 1), Weight((0, 1), 0)])


def test_generates_group_matches_enumeration_on_table(table):
    checked = 0
    for sd in table.values():
        Q = sd.Q
        for k in range(1, Q.r + 1):
            for sub in itertools.combinations(Q.weights, k):
                expected = oracles.quotient_order([(w.u, w.zeta) for w in sub], Q.t)
                assert subgroup_index(Q.group, sub) == expected
                assert generates_group(Q.group, sub) == (expected == 1)
                checked += 1
    assert checked == 30 * 63


def test_almost_free_means_any_five_generate(table):
    for sd in table.values():
        Q = sd.Q
        assert Q.is_almost_free()
        for i in range(Q.r):
            assert generates_group(Q.group, [w for j, w in enumerate(Q.weights) if j != i])


@given(st.lists(st.tuples(st.tuples(st.integers(-6, 6), st.integers(-6, 6)), st.integers(0, 5)),
                min_size=1, max_size=4), st.integers(1, 4))
def test_generates_group_random(gens, t):
    ws = [Weight(u, z % t) for u, z in gens]
    assert subgroup_index(GradingGroup(t), ws) == oracles.quotient_order([(w.u, w.zeta) for w in ws], t)


# --- primitivity ----------------------------------------------------------

def test_is_primitive():
    assert is_primitive((1, 0))
    assert not is_primitive((3, 3))
    assert is_primitive((2, 3))
    with pytest.raises(GradingError):
        is_primitive((0, 0))


# --- canonical form -------------------------------------------------------

def test_canonical_form_row1_fixed(table):
    sd = table[1]
    assert canonical_form(sd) == sd


def test_canonical_form_swapped_rows_reversed(table):
    sd = table[1]
    Q0 = sd.Q.rows()
    swapped = [Q0[1][::-1], Q0[0][::-1]]
    other = make_sd(swapped, (3, 3), (1, 1))
    assert canonical_form(other) == canonical_form(sd)


def test_canonical_form_scaled_basis():
    # not almost free, so built without validation
    Q = DegreeMatrix.from_rows([[2, 2, 2, 0, 0, 0], [0, 0, 0, 1, 1, 1]], check=False)
    cf = canonical_form(SpecifyingData(Q, Weight((6, 3)), Weight((2, 1))))
    assert cf.Q.free[0] == (1, 0)
    assert canonical_form(cf) == cf


def _random_change(sd, rnd):
    """Apply a random admissible coordinate change."""
    t = sd.t
    A = [[1, 0], [0, 1]]
    for _ in range(rnd.randint(0, 4)):
        k = rnd.randint(-3, 3)
        E = [[1, k], [0, 1]] if rnd.random() < 0.5 else [[1, 0], [k, 1]]
        A = _matmul(A, E)
    flip = rnd.random() < 0.5
    if flip:
        A = _matmul(A, [[0, 1], [1, 0]])
    units = [c for c in range(1, t + 1) if __import__("math").gcd(c, t) == 1] or [1]
    c = rnd.choice(units)
    phi = (rnd.randrange(t), rnd.randrange(t))

    def tr(w):
        u = (A[0][0] * w.u[0] + A[0][1] * w.u[1], A[1][0] * w.u[0] + A[1][1] * w.u[1])
        return Weight(u, (c * w.zeta + phi[0] * u[0] + phi[1] * u[1]) % t)

    ws = [tr(w) for w in sd.Q.weights]
    if flip:
        ws = ws[::-1]
    # shuffle weights on a common ray
    groups, cur = [], []
    for w in ws:
        if cur and det2(cur[-1].u, w.u) != 0:
            groups.append(cur)
            cur = []
        cur.append(w)
    groups.append(cur)
    ws = []
    for g in groups:
        rnd.shuffle(g)
        ws.extend(g)
    amp = tr(sd.ample)
    return SpecifyingData(DegreeMatrix(sd.Q.group, tuple(ws)), tr(sd.mu), Weight(amp.u, 0))


def test_canonical_form_idempotent_on_random_orbits(table, seed):
    rnd = random.Random(seed)
    rows = list(table.values())
    for _ in range(1000):
        sd = rnd.choice(rows)
        moved = _random_change(sd, rnd)
        cf = canonical_form(moved)
        assert canonical_form(cf) == cf
        assert cf == canonical_form(sd)


def test_canonical_form_separates_rows(table):
    keys = {canonical_form(sd).dumps() for sd in table.values()}
    assert len(keys) == 30


# --- Gale duality ---------------------------------------------------------

def _kernel_ok(Q, P):
    for row in P:
        for q in Q.rows():
            assert sum(a * b for a, b in zip(q, row)) == 0
        assert sum(a * z for a, z in zip(row, Q.zetas)) % Q.t == 0


def test_gale_dual_row1(table):
    Q = table[1].Q
    P = gale_dual(Q)
    assert len(P) == 4 and all(len(r) == 6 for r in P)
    _kernel_ok(Q, P)
    D, _, _ = smith_normal_form(P)
    assert [D[i][i] for i in range(4)] == [1, 1, 1, 1]
    # columns realise two copies of the P^2 fan: v1+v2+v3 = 0 = v4+v5+v6
    cols = list(zip(*P))
    assert all(sum(c[k] for c in cols[:3]) == 0 for k in range(4))
    assert all(sum(c[k] for c in cols[3:]) == 0 for k in range(4))


def test_gale_dual_row2_index_three(table):
    Q = table[2].Q
    P = gale_dual(Q)
    _kernel_ok(Q, P)
    free = DegreeMatrix.from_rows(Q.rows())
    P1 = gale_dual(free)
    # the torsion kernel has index 3 in the free kernel
    from cyrank2.polytope import lattice_index

    assert lattice_index(P) == 3 * lattice_index(P1)


def test_gale_dual_all_rows(table):
    for sd in table.values():
        P = gale_dual(sd.Q)
        assert len(P) == 4
        _kernel_ok(sd.Q, P)


def test_gale_dual_rank_error():
    Q = DegreeMatrix.from_rows([[1, 1, 1], [0, 0, 0]], check=False)
    with pytest.raises(GradingError):
        gale_dual(Q)


# --- validation and serialisation -----------------------------------------

def test_zero_weight_rejected():
    with pytest.raises(GradingError):
        DegreeMatrix.from_rows([[1, 0, 0], [0, 0, 1]])


def test_json_roundtrip(table):
    for sd in table.values():
        assert SpecifyingData.from_json(sd.to_json()) == sd
        assert SpecifyingData.loads(sd.dumps()) == sd
