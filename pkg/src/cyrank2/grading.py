"""Integer lattice algebra for rank-two gradings.

The grading group is ``K = Z^2 x Z/tZ``.  A degree matrix is a ccw-ordered
list of weights ``(u, zeta)``; specifying data adds the relation degree
``mu`` and an ample class.  Everything here is exact integer arithmetic.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import reduce
from math import gcd
from typing import Iterable, Sequence

from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_decomp


class GradingError(ValueError):
    """Raised for malformed or unsupported grading data."""


def det2(a: Sequence[int], b: Sequence[int]) -> int:
    return a[0] * b[1] - a[1] * b[0]


def is_primitive(u: Sequence[int]) -> bool:
    if u[0] == 0 and u[1] == 0:
        raise GradingError("zero vector has no primitivity")
    return gcd(abs(u[0]), abs(u[1])) == 1


def primitive(u: Sequence[int]) -> tuple[int, int]:
    """Primitive generator of the ray through ``u``."""
    g = gcd(abs(u[0]), abs(u[1]))
    if g == 0:
        raise GradingError("zero vector spans no ray")
    return (u[0] // g, u[1] // g)


def same_ray(a: Sequence[int], b: Sequence[int]) -> bool:
    return det2(a, b) == 0 and a[0] * b[0] + a[1] * b[1] > 0


@dataclass(frozen=True)
class GradingGroup:
    t: int = 1

    def __post_init__(self):
        if self.t < 1:
            raise GradingError(f"torsion order must be >= 1, got {self.t}")

    @property
    def rank(self) -> int:
        return 2

    def label(self) -> str:
        return "Z^2" if self.t == 1 else f"Z^2 x Z/{self.t}Z"


@dataclass(frozen=True, order=True)
class Weight:
    u: tuple[int, int]
    zeta: int = 0

    @classmethod
    def make(cls, u: Sequence[int], zeta: int = 0, t: int = 1) -> "Weight":
        return cls((int(u[0]), int(u[1])), int(zeta) % t)

    def __add__(self, other: "Weight") -> "Weight":
        return Weight((self.u[0] + other.u[0], self.u[1] + other.u[1]), self.zeta + other.zeta)

    def scaled(self, k: int, t: int) -> "Weight":
        return Weight((k * self.u[0], k * self.u[1]), (k * self.zeta) % t)

    def reduced(self, t: int) -> "Weight":
        return Weight(self.u, self.zeta % t)

    def to_json(self) -> dict:
        return {"u": list(self.u), "zeta": self.zeta}

    @classmethod
    def from_json(cls, d: dict, t: int = 1) -> "Weight":
        return cls.make(d["u"], d.get("zeta", 0), t)


def weight_sum(weights: Iterable[Weight], t: int) -> Weight:
    total = reduce(lambda a, b: a + b, weights, Weight((0, 0), 0))
    return total.reduced(t)


@dataclass(frozen=True)
class DegreeMatrix:
    group: GradingGroup
    weights: tuple[Weight, ...]

    @classmethod
    def from_rows(cls, Q0: Sequence[Sequence[int]], zeta: Sequence[int] | None = None,
                  t: int = 1, check: bool = True) -> "DegreeMatrix":
        if len(Q0) != 2 or len(Q0[0]) != len(Q0[1]):
            raise GradingError("free part must have two rows of equal length")
        r = len(Q0[0])
        zeta = [0] * r if zeta is None else list(zeta)
        if len(zeta) != r:
            raise GradingError("torsion row length differs from free part")
        ws = tuple(Weight.make((Q0[0][i], Q0[1][i]), zeta[i], t) for i in range(r))
        dm = cls(GradingGroup(t), ws)
        if check:
            dm.validate()
        return dm

    @property
    def t(self) -> int:
        return self.group.t

    @property
    def r(self) -> int:
        return len(self.weights)

    @property
    def free(self) -> list[tuple[int, int]]:
        return [w.u for w in self.weights]

    @property
    def zetas(self) -> list[int]:
        return [w.zeta for w in self.weights]

    def rows(self) -> list[list[int]]:
        return [[w.u[0] for w in self.weights], [w.u[1] for w in self.weights]]

    def total(self) -> Weight:
        return weight_sum(self.weights, self.t)

    def degree(self, nu: Sequence[int]) -> Weight:
        """Degree ``Q(nu)`` of the monomial ``T^nu``."""
        x = sum(n * w.u[0] for n, w in zip(nu, self.weights))
        y = sum(n * w.u[1] for n, w in zip(nu, self.weights))
        z = sum(n * w.zeta for n, w in zip(nu, self.weights)) % self.t
        return Weight((x, y), z)

    def is_ccw(self) -> bool:
        us = self.free
        return all(det2(us[i], us[j]) >= 0 for i in range(len(us)) for j in range(i + 1, len(us)))

    def is_pointed(self) -> bool:
        us = self.free
        if any(u == (0, 0) for u in us):
            return False
        # pointed iff all weights fit in an open half plane plus boundary rays:
        # in ccw order this means det(u_1, u_r) >= 0 and no two opposite rays
        for a, b in itertools.combinations(us, 2):
            if det2(a, b) == 0 and a[0] * b[0] + a[1] * b[1] < 0:
                return False
        return self.is_ccw()

    def is_almost_free(self) -> bool:
        idx = range(self.r)
        return all(generates_group(self.group, [self.weights[j] for j in idx if j != i])
                   for i in idx)

    def validate(self) -> None:
        if any(w.u == (0, 0) for w in self.weights):
            raise GradingError("weights with zero free part are not allowed")
        if not self.is_ccw():
            raise GradingError("weights are not in counter-clockwise order")
        if not self.is_pointed():
            raise GradingError("grading is not pointed")

    def permuted(self, order: Sequence[int]) -> "DegreeMatrix":
        return DegreeMatrix(self.group, tuple(self.weights[i] for i in order))


@dataclass(frozen=True)
class SpecifyingData:
    Q: DegreeMatrix
    mu: Weight
    ample: Weight

    @property
    def t(self) -> int:
        return self.Q.t

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "Q0": self.Q.rows(),
            "zeta": self.Q.zetas,
            "mu": self.mu.to_json(),
            "ample": self.ample.to_json(),
        }

    @classmethod
    def from_json(cls, d: dict) -> "SpecifyingData":
        try:
            t = int(d["t"])
            Q = DegreeMatrix.from_rows(d["Q0"], d.get("zeta"), t)
            mu = Weight.from_json(d["mu"], t)
            ample = Weight.from_json(d["ample"], t)
        except (KeyError, TypeError, IndexError) as exc:
            raise GradingError(f"malformed specifying data: {exc!r}") from exc
        return cls(Q, mu, ample)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "SpecifyingData":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GradingError(f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise GradingError("specifying data must be a JSON object")
        return cls.from_json(data)


def make_sd(Q0, mu, ample, zeta=None, t=1, mu_zeta=0) -> SpecifyingData:
    """Shorthand constructor used throughout tests and the builtin table."""
    Q = DegreeMatrix.from_rows(Q0, zeta, t)
    return SpecifyingData(Q, Weight.make(mu, mu_zeta, t), Weight.make(ample, 0, t))


# --- integer normal forms -------------------------------------------------

def smith_normal_form(M: Sequence[Sequence[int]]):
    """Return ``(D, U, V)`` with ``U*M*V = D`` and unimodular ``U, V``.

    ``D`` is diagonal with ``d_1 | d_2 | ...``; all three are lists of lists.
    """
    A = Matrix(M)
    if A.rows == 0 or A.cols == 0:
        raise GradingError("empty matrix")
    D, U, V = smith_normal_decomp(A)
    # normalise signs so that the diagonal is non-negative
    for i in range(min(D.rows, D.cols)):
        if D[i, i] < 0:
            D[i, :] = -D[i, :]
            U[i, :] = -U[i, :]
    return D.tolist(), U.tolist(), V.tolist()


def _det3(a, b, c) -> int:
    return (a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0]))


def _minors_gcd(cols: list[tuple[int, ...]], k: int) -> int:
    g = 0
    for sub in itertools.combinations(cols, k):
        g = gcd(g, abs(_det3(*sub)) if k > 2 else abs(det2(*sub)))
        if g == 1:
            return 1
    return g


def subgroup_index(G: GradingGroup, subset: Sequence[Weight]) -> int:
    """Order of ``K / <subset>``, or 0 if the quotient is infinite."""
    if G.t == 1:
        return _minors_gcd([w.u for w in subset], 2) if len(subset) >= 2 else 0
    cols = [(w.u[0], w.u[1], w.zeta) for w in subset] + [(0, 0, G.t)]
    if len(cols) < 3:
        return 0
    return _minors_gcd(cols, 3)


def generates_group(G: GradingGroup, subset: Sequence[Weight]) -> bool:
    """Whether the weights generate ``Z^2 x Z/tZ`` as a group."""
    return subgroup_index(G, subset) == 1


# --- Gale duality ---------------------------------------------------------

def kernel_basis(Q: DegreeMatrix) -> list[list[int]]:
    """A lattice basis (as rows) of ``{x : Q(x) = 0}`` including torsion."""
    r, t = Q.r, Q.t
    rows = Q.rows()
    if t > 1:
        # x in Z^r, y in Z with zeta.x + t y = 0 alongside the free equations
        A = Matrix([rows[0] + [0], rows[1] + [0], Q.zetas + [t]])
    else:
        A = Matrix(rows)
    n_all = A.cols
    D, U, V = smith_normal_decomp(A)
    rank = sum(1 for i in range(min(D.rows, D.cols)) if D[i, i] != 0)
    basis = [list(V[:, j]) for j in range(rank, n_all)]
    basis = [[int(x) for x in b[:r]] for b in basis]
    return basis


def gale_dual(Q: DegreeMatrix) -> list[list[int]]:
    """Matrix ``P`` (``n x r``) whose rows span the kernel of ``Q``.

    Column ``i`` of ``P`` is the ray generator ``v_i`` of the toric fan.
    """
    basis = kernel_basis(Q)
    if len(basis) != Q.r - 2:
        raise GradingError(f"kernel rank {len(basis)} != r - 2 = {Q.r - 2}")
    return [list(row) for row in basis]


def degree_matrix_of_fan(P: Sequence[Sequence[int]]) -> tuple[DegreeMatrix, list[int]]:
    """Degree data of the cokernel of ``P^T`` for an ``n x r`` ray matrix.

    Returns the degree matrix in counter-clockwise order together with the
    permutation used (entry ``k`` is the original column of weight ``k``).
    Only rank-two gradings with at most one cyclic factor are supported.
    """
    n, r = len(P), len(P[0])
    PT = [[P[k][i] for k in range(n)] for i in range(r)]
    D, U, _ = smith_normal_form(PT)
    diag = [D[i][i] for i in range(n)]
    if any(d == 0 for d in diag):
        raise GradingError("rays do not span the ambient space")
    tors = [i for i in range(n) if diag[i] > 1]
    if r - n != 2 or len(tors) > 1:
        raise GradingError("class group is not of the form Z^2 x Z/tZ")
    t = diag[tors[0]] if tors else 1
    cols = []
    for j in range(r):
        u = (U[n][j], U[n + 1][j])
        z = U[tors[0]][j] % t if tors else 0
        cols.append((j, Weight(u, z)))
    ordered = ccw_sorted(cols, key=lambda c: c[1].u)
    Q = DegreeMatrix(GradingGroup(t), tuple(w for _, w in ordered))
    if not Q.is_pointed():
        raise GradingError("grading is not pointed")
    return Q, [j for j, _ in ordered]


def degree_of(P: Sequence[Sequence[int]], a: Sequence[int]) -> Weight:
    """Class of the vector ``a`` in the cokernel of ``P^T`` (same basis as above)."""
    Q, order = degree_matrix_of_fan(P)
    nu = [a[j] for j in order]
    return Q.degree(nu)


def ray_vectors(P: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    return [tuple(P[k][i] for k in range(len(P))) for i in range(len(P[0]))]


# --- admissible coordinate changes ---------------------------------------

def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (abs(a), 1 if a >= 0 else -1, 0)
    g, x, y = _ext_gcd(b, a % b)
    return g, y, x - (a // b) * y


def _frame(p: tuple[int, int], q: tuple[int, int], reverse: bool):
    """Unimodular map sending ray ``p`` to (1,0) and ``q`` to (a,b), 0<=a<b."""
    x, y = p
    g, s, tt = _ext_gcd(x, y)
    assert g == 1
    if reverse:
        A = [[s, tt], [y, -x]]
    else:
        A = [[s, tt], [-y, x]]
    qa = A[0][0] * q[0] + A[0][1] * q[1]
    qb = A[1][0] * q[0] + A[1][1] * q[1]
    assert qb > 0
    k = -(qa // qb)
    return [[A[0][0] + k * A[1][0], A[0][1] + k * A[1][1]], [A[1][0], A[1][1]]]


def apply_matrix(A, u: Sequence[int]) -> tuple[int, int]:
    return (A[0][0] * u[0] + A[0][1] * u[1], A[1][0] * u[0] + A[1][1] * u[1])


def _units(t: int) -> list[int]:
    return [c for c in range(1, t + 1) if gcd(c, t) == 1] if t > 1 else [1]


def ccw_sorted(items: list, key=lambda w: w.u) -> list:
    """Sort items whose free parts lie in a pointed cone, counter-clockwise."""
    import functools

    def cmp(a, b):
        ua, ub = key(a), key(b)
        d = det2(ua, ub)
        if d > 0:
            return -1
        if d < 0:
            return 1
        return 0

    return sorted(items, key=functools.cmp_to_key(cmp))


def frames(Q: DegreeMatrix):
    """The two unimodular frames normalising the effective cone.

    Yields ``(A, reverse)``; for ``reverse`` the map has determinant -1 and
    the weight order has to be reversed afterwards.
    """
    us = Q.free
    p1, pr = primitive(us[0]), primitive(us[-1])
    if det2(p1, pr) <= 0:
        raise GradingError("effective cone is not two-dimensional")
    yield _frame(p1, pr, False), False
    yield _frame(pr, p1, True), True


def transform_weights(Q: DegreeMatrix, A, c: int, phi: tuple[int, int], reverse: bool):
    t = Q.t

    def tr(w: Weight) -> Weight:
        u = apply_matrix(A, w.u)
        return Weight(u, (c * w.zeta + phi[0] * u[0] + phi[1] * u[1]) % t)

    ws = [tr(w) for w in Q.weights]
    if reverse:
        ws = ws[::-1]
    return ws, tr


def torsion_automorphisms(t: int):
    for c in _units(t):
        for phi in itertools.product(range(t), repeat=2):
            yield c, phi


def _normal_order(ws: list[Weight]) -> list[Weight]:
    # ccw order, then by height on each ray, then by torsion residue
    out = ccw_sorted(ws)
    groups, cur = [], []
    for w in out:
        if cur and not same_ray(cur[-1].u, w.u):
            groups.append(cur)
            cur = []
        cur.append(w)
    groups.append(cur)
    res = []
    for g in groups:
        res.extend(sorted(g, key=lambda w: (abs(w.u[0]) + abs(w.u[1]), w.zeta)))
    return res


def canonical_form(sd: SpecifyingData) -> SpecifyingData:
    """Least representative of ``sd`` under admissible coordinate changes.

    The orbit runs over unimodular changes of the free part (normalised so
    that one boundary ray of the effective cone becomes (1,0)), automorphisms
    of K acting on torsion residues, and swaps of weights sharing a ray.  The
    ample class is replaced by the sum of the primitive generators of its
    chamber, so equivalent data give identical results.
    """
    from .gitfan import chamber_containing, GitFanError

    Q = sd.Q
    t = Q.t
    best = None
    for A, reverse in frames(Q):
        for c, phi in torsion_automorphisms(t):
            ws, tr = transform_weights(Q, A, c, phi, reverse)
            ws = _normal_order(ws)
            mu = tr(sd.mu)
            Qn = DegreeMatrix(Q.group, tuple(ws))
            try:
                ch = chamber_containing(Qn, mu, tr(sd.ample).u)
                a, b = ch.cone.rays
                amp = Weight((a[0] + b[0], a[1] + b[1]), 0)
            except GitFanError:
                amp = Weight(tr(sd.ample).u, 0)
            key = (tuple((w.u, w.zeta) for w in ws), (mu.u, mu.zeta), amp.u)
            if best is None or key < best[0]:
                best = (key, SpecifyingData(Qn, mu, amp))
    return best[1]


def canonical_key(sd: SpecifyingData) -> str:
    return canonical_form(sd).dumps()
