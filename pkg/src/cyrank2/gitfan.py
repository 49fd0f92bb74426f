"""Two-dimensional cone geometry of a rank-two grading.

All cones are stored by primitive integer generators and compared with
2x2 determinants only.  Weight indices are 0-based in Python and 1-based
in the JSON export.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .grading import DegreeMatrix, SpecifyingData, det2, primitive, same_ray


class GitFanError(ValueError):
    pass


@dataclass(frozen=True)
class Cone2:
    """A pointed cone in Q^2: a 2-dim cone, a ray, or the zero cone."""
    rays: tuple[tuple[int, int], ...]

    @classmethod
    def of(cls, *gens: Sequence[int]) -> "Cone2":
        gens = [primitive(g) for g in gens]
        if len(gens) == 2 and gens[0] == gens[1]:
            gens = gens[:1]
        if len(gens) == 2 and det2(gens[0], gens[1]) <= 0:
            raise GitFanError(f"generators {gens} are not strictly counter-clockwise")
        return cls(tuple(gens))

    @property
    def dim(self) -> int:
        return len(self.rays)

    def contains(self, v: Sequence[int]) -> bool:
        if v[0] == 0 and v[1] == 0:
            return True
        if self.dim == 0:
            return False
        if self.dim == 1:
            return same_ray(self.rays[0], v)
        a, b = self.rays
        return det2(a, v) >= 0 and det2(v, b) >= 0

    def contains_interior(self, v: Sequence[int]) -> bool:
        if self.dim == 2:
            a, b = self.rays
            return det2(a, v) > 0 and det2(v, b) > 0
        if self.dim == 1:
            return same_ray(self.rays[0], v)
        return False

    def contains_cone(self, other: "Cone2") -> bool:
        return all(self.contains(r) for r in other.rays)

    def on_boundary(self, v: Sequence[int]) -> bool:
        return self.contains(v) and not self.contains_interior(v)

    def to_json(self):
        return [list(r) for r in self.rays]


@dataclass(frozen=True)
class Chamber:
    cone: Cone2
    lambda_minus: tuple[int, ...]
    lambda_plus: tuple[int, ...]
    interior: tuple[int, ...]
    boundary: tuple[tuple[int, ...], tuple[int, ...]]

    def to_json(self) -> dict:
        return {
            "cone": self.cone.to_json(),
            "lambda_minus": [i + 1 for i in self.lambda_minus],
            "lambda_plus": [i + 1 for i in self.lambda_plus],
        }


def effective_cone(Q: DegreeMatrix) -> Cone2:
    us = Q.free
    if all(same_ray(us[0], u) for u in us):
        return Cone2.of(us[0])
    return Cone2.of(us[0], us[-1])


def moving_cone(Q: DegreeMatrix) -> Cone2:
    """Intersection of the cones spanned by all but one weight.

    With ccw-ordered weights this is the cone over the second and the
    second-to-last weight; it collapses if those are not ccw.
    """
    us = Q.free
    if Q.r < 3:
        return Cone2(())
    a, b = us[1], us[-2]
    d = det2(a, b)
    if d > 0:
        return Cone2.of(a, b)
    if d == 0 and same_ray(a, b):
        return Cone2.of(a)
    return Cone2(())


def distinct_rays(Q: DegreeMatrix) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    for u in Q.free:
        p = primitive(u)
        if not out or out[-1] != p:
            out.append(p)
    return out


def weights_on_ray(Q: DegreeMatrix, ray: Sequence[int]) -> list[int]:
    return [i for i, u in enumerate(Q.free) if same_ray(u, ray)]


def make_chamber(Q: DegreeMatrix, cone: Cone2) -> Chamber:
    a, b = cone.rays
    minus = tuple(i for i, u in enumerate(Q.free) if det2(u, a) >= 0)
    plus = tuple(i for i, u in enumerate(Q.free) if det2(b, u) >= 0)
    inner = tuple(i for i, u in enumerate(Q.free) if cone.contains_interior(u))
    bd = (tuple(weights_on_ray(Q, a)), tuple(weights_on_ray(Q, b)))
    return Chamber(cone, minus, plus, inner, bd)


def _is_git_cone(Q: DegreeMatrix, mu, a, b) -> bool:
    """The case split for a candidate cone(a, b) between weight rays."""
    eta = Cone2.of(a, b)
    inner = [u for u in Q.free if eta.contains_interior(u)]
    na, nb = len(weights_on_ray(Q, a)), len(weights_on_ray(Q, b))
    if same_ray(mu, a) and na >= 2 and not inner:
        return True
    if same_ray(mu, b) and nb >= 2 and not inner:
        return True
    if eta.contains_interior(mu):
        return not inner or (len(inner) == 1 and same_ray(inner[0], mu))
    if not eta.contains(mu):
        return not inner
    return False


def chambers(Q: DegreeMatrix, mu) -> list[Chamber]:
    """Full-dimensional GIT chambers of the hypersurface inside Mov."""
    mu_u = mu.u if hasattr(mu, "u") else tuple(mu)
    eff = effective_cone(Q)
    if eff.dim < 2 or not eff.contains_interior(mu_u):
        raise GitFanError("mu is not in the interior of the effective cone")
    mov = moving_cone(Q)
    if mov.dim < 2:
        return []
    rays = [r for r in distinct_rays(Q) if mov.contains(r)]
    out = []
    for i in range(len(rays)):
        for j in range(i + 1, len(rays)):
            if _is_git_cone(Q, mu_u, rays[i], rays[j]):
                out.append(make_chamber(Q, Cone2.of(rays[i], rays[j])))
    # the case split can only produce interior-disjoint cones, keep ccw order
    out.sort(key=lambda c: rays.index(c.cone.rays[0]))
    return out


def s_chambers(Q: DegreeMatrix) -> list[Chamber]:
    """Chambers of the polynomial ring: cones between consecutive weight rays in Mov."""
    mov = moving_cone(Q)
    if mov.dim < 2:
        return []
    rays = [r for r in distinct_rays(Q) if mov.contains(r)]
    return [make_chamber(Q, Cone2.of(rays[i], rays[i + 1])) for i in range(len(rays) - 1)]


def _locate(chs: list[Chamber], Q: DegreeMatrix, u) -> Chamber:
    mov = moving_cone(Q)
    if mov.dim < 2 or not mov.contains_interior(u):
        raise GitFanError(f"class {tuple(u)} is not in the interior of the moving cone")
    for ch in chs:
        if ch.cone.contains_interior(u):
            return ch
    raise GitFanError(f"wall class {tuple(u)}")


def chamber_containing(Q: DegreeMatrix, mu, u: Sequence[int]) -> Chamber:
    return _locate(chambers(Q, mu), Q, u)


def s_chamber_containing(Q: DegreeMatrix, u: Sequence[int]) -> Chamber:
    return _locate(s_chambers(Q), Q, u)


def ample_chamber(sd: SpecifyingData) -> Chamber:
    return chamber_containing(sd.Q, sd.mu, sd.ample.u)


def mu_is_ample(sd: SpecifyingData) -> bool:
    return ample_chamber(sd).cone.contains_interior(sd.mu.u)


def chambers_json(chs: list[Chamber]) -> list[dict]:
    return [c.to_json() for c in chs]
