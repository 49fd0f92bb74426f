"""Smoothness of the minimal ambient toric variety and its propagation.

Faces of the positive orthant are index subsets gamma_0 of {0..r-1}; the
toric variety of a chamber tau has the faces with tau° inside Q(gamma_0)°
as its relevant faces.
"""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

from .constraints import Fiber, _as_weight
from .gitfan import Chamber, Cone2, GitFanError, chambers as git_chambers, s_chambers
from .grading import DegreeMatrix, SpecifyingData, det2, generates_group, primitive, same_ray


def _as_cone(tau) -> Cone2:
    return tau.cone if isinstance(tau, Chamber) else tau


def image_cone(Q: DegreeMatrix, subset: Sequence[int]) -> Cone2:
    """The cone Q(gamma_0) spanned by the free parts of the given weights."""
    us = [Q.free[i] for i in subset]
    if not us:
        return Cone2(())
    # weights sit in the pointed effective cone, so the extreme ones span it
    lo = hi = us[0]
    for u in us[1:]:
        if det2(u, lo) > 0:
            lo = u
        if det2(hi, u) > 0:
            hi = u
    if same_ray(lo, hi):
        return Cone2((primitive(lo),))
    return Cone2.of(lo, hi)


def is_relevant(Q: DegreeMatrix, subset: Sequence[int], tau) -> bool:
    """tau° lies in the relative interior of Q(gamma_0)."""
    tau = _as_cone(tau)
    img = image_cone(Q, subset)
    if tau.dim == 2:
        return img.dim == 2 and img.contains_cone(tau)
    if tau.dim == 1:
        if img.dim == 1:
            return img.rays == tau.rays
        return img.dim == 2 and img.contains_interior(tau.rays[0])
    return False


def relevant_faces(Q: DegreeMatrix, tau) -> list[tuple[int, ...]]:
    out = []
    for k in range(1, Q.r + 1):
        for sub in combinations(range(Q.r), k):
            if is_relevant(Q, sub, tau):
                out.append(sub)
    return out


def ambient_obstructions(Q: DegreeMatrix, mu, tau) -> list[tuple[int, ...]]:
    """Relevant faces with fiber size != 1 whose weights miss generating K."""
    fib = Fiber(Q, _as_weight(mu, Q.t))
    bad = []
    for sub in relevant_faces(Q, tau):
        mask = sum(1 << i for i in sub)
        if fib.count(mask, limit=2) != 1 and not generates_group(Q.group, [Q.weights[i] for i in sub]):
            bad.append(sub)
    return bad


def is_mu_ambient_smooth(Q: DegreeMatrix, mu, tau) -> bool:
    return not ambient_obstructions(Q, mu, tau)


def is_base_point_free(Q: DegreeMatrix, mu, tau) -> bool:
    """Every relevant face carries a monomial of degree mu."""
    fib = Fiber(Q, _as_weight(mu, Q.t))
    return all(fib.count(sum(1 << i for i in sub), limit=1) >= 1 for sub in relevant_faces(Q, tau))


def bertini_chamber(Q: DegreeMatrix, mu, chamber: Chamber, prefer=None) -> Chamber | None:
    """A polynomial-ring chamber inside ``chamber`` certifying smoothness.

    It must contain mu (closed) and have a smooth mu-minimal ambient
    variety.  The one containing ``prefer`` in its interior is tried first.
    """
    mu = _as_weight(mu, Q.t)
    cands = [s for s in s_chambers(Q) if chamber.cone.contains_cone(s.cone)]
    if prefer is not None:
        cands.sort(key=lambda s: not s.cone.contains_interior(prefer))
    for s in cands:
        if s.cone.contains(mu.u) and is_mu_ambient_smooth(Q, mu, s):
            return s
    return None


def bertini_smoothness_certificate(sd: SpecifyingData) -> bool:
    from .gitfan import ample_chamber

    try:
        ch = ample_chamber(sd)
    except GitFanError:
        return False
    return bertini_chamber(sd.Q, sd.mu, ch, prefer=sd.ample.u) is not None


def smoothness_via_flops(Q: DegreeMatrix, mu, chambers: Sequence[Chamber] | None = None) -> dict:
    """Map chamber index -> True or "unknown".

    All chambers share smoothness once one of them is certified, since the
    models are connected by flops.
    """
    mu = _as_weight(mu, Q.t)
    chs = list(chambers) if chambers is not None else git_chambers(Q, mu)
    ok = any(bertini_chamber(Q, mu, ch) is not None for ch in chs)
    return {i: (True if ok else "unknown") for i in range(len(chs))}
