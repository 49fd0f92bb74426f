"""Bounded search for smooth Calabi-Yau hypersurface Cox rings of rank two.

The search runs in three stages:
- a compiled sweep over free parts in normal form;
- torsion lifts of the survivors;
- a verification pipeline that certifies or rejects each candidate.

Accepted data are deduplicated by canonical form and compared with the
shipped table.
"""

from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass, field
from importlib import resources
from math import gcd
from typing import Iterable, Iterator, Sequence

import numpy as np

from .constraints import (
    is_weakly_calabi_yau,
    lemma_three_generate,
    lemma_two_faces,
    mu_in_window,
    three_generate_hypothesis,
    torsion_bound,
)
from .factoriality import (
    check_minimal_generation,
    check_normality_bechtold,
    factoriality_route,
    find_prime_binomial_witnesses,
    not_prime_certificate,
    variables_prime,
)
from .gitfan import GitFanError, chambers, distinct_rays, mu_is_ample
from .grading import (
    DegreeMatrix,
    GradingGroup,
    SpecifyingData,
    Weight,
    canonical_form,
    det2,
    same_ray,
    torsion_automorphisms,
)
from .smoothness import bertini_smoothness_certificate, is_mu_ambient_smooth, smoothness_via_flops

CONSTELLATIONS = {
    "I": (3, 3),
    "II": (2, 2, 2),
    "III": (1, 2, 3),
    "IV": (1, 1, 2, 2),
    "V": (1, 1, 1, 3),
    "VI": (1, 1, 1, 1, 2),
    "VII": (1, 1, 1, 1, 1, 1),
}

REJECTED_PARTITIONS = {
    (6,): "Mov one-dimensional",
    (1, 5): "Mov one-dimensional",
    (2, 4): "mu on boundary",
    (1, 1, 4): "Mov one-dimensional or mu on boundary",
}


def constellation_partitions() -> dict:
    return {"admissible": dict(CONSTELLATIONS), "rejected": dict(REJECTED_PARTITIONS)}


def constellation_of(Q: DegreeMatrix) -> str | None:
    """Label of the partition given by the number of weights on each ray."""
    counts = [sum(1 for u in Q.free if same_ray(u, ray)) for ray in distinct_rays(Q)]
    part = tuple(sorted(counts))
    for label, p in CONSTELLATIONS.items():
        if p == part:
            return label
    return None


@dataclass(frozen=True)
class SearchConfig:
    B: int = 9
    torsion_max: int = 3
    constellations: tuple = tuple(CONSTELLATIONS)
    jobs: int = 1

    def __post_init__(self):
        if self.B < 1:
            raise ValueError("entry bound must be positive")
        if self.torsion_max < 1:
            raise ValueError("torsion_max must be positive")
        bad = set(self.constellations) - set(CONSTELLATIONS)
        if bad:
            raise ValueError(f"unknown constellations: {sorted(bad)}")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")


# --- free sweep -----------------------------------------------------------

def frame_points(a: int, b: int, B: int) -> np.ndarray:
    """Lattice points of cone((1,0), (a,b)) in [0,B]^2, ccw then by height."""
    pts = [(x, y) for x in range(B + 1) for y in range(B + 1)
           if (x, y) != (0, 0) and x * b - y * a >= 0]

    def cmp(p, q):
        d = det2(p, q)
        if d:
            return -1 if d > 0 else 1
        return (p[0] + p[1]) - (q[0] + q[1])

    pts.sort(key=functools.cmp_to_key(cmp))
    return np.array(pts, dtype=np.int64)


def frame_list(B: int) -> list[tuple[int, int]]:
    """Second boundary rays (a, b), 0 <= a < b, of the normal form."""
    return [(a, b) for b in range(1, B + 1) for a in range(b) if gcd(a, b) == 1]


def _sweep_frame(args) -> list[tuple[tuple, int]]:
    from ._kernel import search_frame

    a, b, B, modes = args
    P = frame_points(a, b, B)
    ray0 = np.array([i for i in range(len(P)) if P[i, 1] == 0], np.int64)
    rayL = np.array([i for i in range(len(P)) if P[i, 0] * b - P[i, 1] * a == 0], np.int64)
    cap = 1 << 14
    while True:
        out = np.zeros((cap, 7), np.int64)
        n = search_frame(P, ray0, rayL, modes, out, cap)
        if n <= cap:
            break
        cap = n
    return [(tuple((int(P[k, 0]), int(P[k, 1])) for k in row[:6]), int(row[6])) for row in out[:n]]


def free_survivors(cfg: SearchConfig) -> list[tuple[tuple, int]]:
    """Free weight tuples passing the compiled filters, with mode bits.

    Bit 0: all tests for K = Z^2 pass.  Bit 1: the tests that hold for every
    torsion order pass, so torsion lifts are worth trying.
    """
    modes = 1 | (2 if cfg.torsion_max > 1 else 0)
    tasks = [(a, b, cfg.B, modes) for a, b in frame_list(cfg.B)]
    if cfg.jobs > 1:
        from multiprocessing import Pool

        with Pool(cfg.jobs) as pool:
            parts = pool.map(_sweep_frame, tasks, chunksize=1)
    else:
        parts = [_sweep_frame(tk) for tk in tasks]
    return [item for part in parts for item in part]


# --- torsion lifts --------------------------------------------------------

def _ray_groups(free: Sequence[tuple[int, int]]) -> list[list[int]]:
    groups: list[list[int]] = []
    for i, u in enumerate(free):
        if groups and free[groups[-1][0]] == u:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def _least_residues(free, zeta, t: int, groups) -> tuple:
    best = None
    for c, phi in torsion_automorphisms(t):
        z = [(c * zeta[i] + phi[0] * u[0] + phi[1] * u[1]) % t for i, u in enumerate(free)]
        for g in groups:
            vals = sorted(z[i] for i in g)
            for i, v in zip(g, vals):
                z[i] = v
        key = tuple(z)
        if best is None or key < best:
            best = key
    return best


def torsion_lifts(free: Sequence[tuple[int, int]], t: int) -> Iterator[DegreeMatrix]:
    """Almost free lifts of a free part to K = Z^2 x Z/tZ, one per orbit.

    Orbits are taken under automorphisms of the torsion part and swaps of
    equal free weights.
    """
    G = GradingGroup(t)
    groups = _ray_groups(free)
    for zeta in itertools.product(range(t), repeat=len(free)):
        if any(list(zeta[i] for i in g) != sorted(zeta[i] for i in g) for g in groups):
            continue
        if _least_residues(free, zeta, t, groups) != zeta:
            continue
        Q = DegreeMatrix(G, tuple(Weight(u, z) for u, z in zip(free, zeta)))
        if Q.is_almost_free():
            yield Q


# --- candidates -----------------------------------------------------------

def chamber_candidates(Q: DegreeMatrix, mu: Weight) -> list[SpecifyingData]:
    """One specifying datum per chamber, ample class = sum of its rays."""
    out = []
    for ch in chambers(Q, mu):
        a, b = ch.cone.rays
        out.append(SpecifyingData(Q, mu, Weight((a[0] + b[0], a[1] + b[1]), 0)))
    return out


def _locally_factorial_everywhere(Q: DegreeMatrix, mu: Weight) -> bool:
    try:
        chs = chambers(Q, mu)
    except GitFanError:
        return False
    return bool(chs) and all(is_mu_ambient_smooth(Q, mu, ch) for ch in chs)


def enumerate_candidates(cfg: SearchConfig, survivors=None) -> Iterator[SpecifyingData]:
    """Candidates of the bounded search, one per chamber, in sweep order."""
    if survivors is None:
        survivors = free_survivors(cfg)
    wanted = set(cfg.constellations)
    for free, flags in survivors:
        Q1 = DegreeMatrix(GradingGroup(1), tuple(Weight(u, 0) for u in free))
        if constellation_of(Q1) not in wanted:
            continue
        mu1 = Q1.total()
        if flags & 1:
            yield from chamber_candidates(Q1, mu1)
        if not flags & 2:
            continue
        allowed, _ = torsion_bound(Q1, mu1, t_max=cfg.torsion_max)
        for t in sorted(allowed - {1}):
            for Q in torsion_lifts(free, t):
                mu = Q.total()
                if _locally_factorial_everywhere(Q, mu):
                    yield from chamber_candidates(Q, mu)


# --- verification ---------------------------------------------------------

@dataclass
class VerificationReport:
    sd: SpecifyingData
    verdict: str = "unresolved"
    reason: str | None = None
    weakly_cy: bool | None = None
    window: bool | None = None
    lemmas: dict = field(default_factory=dict)
    torsion: list | None = None
    minimal: bool | None = None
    locally_factorial: bool | None = None
    witnesses: dict | None = None
    primes: dict | None = None
    route: dict | None = None
    normality: bool | None = None
    smooth: dict | None = None
    invariants: dict | None = None

    @property
    def accepted(self) -> bool:
        return self.verdict == "accepted"

    def to_json(self) -> dict:
        wit = None
        if self.witnesses is not None:
            wit = {str(i): (None if w is None else [list(w[0]), list(w[1])]) for i, w in self.witnesses.items()}
        inv = None
        if self.invariants is not None:
            inv = dict(self.invariants)
            inv["mu3"] = str(inv["mu3"])
            inv["anticanonical"] = inv["anticanonical"].to_json()
        return {
            "sd": self.sd.to_json(),
            "verdict": self.verdict,
            "reason": self.reason,
            "weakly_cy": self.weakly_cy,
            "window": self.window,
            "lemmas": self.lemmas,
            "torsion": self.torsion,
            "minimal": self.minimal,
            "locally_factorial": self.locally_factorial,
            "witnesses": wit,
            "primes": None if self.primes is None else {str(i): v for i, v in self.primes.items()},
            "route": self.route,
            "normality": self.normality,
            "smooth": self.smooth,
            "invariants": inv,
        }


def _lemma_failures(Q: DegreeMatrix, mu: Weight, chs) -> list[dict]:
    bad = []
    r = Q.r
    for n, ch in enumerate(chs):
        for i, j in itertools.combinations(range(r), 2):
            rep = lemma_two_faces(Q, mu, ch, i, j)
            if rep.applicable and not rep.holds:
                bad.append({"chamber": n, **rep.to_json()})
        for i, j, k in itertools.combinations(range(r), 3):
            if three_generate_hypothesis(Q, mu, ch, i, j, k) is None:
                continue
            rep = lemma_three_generate(Q, mu, ch, i, j, k)
            if not rep.holds:
                bad.append({"chamber": n, **rep.to_json()})
    return bad


def _reject(rep: VerificationReport, reason: str) -> VerificationReport:
    rep.verdict = "rejected"
    rep.reason = reason
    return rep


def verify_candidate(sd: SpecifyingData, invariants: bool = False) -> VerificationReport:
    """Run the certification pipeline; the first failing check decides."""
    from .invariants import invariant_row

    Q, mu = sd.Q, sd.mu
    rep = VerificationReport(sd)
    rep.weakly_cy = is_weakly_calabi_yau(Q, mu)
    if not rep.weakly_cy:
        return _reject(rep, "not weakly Calabi-Yau")
    if not Q.is_almost_free():
        return _reject(rep, "grading not almost free")
    rep.window = mu_in_window(Q, mu)
    if not rep.window:
        return _reject(rep, "mu outside the window")
    try:
        chs = chambers(Q, mu)
        mu_is_ample(sd)
    except GitFanError as exc:
        return _reject(rep, f"chamber structure: {exc}")
    if not chs:
        return _reject(rep, "no full-dimensional chamber")
    bad = _lemma_failures(Q, mu, chs)
    rep.lemmas = {"failures": bad}
    if bad:
        return _reject(rep, "twofaces/threegenerate failure")
    allowed, _ = torsion_bound(Q, mu, chs, t_max=max(Q.t, 2))
    rep.torsion = sorted(allowed)
    if Q.t not in allowed:
        return _reject(rep, "torsion order excluded")
    rep.minimal = check_minimal_generation(Q, mu)
    if not rep.minimal:
        return _reject(rep, "relation is not minimal")
    rep.locally_factorial = all(is_mu_ambient_smooth(Q, mu, ch) for ch in chs)
    if not rep.locally_factorial:
        return _reject(rep, "not locally factorial")
    rep.witnesses = find_prime_binomial_witnesses(Q, mu)
    rep.primes = variables_prime(Q, mu, rep.witnesses)
    for i in range(Q.r):
        why = not_prime_certificate(Q, mu, i)
        if why is not None:
            return _reject(rep, f"variable T{i + 1} not prime: {why}")
    route = factoriality_route(sd, rep.witnesses)
    rep.route = route.to_json()
    if route.route == "unresolved":
        rep.reason = "factoriality unresolved"
        return rep
    for i, kind in rep.primes.items():
        if kind is None or (kind == "indecomposable" and route.route != "dolgachev"):
            return _reject(rep, f"variable T{i + 1} not shown prime")
    rep.normality = check_normality_bechtold(Q)
    if not rep.normality:
        return _reject(rep, "normality criterion fails")
    bertini = bertini_smoothness_certificate(sd)
    flops = smoothness_via_flops(Q, mu, chs)
    rep.smooth = {"bertini": bertini, "flops": all(v is True for v in flops.values())}
    if not (bertini or rep.smooth["flops"]):
        return _reject(rep, "smoothness not certified")
    if invariants:
        rep.invariants = invariant_row(sd)
    rep.verdict = "accepted"
    return rep


# --- the table ------------------------------------------------------------

@dataclass(frozen=True)
class TableRow:
    no: int
    label: str
    sd: SpecifyingData
    mu_ample: bool

    @property
    def canonical(self) -> SpecifyingData:
        return canonical_form(self.sd)


@functools.lru_cache(maxsize=1)
def builtin_table() -> tuple[TableRow, ...]:
    """The thirty rows as printed, with the check marks for mu ample."""
    text = resources.files("cyrank2.data").joinpath("table.json").read_text()
    rows = []
    for d in json.loads(text):
        rows.append(TableRow(d["no"], d["label"], SpecifyingData.from_json(d), bool(d["mu_ample"])))
    return tuple(rows)


@functools.lru_cache(maxsize=1)
def builtin_keys() -> dict[str, int]:
    return {canonical_form(row.sd).dumps(): row.no for row in builtin_table()}


def clgroup_label(t: int) -> str:
    return "Z^2" if t == 1 else f"Z^2+Z/{t}Z"


def csv_rows(sds: Iterable[SpecifyingData], numbers: Sequence[int] | None = None) -> list[list[str]]:
    """Rows for the table CSV: no, clgroup, Q, mu, u."""
    out = []
    for n, sd in enumerate(sds, 1):
        no = numbers[n - 1] if numbers is not None else n
        Q = json.dumps(sd.Q.rows() + ([sd.Q.zetas] if sd.t > 1 else []), separators=(",", ":"))
        mu = json.dumps(list(sd.mu.u) + ([sd.mu.zeta] if sd.t > 1 else []), separators=(",", ":"))
        u = json.dumps(list(sd.ample.u), separators=(",", ":"))
        out.append([str(no), clgroup_label(sd.t), Q, mu, u])
    return out


@dataclass
class TheoremDiff:
    accepted: list[SpecifyingData]
    missing: list[int]
    extra: list[SpecifyingData]
    rejected: dict
    candidates: int

    @property
    def empty(self) -> bool:
        return not self.missing and not self.extra

    def numbers(self) -> list[int | None]:
        keys = builtin_keys()
        return [keys.get(sd.dumps()) for sd in self.accepted]

    def to_json(self) -> dict:
        return {
            "accepted": [sd.to_json() for sd in self.accepted],
            "numbers": self.numbers(),
            "missing": self.missing,
            "extra": [sd.to_json() for sd in self.extra],
            "rejected": self.rejected,
            "candidates": self.candidates,
        }


def _expected_rows(cfg: SearchConfig) -> set[int]:
    """Table rows that the configured constellations can produce."""
    wanted = set(cfg.constellations)
    return {row.no for row in builtin_table()
            if constellation_of(row.sd.Q) in wanted and row.sd.t <= cfg.torsion_max}


def reproduce_theorem(cfg: SearchConfig | None = None, survivors=None) -> TheoremDiff:
    """Run the search and compare accepted canonical data with the table."""
    cfg = cfg or SearchConfig()
    seen: dict[str, SpecifyingData] = {}
    done: set[str] = set()
    rejected: dict[str, int] = {}
    for sd in enumerate_candidates(cfg, survivors):
        key = canonical_form(sd)
        text = key.dumps()
        if text in done:
            continue
        done.add(text)
        rep = verify_candidate(key)
        if rep.accepted:
            seen[text] = key
        else:
            tag = f"{rep.verdict}: {rep.reason}"
            rejected[tag] = rejected.get(tag, 0) + 1
    keys = builtin_keys()
    accepted = sorted(seen.values(), key=lambda sd: (keys.get(sd.dumps(), 10 ** 6), sd.dumps()))
    got = {keys[t] for t in seen if t in keys}
    missing = sorted(_expected_rows(cfg) - got)
    extra = [sd for t, sd in seen.items() if t not in keys]
    return TheoremDiff(accepted, missing, extra, dict(sorted(rejected.items())), len(done))
