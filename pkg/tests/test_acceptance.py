"""One PASS/FAIL line per acceptance criterion (visible with or without -s)."""

import csv
import io
import itertools
import json
import subprocess
import sys
import time
from pathlib import Path

import pytest

from cyrank2.cli import main
from cyrank2.factoriality import (
    binomial_is_prime,
    builtin_certificates,
    factoriality_route,
    find_prime_binomial_witnesses,
    sigma_degree,
    simplex_certificate_report,
    two_monomial_fallback,
    verify_simplex_certificate,
)
from cyrank2.constraints import is_weakly_calabi_yau, monomials_of_degree
from cyrank2.gitfan import chambers, mu_is_ample
from cyrank2.grading import DegreeMatrix, Weight
from cyrank2.invariants import (
    ambient_chamber,
    distinguish_families,
    generator_degree_dimension_tuple,
    mu_cubed,
    nef_basis,
)
from cyrank2.polytope import RationalPolytope, normal_fan, stellar_subdivision
from cyrank2.smoothness import is_mu_ambient_smooth

import oracles

ROOT = Path(__file__).resolve().parent.parent
MU_AMPLE = [1, 1, 0, 0, 1, 1, 0, 0, 0, 0, 1, 0, 1, 1, 1, 0, 1, 0, 1, 1, 1, 1, 1, 0, 0, 0, 0, 1, 1, 0]
DOLGACHEV = {1, 2, 5, 6, *range(11, 24), 27, 28, 29}
BPF = {3, 4, 30}
BLOWUP = {8, 9, 10, 24, 25}
SIMPLEX = {7, 26}
PAIRS = [[11, 12], [15, 16], [17, 18], [27, 28]]


def report(capsys, n, ok, detail):
    with capsys.disabled():
        print(f"\nACCEPTANCE {n}: {'PASS' if ok else 'FAIL'} - {detail}")


def test_criterion_1_reproduction(tmp_path, capsys):
    start = time.perf_counter()
    code = main(["classify", "--bound", "9", "--torsion-max", "3", "-o", str(tmp_path)])
    elapsed = time.perf_counter() - start
    capsys.readouterr()
    rows = list(csv.DictReader(io.StringIO((tmp_path / "table.csv").read_text())))
    diff = json.loads((tmp_path / "diff.json").read_text())
    ok = (code == 0 and [r["no"] for r in rows] == [str(n) for n in range(1, 31)]
          and diff["missing"] == [] and diff["extra"] == [] and elapsed < 600)
    report(capsys, 1, ok, f"{len(rows)} rows, missing {diff['missing']}, extra {len(diff['extra'])}, {elapsed:.0f}s")
    assert ok


def test_criterion_2_ample_booleans(table, capsys):
    got = [int(mu_is_ample(table[n])) for n in range(1, 31)]
    hits = sum(a == b for a, b in zip(got, MU_AMPLE))
    report(capsys, 2, hits == 30, f"{hits}/30 booleans agree")
    assert hits == 30


def test_criterion_3_smoothness(table, capsys):
    bad = []
    for no, sd in table.items():
        ch = ambient_chamber(sd)
        if not is_mu_ambient_smooth(sd.Q, sd.mu, ch):
            bad.append(no)
    report(capsys, 3, not bad, f"ambient smooth on the listed chamber for {30 - len(bad)}/30 rows")
    assert not bad


def test_criterion_4_routes(table, capsys):
    routes = {no: factoriality_route(sd).route for no, sd in table.items()}
    ok = ({n for n, r in routes.items() if r == "dolgachev"} == DOLGACHEV
          and {n for n, r in routes.items() if r == "bpf"} == BPF
          and {n for n, r in routes.items() if r == "blowup"} == BLOWUP
          and {n for n, r in routes.items() if r == "simplex-certificate"} == SIMPLEX)
    certs = {c.row: c for c in builtin_certificates()}
    ok = ok and all(verify_simplex_certificate(c) for c in certs.values())
    # degree of the first certificate in the frame of its printed degree matrix
    c7 = certs[7]
    B = RationalPolytope.from_points(c7.B_vertices)
    F2 = stellar_subdivision(normal_fan(B), c7.subdivision_ray)
    P2 = [[-2, 0, -1, 0, 1, -1], [-1, 1, 0, 1, -1, 0], [-2, 1, 1, 0, 0, 0], [-3, 3, 0, 0, 0, 0]]
    order = [F2.rays.index(col) for col in zip(*P2)]
    Q2 = DegreeMatrix.from_rows([[1, 1, 1, 0, 0, -3], [0, 0, 0, 1, 1, 1]], [0, 1, 2, 1, 2, 0], t=3)
    mu7 = sigma_degree(F2, B, Q2, order)
    mu26 = simplex_certificate_report(certs[26])["mu2"]
    ok = ok and mu7 == Weight((0, 3), 0) and mu26 == {"u": [8, 0], "zeta": 0}
    report(capsys, 4, ok, f"routes match; sigma degrees {mu7.u};{mu7.zeta} and {tuple(mu26['u'])}")
    assert ok


def _witness_gaps(table):
    gaps = []
    for no, sd in table.items():
        w = find_prime_binomial_witnesses(sd.Q, sd.mu)
        for i, pair in w.items():
            if pair is None or not binomial_is_prime(*pair):
                gaps.append((no, i + 1))
    return gaps


@pytest.mark.xfail(strict=True, reason="row 2 admits no prime binomial witness for any variable")
def test_criterion_5_witnesses(table, capsys):
    gaps = _witness_gaps(table)
    fallback = two_monomial_fallback(table[7].Q, table[7].mu, 5)
    others = [g for g in gaps if g != (7, 6)]
    ok = fallback and not others
    report(capsys, 5, ok, f"fallback for (7, T6): {fallback}; other gaps: {others}")
    assert ok


def test_criterion_5_gap_is_genuine(table):
    # outside row 2 the criterion holds; in row 2 no binomial of the restricted fibers is irreducible
    gaps = _witness_gaps(table)
    assert {g for g in gaps if g[0] != 2} == {(7, 6)}
    assert two_monomial_fallback(table[7].Q, table[7].mu, 5)
    sd = table[2]
    for i in range(6):
        ms = monomials_of_degree(sd.Q, sd.mu, [j for j in range(6) if j != i])
        assert ms
        for a, b in itertools.combinations(ms, 2):
            assert not oracles.binomial_irreducible(a, b)


def test_criterion_6_separation(table, capsys):
    rows = [table[n] for n in range(1, 31)]
    rep = distinguish_families(rows)
    tuples = {}
    for n, sd in table.items():
        tuples.setdefault(generator_degree_dimension_tuple(sd.Q), []).append(n)
    ok = rep["tuple_equal"] == PAIRS and rep["resolved"] == PAIRS and not rep["unresolved"]
    agree = 0
    for a, b in PAIRS:
        for n in (a, b):
            sd = table[n]
            n1, n2 = nef_basis(ambient_chamber(sd))
            exp = oracles.mu_fourth_by_counting(list(zip(sd.Q.free, sd.Q.zetas)), sd.Q.t, sd.mu.u, n1, n2)
            agree += mu_cubed(sd) == exp
    ok = ok and agree == 8
    report(capsys, 6, ok, f"tuple-equal pairs {rep['tuple_equal']}, oracle agreement {agree}/8")
    assert ok


def test_criterion_7_desk_checks(table, capsys):
    got = [mu_cubed(table[1]), mu_cubed(table[2])]
    # multinomial count on P2 x P2: (3H1 + 3H2)^4 = 6 * 3^4
    multinomial = 6 * 3 ** 4
    counted = []
    for n in (1, 2):
        sd = table[n]
        n1, n2 = nef_basis(ambient_chamber(sd))
        counted.append(oracles.mu_fourth_by_counting(list(zip(sd.Q.free, sd.Q.zetas)), sd.Q.t, sd.mu.u, n1, n2))
    ok = got == [486, 162] == counted and multinomial == 486
    report(capsys, 7, ok, f"mu^3 rows 1, 2 = {got[0]}, {got[1]}; oracles {counted[0]}, {counted[1]}")
    assert ok


PROPERTY_SUITES = [
    "tests/test_grading.py::test_canonical_form_idempotent_on_random_orbits",
    "tests/test_gitfan.py::test_chambers_cover_mov_exactly",
    "tests/test_constraints.py::test_monomials_match_box_on_small_degrees",
    "tests/test_factoriality.py::test_binomial_primeness_matches_factorization",
    "tests/test_invariants.py::test_intersection_symmetric_and_multilinear",
]


def test_criterion_8_property_suites(capsys):
    start = time.perf_counter()
    res = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *PROPERTY_SUITES],
                         cwd=ROOT, capture_output=True, text=True)
    elapsed = time.perf_counter() - start
    ok = res.returncode == 0 and elapsed < 300
    last = res.stdout.strip().splitlines()[-1] if res.stdout.strip() else res.stderr[-200:]
    report(capsys, 8, ok, f"{last} ({elapsed:.0f}s)")
    assert ok


def test_criterion_9_weakly_cy(table, capsys):
    good = [n for n, sd in table.items() if is_weakly_calabi_yau(sd.Q, sd.mu)]
    torsion = all(table[n].mu.zeta == sum(w.zeta for w in table[n].Q.weights) % table[n].t for n in (2, 7))
    ok = len(good) == 30 and torsion
    report(capsys, 9, ok, f"{len(good)}/30 weakly Calabi-Yau, torsion parts of rows 2 and 7 checked: {torsion}")
    assert ok
