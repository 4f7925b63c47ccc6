"""Acceptance suite: every shipped claim behind one pass/fail line.

Run with -v to see the criteria individually. The two large orbit runs
are session fixtures shared by the counting and shape criteria, and both
are gated on exact brute/orbit agreement at the small levels.
"""

import itertools
import json
import math
import random
import time
from pathlib import Path

import pytest

from cuntzcal.algebra import AlgebraElement, Coefficient, parse_element
from cuntzcal.census import brute_census, orbit_census
from cuntzcal.endo import Endo, diagonal_aut_sn, fusion_compose, t_map
from cuntzcal.permdecide import (
    PermUnitary,
    ReducedMapFamily,
    decide_automorphism,
    decide_diagonal,
    flip_flop,
    fusion_table,
    out_equivalent,
    power_order,
)
from cuntzcal.words import enumerate_words

FIXDIR = Path(__file__).parent / "fixtures"
G_FIXTURE = Path(__file__).parent.parent / "fixtures" / "three_cycle_2_4.json"
K1_FIXTURE = "S11 S1* + S12 S21* + S2 S22*"


def load_frozen(n, k):
    payload = json.loads((FIXDIR / f"census_{n}_{k}.json").read_text())
    return payload


@pytest.fixture(scope="session")
def small_reports():
    out = {}
    for n, k in ((2, 2), (2, 3), (3, 2)):
        t0 = time.monotonic()
        brute = brute_census(n, k)
        out[(n, k, "brute")] = (brute, time.monotonic() - t0)
        t0 = time.monotonic()
        orbit = orbit_census(n, k)
        out[(n, k, "orbit")] = (orbit, time.monotonic() - t0)
    return out


def _gate_on_agreement(small_reports):
    # Hard gate: the orbit engine must reproduce the brute counts exactly
    # on every brute-checkable level before a large run is trusted.
    for n, k in ((2, 2), (2, 3), (3, 2)):
        brute = small_reports[(n, k, "brute")][0]
        orbit = small_reports[(n, k, "orbit")][0]
        assert orbit.same_counts(brute), f"orbit/brute mismatch at ({n},{k})"


@pytest.fixture(scope="session")
def orbit_2_4(small_reports):
    _gate_on_agreement(small_reports)
    t0 = time.monotonic()
    report = orbit_census(2, 4, classes=True)
    return report, time.monotonic() - t0


@pytest.fixture(scope="session")
def orbit_4_2(small_reports):
    _gate_on_agreement(small_reports)
    t0 = time.monotonic()
    report = orbit_census(4, 2)
    return report, time.monotonic() - t0


# ---- criterion 1: exact algebra property suite -------------------------------


def _random_factor(rng, n):
    which = rng.randrange(3)
    letter = rng.randrange(1, n + 1)
    if which == 0:
        return AlgebraElement.isometry(n, (letter,))
    if which == 1:
        return AlgebraElement.isometry(n, (letter,)).adjoint()
    from fractions import Fraction

    return AlgebraElement.scalar(n, Fraction(rng.randrange(-3, 4), rng.randrange(1, 5)))


def _fold(factors, order):
    items = list(factors)
    for pick in order:
        i = pick % (len(items) - 1)
        items[i : i + 2] = [items[i] * items[i + 1]]
    return items[0]


def test_criterion_01_algebra_property_suite():
    started = time.monotonic()
    # Defining relations.
    for n in (2, 3):
        one = AlgebraElement.one(n)
        for i in range(1, n + 1):
            for j in range(1, n + 1):
                lhs = AlgebraElement.isometry(n, (i,)).adjoint() * AlgebraElement.isometry(n, (j,))
                assert lhs == (one if i == j else AlgebraElement.zero(n))
        total = AlgebraElement.zero(n)
        for i in range(1, n + 1):
            s = AlgebraElement.isometry(n, (i,))
            total = total + s * s.adjoint()
        assert total == one
    # Normal-form uniqueness: 1000 random products re-associated two ways.
    rng = random.Random(161803)
    for _ in range(1000):
        n = rng.choice((2, 3))
        length = rng.randrange(2, 9)
        factors = [_random_factor(rng, n) for _ in range(length)]
        a = _fold(factors, [rng.randrange(1000) for _ in range(length - 1)])
        b = _fold(factors, [rng.randrange(1000) for _ in range(length - 1)])
        assert a == b
    # Fusion associativity.
    u = PermUnitary(2, 2, (1, 0, 2, 3)).to_element()
    v = flip_flop().to_element()
    w = PermUnitary(2, 2, (2, 0, 3, 1)).to_element()
    assert fusion_compose(u, fusion_compose(v, w)) == fusion_compose(fusion_compose(u, v), w)
    # Cocycle law against the unrolled product.
    from cuntzcal.endo import phi_apply

    for base in (v, w):
        lam = Endo(base, check=False)
        for m in range(4):
            direct = AlgebraElement.one(2)
            for j in range(m):
                direct = direct * phi_apply(base, j)
            assert lam.cocycle(m) == direct
    # Gauge commutation with the fourth roots of unity.
    one_c = Coefficient.of(1)
    i_c = Coefficient.of((0, 1))
    for z in (one_c, -one_c, i_c, -i_c):
        scalar = AlgebraElement.scalar(2, z)
        assert fusion_compose(w, scalar) == w.scale(z)
    assert time.monotonic() - started < 60


# ---- criterion 2: cocycle conjugation identity --------------------------------


def test_criterion_02_cocycle_conjugation_identity():
    # u_k* d u_k = sum over |mu| = k of S_mu T_mu(d) S_mu*, exactly, for
    # every u in P_2^2, k <= 3, and every minimal diagonal projection.
    started = time.monotonic()
    for perm in itertools.permutations(range(4)):
        u = PermUnitary(2, 2, perm).to_element()
        lam = Endo(u, check=False)
        for k in (1, 2, 3):
            uk = lam.cocycle(k)
            for beta in enumerate_words(2, k):
                d = AlgebraElement.projection(2, beta)
                rhs = AlgebraElement.zero(2)
                for mu in enumerate_words(2, k):
                    s = AlgebraElement.isometry(2, mu)
                    rhs = rhs + s * t_map(u, mu, d) * s.adjoint()
                assert uk.adjoint() * d * uk == rhs
    assert time.monotonic() - started < 60


# ---- criterion 3: brute censuses as frozen fixtures ---------------------------


def test_criterion_03_brute_censuses_and_inverse_levels(small_reports):
    for n, k in ((2, 2), (2, 3), (3, 2)):
        report, seconds = small_reports[(n, k, "brute")]
        frozen = load_frozen(n, k)
        assert report.b == frozen["b"] and report.d == frozen["d"]
        assert report.undecided == frozen["undecided"] == 0
        modulus = math.factorial(n) ** (n ** (k - 1))
        assert report.b % modulus == 0
    assert small_reports[(2, 3, "brute")][1] < 600
    assert small_reports[(3, 2, "brute")][1] < 1800
    # Every automorphism at (2,3) has an inverse within the level bound.
    aut_count = 0
    for perm in itertools.permutations(range(8)):
        verdict = decide_automorphism(PermUnitary(2, 3, perm))
        if verdict.is_aut:
            aut_count += 1
            assert verdict.inverse.k <= 16
    assert aut_count == small_reports[(2, 3, "brute")][0].d


# ---- criteria 4 and 5: the large orbit censuses --------------------------------


def test_criterion_04_orbit_census_2_4(orbit_2_4):
    report, seconds = orbit_2_4
    assert report.b == 175_472_640
    assert report.d == 564_480
    assert report.undecided == 0
    assert seconds < 3600


def test_orbit_2_4_outer_class_partition(orbit_2_4):
    # The automorphism orbit representatives fall into 14 classes modulo
    # inner automorphisms.
    report, _ = orbit_2_4
    assert report.class_count == 14


def test_criterion_05_orbit_census_4_2(orbit_4_2):
    report, seconds = orbit_4_2
    assert report.b == 1_791_590_400
    assert report.d == 5_771_520
    assert report.undecided == 0
    assert seconds < 7200


# ---- criterion 6: shape censuses ----------------------------------------------


def test_criterion_06_shape_censuses(orbit_2_4, orbit_4_2):
    report, _ = orbit_2_4
    endo = [rec for rec in report.shape_census if rec.endo]
    assert len(endo) == 23
    by_leaves = {}
    for rec in endo:
        by_leaves[rec.leaves] = by_leaves.get(rec.leaves, 0) + 1
    assert sorted(by_leaves.items()) == [(1, 1), (2, 9), (3, 11), (4, 2)]
    aut = [rec for rec in report.shape_census if rec.aut]
    assert len(aut) == 2
    assert all(rec.leaves == 4 for rec in aut)
    # Over n = 4 at level 1 every shape on four vertices carries
    # automorphisms.
    report42, _ = orbit_4_2
    assert len(report42.shape_census) == 4
    assert all(rec.aut for rec in report42.shape_census)


# ---- criterion 7: the order-six fixture ----------------------------------------


def test_criterion_07_order_six_fixture():
    started = time.monotonic()
    fixture = PermUnitary.from_json(G_FIXTURE.read_text())
    verdict = decide_automorphism(fixture)
    assert verdict.status == "automorphism"
    aut_order, out_order = power_order(fixture)
    assert aut_order == 6 and out_order == 6
    ident = PermUnitary.identity(2, 1)
    powers = {1: fixture.reduce_level()}
    powers[2] = fusion_table(fixture, powers[1])
    powers[3] = fusion_table(fixture, powers[2])
    for p in (1, 2, 3):
        assert not out_equivalent(powers[p], ident)
    # lambda fixes S_2: the whole second letter block is pointwise fixed.
    block = range(8, 16)
    assert all(fixture.table[w] == w for w in block)
    assert time.monotonic() - started < 60


# ---- criterion 8: letter-permutation lifts -------------------------------------


def test_criterion_08_letter_permutation_lifts():
    ident3 = PermUnitary.identity(2, 3)
    identity_shapes = [
        d.shape for d in ReducedMapFamily.from_perm(ident3).diagnostics()
    ]
    for table in itertools.permutations(range(2)):
        u = PermUnitary(2, 1, table)
        lifted = u.pad_level(3)
        verdict = decide_automorphism(lifted)
        assert verdict.status == "automorphism"
        assert verdict.inverse == u.adjoint().reduce_level()
        shapes = [
            d.shape for d in ReducedMapFamily.from_perm(lifted).diagnostics()
        ]
        assert shapes == identity_shapes
    assert power_order(flip_flop()) == (2, 2)
    assert not out_equivalent(flip_flop(), PermUnitary.identity(2, 1))


# ---- criterion 9: mode agreement ------------------------------------------------


def test_criterion_09_mode_agreement(small_reports):
    for n, k in ((2, 3), (3, 2)):
        brute = small_reports[(n, k, "brute")][0]
        orbit = small_reports[(n, k, "orbit")][0]
        assert orbit.same_counts(brute)
        assert (orbit.b, orbit.d, orbit.undecided) == (
            brute.b,
            brute.d,
            brute.undecided,
        )


# ---- criterion 10: the weighted diagonal decision -------------------------------


def _ukt_stabilization(u, max_m=8):
    """Oracle: least m with u_m* d u_m diagonal at level m for all minimal
    level-1 projections d, or None when no m within reach works."""
    lam = Endo(u, check=False)
    for m in range(1, max_m + 1):
        um = lam.cocycle(m)
        ok = True
        for letter in (1, 2):
            d = AlgebraElement.projection(2, (letter,))
            e = (um.adjoint() * d * um).reduced()
            if e.expect_diagonal() != e or e.max_word_length() > m:
                ok = False
                break
        if ok:
            return m
    return None


def test_criterion_10_weighted_diagonal_decision():
    # Weight-0 regime: the symbolic path, the table path and the cocycle
    # stabilization oracle agree on all of P_2^2.
    for perm in itertools.permutations(range(4)):
        pu = PermUnitary(2, 2, perm)
        table_verdict = decide_diagonal(pu).is_aut
        symbolic_verdict = diagonal_aut_sn(pu.to_element()).is_aut
        oracle = _ukt_stabilization(pu.to_element())
        assert table_verdict == symbolic_verdict == (oracle is not None)
    # Weight-1 fixture: definite refutation, frozen and cross-checked.
    u = parse_element(2, K1_FIXTURE)
    verdict = diagonal_aut_sn(u)
    assert verdict.is_aut is False
    assert verdict.evidence is not None
    assert _ukt_stabilization(u) is None
