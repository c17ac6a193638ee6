import random
from dataclasses import replace
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import flagship_structure, madic, smooth_branch, w1, w1_irrational
from planeval.errors import DomainError, UnsupportedClassError
from planeval.exactnum import QuadIrr, ValElem, cf_eval, parse_cf
from planeval.evaluation import BivarPoly, value_normalized
from planeval.hn_model import FreeRow, HNExpansion, random_structure, sample_very_general
from planeval.invariants import (
    eq_delta_check,
    gcd_chain,
    gcd_chain_check,
    invariant_bundle,
    noether_sum,
    puiseux_exponents,
    real,
    semigroup_generators,
    value_sequence,
    volumes,
)

W3 = HNExpansion((FreeRow(4, 1),))


def test_value_sequence_examples():
    assert value_sequence(w1()) == (2, 1, 1)
    assert value_sequence(madic()) == (1,)
    assert value_sequence(W3) == (1, 1, 1, 1)


def test_puiseux_examples():
    assert puiseux_exponents(w1()) == (1, F(3, 2))
    assert puiseux_exponents(W3) == (1, 4)
    last = puiseux_exponents(w1_irrational())[-1]
    assert isinstance(last, QuadIrr)
    # the stored power row h=2 followed by the tail [1; (2)] continues the expansion of 3/2
    assert last == 1 + 1 / cf_eval(parse_cf("[2; 1, (2)]"))


def test_maxcontact_examples():
    assert invariant_bundle(w1()).maxcontact == (2, 3, 6)
    assert invariant_bundle(W3).maxcontact == (1, 4)
    assert invariant_bundle(madic()).maxcontact == (1,)


def test_volumes_examples():
    assert volumes(invariant_bundle(w1())) == (6, F(3, 2))
    assert volumes(invariant_bundle(madic())) == (1, 1)
    assert volumes(invariant_bundle(W3)) == (4, 4)


def test_semigroup_generators():
    assert semigroup_generators(invariant_bundle(w1())) == {2, 3, 6}
    assert semigroup_generators(invariant_bundle(W3)) == {1, 4}
    assert semigroup_generators(invariant_bundle(madic())) == {1}


def test_eq_delta_examples():
    assert eq_delta_check(invariant_bundle(w1()))
    assert eq_delta_check(invariant_bundle(W3))
    b = invariant_bundle(w1())
    corrupted = replace(b, maxcontact=(2, 4, 6))
    assert not eq_delta_check(corrupted)


def test_flagship_bundle():
    b = invariant_bundle(flagship_structure())
    assert b.m == (2, 2, 1, 1, 1, 1, 1, 1, 1, 1)
    assert b.maxcontact == (2, 5, 16)
    assert b.vol_inv_normalized == 4


def test_irrational_bundle_is_exact():
    b = invariant_bundle(w1_irrational())
    assert b.kind == "irrational"
    assert isinstance(b.maxcontact[-1], ValElem)
    assert isinstance(b.vol_inv_normalized, QuadIrr)
    assert eq_delta_check(b)
    # normalized inverse volume equals the last Puiseux exponent for a single characteristic pair
    assert b.vol_inv_normalized == b.puiseux[-1]
    with pytest.raises(DomainError):
        gcd_chain_check(b)


def test_curve_is_unsupported():
    with pytest.raises(UnsupportedClassError, match="use vdelta"):
        invariant_bundle(smooth_branch())


def test_normalization_of_maximal_ideal():
    for hn in (w1(), w1(3), madic(), W3, flagship_structure()):
        concrete = hn if hn.has_coeffs else sample_very_general(hn, seed=1)
        u = value_normalized(concrete, BivarPoly({(1, 0): F(1)}))
        v = value_normalized(concrete, BivarPoly({(0, 1): F(1)}))
        assert min(u, v) == 1


@given(st.integers(0, 10**6))
def test_noether_identity_and_gcd_chain(seed):
    hn = random_structure(random.Random(seed), 4, 5, "divisorial")
    b = invariant_bundle(hn)
    assert b.vol_inv == noether_sum(b) == sum(x * x for x in b.m)
    assert eq_delta_check(b)
    assert gcd_chain_check(b)
    chain = gcd_chain(b.maxcontact)
    assert chain[-1] == 1
    for j in range(1, len(b.eseq)):
        assert b.nseq[j] == b.eseq[j - 1] // b.eseq[j]
        assert b.maxcontact[j + 1] > b.nseq[j] * b.maxcontact[j]


@given(st.integers(0, 10**6))
def test_irrational_identities(seed):
    hn = random_structure(random.Random(seed), 4, 4, "irrational")
    b = invariant_bundle(hn)
    assert eq_delta_check(b)
    b0 = real(b.maxcontact[0])
    assert b.vol_inv_normalized == real(b.vol_inv) / (b0 * b0)
