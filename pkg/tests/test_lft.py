import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from algequiv.algebra import RatFunc, RatMatrix
from algequiv.equiv import oracle_equivalent
from algequiv.errors import ImproperResult, SingularDenominator, SingularM, UnsupportedPair
from algequiv.lft import (
    LftMatrix,
    commutation_transform,
    embed_common,
    equivariance_transform,
    lft_equivalent,
    lft_residual,
    lft_transform,
    prox_family_transform,
    prox_table,
    swap_oracles,
)
from algequiv.statespace import TransferMatrix

z = RatFunc.z()
t = RatFunc.param("t")
KINDS = ("subdiff", "subdiff_conj", "prox", "prox_conj")
EQ25 = {
    "prox": "proximal_gradient",
    "prox_conj": "conjugate_proximal_gradient",
    "subdiff": "subdifferential_gradient",
    "subdiff_conj": "conjugate_subdifferential_gradient",
}


def M(rows):
    return RatMatrix(rows)


class TestTable:
    def test_prox_from_subdiff(self):
        assert prox_table("prox", "subdiff").full() == M([[1, t], [1, 0]])

    def test_subdiff_conj_swap(self):
        assert prox_table("subdiff", "subdiff_conj").full() == M([[0, 1], [1, 0]])

    def test_same_kind(self):
        for k in KINDS:
            assert prox_table(k, k) == LftMatrix.identity(1)

    def test_unit_step(self):
        assert prox_table("prox(1)", "prox_conj(1)").full() == M([[1, 0], [1, -1]])

    @pytest.mark.parametrize("a, b", list(itertools.product(KINDS, repeat=2)))
    def test_pairs_are_inverse(self, a, b):
        ab = prox_table(a, b)
        assert not ab.full().det().is_zero()
        assert (ab @ prox_table(b, a)) == LftMatrix.identity(1)

    def test_generic_rejected(self):
        with pytest.raises(UnsupportedPair):
            prox_table("generic", "prox")

    def test_different_functions(self):
        with pytest.raises(UnsupportedPair):
            prox_table("prox(f, t)", "prox_conj(g, t)")

    def test_different_steps(self):
        with pytest.raises(UnsupportedPair):
            prox_table("prox(s)", "prox_conj(t)")

    def test_singular_matrix(self):
        with pytest.raises(SingularM):
            LftMatrix.from_matrix(M([[1, 1], [1, 1]]))


class TestEmbed:
    def test_second_of_two(self):
        p, q, r, s = (RatFunc.param(n) for n in "PQRS")
        emb = embed_common(LftMatrix(M([[p]]), M([[q]]), M([[r]]), M([[s]])), 1, 2)
        assert emb.full() == M([[1, 0, 0, 0], [0, p, 0, q], [0, 0, 1, 0], [0, r, 0, s]])

    def test_identity(self):
        assert embed_common(LftMatrix.identity(1), 0, 3) == LftMatrix.identity(3)

    def test_davis_yin_matrix(self):
        emb = embed_common(prox_table("prox", "prox_conj"), 1, 3)
        want = RatMatrix.identity(6).with_entry(1, 1, t).with_entry(4, 1, t).with_entry(4, 4, -t)
        assert emb.full() == want


class TestLftEquivalent:
    def test_davis_yin_pd3o(self, tfs):
        pd3o = tfs["pd3o"].subs({"a": 1, "tau": t, "sigma": 1 / t})
        emb = embed_common(prox_table("prox", "prox_conj"), 1, 3)
        assert lft_equivalent(tfs["davis_yin"], pd3o, emb)

    def test_dr_chambolle_pock(self, tfs):
        cp = tfs["chambolle_pock"].subs({"tau": 1, "sigma": 1, "M": 1})
        emb = embed_common(prox_table("prox(1)", "prox_conj(1)"), 1, 2)
        assert lft_equivalent(tfs["douglas_rachford"], cp, emb)

    def test_identity_is_oracle_equivalence(self, tfs):
        for a, b in [("two_step_a", "two_step_b"), ("douglas_rachford", "admm"), ("pd3o_b", "pd3o_d")]:
            assert lft_equivalent(tfs[a], tfs[b], LftMatrix.identity(tfs[a].p)) == oracle_equivalent(tfs[a], tfs[b])


class TestLftTransform:
    def test_to_conjugate_prox(self, tfs):
        emb = embed_common(prox_table("prox_conj", "prox"), 1, 2)
        assert lft_transform(tfs["proximal_gradient"], emb).matrix == tfs["conjugate_proximal_gradient"].matrix

    def test_to_subdiff(self, tfs):
        emb = embed_common(prox_table("subdiff", "prox"), 1, 2)
        assert lft_transform(tfs["proximal_gradient"], emb).matrix == tfs["subdifferential_gradient"].matrix

    def test_identity(self, tfs):
        h = tfs["davis_yin"]
        assert lft_transform(h, LftMatrix.identity(3)) == h

    def test_singular_denominator(self):
        h = TransferMatrix(M([[1]]))
        with pytest.raises(SingularDenominator):
            lft_transform(h, prox_table("subdiff", "prox(1)"))


class TestProxFamily:
    @pytest.mark.parametrize("target", KINDS)
    def test_proximal_gradient(self, target, tfs):
        got = prox_family_transform(tfs["proximal_gradient"], 1, target)
        assert got.matrix == tfs[EQ25[target]].matrix
        assert got.kinds[1].tag == target

    def test_davis_yin_conjugate(self, tfs):
        got = prox_family_transform(tfs["davis_yin"], 1, "prox_conj")
        want = M([["1/z", "-t/z", "-t/z"], ["(2*z - 1)/(t*z)", "1/z", "(1 - z)/z"], [1, 0, 0]])
        assert got.matrix == want

    def test_single_oracle(self):
        h = RatFunc.parse("(z + 1)/(3*z*(z - 2))")
        got = prox_family_transform(TransferMatrix(M([[h]]), ("prox_g",)), 0, "prox_conj", "prox")
        assert got[0, 0] == -h / (1 - h)

    def test_other_source_rejected(self, tfs):
        with pytest.raises(UnsupportedPair):
            prox_family_transform(tfs["conjugate_proximal_gradient"], 1, "prox")


class TestSwapAndTransforms:
    def test_swap_last_two(self, tfs):
        h = tfs["davis_yin"]
        s = swap_oracles(h, [0, 2, 1])
        assert s.oracles == ("prox_f", "grad_h", "prox_g")
        assert s[1, 2] == h[2, 1] and s[2, 2] == h[1, 1]
        assert swap_oracles(s, [0, 2, 1]) == h
        assert swap_oracles(h, [0, 1, 2]) == h

    def test_commutation_with_filter(self, tfs):
        a = RatFunc.param("alpha")
        got = commutation_transform(tfs["douglas_rachford"], z - a, 0)
        assert got.matrix == tfs["dr_quadratic"].matrix

    def test_commutation_trivial(self, tfs):
        assert commutation_transform(tfs["pd3o"], 1, 2) == tfs["pd3o"]

    def test_commutation_shift(self, tfs):
        assert commutation_transform(tfs["admm"], 1 / z, 0) == tfs["douglas_rachford"]

    def test_improper_commutation(self, tfs):
        with pytest.raises(ImproperResult):
            commutation_transform(tfs["douglas_rachford"], z, 1)

    def test_equivariance(self, tfs):
        h = tfs["heavy_ball"]
        assert equivariance_transform(h, 2, 1, 0).matrix == h.matrix.scale(2)
        assert equivariance_transform(h, 2, 2, 0) == h
        a = RatFunc.param("alpha")
        dr = tfs["douglas_rachford"]
        assert equivariance_transform(dr, z - a, z - a, 0) == commutation_transform(dr, z - a, 0)


# -- properties ---------------------------------------------------------------

ROUND_TRIP = ["proximal_gradient", "davis_yin", "douglas_rachford", "pd3o", "chambolle_pock", "heavy_ball"]


def _relation(name, a, b, ch, tfs):
    h = tfs[name]
    return h, embed_common(prox_table(a, b), ch % h.p, h.p)


@given(name=st.sampled_from(ROUND_TRIP), a=st.sampled_from(KINDS), b=st.sampled_from(KINDS), ch=st.integers(0, 2))
def test_transform_round_trip(name, a, b, ch, tfs):
    h, rel = _relation(name, a, b, ch, tfs)
    try:
        h1 = lft_transform(h, rel)
    except SingularDenominator:
        return
    assert lft_transform(h1, rel.inverse()).matrix == h.matrix


@given(name=st.sampled_from(ROUND_TRIP), a=st.sampled_from(KINDS), b=st.sampled_from(KINDS),
       ch=st.integers(0, 2), bump=st.booleans())
def test_dual_forms_agree(name, a, b, ch, bump, tfs):
    h2, rel = _relation(name, a, b, ch, tfs)
    try:
        h1 = lft_transform(h2, rel).matrix
    except SingularDenominator:
        return
    if bump:
        h1 = h1.with_entry(0, 0, h1[0, 0] + 1 / z)
    forward = lft_residual(h1, h2.matrix, rel).is_zero()
    backward = lft_residual(h2.matrix, h1, rel.inverse()).is_zero()
    assert forward == backward == (not bump)


@given(name=st.sampled_from(ROUND_TRIP), kinds=st.lists(st.sampled_from(KINDS), min_size=3, max_size=3),
       ch=st.integers(0, 2))
def test_equivalence_relation(name, kinds, ch, tfs):
    h3 = tfs[name]
    a, b, c = kinds
    assert lft_equivalent(h3, h3, LftMatrix.identity(h3.p))
    k = ch % h3.p
    m23 = embed_common(prox_table(b, c), k, h3.p)
    m12 = embed_common(prox_table(a, b), k, h3.p)
    try:
        h2 = lft_transform(h3, m23)
        h1 = lft_transform(h2, m12)
    except SingularDenominator:
        return
    assert lft_equivalent(h3, h2, m23.inverse())
    assert lft_equivalent(h1, h3, m12 @ m23)
