import itertools
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from algequiv.algebra import RatFunc, RatMatrix
from algequiv.equiv import (
    MultiShift,
    conj_by_multishift,
    enumerate_shift_class,
    match_parameters,
    multishift_tf,
    oracle_equivalent,
    shift_equivalent,
    unified_momentum,
)
from algequiv.errors import ImproperResult, OracleMismatch
from algequiv.statespace import TransferMatrix

z = RatFunc.z()
alpha, beta = RatFunc.param("alpha"), RatFunc.param("beta")

SHIFT_FAMILIES = ["douglas_rachford", "admm", "pd3o", "pd3o_b", "pd3o_c", "pd3o_d", "dr_quadratic"]


class TestOracleEquivalence:
    def test_arrow_hurwicz_family(self, tfs):
        names = ["arrow_hurwicz", "extrapolation_from_past", "optimistic_mirror_descent", "reflected_gradient"]
        for a, b in itertools.combinations(names, 2):
            assert oracle_equivalent(tfs[a], tfs[b])

    def test_dr_admm_differ(self, tfs):
        assert not oracle_equivalent(tfs["douglas_rachford"], tfs["admm"])

    def test_reflexive(self, tfs):
        assert all(oracle_equivalent(h, h) for h in tfs.values())

    def test_label_mismatch(self, tfs):
        with pytest.raises(OracleMismatch):
            oracle_equivalent(tfs["heavy_ball"], tfs["arrow_hurwicz"])

    def test_shape_mismatch(self, tfs):
        with pytest.raises(OracleMismatch):
            oracle_equivalent(tfs["pd3o"], tfs["douglas_rachford"])


class TestMultiShift:
    def test_zero_is_identity(self):
        assert multishift_tf((0, 0, 0)) == RatMatrix.identity(3)

    def test_two_channels(self):
        assert multishift_tf((1, 0)) == RatMatrix.diag([1 / z, 1])

    def test_three_channels(self):
        assert multishift_tf(MultiShift((1, 0, 2))) == RatMatrix.diag([1 / z, 1, z**-2])

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            MultiShift((-1, 0))

    def test_normalized(self):
        assert MultiShift.normalized([2, 3, 2]).m == (0, 1, 0)
        assert str(MultiShift((1, 0))) == "(1,0)"


class TestShiftEquivalent:
    def test_dr_admm(self, tfs):
        cert = shift_equivalent(tfs["douglas_rachford"], tfs["admm"])
        assert cert.m.m == (1, 0)
        assert cert.to_json() == {"equivalent": True, "m": [1, 0], "b": {"0,1": -1, "1,0": 1}}

    def test_pd3o_dual_first(self, tfs):
        assert shift_equivalent(tfs["pd3o_b"], tfs["pd3o"]).m.m == (0, 1, 0)
        assert shift_equivalent(tfs["pd3o"], tfs["pd3o_b"]).m.m == (1, 0, 1)

    def test_identity(self, tfs):
        for name in SHIFT_FAMILIES:
            assert shift_equivalent(tfs[name], tfs[name]).m.m == (0,) * tfs[name].p

    def test_diagonal_mismatch(self, tfs):
        h = tfs["douglas_rachford"]
        other = h.with_matrix(h.matrix.with_entry(0, 0, RatFunc.parse("-1/(5*(z - 1))")))
        assert shift_equivalent(h, other) is None

    def test_ratio_not_a_power(self, tfs):
        h = tfs["douglas_rachford"]
        other = h.with_matrix(h.matrix.with_entry(0, 1, 2 / (z - 1)))
        assert shift_equivalent(h, other) is None

    def test_sparsity_mismatch(self, tfs):
        h = tfs["pd3o"]
        other = h.with_matrix(h.matrix.with_entry(2, 1, RatFunc.one()))
        assert shift_equivalent(h, other) is None

    def test_inconsistent_cycle(self):
        one = RatFunc.one()
        h2 = TransferMatrix(RatMatrix([[0, one, one], [one, 0, one], [one, one, 0]]))
        h1 = h2.with_matrix(h2.matrix.with_entry(0, 1, z))
        assert shift_equivalent(h1, h2) is None


class TestConjugation:
    def test_admm_to_dr(self, tfs):
        assert conj_by_multishift(tfs["admm"], (1, 0)) == tfs["douglas_rachford"]

    def test_zero_shift(self, tfs):
        assert conj_by_multishift(tfs["pd3o"], (0, 0, 0)) == tfs["pd3o"]

    def test_pd3o_c(self, tfs):
        assert conj_by_multishift(tfs["pd3o"], (0, 1, 1)) == tfs["pd3o_c"]

    def test_improper(self, tfs):
        with pytest.raises(ImproperResult) as info:
            conj_by_multishift(tfs["douglas_rachford"], (2, 0))
        assert (info.value.i, info.value.j) == (1, 0)


class TestEnumeration:
    def test_pd3o(self, tfs):
        ms = [m.m for m, _ in enumerate_shift_class(tfs["pd3o"], 3)]
        assert ms == [(0, 0, 0), (0, 1, 0), (0, 1, 1)]

    def test_single_oracle(self, tfs):
        assert [m.m for m, _ in enumerate_shift_class(tfs["heavy_ball"], 4)] == [(0,)]

    def test_dr(self, tfs):
        members = enumerate_shift_class(tfs["douglas_rachford"], 2)
        assert [m.m for m, _ in members] == [(0, 0), (0, 1)]
        assert members[1][1] == tfs["admm"]

    @pytest.mark.parametrize("name", SHIFT_FAMILIES)
    def test_members_are_proper_and_equivalent(self, name, tfs):
        h = tfs[name]
        for m, member in enumerate_shift_class(h, 3):
            assert all(e.is_proper() for _, _, e in member.matrix.entries())
            cert = shift_equivalent(member, h)
            assert cert is not None and cert.m == m


# -- properties ---------------------------------------------------------------

@given(name=st.sampled_from(SHIFT_FAMILIES), data=st.data())
def test_shift_equivalence_is_an_equivalence(name, data, tfs):
    cls = enumerate_shift_class(tfs[name], 3)
    (m1, h1), (m2, h2), (m3, h3) = (data.draw(st.sampled_from(cls)) for _ in range(3))
    assert shift_equivalent(h1, h1).m.m == (0,) * h1.p
    c12, c21 = shift_equivalent(h1, h2), shift_equivalent(h2, h1)
    assert c12 is not None and c21 is not None
    top = max(c12.m)
    assert c21.m == MultiShift.normalized([top - v for v in c12.m])
    c23 = shift_equivalent(h2, h3)
    composed = MultiShift.normalized([a + b for a, b in zip(c12.m, c23.m)])
    assert conj_by_multishift(h3, composed) == h1
    assert shift_equivalent(h1, h3).m == composed


@given(name=st.sampled_from(SHIFT_FAMILIES), data=st.data())
def test_certificates_satisfy_the_identity(name, data, tfs):
    cls = enumerate_shift_class(tfs[name], 3)
    (_, h1), (_, h2) = data.draw(st.sampled_from(cls)), data.draw(st.sampled_from(cls))
    cert = shift_equivalent(h1, h2)
    D = multishift_tf(cert.m)
    assert h1.matrix == D @ h2.matrix @ D.inverse()
    for (i, j), b in cert.b.items():
        assert h1[i, j] == z**b * h2[i, j]
        assert b == cert.m[j] - cert.m[i]


def _brute_force(h1, h2, top=6):
    """Exhaustive search for m in [0, top]^p with H1_ij = z^(m_j - m_i) H2_ij."""
    p = h1.p
    fits = {}
    for i, j in itertools.product(range(p), repeat=2):
        fits[i, j] = {k for k in range(-top, top + 1) if h1[i, j] == z**k * h2[i, j]}
    for m in itertools.product(range(top + 1), repeat=p):
        if all(m[j] - m[i] in fits[i, j] for i in range(p) for j in range(p)):
            return m
    return None


@given(st.integers(1, 4), st.integers(0, 10**6))
def test_graph_solver_matches_exhaustive_search(p, seed):
    rng = random.Random(seed)
    entries = [[RatFunc.zero() if (i != j and rng.random() < 0.3)
                else RatFunc.const(rng.randint(1, 5)) / (z - rng.randint(-3, 3)) ** rng.randint(0, 2)
                for j in range(p)] for i in range(p)]
    h2 = TransferMatrix(RatMatrix(entries))
    m = [rng.randint(0, 3) for _ in range(p)]
    rows = [[entries[i][j] * z ** (m[j] - m[i]) for j in range(p)] for i in range(p)]
    if p > 1 and rng.random() < 0.5:
        i, j = rng.sample(range(p), 2)
        d = rng.choice([-1, 1])
        rows[i][j] = rows[i][j] * z**d
        if rng.random() < 0.5:
            rows[j][i] = rows[j][i] * z ** (-d)
    h1 = TransferMatrix(RatMatrix(rows))
    cert = shift_equivalent(h1, h2)
    found = _brute_force(h1, h2)
    assert (cert is None) == (found is None)
    if cert is not None:
        assert h1.matrix == multishift_tf(cert.m) @ h2.matrix @ multishift_tf(cert.m).inverse()


class TestMomentum:
    def test_unified_form(self):
        h = unified_momentum(-alpha, beta, 0)
        assert h == RatFunc.parse("-alpha*z/((z - 1)*(z - beta))")

    def test_qhm_reduces_to_heavy_ball(self, tfs):
        qhm = tfs["quasi_hyperbolic_momentum"][0, 0].subs({"nu": 1})
        hb = tfs["heavy_ball"][0, 0].subs({"alpha": RatFunc.param("a_hb")})
        sols = match_parameters(qhm, hb, ["a_hb"])
        assert len(sols) == 1 and sols[0]["a_hb"] == alpha * (1 - beta)

    def test_nesterov_is_triple_momentum(self, tfs):
        assert tfs["triple_momentum"][0, 0].subs({"gamma": beta}) == tfs["nesterov"][0, 0]

    def test_no_match(self, tfs):
        target = unified_momentum(RatFunc.const(-1), RatFunc.const(1) / 2, RatFunc.const(1) / 3)
        assert match_parameters(target, tfs["heavy_ball"][0, 0], ["alpha", "beta"]) == []

    def test_tmm_target(self, tfs):
        target = unified_momentum(RatFunc.const(-1) / 5, RatFunc.const(1) / 2, RatFunc.const(1) / 3)
        sols = match_parameters(target, tfs["triple_momentum"][0, 0], ["alpha", "beta", "gamma"])
        assert len(sols) == 1
        assert tfs["triple_momentum"][0, 0].subs(sols[0]) == target
