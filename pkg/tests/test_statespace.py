import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from algequiv import corpus
from algequiv.algebra import RatFunc, RatMatrix
from algequiv.errors import DimensionMismatch, NotMinimal, Singular, SingularD
from algequiv.sim import predicted_outputs, simulate_open_loop
from algequiv.statespace import (
    StateSpace,
    TransferMatrix,
    apply_state_transform,
    initial_response,
    is_explicit,
    match_initial_condition,
    minimality_report,
    similarity_transform,
    ss_inverse,
    transfer_function,
)

z = RatFunc.z()
GD = StateSpace([[1]], [["-1/5"]], [[1]], [[0]], ("grad_f",))
T78 = RatMatrix([[2, -1], [-1, 1]])


def P(text):
    return RatFunc.parse(text)


class TestTransferFunction:
    def test_admm(self):
        want = RatMatrix([["-1/(z-1)", "z/(z-1)"], ["(2*z-1)/(z*(z-1))", "-1/(z-1)"]])
        assert transfer_function(corpus.realization("admm")).matrix == want

    def test_reflected_gradient(self):
        assert transfer_function(corpus.realization("reflected_gradient"))[0, 0] == P("-eta*(2*z-1)/(z*(z-1))")

    def test_gradient_descent(self):
        assert transfer_function(GD)[0, 0] == P("-1/(5*(z-1))")

    def test_static_map(self):
        ss = StateSpace(RatMatrix.zeros(0, 0), RatMatrix.zeros(0, 1), RatMatrix.zeros(1, 0), [["-t"]])
        assert transfer_function(ss)[0, 0] == P("-t")


class TestInitialResponse:
    def test_gradient_descent(self):
        assert initial_response(GD)[0, 0] == z / (z - 1)

    def test_empty_state(self):
        ss = StateSpace(RatMatrix.zeros(0, 0), RatMatrix.zeros(0, 2), RatMatrix.zeros(2, 0), RatMatrix.identity(2))
        assert initial_response(ss).shape == (2, 0)

    def test_zero_dynamics(self):
        ss = StateSpace(RatMatrix.zeros(2, 2), RatMatrix.zeros(2, 2), RatMatrix.identity(2), RatMatrix.zeros(2, 2))
        assert initial_response(ss).matrix == RatMatrix.identity(2)


class TestExplicitOrder:
    def test_admm_queries_prox_g_first(self):
        assert is_explicit(corpus.realization("admm")) == (1, 0)

    def test_implicit(self):
        assert is_explicit(StateSpace([[1]], [["-t"]], [[1]], [["-t"]])) is None

    def test_zero_feedthrough(self):
        assert is_explicit(RatMatrix.zeros(3, 3)) == (0, 1, 2)


class TestMinimality:
    def test_cancelling_pole(self):
        ss = StateSpace([[3, -2], [1, 0]], [["1/5"], [0]], [[-1, 2]], [[0]])
        rep = minimality_report(ss)
        assert rep.observability_rank == 1 and not rep.minimal
        assert corpus.realization("two_step_c") == ss

    def test_gradient_descent(self):
        assert minimality_report(GD).minimal

    def test_no_input(self):
        ss = StateSpace([[1]], [[0]], [[1]], [[0]])
        assert not minimality_report(ss).controllable


class TestStateTransforms:
    def test_two_step_forms(self):
        a, b = corpus.realization("two_step_a"), corpus.realization("two_step_b")
        assert apply_state_transform(a, T78) == b
        assert similarity_transform(a, b) == T78

    def test_identity(self):
        ss = corpus.realization("heavy_ball")
        assert apply_state_transform(ss, RatMatrix.identity(2)) == ss
        num = ss.subs(corpus.bindings("heavy_ball"))
        assert similarity_transform(num, num) == RatMatrix.identity(2)

    def test_singular(self):
        with pytest.raises(Singular):
            apply_state_transform(corpus.realization("two_step_a"), [[1, 1], [1, 1]])

    def test_wrong_size(self):
        with pytest.raises(DimensionMismatch):
            apply_state_transform(GD, RatMatrix.identity(2))

    def test_dimension_mismatch(self):
        hb = corpus.realization("heavy_ball").subs({"alpha": Fraction(1, 5), "beta": Fraction(1, 2)})
        assert similarity_transform(GD, hb) is None

    def test_not_minimal(self):
        with pytest.raises(NotMinimal):
            similarity_transform(corpus.realization("two_step_c"), corpus.realization("two_step_c"))

    def test_match_initial_condition(self):
        a, b = corpus.realization("two_step_a"), corpus.realization("two_step_b")
        assert match_initial_condition(a, b, [1, 0]) == [1, 1]
        assert match_initial_condition(a, a, [3, -2]) == [3, -2]
        assert match_initial_condition(a, b, [0, 0]) == [0, 0]


class TestInverse:
    def test_unit_feedthrough(self):
        ss = StateSpace([[2]], [[0]], [[3]], [[1]])
        inv = ss_inverse(ss)
        assert (inv.A, inv.B, inv.C, inv.D) == (ss.A, ss.B, RatMatrix([[-3]]), ss.D)

    def test_product_is_identity(self):
        ss = StateSpace([[1, 1], [0, "1/2"]], [[1, 0], [0, 1]], [[1, 0], [1, 1]], [[2, 0], [1, 1]])
        h = transfer_function(ss).matrix
        assert h @ transfer_function(ss_inverse(ss)).matrix == RatMatrix.identity(2)

    def test_singular_feedthrough(self):
        with pytest.raises(SingularD):
            ss_inverse(GD)

    def test_double_inverse(self):
        ss = StateSpace([["1/3"]], [[2]], [[1]], [["-t"]])
        assert transfer_function(ss_inverse(ss_inverse(ss))).matrix == transfer_function(ss).matrix


def test_json_round_trip():
    for name in corpus.names():
        ss = corpus.realization(name)
        back = StateSpace.from_json(ss.to_json())
        assert back == ss
        tf = transfer_function(ss)
        assert TransferMatrix.from_json(tf.to_json()) == tf


@pytest.mark.parametrize("name", corpus.names())
def test_corpus_properness(name, tfs):
    ss = corpus.realization(name)
    h = tfs[name].matrix
    assert all(e.is_proper() for _, _, e in h.entries())
    strictly = all(e.relative_degree() >= 1 for _, _, e in h.entries())
    assert strictly == ss.D.is_zero()


@given(st.sampled_from(corpus.names()), st.integers(0, 10_000))
def test_state_transform_invariance(name, seed):
    ss = corpus.realization(name)
    rng = random.Random(seed)
    while True:
        T = RatMatrix([[rng.randint(-3, 3) for _ in range(ss.n)] for _ in range(ss.n)], shape=(ss.n, ss.n))
        if not T.det().is_zero():
            break
    assert transfer_function(apply_state_transform(ss, T)).matrix == transfer_function(ss).matrix


@given(st.sampled_from(corpus.names()), st.integers(0, 10_000))
def test_series_matches_recursion(name, seed):
    ss = corpus.realization(name).subs(corpus.bindings(name))
    rng = random.Random(seed)
    K = 15
    x0 = [Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(ss.n)]
    support = rng.randint(0, K)
    u = [[Fraction(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(ss.p)] for _ in range(support)]
    u += [[Fraction(0)] * ss.p] * (K - support)
    assert simulate_open_loop(ss, u, x0).y == predicted_outputs(ss, x0, u, K)
