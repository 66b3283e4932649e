from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from algequiv import corpus
from algequiv.algebra import RatFunc, RatMatrix
from algequiv.errors import FreeParameter, ImproperEntry
from algequiv.realize import hankel, hankel_rank, ho_kalman, markov, minreal, order_bound
from algequiv.statespace import StateSpace, minimality_report, transfer_function

GD_TF = RatMatrix([["-1/(5*(z - 1))"]])
PRE_CANCEL = RatMatrix([["(-z + 2)/(5*(z^2 - 3*z + 2))"]])


class TestMarkov:
    def test_geometric(self):
        seq = markov(GD_TF, 6)
        assert seq.M0 == [[0]]
        assert all(seq[k] == [[Fraction(-1, 5)]] for k in range(1, 7))

    def test_admm_feedthrough(self, tfs):
        assert markov(tfs["admm"], 0).M0 == [[0, 1], [0, 0]]

    def test_zero(self):
        seq = markov(RatMatrix.zeros(2, 2), 4)
        assert all(seq[k] == [[0, 0], [0, 0]] for k in range(5))

    def test_matches_state_space(self, numeric_ss):
        ss = numeric_ss["heavy_ball"]
        A, B, C = (m.to_fractions() for m in (ss.A, ss.B, ss.C))
        seq = markov(transfer_function(ss), 5)
        x = [row[:] for row in B]
        for k in range(1, 6):
            ck = [[sum(C[i][r] * x[r][j] for r in range(ss.n)) for j in range(ss.p)] for i in range(ss.p)]
            assert seq[k] == ck
            x = [[sum(A[i][r] * x[r][j] for r in range(ss.n)) for j in range(ss.p)] for i in range(ss.n)]

    def test_improper(self):
        with pytest.raises(ImproperEntry):
            markov(RatMatrix([["z^2/(z - 1)"]]), 3)

    def test_symbolic(self, tfs):
        with pytest.raises(FreeParameter):
            markov(tfs["heavy_ball"], 3)


class TestHankel:
    def test_gradient_descent(self):
        assert hankel_rank(GD_TF) == 1
        hb = hankel(GD_TF, 3)
        assert len(hb.data) == 3 and hb.data[0] == [Fraction(-1, 5)] * 3

    def test_admm(self, tfs):
        assert hankel_rank(tfs["admm"]) == 2

    def test_zero(self):
        assert hankel_rank(RatMatrix.zeros(2, 2)) == 0

    def test_order_bound(self, tfs):
        assert order_bound(PRE_CANCEL) == 1  # the stored form is already reduced
        assert order_bound(tfs["admm"]) >= 2


class TestHoKalman:
    def test_gradient_descent(self):
        ss = ho_kalman(GD_TF)
        assert ss.n == 1 and transfer_function(ss).matrix == GD_TF

    def test_cancelling_pole(self):
        ss = ho_kalman(PRE_CANCEL)
        assert ss.n == 1
        assert transfer_function(ss).matrix == GD_TF

    def test_admm(self, tfs):
        ss = ho_kalman(tfs["admm"])
        assert ss.n == hankel_rank(tfs["admm"]) == 2
        assert transfer_function(ss).matrix == tfs["admm"].matrix

    def test_static(self):
        ss = ho_kalman(RatMatrix([[2, 0], [1, "1/3"]]))
        assert ss.n == 0 and ss.D == RatMatrix([[2, 0], [1, "1/3"]])


class TestMinreal:
    def test_cancelling_pole(self):
        ss = minreal(corpus.realization("two_step_c"))
        assert ss.n == 1
        assert transfer_function(ss).matrix == GD_TF

    def test_already_minimal(self):
        gd = corpus.realization("gradient_descent")
        assert minreal(gd).n == gd.n

    def test_unreachable_padding(self):
        padded = StateSpace([[1, 0], [0, "1/2"]], [["-1/5"], [0]], [[1, 1]], [[0]], ("grad_f",))
        ss = minreal(padded)
        assert ss.n == 1 and transfer_function(ss).matrix == GD_TF

    def test_needs_bindings(self):
        with pytest.raises(FreeParameter):
            minreal(corpus.realization("heavy_ball"))


@pytest.mark.parametrize("name", corpus.names())
def test_corpus_round_trip(name, numeric_ss):
    H = transfer_function(numeric_ss[name])
    ss = ho_kalman(H)
    assert transfer_function(ss).matrix == H.matrix
    assert minimality_report(ss).minimal
    N = max(order_bound(H), 1)
    assert markov(transfer_function(ss), 2 * N).tail == markov(H, 2 * N).tail


@pytest.mark.parametrize("name", ["heavy_ball", "admm", "pd3o", "nids", "two_step_c", "davis_yin"])
def test_hankel_rank_monotone(name, numeric_ss):
    H = transfer_function(numeric_ss[name])
    N = order_bound(H)
    ranks = [hankel_rank(H, k) for k in range(1, N + 3)]
    assert ranks == sorted(ranks)
    assert ranks[N - 1] == ranks[-1] == ho_kalman(H).n


@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(-3, 3)), min_size=1, max_size=3),
       st.integers(-3, 3))
def test_random_scalar_round_trip(terms, d):
    z = RatFunc.z()
    h = RatFunc.const(d)
    for c, pole in terms:
        h = h + RatFunc.const(c) / (z - pole)
    mat = RatMatrix([[h]])
    ss = ho_kalman(mat)
    assert transfer_function(ss).matrix == mat
    assert ss.n == h.degree_den
