import pytest

from algequiv import corpus
from algequiv.algebra import RatFunc, RatMatrix
from algequiv.dsl import builtin, compile_source, emit_source, lower, parse
from algequiv.errors import (
    CyclicDefinition,
    DslSyntaxError,
    NonlinearExpression,
    OracleUseError,
    UndeclaredSymbol,
    UnknownAlgorithm,
)
from algequiv.statespace import StateSpace, transfer_function

GD = StateSpace([[1]], [["-1/5"]], [[1]], [[0]], ("grad_f",))
AH = RatFunc.parse("-eta*(2*z - 1)/(z*(z - 1))")


class TestParse:
    def test_admm(self):
        ast = builtin("admm")
        assert len(ast.states) == 3
        assert [c.oracle for c in ast.calls] == ["prox_g", "prox_f"]

    def test_headerless_gradient_descent(self):
        ast = parse("x[k+1] = x[k] - (1/5)*grad_f(x[k]);")
        assert ast.oracle_names == ("grad_f",) and ast.params == ()
        assert lower(ast) == GD

    def test_params_from_bare_names(self):
        ast = parse("x[k+1] = x[k] - alpha*grad_f(x[k]) + beta*(x[k] - x[k-1]);")
        assert ast.params == ("alpha", "beta")

    def test_comments_and_header(self):
        text = "# a comment\nalgorithm gd(grad_f: subdiff(f); ) {\n  x[k+1] = x[k] - (1/5)*grad_f(x[k]); # trailing\n}\n"
        assert parse(text).name == "gd"

    @pytest.mark.parametrize("name, ast_name", [("heavy_ball", "heavy_ball"), ("douglas_rachford", "douglas_rachford"),
                                                ("pd3o", "pd3o"), ("dr", "douglas_rachford")])
    def test_builtin(self, name, ast_name):
        assert builtin(name).name == ast_name

    def test_unknown_builtin(self):
        with pytest.raises(UnknownAlgorithm):
            builtin("no_such_method")


class TestErrors:
    @pytest.mark.parametrize("src, exc", [
        ("x[k+1] = x[k]*x[k];", NonlinearExpression),
        ("x[k+1] = F(x[k])*F(x[k]);", NonlinearExpression),
        ("x[k+1] = x[k] +* F(x[k]);", DslSyntaxError),
        ("x[k+1] = x[k] + F(q[k]);", UndeclaredSymbol),
        ("algorithm a(F; ) { x[k+1] = x[k]; }", OracleUseError),
        ("algorithm a(F; ) { x[k+1] = x[k] - s*F(x[k]); }", UndeclaredSymbol),
        ("algorithm a(F; ) { x[k+1] = G(x[k]); }", UndeclaredSymbol),
        ("x[k+1] = x[k]; x[k+1] = F(x[k]);", DslSyntaxError),
    ])
    def test_rejected_at_parse(self, src, exc):
        with pytest.raises(exc):
            parse(src)

    @pytest.mark.parametrize("src, exc", [
        ("x[k+1] = x[k] - F(x[k]) - F(2*x[k]);", OracleUseError),
        ("y[k] = w[k] + x[k]; w[k] = y[k]; x[k+1] = x[k] + F(y[k]);", CyclicDefinition),
    ])
    def test_rejected_at_lowering(self, src, exc):
        with pytest.raises(exc):
            lower(parse(src))

    def test_diagnostic_has_position(self):
        with pytest.raises(DslSyntaxError) as info:
            parse("x[k+1] = x[k] +* F(x[k]);")
        assert info.value.line == 1 and info.value.col == 16


class TestLower:
    def test_reflected_gradient(self):
        ss = corpus.realization("reflected_gradient")
        assert (ss.A, ss.B, ss.C, ss.D) == (RatMatrix([[1, 0], [1, 0]]), RatMatrix([["-eta"], [0]]),
                                            RatMatrix([[2, -1]]), RatMatrix([[0]]))

    def test_admm(self):
        ss = corpus.realization("admm")
        assert ss.A == RatMatrix([[0, 0, 0], [0, 0, 0], [0, 0, 1]])
        assert ss.B == RatMatrix([[0, 1], [1, 0], [-1, 1]])
        assert ss.C == RatMatrix([[0, 0, 1], [0, 1, -1]])
        assert ss.D == RatMatrix([[0, 1], [0, 0]])

    def test_gradient_descent(self):
        assert corpus.realization("gradient_descent") == GD

    def test_arrow_hurwicz_family(self):
        names = ["arrow_hurwicz", "extrapolation_from_past", "optimistic_mirror_descent", "reflected_gradient"]
        realizations = [corpus.realization(n) for n in names]
        for i in range(4):
            assert transfer_function(realizations[i])[0, 0] == AH
            for j in range(i):
                assert realizations[i] != realizations[j]

    def test_implicit_step(self):
        ss = corpus.realization("subdifferential_gradient")
        assert not ss.D.is_zero()


class TestEmit:
    def test_gradient_descent_body(self):
        assert emit_source(GD, header=False).split("\n") == [
            "y[k] = x1[k];", "u[k] = grad_f(y[k]);", "x1[k+1] = x1[k] - (1/5)*u[k];"]

    def test_implicit_marker(self):
        text = emit_source(StateSpace([[1]], [["-t"]], [[1]], [["-t"]], ("dg",)))
        assert "implicit y[k] = x1[k] - t*u[k];" in text
        again = compile_source(text)
        assert transfer_function(again)[0, 0] == RatFunc.parse("-t*z/(z - 1)")

    @pytest.mark.parametrize("name", corpus.names())
    def test_round_trip(self, name, tfs):
        text = emit_source(corpus.realization(name), name)
        assert transfer_function(compile_source(text)) == tfs[name]
