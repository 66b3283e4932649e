from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from algequiv import RatFunc, RatMatrix, corpus, transfer_function

settings.register_profile(
    "algequiv", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("algequiv")

small_ints = st.integers(min_value=-4, max_value=4)
rationals = st.builds(Fraction, st.integers(-9, 9), st.integers(1, 9))


@st.composite
def polys(draw, max_degree=2, params=("t",)):
    """Polynomial in z whose coefficients may involve the given parameters."""
    z = RatFunc.z()
    out = RatFunc.zero()
    for k in range(draw(st.integers(0, max_degree)) + 1):
        c = RatFunc.const(draw(small_ints))
        for name in params:
            if draw(st.booleans()):
                c = c + draw(small_ints) * RatFunc.param(name)
        out = out + c * z**k
    return out


@st.composite
def ratfuncs(draw, nonzero=False, params=("t",)):
    num = draw(polys(params=params))
    den = draw(polys(params=params).filter(lambda p: not p.is_zero()))
    if nonzero and num.is_zero():
        num = RatFunc.one()
    return num / den


@st.composite
def invertible_matrices(draw, n=2):
    while True:
        rows = [[draw(ratfuncs(params=())) for _ in range(n)] for _ in range(n)]
        m = RatMatrix(rows)
        if not m.det().is_zero():
            return m


@pytest.fixture(scope="session")
def tfs():
    """Symbolic transfer matrices of the whole corpus, computed once."""
    return {name: transfer_function(corpus.realization(name)) for name in corpus.names()}


@pytest.fixture(scope="session")
def numeric_ss():
    return {name: corpus.realization(name).subs(corpus.bindings(name)) for name in corpus.names()}


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
