"""
Momentum methods
================

Triple momentum, quasi-hyperbolic momentum and two stochastic momentum
schemes all have transfer functions of the form
``a (z - c) / ((z - 1)(z - b))``.  Matching the three coefficients tells
which parameter choices make them the same algorithm.
"""

from algequiv import RatFunc, match_parameters, realization, transfer_function, unified_momentum
from algequiv.corpus import bindings


def tf(name):
    return transfer_function(realization(name))[0, 0]


# %%
# The common form, with symbolic coefficients.
a, b, c = (RatFunc.param(s) for s in "abc")
print(unified_momentum(a, b, c))

# %%
# Triple momentum at its default tuning.
tmm = tf("triple_momentum").subs(bindings("triple_momentum"))
print(tmm)

# %%
# Parameters of the other families that reproduce it.
for name, unknowns in (("quasi_hyperbolic_momentum", ["alpha", "beta", "nu"]),
                       ("stochastic_unified_momentum", ["alpha", "beta", "s"]),
                       ("unified_stochastic_momentum", ["eta", "mu", "lam"])):
    print(name, match_parameters(tmm, tf(name), unknowns))

# %%
# Quasi-hyperbolic momentum with ``nu = 1`` is heavy ball with a smaller step.
hb = tf("heavy_ball").subs({"alpha": RatFunc.param("alpha_hb")})
print(match_parameters(tf("quasi_hyperbolic_momentum").subs({"nu": 1}), hb, ["alpha_hb"]))
