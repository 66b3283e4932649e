"""
Equivalence up to a change of oracle
====================================

A proximal map, the proximal map of the conjugate, and the subdifferential
carry the same information.  Their graphs are related by a constant linear
map, and that map acts on transfer functions as a linear fractional
transformation.
"""

from algequiv import (RatFunc, embed_common, lft_equivalent, prox_family_transform, prox_table,
                      realization, transfer_function)


def tf(name):
    return transfer_function(realization(name))


# %%
# The graph map from ``prox_{t f*}`` to ``prox_{t f}`` (Moreau decomposition).
print(prox_table("prox(t)", "prox_conj(t)"))

# %%
# Davis-Yin is PD3O with the second oracle replaced by its conjugate, once the
# step sizes are tied together.
t = RatFunc.param("t")
pd3o = tf("pd3o").subs({"a": 1, "tau": t, "sigma": 1 / t})
M = embed_common(prox_table("prox(t)", "prox_conj(t)"), 1, 3)
print("Davis-Yin vs PD3O:", lft_equivalent(tf("davis_yin"), pd3o, M))

# %%
# Douglas-Rachford and Chambolle-Pock with unit steps.
cp = tf("chambolle_pock").subs({"tau": 1, "sigma": 1, "M": 1})
M = embed_common(prox_table("prox(1)", "prox_conj(1)"), 1, 2)
print("DR vs Chambolle-Pock:", lft_equivalent(tf("douglas_rachford"), cp, M))

# %%
# Proximal gradient rewritten for each member of the proximal family.
pg = tf("proximal_gradient")
for kind in ("prox", "prox_conj", "subdiff", "subdiff_conj"):
    print(kind)
    print(prox_family_transform(pg, 1, kind))
