"""
Shift equivalence
=================

Delaying some oracle channels by a whole number of steps relabels iterations
without changing the algorithm.  The transfer functions are then related by a
diagonal conjugation ``H1 = D H2 D^-1`` with ``D = diag(z^m)``.
"""

from algequiv import (conj_by_multishift, enumerate_shift_class, realization, shift_equivalent,
                      transfer_function)


def tf(name):
    return transfer_function(realization(name))


# %%
# ADMM is Douglas-Rachford with the first proximal call moved one step.
cert = shift_equivalent(tf("douglas_rachford"), tf("admm"))
print(cert)

# %%
# The PD3O variants differ by delaying one or two of their three channels.
for other in ("pd3o_b", "pd3o_c", "pd3o_d"):
    print(other, shift_equivalent(tf(other), tf("pd3o")))

# %%
# Conjugating by a candidate shift reproduces the variant exactly.
print(conj_by_multishift(tf("pd3o"), (0, 1, 0)).matrix == tf("pd3o_b").matrix)

# %%
# Enumerating every normalized shift with entries up to 1 lists the whole
# class of PD3O reorderings.
for m, h in enumerate_shift_class(tf("pd3o"), cap=1):
    print(m)
    print(h)
