"""
Minimal realizations
====================

A transfer function determines an algorithm only up to a change of state
coordinates and redundant states.  The Hankel matrix of Markov parameters
exposes the true state dimension, and Ho-Kalman builds a realization of
exactly that size.
"""

from algequiv import RatFunc, RatMatrix, hankel_rank, ho_kalman, markov, minimality_report, transfer_function

# %%
# A gradient step written with a pole and zero that cancel at ``z = 2``.
z = RatFunc.z()
h = RatMatrix([[(-z + 2) / (5 * (z ** 2 - 3 * z + 2))]])
print(h)

# %%
# The Markov parameters and the Hankel rank.
seq = markov(h, 5)
print([row[0][0] for row in (seq[k] for k in range(len(seq)))])
print("Hankel rank:", hankel_rank(h))

# %%
# Ho-Kalman returns a one-state realization with the same transfer function.
ss = ho_kalman(h)
print(ss.A, ss.B, ss.C, ss.D, sep="\n")
print(minimality_report(ss))
print(transfer_function(ss))
