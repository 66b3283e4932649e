"""
Simulation
==========

Exact rational simulation confirms what the algebra predicts.  With linear
or affine oracles every iterate is a ``Fraction``, so trajectories can be
compared with ``==``.
"""

import random
from fractions import Fraction

from algequiv import OracleImpl, check_io_equiv_empirical, check_shift_equiv_empirical, realization, simulate
from algequiv.corpus import bindings


def numeric(name):
    return realization(name).subs(bindings(name))


# %%
# A few steps of proximal gradient on a quadratic with an affine prox.
pg = numeric("proximal_gradient")
traj = simulate(pg, [OracleImpl.affine(Fraction(1, 2), 1), OracleImpl.linear(Fraction(1, 3))], [1], 5)
for row in traj.rows():
    print(row)

# %%
# PD3O and PD3O-b agree once the second channel is delayed by one step.
print(check_shift_equiv_empirical(numeric("pd3o_b"), numeric("pd3o"), (0, 1, 0)))
print(check_io_equiv_empirical(numeric("pd3o_b"), numeric("pd3o")))

# %%
# Douglas-Rachford and ADMM replayed from matched starting points: ADMM's
# first proximal call always sees what DR sees one iteration later.
rng = random.Random(0)
oracles = [OracleImpl.affine(2, -1), OracleImpl.affine(Fraction(1, 3), 4)]
x0 = [Fraction(rng.randint(-5, 5)) for _ in range(3)]
dr = simulate(realization("douglas_rachford"), oracles, x0, 9)
x11 = dr.x[1][0]
admm = simulate(realization("admm"), oracles, [0, x11, x0[2] - x11], 8)
for k in range(8):
    print(k, admm.y[k][0] == dr.y[k + 1][0], admm.y[k][1] == dr.y[k][1])
