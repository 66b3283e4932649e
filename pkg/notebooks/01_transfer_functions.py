"""
Transfer functions and oracle equivalence
=========================================

Two algorithms that make the same oracle calls with the same arguments are
indistinguishable from the outside.  Their transfer functions in ``z`` agree
exactly, even when their state updates look nothing alike.
"""

from algequiv import compile_source, oracle_equivalent, realization, transfer_function

# %%
# Gradient descent, written with a state ``x`` and a single gradient call.
gd = realization("gradient_descent")
print(gd.A, gd.B, gd.C, gd.D, sep="\n")
print(transfer_function(gd))

# %%
# The same method written as a momentum-free recurrence on the gradient
# query point.  The state is different, the transfer function is not.
src = """
algorithm gd_query(grad_f: subdiff(f); eta) {
    y[k+1] = y[k] - eta*grad_f(y[k]);
}
"""
alt = compile_source(src).subs({"eta": "1/5"})
print(transfer_function(alt))
print("oracle equivalent:", oracle_equivalent(transfer_function(gd), transfer_function(alt)))

# %%
# Douglas-Rachford and ADMM call the same two proximal maps but in a
# different order, so they are not oracle equivalent.
dr = transfer_function(realization("douglas_rachford"))
admm = transfer_function(realization("admm"))
print(dr)
print(admm)
print("oracle equivalent:", oracle_equivalent(dr, admm))
