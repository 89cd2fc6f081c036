"""Parse a formula, evaluate it as a Taylor jet, and read off derivatives."""

from solgeom import expr as E

# %% parsing is strict: no implicit constants, ^ is right associative
tree = E.parse("exp(2*z) * sin(x*y)^2")
print(tree)
print(E.parse("x^y^z") == E.parse("x^(y^z)"), E.parse("x^y^z") == E.parse("(x^y)^z"))

# %% one pass gives every partial derivative up to the requested order
point = {"x": 0.3, "y": -1.2, "z": 0.5}
jet = E.eval_jet("exp(2*z) * sin(x*y)^2", point, 2)
print("value      ", float(jet.value))
print("d/dz       ", E.derivative(jet, ["z"], list(point)))
print("d2/dx dy   ", E.derivative(jet, ["x", "y"], list(point)))

# %% a domain error names the offending subexpression
try:
    E.eval_jet("1 + log(x - 2)", {"x": 1.0}, 1)
except E.DomainError as exc:
    print("domain error in", E.to_string(exc.subtree))
