"""Subdistributions from scratch: exact weights, tensor, restrict, rescale.

A subdistribution assigns positive rational weights to finitely many
outcomes, summing to at most 1.  The missing mass is the probability
that some observation failed; dividing it out again ("rescaling")
yields the posterior.
"""

from fractions import Fraction as Q

from arrowlang import Subdist, dirac, ket, rescale, restrict, tensor, uniform

# A fair coin and a fair choice of port, written in ket notation.
coin = uniform(["H", "T"])
port = uniform(["A", "B"])
print("coin:", ket(coin))
print("port:", ket(port))

# Running two independent experiments tensors the states; outcome
# tuples concatenate flat, exactly like the joint columns of a
# pen-and-paper table.
joint = tensor(coin, port)
print("joint:", ket(joint))

# Observing a constraint crosses out the offending monomials without
# touching the surviving weights...
agree = restrict(joint, lambda pair: pair == ("H", "A") or pair == ("T", "B"))
print("restricted:", ket(agree), "  mass:", agree.mass)

# ...and rescaling splits the result into the validity (how much mass
# survived) and a proper posterior distribution.
validity, posterior = rescale(agree)
print("validity:", validity)
print("posterior:", ket(posterior))

# Everything is exact: a third is a third, not 0.3333333.
third = Subdist({"x": Q(1, 3), "y": Q(2, 3)})
assert third.weight("x") * 3 == 1
print("exact thirds:", ket(third))

# Point masses are the building blocks; rescale of a point mass is trivial.
print("point mass:", ket(dirac(("M", "L"))))
