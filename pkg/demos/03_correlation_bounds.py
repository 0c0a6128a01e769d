"""Range of an unknown correlation given two measured ones.

Three random variables with corr(x1, x2) = 0.70 +- 0.03 and
corr(x1, x2) = 0.80 +- 0.01: the PSD constraint on the correlation matrix
pins corr(x2, x3) into an interval, recovered here by two small SDPs.
"""

import numpy as np

from qsdp import Model, scalar_nonneg


def correlation_model(sense):
    m = Model()
    r = m.declare(3, structure="symmetric", name="R")
    m.add_lmi(r.expr())
    for i in range(3):
        m.add_equality(r.entry(i, i), 1.0)
    e = r.expr()
    m.add_lmi(scalar_nonneg(e.entry(0, 1) - 0.67))
    m.add_lmi(scalar_nonneg(0.73 - e.entry(0, 1)))
    m.add_lmi(scalar_nonneg(e.entry(0, 2) - 0.79))
    m.add_lmi(scalar_nonneg(0.81 - e.entry(0, 2)))
    (m.maximize if sense > 0 else m.minimize)(e.entry(1, 2))
    return m


low = correlation_model(-1).solve()
high = correlation_model(+1).solve()
print(f"corr(x2, x3) lies within [{low.value:.6f}, {high.value:.6f}]")

# closed-form oracle: for fixed r12, r13 the PSD condition gives
# r23 in r12 r13 +- sqrt((1 - r12^2)(1 - r13^2)); scan the box corners
corners = [(a, b) for a in (0.67, 0.73) for b in (0.79, 0.81)]
lo = min(a * b - np.sqrt((1 - a * a) * (1 - b * b)) for a, b in corners)
hi = max(a * b + np.sqrt((1 - a * a) * (1 - b * b)) for a, b in corners)
print(f"closed-form check:           [{lo:.6f}, {hi:.6f}]")

print("\nextremal correlation matrix (upper end):")
print(np.array_str(high.values["R"].real, precision=5, suppress_small=True))
