"""The CHSH game through the moment-matrix hierarchy and its SoS dual view.

Level-by-level moment relaxations of the two-party binary scenario all meet
the Tsirelson bound 2*sqrt(2); the weighted sum-of-squares program returns
the same number together with an explicit operator decomposition.
"""

import numpy as np

from qsdp import Scenario, build_moment_model, chsh_functional, generate_words, solve_bell, tsirelson_sos_chsh

scenario = Scenario.chsh()
print("moment index sets for the two-party binary scenario:")
for level in (1, "1+AB", 2, 3, 4, 5):
    words = generate_words(scenario, level)
    unknowns = build_moment_model(scenario, level).num_unknowns
    print(f"  level {str(level):>4}: |S| = {len(words):>2}   distinct moments = {unknowns}")

print("\nupper bounds on the CHSH functional:")
for level in (1, "1+AB", 2, 3):
    res = solve_bell(scenario, level, chsh_functional())
    print(f"  level {str(level):>4}: {res.value:.7f}")
print(f"  2*sqrt(2) = {2 * np.sqrt(2):.7f}")

print("\nsum-of-squares certificate at the first level:")
q1, report = tsirelson_sos_chsh()
print(f"  q1 = {q1:.7f},  reconstruction residual = {report['residual']:.2e}")
print("  Gram matrix over (A1, A2, B1, B2):")
print(np.array_str(report["gram"], precision=4, suppress_small=True))
print("  squares r_i (rows of coefficients over the basis):")
for r in report["squares"]:
    print("   ", np.round(r, 4))
print("  these span the same plane as (A1 + A2 - sqrt(2) B1, A1 - A2 - sqrt(2) B2)")
print("  up to an orthogonal mixing of the two degenerate directions")
