"""Lovász theta of the pentagon and of the CHSH exclusivity graph.

theta upper-bounds the Shannon capacity (sqrt(5) is tight for C5) and, on
exclusivity graphs, the quantum value of positive game expressions; the
eight CHSH events give 2 + sqrt(2), i.e. the classical bound 3 is beaten.
"""

import numpy as np

from qsdp import GraphSpec, exclusivity_graph, lovasz_theta, weighted_theta
from qsdp.graphs import chromatic_number, chsh_exclusivity_events, cycle_graph, independence_number

c5 = cycle_graph(5)
theta, _, _ = lovasz_theta(c5)
print(f"pentagon: alpha = {independence_number(c5)}, theta = {theta:.6f}, chi(complement) = {chromatic_number(c5.complement())}")
print(f"  closed form n cos(pi/n) / (1 + cos(pi/n)) = {5 * np.cos(np.pi / 5) / (1 + np.cos(np.pi / 5)):.6f}")
print(f"  sqrt(5) = {np.sqrt(5):.6f} (tight for the Shannon capacity of C5)")

weighted, _ = weighted_theta(GraphSpec(5, c5.edges, weights=(1.0,) * 5))
print(f"  weighted theta with unit weights agrees: {weighted:.6f}")

print("\nCHSH exclusivity graph (the eight events of the positive game form):")
events = chsh_exclusivity_events()
g = exclusivity_graph(events)
print(f"  vertices = {g.n}, every degree = {set(g.degree(v) for v in range(g.n))}")
theta_g, _, _ = lovasz_theta(g)
print(f"  theta = {theta_g:.6f}")
print(f"  2 + sqrt(2) = {2 + np.sqrt(2):.6f}  (classical bound of the game expression: 3)")
print(f"  consistency with the CHSH Tsirelson bound: 2 + (2 sqrt 2)/2 = {2 + np.sqrt(2):.6f}")
