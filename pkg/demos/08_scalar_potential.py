"""
Scalar potentials of curl-free edge fields
==========================================

A discretely curl-free edge field on a simply connected mesh is a
gradient: integrating its circulations along a spanning tree recovers a
nodal potential, unique up to a constant (fixed here by mean-zero
normalization). Closure on the non-tree edges is what certifies
curl-freeness; a field with curl is rejected.
"""

import numpy as np

from pcurlcurl import EdgeField, build_box_mesh, extract_scalar_potential
from pcurlcurl.assembly import assemble_gradient_map

mesh = build_box_mesh((4, 4, 4))
rng = np.random.default_rng(0)

G = assemble_gradient_map(mesh)
psi = rng.standard_normal(G.shape[1])
u = EdgeField(mesh, G @ psi)

phi = extract_scalar_potential(u)
diffs = phi.coeffs[mesh.edges[:, 1]] - phi.coeffs[mesh.edges[:, 0]]
print(f"round trip |grad(extract(u)) - u|_max = "
      f"{np.abs(diffs - u.coeffs).max():.2e}")
print(f"mean of recovered potential: {phi.coeffs.mean():.2e}")

general = EdgeField(mesh, rng.standard_normal(mesh.num_edges))
try:
    extract_scalar_potential(general)
except ValueError as exc:
    print(f"generic field rejected as expected: {exc}")
