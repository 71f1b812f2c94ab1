"""Numerical certification of the supporting vector-analysis facts.

Two pointwise power-map inequalities are certified by seeded sampling
(the constants are *estimated* as envelope suprema, not proven — but the
ratios are scale-invariant, so sampling with adversarial families at
mixed radii covers the asymptotic regimes where the sup is attained).
The Friedrich constant — the best bound ||u||_Lp <= C ||curl u||_Lp over
boundary-constrained divergence-free fields — is computed discretely:
exactly for p = 2 via inverse iteration on the projected curl-curl
eigenproblem, and as a certified lower bound for p > 2 via projected
ascent on the norm ratio. Green's formulas and scalar-potential
extraction close the loop on the trace and gradient structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import whitney
from .assembly import (EdgeField, NodalField, assemble_gradient_map,
                       curl_per_tet, eval_field, lp_norm_curl, lp_norm_field,
                       stiffness_matrix)
from .helmholtz import DivFreeProjector
from .linalg import cg
from .mesh import Mesh, boundary_faces


# ---------------------------------------------------------------------------
# Pointwise vector inequalities for the power map
# ---------------------------------------------------------------------------

SAMPLE_FAMILIES = ("unit-ball", "log-uniform radii", "near-collinear",
                   "near-equal", "antipodal/one-sided")


@dataclass
class InequalityReport:
    p: float
    delta: float
    samples: int
    worst_ratio: float
    violations: int
    families: str = ", ".join(SAMPLE_FAMILIES)


def _power(v, p):
    """|v|^(p-2) v rowwise (unregularized; 0 at v = 0 for p >= 2)."""
    mag = np.linalg.norm(v, axis=1, keepdims=True)
    with np.errstate(invalid="ignore"):
        w = np.where(mag > 0, mag**(p - 2.0), 0.0 if p > 2 else 1.0)
    return w * v


def _radius_exponent(p):
    """Largest safe log10 sampling radius for the given exponent.

    Norm evaluation squares entries of size up to (4 r)^(p-1), so r must
    satisfy 2 (p-1) (log10 r + 0.7) < 308 with margin.
    """
    return min(6.0, max(0.3, 130.0 / max(p - 1.0, 1.0) - 0.7))


def _sample_pairs(n, rng, rexp=6.0):
    """Mixed-scale adversarial sample pairs (xi, eta) in R^3.

    `rexp` bounds the log10 radius range; both inequality ratios are
    scale-invariant, so shrinking the range (needed to keep |v|^(p-1)
    finite for large p) does not hide any regime.
    """
    quarters = np.array_split(np.arange(n), 4)
    xi = np.empty((n, 3))
    eta = np.empty((n, 3))

    def ball(k):
        v = rng.standard_normal((k, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return v * rng.uniform(0, 1, (k, 1)) ** (1 / 3)

    def log_radius(k):
        v = rng.standard_normal((k, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        return v * 10.0 ** rng.uniform(-rexp, rexp, (k, 1))

    k = quarters[0].size
    xi[quarters[0]] = ball(k)
    eta[quarters[0]] = ball(k)

    k = quarters[1].size
    xi[quarters[1]] = log_radius(k)
    eta[quarters[1]] = log_radius(k)

    # near-collinear: eta is a stretched xi plus a tiny transverse kick
    k = quarters[2].size
    base = log_radius(k)
    stretch = 1.0 + 10.0 ** rng.uniform(-8, 0, (k, 1)) * rng.choice([-1, 1], (k, 1))
    kick = rng.standard_normal((k, 3)) * 10.0 ** rng.uniform(-10, -2, (k, 1)) \
        * np.linalg.norm(base, axis=1, keepdims=True)
    xi[quarters[2]] = base
    eta[quarters[2]] = base * stretch + kick

    # near-equal: relative perturbations down to 1e-12
    k = quarters[3].size
    base = log_radius(k)
    pert = rng.standard_normal((k, 3)) * 10.0 ** rng.uniform(-12, -6, (k, 1)) \
        * np.linalg.norm(base, axis=1, keepdims=True)
    xi[quarters[3]] = base
    eta[quarters[3]] = base + pert

    # pinned adversarial rows: exact antipodal and one-sided pairs
    m = min(8, n)
    dirs = rng.standard_normal((m, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    xi[:m] = dirs
    eta[:m] = -dirs
    eta[: m // 2] = 0.0
    return xi, eta


def check_ineq1(p, delta, n_samples, rng_seed=0):
    """Envelope constant for the difference bound on the power map:

        | |xi|^(p-2) xi - |eta|^(p-2) eta |
            <= a1 |xi - eta|^(1-delta) (|xi| + |eta|)^(p-2+delta).

    delta is restricted to [0, min(1, p-1)]: beyond 1 the right side
    vanishes faster than the left as eta -> xi and no finite constant
    exists.
    """
    if not 0.0 <= delta <= min(1.0, p - 1.0):
        raise ValueError(f"delta must lie in [0, min(1, p-1)], got {delta}")
    rng = np.random.default_rng(rng_seed)
    xi, eta = _sample_pairs(n_samples, rng, rexp=_radius_exponent(p))
    lhs = np.linalg.norm(_power(xi, p) - _power(eta, p), axis=1)
    diff = np.linalg.norm(xi - eta, axis=1)
    tot = np.linalg.norm(xi, axis=1) + np.linalg.norm(eta, axis=1)
    keep = (diff > 0) & (tot > 0)
    rhs = diff[keep]**(1.0 - delta) * tot[keep]**(p - 2.0 + delta)
    ratio = lhs[keep] / rhs
    worst = float(np.max(ratio))
    violations = int(np.sum(lhs[keep] > worst * rhs * (1 + 1e-12)))
    return InequalityReport(p=p, delta=delta, samples=int(np.sum(keep)),
                            worst_ratio=worst, violations=violations)


def check_ineq2(p, delta, n_samples, rng_seed=0):
    """Envelope constant for the monotonicity lower bound:

        |xi - eta|^(2+delta) (|xi| + |eta|)^(p-2-delta)
            <= a2 ( |xi|^(p-2) xi - |eta|^(p-2) eta ) . (xi - eta).

    Also certifies strict positivity of the pairing for xi != eta (the
    power map is strictly monotone). delta in [0, p-2] keeps the exponent
    on the magnitude sum nonnegative.

    Raises:
        AssertionError: if any sampled pairing is nonpositive.
    """
    if p >= 2.0 and not 0.0 <= delta <= p - 2.0 + 1e-15:
        raise ValueError(f"delta must lie in [0, p-2], got {delta}")
    rng = np.random.default_rng(rng_seed)
    xi, eta = _sample_pairs(n_samples, rng, rexp=_radius_exponent(p))
    d = xi - eta
    pairing = np.einsum("ij,ij->i", _power(xi, p) - _power(eta, p), d)
    diff = np.linalg.norm(d, axis=1)
    tot = np.linalg.norm(xi, axis=1) + np.linalg.norm(eta, axis=1)
    keep = (diff > 0) & (tot > 0)
    assert np.all(pairing[keep] > 0.0), "power-map pairing not strictly positive"
    lhs = diff[keep]**(2.0 + delta) * tot[keep]**(p - 2.0 - delta)
    ratio = lhs / pairing[keep]
    worst = float(np.max(ratio))
    violations = int(np.sum(lhs > worst * pairing[keep] * (1 + 1e-12)))
    return InequalityReport(p=p, delta=delta, samples=int(np.sum(keep)),
                            worst_ratio=worst, violations=violations)


# ---------------------------------------------------------------------------
# Discrete Friedrich constant
# ---------------------------------------------------------------------------

@dataclass
class FriedrichReport:
    p: float
    levels: list                    # mesh divisions per level
    constants: list                 # C_h per level
    extrapolated: float = 0.0
    lower_bound_only: bool = False  # True for p > 2 (ascent, not eigensolve)


def friedrich_constant(meshes, p, seed=0, eig_tol=1e-10, max_eig_iter=200,
                       ascent_iter=150):
    """Best discrete constant in ||u||_Lp <= C ||curl u||_Lp on each mesh.

    p = 2: C_h = 1/sqrt(lambda_min) where lambda_min is the smallest
    curl-curl eigenvalue over discretely divergence-free constrained
    fields, found by inverse power iteration with a divergence-free
    projection after every solve (the projection removes the gradient
    kernel, on which the stiffness is singular).

    p > 2: projected gradient ascent on log(||u||_p / ||curl u||_p)
    started from the p = 2 maximizer; the result is a certified lower
    bound for C_h.

    Extrapolation assumes second-order eigenvalue convergence and uses
    the last two levels.
    """
    constants = []
    levels = []
    for mesh in meshes:
        levels.append(tuple(int(round(e)) for e in _divisions_of(mesh)))
        u2, c2 = _friedrich_p2(mesh, seed=seed, tol=eig_tol,
                               max_iter=max_eig_iter)
        if p == 2.0:
            constants.append(c2)
        else:
            constants.append(_friedrich_ascent(mesh, u2, p, ascent_iter))
    extrap = constants[-1]
    if len(constants) >= 2:
        extrap = constants[-1] + (constants[-1] - constants[-2]) / 3.0
    return FriedrichReport(p=float(p), levels=levels, constants=constants,
                           extrapolated=float(extrap),
                           lower_bound_only=(p != 2.0))


def _divisions_of(mesh):
    origin, extents = mesh.box
    counts = []
    for ax in range(3):
        counts.append(len(np.unique(np.round(mesh.vertices[:, ax], 12))) - 1)
    return counts


def _friedrich_p2(mesh, seed, tol, max_iter, block=6):
    """Smallest constrained curl-curl eigenvalue, blocked inverse iteration.

    The lowest cavity eigenvalue has multiplicity 3 in the continuum and
    splits into a tight discrete cluster, so single-vector iteration
    stalls; a small Rayleigh-Ritz block separates the cluster cleanly.
    Every sweep re-projects onto the divergence-free complement, which
    removes the gradient kernel of the stiffness.
    """
    geom = whitney.cell_geometry(mesh)
    proj = DivFreeProjector(mesh, geom)
    free = mesh.free_edges()
    K = stiffness_matrix(mesh, geom)[free][:, free].tocsr()
    M = proj.M[free][:, free].tocsr()
    block = min(block, free.size)

    def project_cols(X):
        out = np.empty_like(X)
        for j in range(X.shape[1]):
            u = EdgeField(mesh)
            u.coeffs[free] = X[:, j]
            u, _ = proj.project(u, tol=1e-13)
            out[:, j] = u.coeffs[free]
        return out

    rng = np.random.default_rng(seed)
    X = project_cols(rng.standard_normal((free.size, block)))

    lam_old = np.inf
    lam = np.inf
    for _ in range(max_iter):
        Y = np.empty_like(X)
        for j in range(block):
            y, rep = cg(K, M @ X[:, j], tol=1e-12, max_iter=40 * free.size)
            if not rep.converged:
                raise RuntimeError("inverse iteration: stiffness CG stalled")
            Y[:, j] = y
        Y = project_cols(Y)
        # Rayleigh-Ritz on the block
        w, Q = _ritz(Y.T @ (K @ Y), Y.T @ (M @ Y))
        X = Y @ Q
        lam = float(w[0])
        if abs(lam - lam_old) <= tol * max(abs(lam), 1.0):
            break
        lam_old = lam
    else:
        raise RuntimeError(
            f"inverse iteration stagnated: eigenvalue drift "
            f"{abs(lam - lam_old) / abs(lam):.3e} after {max_iter} sweeps")
    u = EdgeField(mesh)
    u.coeffs[free] = X[:, 0]
    return u, 1.0 / np.sqrt(lam)


def _ritz(Kz, Mz):
    """Generalized symmetric Ritz values/vectors, ascending."""
    L = np.linalg.cholesky(Mz)
    Li = np.linalg.inv(L)
    w, V = np.linalg.eigh(Li @ Kz @ Li.T)
    return w, Li.T @ V


def _friedrich_ascent(mesh, u_start, p, iters):
    """Projected ascent on the Lp norm ratio; returns a lower bound."""
    geom = whitney.cell_geometry(mesh)
    proj = DivFreeProjector(mesh, geom)
    free = mesh.free_edges()
    rule = whitney.quadrature(4)
    u = EdgeField(mesh, u_start.coeffs.copy())

    def ratio_and_grad(uf):
        num = lp_norm_field(uf, p, geom=geom)
        den = lp_norm_curl(uf, p, geom=geom)
        # gradient of log(num/den) in the free coefficients
        vals = eval_field(uf, rule, geom)               # (T, nq, 3)
        mag = np.linalg.norm(vals, axis=2)
        W = whitney.eval_basis(geom, rule.points)
        wf = np.power(mag, p - 2.0)[:, :, None] * vals
        gn = np.einsum("t,q,tqc,tqec->te", geom.vols, rule.weights, wf, W)
        gn *= uf.mesh.tet_edge_signs
        grad_num = np.zeros(uf.mesh.num_edges)
        np.add.at(grad_num, uf.mesh.tet_edges.ravel(), gn.ravel())
        g = curl_per_tet(uf, geom)
        gmag = np.linalg.norm(g, axis=1)
        flux = (geom.vols * np.power(gmag, p - 2.0))[:, None] * g
        gd = np.einsum("tc,tec->te", flux, geom.curls) * uf.mesh.tet_edge_signs
        grad_den = np.zeros(uf.mesh.num_edges)
        np.add.at(grad_den, uf.mesh.tet_edges.ravel(), gd.ravel())
        grad = grad_num[free] / num**p - grad_den[free] / den**p
        return num / den, grad

    best, grad = ratio_and_grad(u)
    step = 1.0
    for _ in range(iters):
        trial = EdgeField(mesh)
        trial.coeffs[free] = u.coeffs[free] + step * grad / max(np.linalg.norm(grad), 1e-300)
        trial, _ = proj.project(trial, tol=1e-12)
        trial.coeffs /= lp_norm_curl(trial, p, geom=geom)
        r_try, g_try = ratio_and_grad(trial)
        if r_try > best:
            u, best, grad = trial, r_try, g_try
            step *= 1.3
        else:
            step *= 0.5
            if step < 1e-12:
                break
    return float(best)


# ---------------------------------------------------------------------------
# Green's formulas
# ---------------------------------------------------------------------------

@dataclass
class SmoothFieldPair:
    """Analytic fields with analytic derivatives for Green identity checks.

    u, curl_u, div_u feed both identities; v/grad_v is the scalar partner
    for the divergence formula, w/curl_w the vector partner for the curl
    formula. All callables map (N, 3) points to (N, 3) or (N,) arrays.
    """

    u: callable
    curl_u: callable
    div_u: callable
    v: callable
    grad_v: callable
    w: callable
    curl_w: callable


def default_smooth_pair(a=0.3, b=0.9):
    """Exponential-trigonometric fields with nonzero boundary traces.

    Frequencies are deliberately incommensurate with the box period: for
    periodic integrands the composite rules on a uniform mesh converge
    spectrally (all error terms cancel), which would hide the quadrature
    rate the residuals are meant to expose.
    """

    def u(x):
        return np.column_stack([
            np.exp(a * x[:, 2]) * np.sin(b * x[:, 1]) + 0.1 * x[:, 0]**2,
            np.exp(a * x[:, 0]) * np.sin(b * x[:, 2]),
            np.exp(a * x[:, 1]) * np.sin(b * x[:, 0])])

    def div_u(x):
        return 0.2 * x[:, 0]

    def curl_u(x):
        ex, ey, ez = (np.exp(a * x[:, 0]), np.exp(a * x[:, 1]),
                      np.exp(a * x[:, 2]))
        return np.column_stack([
            a * ey * np.sin(b * x[:, 0]) - b * ex * np.cos(b * x[:, 2]),
            a * ez * np.sin(b * x[:, 1]) - b * ey * np.cos(b * x[:, 0]),
            a * ex * np.sin(b * x[:, 2]) - b * ez * np.cos(b * x[:, 1])])

    def v(x):
        return np.exp(a * x[:, 0]) * np.sin(b * x[:, 1]) * np.cos(b * x[:, 2])

    def grad_v(x):
        ex = np.exp(a * x[:, 0])
        return np.column_stack([
            a * ex * np.sin(b * x[:, 1]) * np.cos(b * x[:, 2]),
            b * ex * np.cos(b * x[:, 1]) * np.cos(b * x[:, 2]),
            -b * ex * np.sin(b * x[:, 1]) * np.sin(b * x[:, 2])])

    def w(x):
        return np.column_stack([np.sin(b * x[:, 2]), np.sin(b * x[:, 0]),
                                np.sin(b * x[:, 1])])

    def curl_w(x):
        return np.column_stack([b * np.cos(b * x[:, 1]),
                                b * np.cos(b * x[:, 2]),
                                b * np.cos(b * x[:, 0])])

    return SmoothFieldPair(u=u, curl_u=curl_u, div_u=div_u, v=v,
                           grad_v=grad_v, w=w, curl_w=curl_w)


def check_green_formulas(mesh: Mesh, pair: SmoothFieldPair, quad_order=4):
    """Residuals of the two Green identities under quadrature.

        div : (u, grad v) + (div u, v)  = surface integral of (n.u) v
        curl: (curl u, w) - (u, curl w) = surface integral of (n x u).w

    Both sides are integrated with rules of the given order; residuals
    shrink at the quadrature rate under refinement.
    """
    geom = whitney.cell_geometry(mesh)
    rule = whitney.quadrature(quad_order)
    xq = whitney.quad_points_physical(mesh, rule).reshape(-1, 3)
    wvol = np.repeat(geom.vols[:, None], rule.weights.size, axis=1) \
        * rule.weights[None, :]
    wvol = wvol.ravel()

    def vol_int(values):
        return float(wvol @ values)

    faces, normals, areas = boundary_faces(mesh)
    tri_rule = whitney.triangle_quadrature(min(quad_order, 4))
    pv = mesh.vertices[faces]                           # (F, 3, 3)
    xs = np.einsum("qi,fix->fqx", tri_rule.points, pv).reshape(-1, 3)
    wsurf = (areas[:, None] * tri_rule.weights[None, :]).ravel()
    nrep = np.repeat(normals, tri_rule.weights.size, axis=0)

    u_vol = pair.u(xq)
    lhs_div = vol_int(np.einsum("ij,ij->i", u_vol, pair.grad_v(xq))
                      + pair.div_u(xq) * pair.v(xq))
    u_srf = pair.u(xs)
    rhs_div = float(wsurf @ (np.einsum("ij,ij->i", nrep, u_srf) * pair.v(xs)))

    lhs_curl = vol_int(np.einsum("ij,ij->i", pair.curl_u(xq), pair.w(xq))
                       - np.einsum("ij,ij->i", u_vol, pair.curl_w(xq)))
    rhs_curl = float(wsurf @ np.einsum("ij,ij->i",
                                       np.cross(nrep, u_srf), pair.w(xs)))
    return abs(lhs_div - rhs_div), abs(lhs_curl - rhs_curl)


# ---------------------------------------------------------------------------
# Scalar potential of curl-free edge fields
# ---------------------------------------------------------------------------

def extract_scalar_potential(u: EdgeField, curl_tol=1e-12, closure_tol=1e-10):
    """Potential phi with G phi = u, fixed by mean-zero normalization.

    Integrates edge values along a breadth-first spanning tree of the
    vertex graph; discrete curl-freeness guarantees closure on the
    remaining edges, which is checked explicitly. Deterministic for a
    fixed mesh.

    Raises:
        ValueError: per-tet curl above curl_tol, or closure violation
            above closure_tol (input not a gradient field).
    """
    mesh = u.mesh
    g = curl_per_tet(u)
    if np.abs(g).max(initial=0.0) > curl_tol:
        raise ValueError(
            f"field is not curl-free: max per-tet curl {np.abs(g).max():.3e}")

    adj = [[] for _ in range(mesh.num_vertices)]
    for eid, (lo, hi) in enumerate(mesh.edges):
        adj[lo].append((hi, eid, 1.0))
        adj[hi].append((lo, eid, -1.0))

    phi = np.zeros(mesh.num_vertices)
    seen = np.zeros(mesh.num_vertices, dtype=bool)
    tree_edge = np.zeros(mesh.num_edges, dtype=bool)
    queue = [0]
    seen[0] = True
    while queue:
        nxt = []
        for v0 in queue:
            for v1, eid, sgn in adj[v0]:
                if not seen[v1]:
                    seen[v1] = True
                    tree_edge[eid] = True
                    phi[v1] = phi[v0] + sgn * u.coeffs[eid]
                    nxt.append(v1)
        queue = nxt
    if not seen.all():
        raise ValueError("mesh vertex graph is disconnected")

    lo, hi = mesh.edges[:, 0], mesh.edges[:, 1]
    closure = np.abs(phi[hi] - phi[lo] - u.coeffs)
    worst = float(closure[~tree_edge].max(initial=0.0))
    if worst > closure_tol:
        raise ValueError(
            f"closure violation {worst:.3e} on non-tree edges: "
            f"input is not a gradient field")
    phi -= phi.mean()
    return NodalField(mesh, phi)
