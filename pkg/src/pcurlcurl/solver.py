"""Damped Newton on the mixed saddle formulation, with p/eps continuation.

The discrete problem at each continuation stage: find (u, phi) with

    (power(curl u), curl v) + (G phi, v)_M = (S, v)   for all free-edge v,
    (u, G psi)_M = 0                                  for all interior psi.

Newton linearizes the first block; the constraint is linear, so once an
iterate is feasible every Newton step stays feasible (up to the linear
solver tolerance) and a plain backtracking line search on the energy

    J(u) = (1/p) int (eps^2 + |curl u|^2)^(p/2) - (S, u)

guarantees descent. Large p is reached by geometric continuation in p,
and within each p stage the regularization eps is driven down a fixed
schedule; the reported answer is the one at the smallest eps.

Loads are Helmholtz-projected before solving (their discarded gradient
part is reported) so that the multiplier vanishes at convergence for
compatible loads.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import whitney
from .assembly import (EdgeField, NodalField, PExponent, assemble_jacobian,
                       assemble_load, assemble_residual, curl_per_tet)
from .helmholtz import DivFreeProjector
from .linalg import cg, minres
from .mesh import Mesh


class SolverError(RuntimeError):
    """Line search or linear solver failure inside a Newton stage."""


def default_p_schedule(p_target):
    """Geometric ramp 2, 4, 8, ... capped at p_target."""
    if p_target < 2.0:
        raise ValueError("p_target must be >= 2")
    sched = [2.0]
    while sched[-1] < p_target:
        sched.append(min(2.0 * sched[-1], float(p_target)))
    return sched


def default_eps_schedule():
    """Relative regularization levels 1e-2 down to 1e-8, factor 10."""
    return [10.0**(-k) for k in range(2, 9)]


@dataclass
class SolveConfig:
    p_target: float = 2.0
    p_schedule: list = None          # exponent ramp; default geometric from 2
    eps_schedule: list = None        # relative to a curl-scale estimate
    newton_tol: float = 1e-9
    max_newton: int = 50
    ls_backtrack: float = 0.5
    ls_max: int = 30
    linear_tol: float = 1e-11
    linear_maxit: int = None
    quad_order: int = 4              # for analytic load assembly
    precondition: bool = False       # force Jacobi scaling in MINRES
    # Cap on the decades spanned by the power-law weights (gmax/eps)^(p-2)
    # within one stage. Approaching ~10^20 the saddle solves break down
    # in float64 even with Jacobi scaling, so for large p the eps ladder
    # is floored at 10^(-cap/(p-2)); for p up to ~20 the floor sits well
    # below the active curl scale and the computed fields are unaffected.
    eps_spread_decades: float = 12.0

    def __post_init__(self):
        if self.p_target < 2.0:
            raise ValueError(f"p_target must be >= 2, got {self.p_target}")
        if self.p_schedule is None:
            self.p_schedule = default_p_schedule(self.p_target)
        self.p_schedule = [float(p) for p in self.p_schedule]
        if self.p_schedule != sorted(self.p_schedule) or \
                self.p_schedule[-1] != self.p_target or \
                any(p < 2.0 for p in self.p_schedule):
            raise ValueError("p_schedule must be nondecreasing, >= 2, "
                             "ending at p_target")
        if self.eps_schedule is None:
            self.eps_schedule = default_eps_schedule()
        self.eps_schedule = [float(e) for e in self.eps_schedule]
        if not self.eps_schedule or \
                any(b >= a for a, b in zip(self.eps_schedule, self.eps_schedule[1:])) or \
                any(e <= 0 for e in self.eps_schedule):
            raise ValueError("eps_schedule must be positive and strictly decreasing")


@dataclass
class StageRecord:
    p: float
    eps: float
    newton_iterations: int
    final_residual: float            # relative KKT residual
    energy_history: list = field(default_factory=list)
    constraint_history: list = field(default_factory=list)


@dataclass
class SolveReport:
    stages: list = field(default_factory=list)
    load_gradient_norm: float = 0.0  # discarded incompatible load part
    wall_time: float = 0.0

    @property
    def final_residual(self):
        return self.stages[-1].final_residual if self.stages else 0.0

    @property
    def total_newton_iterations(self):
        return sum(s.newton_iterations for s in self.stages)


def energy(u: EdgeField, load, p: PExponent, geom=None):
    """J(u) = (1/p) int (eps^2 + |curl u|^2)^(p/2) - load . u_free.

    Uses the same regularized integrand as the residual, so its Gateaux
    derivative is exactly assemble_residual.
    """
    mesh = u.mesh
    if geom is None:
        geom = whitney.cell_geometry(mesh)
    g = curl_per_tet(u, geom)
    msq = p.eps**2 + np.sum(g * g, axis=1)
    bulk = np.sum(geom.vols * np.power(msq, 0.5 * p.p)) / p.p
    return float(bulk - load @ u.coeffs[mesh.free_edges()])


def solve(mesh: Mesh, S, config: SolveConfig = None, initial_guess=None):
    """Solve the discrete power-law curl-curl problem.

    Args:
        S: analytic load callable (N,3)->(N,3), or an EdgeField whose
           mass pairing supplies the load functional.
        initial_guess: optional EdgeField; it is boundary-zeroed and
           Helmholtz-projected before use. Default: zero field.

    Returns:
        (u, multiplier, SolveReport). u satisfies the boundary invariant
        and the divergence constraint up to the linear tolerance; the
        multiplier is ~0 for divergence-free loads.
    """
    t0 = time.perf_counter()
    if config is None:
        config = SolveConfig()
    geom = whitney.cell_geometry(mesh)
    proj = DivFreeProjector(mesh, geom)
    free = mesh.free_edges()
    nfree = free.size
    nint = mesh.interior_vertices().size

    if isinstance(S, EdgeField):
        load = (proj.M @ S.coeffs)[free]
    else:
        load = assemble_load(S, mesh, quad_order=config.quad_order, geom=geom)

    # Remove the load component that pairs with gradients: it cannot be
    # balanced by the curl term and would only load the multiplier.
    B = proj.GtM[:, free].tocsr()                       # (nint, nfree)
    Gfree = proj.G[free].tocsr()                        # (nfree, nint)
    report = SolveReport()
    if nint > 0:
        phi_load, cg_rep = cg(proj.GtMG, Gfree.T @ load, tol=1e-13)
        if not cg_rep.converged:
            raise SolverError("load projection CG failed")
        grad_part = B.T @ phi_load
        report.load_gradient_norm = float(np.linalg.norm(grad_part))
        load = load - grad_part

    if initial_guess is None:
        u = EdgeField(mesh)
    else:
        u0, _ = proj.project(initial_guess.zero_boundary(), tol=config.linear_tol)
        u = u0
    phi = np.zeros(nint)

    load_scale = float(np.linalg.norm(load))
    curl_scale = 1.0

    for p_val in config.p_schedule:
        if p_val == 2.0:
            eps_list = [0.0]     # the power map ignores eps at p = 2
        else:
            floor = 10.0 ** (-config.eps_spread_decades / (p_val - 2.0))
            floored = [max(e, floor) for e in config.eps_schedule]
            dedup = []
            for e in floored:
                if not dedup or e < dedup[-1]:
                    dedup.append(e)
            eps_list = [rel * curl_scale for rel in dedup]
        for eps in eps_list:
            pexp = PExponent(p=p_val, eps=eps)
            stage = _newton_stage(mesh, geom, proj, B, free, u, phi, load,
                                  load_scale, pexp, config)
            u, phi, rec = stage
            report.stages.append(rec)
        # Scale subsequent regularizations by the current solution size.
        g = curl_per_tet(u, geom)
        mx = float(np.max(np.linalg.norm(g, axis=1))) if g.size else 0.0
        if mx > 0:
            curl_scale = mx

    multiplier = np.zeros(mesh.num_vertices)
    multiplier[mesh.interior_vertices()] = phi
    report.wall_time = time.perf_counter() - t0
    return u, NodalField(mesh, multiplier), report


def _newton_stage(mesh, geom, proj, B, free, u, phi, load, load_scale,
                  pexp, config):
    """Run damped Newton at fixed (p, eps); returns updated (u, phi, record)."""
    nfree = free.size
    nint = B.shape[0]
    maxit = config.linear_maxit or 20 * (nfree + nint)

    def kkt(u_field, phi_vec):
        r1 = assemble_residual(u_field, load, pexp, geom) + B.T @ phi_vec
        r2 = B @ u_field.coeffs[free]
        return r1, r2

    r1, r2 = kkt(u, phi)
    res0 = float(np.sqrt(r1 @ r1 + r2 @ r2))
    denom = max(load_scale, res0, np.finfo(float).tiny)
    rec = StageRecord(p=pexp.p, eps=pexp.eps, newton_iterations=0,
                      final_residual=res0 / denom)
    rec.energy_history.append(energy(u, load, pexp, geom))
    rec.constraint_history.append(_constraint_measure(proj, u))

    for it in range(1, config.max_newton + 1):
        if np.sqrt(r1 @ r1 + r2 @ r2) <= config.newton_tol * denom:
            break
        A = assemble_jacobian(u, pexp, geom)
        K = sp.block_array([[A, B.T], [B, None]]).tocsr()
        rhs = -np.concatenate([r1, r2])
        dp = None
        if config.precondition or _diag_spread(A) > 1e8:
            dp = np.concatenate([_floored(A.diagonal()),
                                 _floored(proj.GtMG.diagonal())])
        step, lin = minres(K, rhs, tol=config.linear_tol, max_iter=maxit,
                           diag_precond=dp)
        # An inexact step still makes Newton progress as long as it
        # carries real information (forcing-term argument); the line
        # search and the Newton budget catch anything worse.
        if not lin.converged and lin.relative_residual > 0.5:
            raise SolverError(
                f"saddle MINRES stalled at p={pexp.p}, eps={pexp.eps:.2e}: "
                f"relative residual {lin.relative_residual:.3e}")
        du = step[:nfree]
        dphi = step[nfree:]

        J0 = rec.energy_history[-1]
        slope = float(r1 @ du)       # directional derivative on the manifold
        # Near the minimum the true decrease ~|r|^2 drops below float64
        # rounding of J itself; the floor keeps Armijo from rejecting
        # full Newton steps it cannot measure.
        J_floor = 64.0 * np.finfo(float).eps * _energy_scale(u, load, pexp, geom)
        t = 1.0
        accepted = False
        for _ in range(config.ls_max + 1):
            trial = u.coeffs.copy()
            trial[free] += t * du
            u_try = EdgeField(mesh, trial)
            J_try = energy(u_try, load, pexp, geom)
            if J_try <= J0 + 1e-4 * t * min(slope, 0.0) + J_floor:
                accepted = True
                break
            t *= config.ls_backtrack
        if not accepted:
            raise SolverError(
                f"line search failed at p={pexp.p}, eps={pexp.eps:.2e}, "
                f"Newton iteration {it} (energy cannot decrease)")

        u = u_try
        phi = phi + t * dphi
        r1, r2 = kkt(u, phi)
        rec.newton_iterations = it
        rec.energy_history.append(J_try)
        rec.constraint_history.append(_constraint_measure(proj, u))
    else:
        res = float(np.sqrt(r1 @ r1 + r2 @ r2))
        raise SolverError(
            f"Newton did not converge at p={pexp.p}, eps={pexp.eps:.2e}: "
            f"relative residual {res / denom:.3e} after {config.max_newton} steps")

    rec.final_residual = float(np.sqrt(r1 @ r1 + r2 @ r2)) / denom
    return u, phi, rec


def _energy_scale(u, load, pexp, geom):
    """Magnitude of the terms summed in the energy (rounding reference)."""
    g = curl_per_tet(u, geom)
    msq = pexp.eps**2 + np.sum(g * g, axis=1)
    bulk = np.sum(geom.vols * np.power(msq, 0.5 * pexp.p)) / pexp.p
    return bulk + abs(load @ u.coeffs[u.mesh.free_edges()]) + 1.0


def _constraint_measure(proj, u):
    """||G^T M u|| / ||u||_M, the relative divergence violation."""
    un = float(np.sqrt(u.coeffs @ (proj.M @ u.coeffs)))
    if un == 0.0:
        return 0.0
    return proj.constraint_norm(u.coeffs) / un


def _floored(d):
    d = np.abs(np.asarray(d, dtype=float))
    mx = d.max() if d.size else 1.0
    floor = 1e-14 * mx if mx > 0 else 1.0
    return np.maximum(d, floor)


def _diag_spread(A):
    d = A.diagonal()
    pos = d[d > 0]
    if pos.size == 0:
        return 1.0
    return float(pos.max() / pos.min())
