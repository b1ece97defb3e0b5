"""Contact impulse solvers for one timestep.

Three formulations of the same interface problem (find contact impulses for
the current step) are provided:

* ``hunt_crossley_impulse``: an explicit compliant law. The normal force is
  a nonlinear spring-damper, f_n = k * (1 + b * depth_rate)_+ * depth_+, and
  friction is a piecewise-linear regularization of Coulomb friction that is
  exact above the slip tolerance and linear in the slip velocity below it.
* ``regularized_convex_impulse``: a strictly convex quadratic program over
  the friction pyramid. The normal constraint tracks a reference velocity
  that interpolates, with weight d, between a spring-damper response and the
  unconstrained motion; a diagonal regularizer proportional to the Delassus
  diagonal softens strict complementarity.
* ``rigid_pgs_impulse``: projected Gauss-Seidel sweeps on the mixed
  complementarity problem of inelastic rigid contact, with the spring-damper
  pair (k, b) mapped to a velocity bias and constraint-force mixing
  (erp = h k / (h k + b), cfm = 1 / (h k + b)). Hitting the iteration cap is
  not an error; the intermediate iterate is returned with converged=False.

All three are inelastic by construction; any rebound emerges from compliance
dynamics alone. Friction for the two optimization-based solvers uses a
4-sided pyramid aligned with the tangent frame, so their per-direction
tangential impulses respect |t_i| <= mu * n while a pyramid corner may
exceed the circular cone by up to sqrt(2). ``cone_audit`` scales such
corners back onto |t| <= mu * n for reporting; it is not applied inside the
solvers because altering the minimizer would break their per-step energy
dissipation guarantee.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import quat
from .body import InertialParams, RigidState
from .geometry import ContactPoint, contact_jacobian

MODELS = ("compliant", "regularized_convex", "rigid_pgs")

DEFAULT_PGS_ITERS = 50
DEFAULT_PGS_TOL = 1e-8
DEFAULT_QP_ITERS = 500
DEFAULT_QP_TOL = 1e-10
DEFAULT_SLIP_TOLERANCE = 1e-3


class ConvexSolverError(RuntimeError):
    """Raised when the convex solver hits its iteration cap above tolerance."""

    def __init__(self, residual: float, iterations: int):
        super().__init__(
            f"convex contact solve stopped at residual {residual:.3e} after {iterations} iterations"
        )
        self.residual = residual
        self.iterations = iterations


@dataclass
class ContactParams:
    """Friction, stiffness and damping for one contact model.

    mu is dimensionless; the meaning and units of k and b depend on the
    model (N/m and s/m for the compliant law, stabilization spring-damper
    for the rigid solver, reference-dynamics gains for the convex solver).
    d_interp weights the constrained versus unconstrained dynamics in the
    convex model and is rarely worth tuning.
    """

    mu: float
    k: float
    b: float
    model: str
    d_interp: float = 0.9

    def __post_init__(self):
        self.mu = float(self.mu)
        self.k = float(self.k)
        self.b = float(self.b)
        if self.mu < 0.0 or self.k < 0.0 or self.b < 0.0:
            raise ValueError(f"mu, k, b must be nonnegative, got {(self.mu, self.k, self.b)}")
        if self.model not in MODELS:
            raise ValueError(f"unknown contact model {self.model!r}, expected one of {MODELS}")
        if not (0.0 < self.d_interp < 1.0):
            raise ValueError(f"d_interp must lie strictly between 0 and 1, got {self.d_interp}")


@dataclass
class ContactProblem:
    """One-step contact problem in velocity-impulse form.

    jacobian stacks the per-contact 3x6 maps (rows normal, t1, t2).
    inv_mass is the 6x6 inverse generalized mass at the current orientation,
    v the pre-step generalized velocity [v, w], f_ext the external
    generalized force (gravity and gyroscopic pseudo-force), and h the
    timestep.
    """

    contacts: list[ContactPoint]
    jacobian: np.ndarray
    inv_mass: np.ndarray
    v: np.ndarray
    h: float
    f_ext: np.ndarray
    depth: np.ndarray
    depth_rate: np.ndarray

    @property
    def num_contacts(self) -> int:
        return self.depth.size

    def delassus(self) -> np.ndarray:
        """Contact-space effective inverse mass J M^-1 J^T."""
        return self.jacobian @ self.inv_mass @ self.jacobian.T

    def v_free(self) -> np.ndarray:
        """Post-step generalized velocity if no contact impulse acted."""
        return self.v + self.h * (self.inv_mass @ self.f_ext)


def build_contact_problem(
    state: RigidState,
    inertia: InertialParams,
    contacts: Sequence[ContactPoint],
    dt: float,
    include_gravity: bool = True,
    include_gyroscopic: bool = True,
) -> ContactProblem:
    """Assemble the velocity-level problem for the detected contacts."""
    R = quat.to_matrix(state.quat)
    iw = R @ inertia.inertia_body @ R.T
    iw_inv = R @ inertia.inertia_body_inv @ R.T
    inv_mass = np.zeros((6, 6))
    inv_mass[0, 0] = inv_mass[1, 1] = inv_mass[2, 2] = 1.0 / inertia.mass
    inv_mass[3:, 3:] = iw_inv
    f_ext = np.zeros(6)
    if include_gravity:
        f_ext[:3] = inertia.mass * inertia.gravity
    if include_gyroscopic and not inertia.isotropic:
        f_ext[3:] = -np.cross(state.ang_vel, iw @ state.ang_vel)
    nc = len(contacts)
    J = np.zeros((3 * nc, 6))
    for i, cp in enumerate(contacts):
        J[3 * i : 3 * i + 3] = contact_jacobian(state, cp)
    v = np.concatenate([state.vel, state.ang_vel])
    depth = np.array([c.depth for c in contacts])
    depth_rate = np.array([c.depth_rate for c in contacts])
    return ContactProblem(list(contacts), J, inv_mass, v, float(dt), f_ext, depth, depth_rate)


@dataclass
class ContactImpulse:
    """Per-contact impulses plus their aggregated effect on the body.

    normal holds the nonnegative normal impulses (N*s), tangent the 2-vector
    tangential impulses in the (t1, t2) frame, wrench the generalized
    6-vector impulse J^T lambda ready to feed the integrator.
    """

    normal: np.ndarray
    tangent: np.ndarray
    wrench: np.ndarray
    converged: bool = True
    iterations: int = 0

    @classmethod
    def empty(cls) -> "ContactImpulse":
        return cls(np.zeros(0), np.zeros((0, 2)), np.zeros(6))

    def flat(self) -> np.ndarray:
        out = np.empty(3 * len(self.normal))
        out[0::3] = self.normal
        out[1::3] = self.tangent[:, 0]
        out[2::3] = self.tangent[:, 1]
        return out


def cone_audit(problem: ContactProblem, impulse: ContactImpulse, mu: float) -> ContactImpulse:
    """Pyramid-to-cone audit: scale tangential impulses onto |t| <= mu * n.

    Returns a new impulse whose per-contact tangential vectors never exceed
    the circular Coulomb bound, with the generalized wrench rebuilt to
    match. Meant for reporting pipelines that require the cone bound; the
    scaled impulse is no longer the solver's minimizer.
    """
    normal = impulse.normal.copy()
    tangent = impulse.tangent.copy()
    tn = np.linalg.norm(tangent, axis=1)
    safe_tn = np.where(tn > 0.0, tn, 1.0)
    scale = np.where(tn > 0.0, np.minimum(1.0, mu * np.maximum(0.0, normal) / safe_tn), 1.0)
    tangent *= scale[:, None]
    lam = np.empty(3 * len(normal))
    lam[0::3] = normal
    lam[1::3] = tangent[:, 0]
    lam[2::3] = tangent[:, 1]
    wrench = problem.jacobian.T @ lam if len(normal) else np.zeros(6)
    return ContactImpulse(normal, tangent, wrench, impulse.converged, impulse.iterations)


def _package(problem: ContactProblem, lam: np.ndarray, converged: bool, iterations: int) -> ContactImpulse:
    nc = problem.num_contacts
    normal = lam[0::3].copy()
    tangent = np.stack([lam[1::3], lam[2::3]], axis=1) if nc else np.zeros((0, 2))
    wrench = problem.jacobian.T @ lam if nc else np.zeros(6)
    return ContactImpulse(normal, tangent, wrench, converged, iterations)


# --- compliant model ---------------------------------------------------------


def _compliant_forces(depth, depth_rate, vt1, vt2, mu, k, b, slip_tol):
    """Normal and tangential force components of the compliant law."""
    fn = k * np.maximum(0.0, 1.0 + b * depth_rate) * np.maximum(0.0, depth)
    speed = np.sqrt(vt1 * vt1 + vt2 * vt2)
    denom = np.maximum(speed, slip_tol)
    ft1 = -mu * fn * vt1 / denom
    ft2 = -mu * fn * vt2 / denom
    return fn, ft1, ft2


def hunt_crossley_impulse(
    problem: ContactProblem,
    params: ContactParams,
    slip_tolerance: float = DEFAULT_SLIP_TOLERANCE,
) -> ContactImpulse:
    """Impulse of the explicit compliant force law over one timestep.

    Forces are evaluated at the pre-step state and multiplied by h, so the
    solver is a pure function with no iteration. Contacts at or above the
    surface contribute nothing.
    """
    if params.model != "compliant":
        raise ValueError(f"params.model must be 'compliant', got {params.model!r}")
    if problem.num_contacts == 0:
        return ContactImpulse.empty()
    vc = problem.jacobian @ problem.v
    fn, ft1, ft2 = _compliant_forces(
        problem.depth, problem.depth_rate, vc[1::3], vc[2::3],
        params.mu, params.k, params.b, slip_tolerance,
    )
    lam = np.empty(3 * problem.num_contacts)
    lam[0::3] = problem.h * fn
    lam[1::3] = problem.h * ft1
    lam[2::3] = problem.h * ft2
    return _package(problem, lam, True, 0)


# --- regularized convex model ------------------------------------------------


def _pyramid_project(lam: np.ndarray, mu: float) -> np.ndarray:
    """Euclidean projection onto the per-contact friction pyramid cones.

    The cone is {(n, t1, t2): n >= 0, |t1| <= mu n, |t2| <= mu n}. The
    projection is found by evaluating the candidate points on every face of
    the cone (interior, either facet, their edge, and the apex) and keeping
    the nearest feasible one; signs of the tangential components separate
    out by symmetry.
    """
    n0 = lam[0::3]
    t1 = lam[1::3]
    t2 = lam[2::3]
    if mu == 0.0:
        out = np.zeros_like(lam)
        out[0::3] = np.maximum(0.0, n0)
        return out
    a0 = np.abs(t1)
    b0 = np.abs(t2)
    big = np.inf
    # candidate 0: already feasible
    feas0 = (a0 <= mu * n0) & (b0 <= mu * n0)
    # candidate 1: facet |t1| = mu n, t2 interior
    n1 = (n0 + mu * a0) / (1.0 + mu * mu)
    feas1 = (n1 >= 0.0) & (b0 <= mu * n1)
    d1 = np.where(feas1, (n1 - n0) ** 2 + (mu * n1 - a0) ** 2, big)
    # candidate 2: facet |t2| = mu n, t1 interior
    n2 = (n0 + mu * b0) / (1.0 + mu * mu)
    feas2 = (n2 >= 0.0) & (a0 <= mu * n2)
    d2 = np.where(feas2, (n2 - n0) ** 2 + (mu * n2 - b0) ** 2, big)
    # candidate 3: edge |t1| = |t2| = mu n
    n3 = (n0 + mu * (a0 + b0)) / (1.0 + 2.0 * mu * mu)
    feas3 = n3 >= 0.0
    d3 = np.where(feas3, (n3 - n0) ** 2 + (mu * n3 - a0) ** 2 + (mu * n3 - b0) ** 2, big)
    # candidate 4: apex
    d4 = n0 * n0 + a0 * a0 + b0 * b0
    dists = np.stack([d1, d2, d3, d4])
    choice = np.argmin(dists, axis=0)
    n_new = np.choose(choice, [n1, n2, n3, np.zeros_like(n0)])
    a_new = np.choose(choice, [mu * n1, np.minimum(a0, mu * n2), mu * n3, np.zeros_like(a0)])
    b_new = np.choose(choice, [np.minimum(b0, mu * n1), mu * n2, mu * n3, np.zeros_like(b0)])
    n_new = np.where(feas0, n0, n_new)
    a_new = np.where(feas0, a0, a_new)
    b_new = np.where(feas0, b0, b_new)
    out = np.empty_like(lam)
    out[0::3] = n_new
    out[1::3] = np.copysign(a_new, t1)
    out[2::3] = np.copysign(b_new, t2)
    return out


def _convex_reference_velocity(problem: ContactProblem, params: ContactParams) -> np.ndarray:
    """Per-contact normal velocity targets of the interpolated reference dynamics.

    The target blends a spring-damper response to penetration with the
    unconstrained velocity change. Damping acts only on the approaching part
    of the pre-step normal velocity and its gain is clamped at full arrest,
    so the reference never demands a rebound faster than the approach.
    """
    h, d, k, b = problem.h, params.d_interp, params.k, params.b
    J = problem.jacobian
    s_minus = (J @ problem.v)[0::3]
    dv0 = h * (J @ (problem.inv_mass @ problem.f_ext))[0::3]
    carry = np.minimum(s_minus, 0.0) * max(0.0, 1.0 - h * d * b)
    return carry + h * d * k * problem.depth + (1.0 - d) * dv0


def _pyramid_qp(Q, c, mu, lam0, max_iters, tol):
    """Accelerated projected gradient on min 1/2 l'Ql + c'l over the pyramid.

    Q is strongly convex (Delassus plus a positive diagonal regularizer) and
    the projection is exact, so momentum with uphill restarts converges
    linearly. Returns the iterate, the final projected-gradient infinity
    norm, and the iteration count.
    """
    eigs = np.linalg.eigvalsh(Q)
    L = float(eigs[-1])
    if L <= 0.0:
        return np.zeros_like(lam0), 0.0, 0
    lam = _pyramid_project(lam0.copy(), mu)
    y = lam.copy()
    t = 1.0
    pg_norm = np.inf
    for it in range(1, max_iters + 1):
        grad_y = Q @ y + c
        lam_new = _pyramid_project(y - grad_y / L, mu)
        grad_l = Q @ lam_new + c
        pg = L * (lam_new - _pyramid_project(lam_new - grad_l / L, mu))
        pg_norm = float(np.max(np.abs(pg))) if pg.size else 0.0
        if pg_norm <= tol:
            return lam_new, pg_norm, it
        if float((y - lam_new) @ (lam_new - lam)) > 0.0:
            t = 1.0  # momentum points uphill, restart
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        y = lam_new + ((t - 1.0) / t_new) * (lam_new - lam)
        lam = lam_new
        t = t_new
    return lam, pg_norm, max_iters


def regularized_convex_impulse(
    problem: ContactProblem,
    params: ContactParams,
    max_iters: int = DEFAULT_QP_ITERS,
    tol: float = DEFAULT_QP_TOL,
    warm_start: Optional[np.ndarray] = None,
) -> ContactImpulse:
    """Unique minimizer of the regularized friction-pyramid quadratic program.

    Solves min_l 1/2 l'(A + R)l + l'(J v_free - v*) over the pyramid cone,
    where A is the Delassus operator, R = (1 - d)/d times its diagonal, and
    v* the reference normal velocities. R makes the program strictly convex,
    so the impulse is unique regardless of the warm start.
    """
    if params.model != "regularized_convex":
        raise ValueError(f"params.model must be 'regularized_convex', got {params.model!r}")
    nc = problem.num_contacts
    if nc == 0:
        return ContactImpulse.empty()
    A = problem.delassus()
    d = params.d_interp
    Q = A + np.diag((1.0 - d) / d * np.diag(A))
    c = problem.jacobian @ problem.v_free()
    c[0::3] -= _convex_reference_velocity(problem, params)
    if warm_start is not None and warm_start.shape == (3 * nc,):
        lam0 = warm_start
    else:
        lam0 = np.zeros(3 * nc)
    lam, residual, iters = _pyramid_qp(Q, c, params.mu, lam0, max_iters, tol)
    if residual > tol:
        raise ConvexSolverError(residual, iters)
    return _package(problem, lam, True, iters)


# --- rigid complementarity model ---------------------------------------------


def erp_cfm(h: float, k: float, b: float) -> tuple[float, float]:
    """Spring-damper (k, b) mapped to stabilization gains (erp, cfm)."""
    denom = h * k + b
    if denom <= 0.0:
        return 0.0, 0.0
    return h * k / denom, 1.0 / denom


def _pgs(A, g, bias, cfm, mu, lam0, max_iters, tol):
    """Projected Gauss-Seidel sweeps over normal and boxed tangential rows."""
    lam = lam0.copy()
    nc = g.size // 3
    sweeps = 0
    converged = False
    for sweeps in range(1, max_iters + 1):
        delta = 0.0
        for i in range(nc):
            ni = 3 * i
            r = float(A[ni] @ lam) + g[ni] - bias[i] + cfm * lam[ni]
            new = lam[ni] - r / (A[ni, ni] + cfm)
            if new < 0.0:
                new = 0.0
            change = abs(new - lam[ni])
            lam[ni] = new
            bound = mu * new
            for jt in (ni + 1, ni + 2):
                r = float(A[jt] @ lam) + g[jt]
                newt = lam[jt] - r / A[jt, jt]
                if newt > bound:
                    newt = bound
                elif newt < -bound:
                    newt = -bound
                cj = abs(newt - lam[jt])
                if cj > change:
                    change = cj
                lam[jt] = newt
            if change > delta:
                delta = change
        if delta < tol:
            converged = True
            break
    return lam, converged, sweeps


def rigid_pgs_impulse(
    problem: ContactProblem,
    params: ContactParams,
    max_iters: int = DEFAULT_PGS_ITERS,
    tol: float = DEFAULT_PGS_TOL,
    warm_start: Optional[np.ndarray] = None,
) -> ContactImpulse:
    """Rigid inelastic contact impulses via projected Gauss-Seidel.

    Each sweep updates every contact in the detector's deterministic order:
    the normal impulse is projected to be nonnegative against a target
    velocity of zero plus the stabilization bias (erp / h) * depth_+, then
    each tangential impulse is clamped to the box [-mu n, mu n]. Sweeping
    stops when the largest impulse change falls below tol; if the cap is
    reached first the intermediate iterate is returned as a legal result
    with converged=False.
    """
    if params.model != "rigid_pgs":
        raise ValueError(f"params.model must be 'rigid_pgs', got {params.model!r}")
    nc = problem.num_contacts
    if nc == 0:
        return ContactImpulse.empty()
    A = problem.delassus()
    g = problem.jacobian @ problem.v_free()
    erp, cfm = erp_cfm(problem.h, params.k, params.b)
    bias = (erp / problem.h) * np.maximum(0.0, problem.depth)
    if warm_start is not None and warm_start.shape == (3 * nc,):
        lam0 = warm_start.copy()
        lam0[0::3] = np.maximum(0.0, lam0[0::3])
    else:
        lam0 = np.zeros(3 * nc)
    lam, converged, sweeps = _pgs(A, g, bias, cfm, params.mu, lam0, max_iters, tol)
    return _package(problem, lam, converged, sweeps)


def solve_contact_impulse(
    problem: ContactProblem,
    params: ContactParams,
    slip_tolerance: float = DEFAULT_SLIP_TOLERANCE,
    max_iters: Optional[int] = None,
    warm_start: Optional[np.ndarray] = None,
) -> ContactImpulse:
    """Dispatch to the solver selected by params.model."""
    if params.model == "compliant":
        return hunt_crossley_impulse(problem, params, slip_tolerance)
    if params.model == "regularized_convex":
        return regularized_convex_impulse(
            problem, params, max_iters or DEFAULT_QP_ITERS, warm_start=warm_start
        )
    return rigid_pgs_impulse(problem, params, max_iters or DEFAULT_PGS_ITERS, warm_start=warm_start)
