"""Reduction of residual equations to explicit ODEs and their integration.

The generated residuals are affine in the highest-order jets they contain,
so the top derivatives solve a small linear system M(state) q_(k) = b(state).
Integration is deterministic fixed-step RK4 on the first-order reduction.
The module also carries the first-order Lagrangian <-> Hamiltonian bridge:
the Legendre transform and the locally conformal Hamiltonian vector field.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .calculus import ConformalFactor, partial, substitute
from .evaluate import compile_expr
from .nodes import (
    Expr,
    ExprError,
    Jet,
    JetSpace,
    Pow,
    ZERO,
    add,
    jets_in,
    mul,
)
from .normalize import is_zero, normalize
from .euler_lagrange import EquationSet, LagrangianModel

DET_THRESHOLD = 1e-12


class ReductionError(ExprError):
    """The equation set cannot be put into explicit form."""


class SingularDynamicsError(ExprError):
    """The mass matrix became numerically singular mid-trajectory."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


@dataclass
class ExplicitODE:
    """Explicit form q_(k) = M^{-1} b of an equation set.

    State layout: all jets of order < k for each coordinate, flattened as
    y[i-1 + r*s] = q^i_(s).
    """

    dim: int
    top_order: int
    matrix_exprs: list[list[Expr]]
    residual_funcs: list = field(repr=False)
    rest_funcs: list = field(repr=False)
    matrix_funcs: list = field(repr=False)
    constant_matrix: np.ndarray | None
    params: dict[str, float]

    @property
    def state_size(self) -> int:
        return self.dim * self.top_order

    def point_from_state(self, y) -> dict[tuple[int, int], float]:
        r = self.dim
        return {
            (i + 1, s): float(y[i + r * s])
            for s in range(self.top_order)
            for i in range(r)
        }

    def mass_matrix(self, point) -> np.ndarray:
        if self.constant_matrix is not None:
            return self.constant_matrix
        m = np.empty((self.dim, self.dim))
        for a in range(self.dim):
            for b in range(self.dim):
                m[a, b] = self.matrix_funcs[a][b](point, self.params)
        return m

    def top_derivatives(self, y) -> tuple[np.ndarray, float]:
        """Solve for q_(k); returns (values, det of the mass matrix)."""
        point = self.point_from_state(y)
        for i in range(1, self.dim + 1):
            point[(i, self.top_order)] = 0.0
        m = self.mass_matrix(point)
        det = float(np.linalg.det(m))
        if abs(det) <= DET_THRESHOLD:
            raise SingularDynamicsError("mass matrix is singular", math.nan)
        rest = np.array([f(point, self.params) for f in self.rest_funcs])
        return np.linalg.solve(m, -rest), det

    def rhs(self, y) -> np.ndarray:
        top, _ = self.top_derivatives(y)
        out = np.empty_like(np.asarray(y, dtype=float))
        r = self.dim
        out[: r * (self.top_order - 1)] = np.asarray(y, dtype=float)[r:]
        out[r * (self.top_order - 1) :] = top
        return out

    def residual_at(self, y) -> float:
        """Max |residual| of the generating equations at a state (top jets
        recomputed from the solve)."""
        top, _ = self.top_derivatives(y)
        point = self.point_from_state(y)
        for i in range(1, self.dim + 1):
            point[(i, self.top_order)] = float(top[i - 1])
        return max(abs(f(point, self.params)) for f in self.residual_funcs)


def to_explicit_ode(eqs: EquationSet, model: LagrangianModel) -> ExplicitODE:
    """Detect the effective order and build the explicit form.

    Degenerate Lagrangians lower the effective order below 2n (the planar
    chiral oscillator is third order, not fourth), so the order is read off
    the residuals, not the nominal one.
    """
    if model.sigma.is_abstract:
        raise ReductionError("cannot reduce equations with an abstract conformal factor")
    space = model.space
    k = max((s for r in eqs.residuals for (_, s) in jets_in(r)), default=0)
    if k < 1:
        raise ReductionError("residuals contain no derivatives; nothing to integrate")
    top = [Jet(i, k) for i in range(1, space.dim + 1)]
    matrix_exprs: list[list[Expr]] = []
    for res in eqs.residuals:
        row = []
        for j, tj in enumerate(top, start=1):
            entry = normalize(partial(res, j, k))
            for jj in range(1, space.dim + 1):
                if not is_zero(normalize(partial(entry, jj, k))):
                    raise ReductionError(
                        f"residual is not affine in the top-order jets (order {k})"
                    )
            row.append(entry)
        matrix_exprs.append(row)
    det_expr = _symbolic_det([[e for e in row] for row in matrix_exprs])
    if is_zero(det_expr):
        raise ReductionError(
            f"mass matrix at order {k} is structurally singular "
            "(degenerate beyond a simple order drop)"
        )
    zero_top = {t: ZERO for t in top}
    rest_exprs = [normalize(substitute(r, zero_top)) for r in eqs.residuals]
    matrix_funcs = [[compile_expr(e) for e in row] for row in matrix_exprs]
    residual_funcs = [compile_expr(r) for r in eqs.residuals]
    rest_funcs = [compile_expr(r) for r in rest_exprs]
    constant = None
    if all(not jets_in(e) for row in matrix_exprs for e in row):
        point: dict = {}
        constant = np.array(
            [[f(point, model.parameters) for f in row] for row in matrix_funcs]
        )
    return ExplicitODE(
        dim=space.dim,
        top_order=k,
        matrix_exprs=matrix_exprs,
        residual_funcs=residual_funcs,
        rest_funcs=rest_funcs,
        matrix_funcs=matrix_funcs,
        constant_matrix=constant,
        params=dict(model.parameters),
    )


def _symbolic_det(m: list[list[Expr]]) -> Expr:
    n = len(m)
    if n == 1:
        return m[0][0]
    terms = []
    for j in range(n):
        minor = [row[:j] + row[j + 1 :] for row in m[1:]]
        sign = 1 if j % 2 == 0 else -1
        terms.append(mul(sign, m[0][j], _symbolic_det(minor)))
    return normalize(add(*terms))


@dataclass
class Trajectory:
    """Uniform-grid time series of jet states with residual diagnostics."""

    times: np.ndarray
    states: np.ndarray  # shape (T, dim * top_order)
    dim: int
    top_order: int
    residuals: np.ndarray  # per-time max |residual|
    det_min: float

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals))

    def column_names(self) -> list[str]:
        names = ["t"]
        for s in range(self.top_order):
            for i in range(1, self.dim + 1):
                names.append(f"q{i}" if s == 0 else f"q{i}_d{s}")
        names.append("residual_max")
        return names

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(self.column_names())
            for t, state, res in zip(self.times, self.states, self.residuals):
                writer.writerow(
                    [repr(float(t))] + [repr(float(v)) for v in state] + [repr(float(res))]
                )


def integrate(
    ode: ExplicitODE,
    init,
    t0: float,
    t1: float,
    dt: float,
    residual_stride: int = 1,
) -> Trajectory:
    """Classical fixed-step RK4 on the first-order reduction."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    y = np.asarray(init, dtype=float)
    if y.shape != (ode.state_size,):
        raise ValueError(
            f"initial state must have {ode.state_size} entries "
            f"({ode.dim} coordinates x jets of order < {ode.top_order})"
        )
    steps = int(round((t1 - t0) / dt))
    times = [t0]
    states = [y.copy()]
    det_min = math.inf
    t = t0
    for step in range(steps):
        try:
            k1 = ode.rhs(y)
            k2 = ode.rhs(y + 0.5 * dt * k1)
            k3 = ode.rhs(y + 0.5 * dt * k2)
            k4 = ode.rhs(y + dt * k3)
        except SingularDynamicsError as err:
            raise SingularDynamicsError(
                f"singular mass matrix at t={t:.6g}", t
            ) from err
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)):
            raise SingularDynamicsError(f"non-finite state at t={t:.6g}", t)
        t = t0 + (step + 1) * dt
        times.append(t)
        states.append(y.copy())
    residuals = np.zeros(len(times))
    for idx in range(0, len(times), residual_stride):
        residuals[idx] = ode.residual_at(states[idx])
        _, det = ode.top_derivatives(states[idx])
        det_min = min(det_min, abs(det))
    residuals[-1] = ode.residual_at(states[-1])
    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        dim=ode.dim,
        top_order=ode.top_order,
        residuals=residuals,
        det_min=det_min,
    )


class DegenerateLegendreError(ExprError):
    """The velocity Hessian is singular; the Legendre map does not invert."""


@dataclass
class HamiltonianModel:
    """Hamiltonian picture on (q, p).

    Momenta are encoded as order-1 jets of the same jet space, so the
    existing partial-derivative machinery applies: partial(H, i, 0) is
    dH/dq^i and partial(H, i, 1) is dH/dp_i.
    """

    hamiltonian: Expr
    sigma: ConformalFactor
    dim: int
    params: dict[str, float] = field(default_factory=dict)
    velocity_exprs: tuple[Expr, ...] = ()


def _velocity_hessian(model: LagrangianModel) -> list[list[Expr]]:
    r = model.space.dim
    L = model.lagrangian
    return [
        [normalize(partial(partial(L, i, 1), j, 1)) for j in range(1, r + 1)]
        for i in range(1, r + 1)
    ]


def legendre_first_order(model: LagrangianModel) -> HamiltonianModel:
    """Legendre transform of a regular first-order model.

    p_i = dL/dq-dot^i and H = p . q-dot - L with the velocity eliminated.
    Closed-form elimination for Lagrangians quadratic in the velocities;
    otherwise the Hessian depends on the velocity and a per-evaluation
    Newton solve would be required (see ImplicitLegendre).
    """
    if model.space.order != 1:
        raise ExprError("Legendre transform implemented for first-order models")
    r = model.space.dim
    hessian = _velocity_hessian(model)
    if any(jets_in(h) for row in hessian for h in row):
        raise DegenerateLegendreError(
            "Lagrangian is not quadratic in the velocities; use ImplicitLegendre"
        )
    det = _symbolic_det(hessian)
    if is_zero(det):
        raise DegenerateLegendreError("velocity Hessian is identically singular")
    # p - c where c = dL/dv at v = 0; solve A v = p - c by Cramer's rule.
    zero_v = {Jet(i, 1): ZERO for i in range(1, r + 1)}
    momenta = [Jet(i, 1) for i in range(1, r + 1)]
    targets = [
        normalize(momenta[i - 1] - substitute(partial(model.lagrangian, i, 1), zero_v))
        for i in range(1, r + 1)
    ]
    velocities = []
    for j in range(r):
        replaced = [[targets[i] if col == j else hessian[i][col] for col in range(r)] for i in range(r)]
        numerator = _symbolic_det(replaced)
        velocities.append(normalize(mul(numerator, Pow(det, -1))))
    subs = {Jet(i + 1, 1): velocities[i] for i in range(r)}
    h = add(
        *(momenta[i] * velocities[i] for i in range(r)),
        mul(-1, substitute(model.lagrangian, subs)),
    )
    return HamiltonianModel(
        hamiltonian=normalize(h),
        sigma=model.sigma,
        dim=r,
        params=dict(model.parameters),
        velocity_exprs=tuple(velocities),
    )


class ImplicitLegendre:
    """Numeric Legendre transform for non-quadratic regular Lagrangians.

    Velocities are recovered from p = dL/dv by a damped Newton iteration;
    the Hamiltonian value and its derivatives follow from the envelope
    relations dH/dp = v and dH/dq = -dL/dq at the recovered velocity.
    """

    def __init__(self, model: LagrangianModel, tol: float = 1e-12, max_iter: int = 50):
        if model.space.order != 1:
            raise ExprError("first-order models only")
        self.model = model
        self.dim = model.space.dim
        self.tol = tol
        self.max_iter = max_iter
        r = self.dim
        self._grad_v = [compile_expr(partial(model.lagrangian, i, 1)) for i in range(1, r + 1)]
        self._hess = [
            [compile_expr(partial(partial(model.lagrangian, i, 1), j, 1)) for j in range(1, r + 1)]
            for i in range(1, r + 1)
        ]
        self._lag = compile_expr(model.lagrangian)
        self._grad_q = [compile_expr(partial(model.lagrangian, i, 0)) for i in range(1, r + 1)]

    def _point(self, q, v):
        point = {(i + 1, 0): float(q[i]) for i in range(self.dim)}
        point.update({(i + 1, 1): float(v[i]) for i in range(self.dim)})
        return point

    def velocity(self, q, p, guess=None):
        params = self.model.parameters
        v = np.array(guess if guess is not None else p, dtype=float)
        target = np.asarray(p, dtype=float)
        for _ in range(self.max_iter):
            point = self._point(q, v)
            g = np.array([f(point, params) for f in self._grad_v]) - target
            if np.max(np.abs(g)) < self.tol:
                return v
            jac = np.array([[f(point, params) for f in row] for row in self._hess])
            if abs(np.linalg.det(jac)) <= DET_THRESHOLD:
                raise DegenerateLegendreError("singular velocity Hessian during Newton solve")
            step = np.linalg.solve(jac, g)
            damping = 1.0
            base = np.max(np.abs(g))
            while damping > 1e-4:
                trial = v - damping * step
                gt = np.array(
                    [f(self._point(q, trial), params) for f in self._grad_v]
                ) - target
                if np.max(np.abs(gt)) < base:
                    v = trial
                    break
                damping *= 0.5
            else:
                v = v - step
        raise DegenerateLegendreError("Newton velocity solve did not converge")

    def value(self, q, p):
        v = self.velocity(q, p)
        point = self._point(q, v)
        return float(np.dot(p, v) - self._lag(point, self.model.parameters))


def conformal_hamilton_field(ham: HamiltonianModel):
    """Evaluator for the locally conformal Hamiltonian vector field:

    dq^i/dt = dH/dp_i
    dp_i/dt = -dH/dq^i - A_ij dH/dp_j + H phi_i,   A_ij = phi_i p_j - phi_j p_i.
    """
    if ham.sigma.is_abstract:
        raise ExprError("a concrete conformal factor is required for integration")
    r = ham.dim
    h = ham.hamiltonian
    f_h = compile_expr(h)
    f_dq = [compile_expr(normalize(partial(h, i, 0))) for i in range(1, r + 1)]
    f_dp = [compile_expr(normalize(partial(h, i, 1))) for i in range(1, r + 1)]
    f_phi = [compile_expr(ham.sigma.phi((i,))) for i in range(1, r + 1)]
    params = ham.params

    def field(q, p):
        point = {(i + 1, 0): float(q[i]) for i in range(r)}
        point.update({(i + 1, 1): float(p[i]) for i in range(r)})
        hv = f_h(point, params)
        dh_dq = np.array([f(point, params) for f in f_dq])
        dh_dp = np.array([f(point, params) for f in f_dp])
        phi = np.array([f(point, params) for f in f_phi])
        pvec = np.asarray(p, dtype=float)
        a = np.outer(phi, pvec) - np.outer(pvec, phi)
        dq = dh_dp
        dp = -dh_dq - a @ dh_dp + hv * phi
        return dq, dp

    return field


def conformal_source_matrix(ham: HamiltonianModel, q, p) -> np.ndarray:
    """The antisymmetric momentum twist A_ij = phi_i p_j - phi_j p_i at a point."""
    r = ham.dim
    point = {(i + 1, 0): float(q[i]) for i in range(r)}
    phi = np.array([compile_expr(ham.sigma.phi((i,)))(point, ham.params) for i in range(1, r + 1)])
    pvec = np.asarray(p, dtype=float)
    return np.outer(phi, pvec) - np.outer(pvec, phi)


def integrate_hamiltonian(ham: HamiltonianModel, q0, p0, t0, t1, dt):
    """RK4 on the conformal Hamiltonian field; returns (times, qs, ps)."""
    field = conformal_hamilton_field(ham)
    q = np.asarray(q0, dtype=float)
    p = np.asarray(p0, dtype=float)
    steps = int(round((t1 - t0) / dt))
    times = [t0]
    qs = [q.copy()]
    ps = [p.copy()]
    for step in range(steps):
        dq1, dp1 = field(q, p)
        dq2, dp2 = field(q + 0.5 * dt * dq1, p + 0.5 * dt * dp1)
        dq3, dp3 = field(q + 0.5 * dt * dq2, p + 0.5 * dt * dp2)
        dq4, dp4 = field(q + dt * dq3, p + dt * dp3)
        q = q + (dt / 6.0) * (dq1 + 2 * dq2 + 2 * dq3 + dq4)
        p = p + (dt / 6.0) * (dp1 + 2 * dp2 + 2 * dp3 + dp4)
        times.append(t0 + (step + 1) * dt)
        qs.append(q.copy())
        ps.append(p.copy())
    return np.array(times), np.array(qs), np.array(ps)


def lagrangian_hamiltonian_crosscheck(
    model: LagrangianModel, init, t0: float, t1: float, dt: float
) -> float:
    """Integrate the conformal Euler-Lagrange and Hamiltonian pictures from
    matched initial data and return the max position discrepancy."""
    from .euler_lagrange import conformal_el_expanded

    r = model.space.dim
    eqs = conformal_el_expanded(model)
    ode = to_explicit_ode(eqs, model)
    if ode.top_order != 2:
        raise ExprError("crosscheck expects a second-order reduction")
    traj = integrate(ode, init, t0, t1, dt, residual_stride=max(1, int(0.1 / dt)))

    ham = legendre_first_order(model)
    q0 = np.asarray(init[:r], dtype=float)
    v0 = np.asarray(init[r:], dtype=float)
    point = {(i + 1, 0): q0[i] for i in range(r)}
    point.update({(i + 1, 1): v0[i] for i in range(r)})
    p0 = np.array(
        [
            compile_expr(partial(model.lagrangian, i, 1))(point, model.parameters)
            for i in range(1, r + 1)
        ]
    )
    _, qs, _ = integrate_hamiltonian(ham, q0, p0, t0, t1, dt)
    q_el = traj.states[:, :r]
    return float(np.max(np.abs(q_el - qs)))
