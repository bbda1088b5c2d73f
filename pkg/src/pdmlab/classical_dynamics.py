"""Classical trajectories of the position-dependent-mass Hamiltonian.

The Hamiltonian in canonical coordinates (x, P) is

    H = (1/(2 m0)) * sum_j ((P_j - e A_j(x)) / sqrt(m(x)))**2 + W(x)

with W = e*phi + V and the unit convention m0 = 1/2 (so hbar = 2 m0 = 1
repo-wide; m0 stays configurable).  Velocities recover as
x' = (P - e A)/(m0 m), i.e. the canonical momentum is m0 m x' + e A.

Hamilton's equations are integrated with fixed-step RK4; the Hamiltonian is
non-separable for non-constant mass, so a plain leapfrog applies only to the
constant-mass case and is offered for it alone.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, IntegrationError, ValidationError
from .mass_models import MassProfile
from .point_transform import build_map

DEFAULT_M0 = 0.5
FD_EPS = 1e-6


@dataclass(frozen=True)
class ClassicalState:
    """Phase-space point: position vector, canonical momentum vector, time."""

    x: np.ndarray
    P: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)))
        object.__setattr__(self, "P", np.atleast_1d(np.asarray(self.P, dtype=float)))
        if self.x.shape != self.P.shape:
            raise DomainError("position and momentum must have the same dimension")


def _fd_gradient(fn, eps):
    def grad(x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        for j in range(x.size):
            step = np.zeros_like(x)
            step[j] = eps
            out[j] = (fn(x + step) - fn(x - step)) / (2.0 * eps)
        return out

    return grad


def _fd_jacobian(fn, eps):
    def jac(x):
        x = np.asarray(x, dtype=float)
        d = x.size
        J = np.empty((d, d))
        for k in range(d):
            step = np.zeros_like(x)
            step[k] = eps
            J[:, k] = (np.asarray(fn(x + step)) - np.asarray(fn(x - step))) / (2.0 * eps)
        return J

    return jac


@dataclass(frozen=True)
class ClassicalFields:
    """Callables defining one dynamical scenario.

    ``jac_A[j, k]`` is dA_j/dx_k.  ``const_mass`` is set when the mass
    multiplier is a known constant, which is what entitles a scenario to the
    leapfrog integrator.
    """

    mass: Callable
    grad_mass: Callable
    V: Callable
    grad_V: Callable
    A: Optional[Callable] = None
    jac_A: Optional[Callable] = None
    phi: Optional[Callable] = None
    grad_phi: Optional[Callable] = None
    e: float = 0.0
    m0: float = DEFAULT_M0
    const_mass: Optional[float] = None

    def W(self, x) -> float:
        total = float(self.V(x))
        if self.phi is not None:
            total += self.e * float(self.phi(x))
        return total

    def grad_W(self, x) -> np.ndarray:
        g = np.asarray(self.grad_V(x), dtype=float)
        if self.phi is not None:
            g = g + self.e * np.asarray(self.grad_phi(x), dtype=float)
        return g


def classical_fields(mass=1.0, grad_mass=None, V=None, grad_V=None, A=None,
                     jac_A=None, phi=None, grad_phi=None, e: float = 0.0,
                     m0: float = DEFAULT_M0, fd_eps: float = FD_EPS) -> ClassicalFields:
    """Assemble a field set; missing gradients fall back to central differences."""
    const = None
    if isinstance(mass, (int, float)):
        const = float(mass)
        if const <= 0:
            raise DomainError("constant mass must be positive")
        mass_fn = lambda x: const
        grad_mass = lambda x: np.zeros_like(np.asarray(x, dtype=float))
    else:
        mass_fn = mass
        if grad_mass is None:
            grad_mass = _fd_gradient(mass_fn, fd_eps)
    if V is None:
        V = lambda x: 0.0
        grad_V = lambda x: np.zeros_like(np.asarray(x, dtype=float))
    elif grad_V is None:
        grad_V = _fd_gradient(V, fd_eps)
    if A is not None and jac_A is None:
        jac_A = _fd_jacobian(A, fd_eps)
    if phi is not None and grad_phi is None:
        grad_phi = _fd_gradient(phi, fd_eps)
    return ClassicalFields(mass=mass_fn, grad_mass=grad_mass, V=V, grad_V=grad_V,
                           A=A, jac_A=jac_A, phi=phi, grad_phi=grad_phi,
                           e=float(e), m0=float(m0), const_mass=const)


def fields_from_mass_profile(mass: MassProfile, V=None, grad_V=None, **kw) -> ClassicalFields:
    """1D field set driven by a MassProfile's analytic derivatives."""
    return classical_fields(
        mass=lambda x: float(mass.m(x[0])),
        grad_mass=lambda x: np.array([float(mass.dm(x[0]))]),
        V=V, grad_V=grad_V, **kw,
    )


def hamiltonian_eval(state: ClassicalState, fields: ClassicalFields) -> float:
    """Total energy of a phase-space point."""
    mv = float(fields.mass(state.x))
    if mv <= 0:
        raise DomainError(f"mass multiplier is not positive at x={state.x}")
    kin = state.P - (fields.e * np.asarray(fields.A(state.x), dtype=float)
                     if fields.A is not None else 0.0)
    return float(np.dot(kin, kin) / (2.0 * fields.m0 * mv) + fields.W(state.x))


def eom_rhs(state: ClassicalState, fields: ClassicalFields):
    """Hamilton's equations (dx/dt, dP/dt) for the PDM Hamiltonian."""
    x, P = state.x, state.P
    mv = float(fields.mass(x))
    if mv <= 0:
        raise DomainError(f"mass multiplier is not positive at x={x}")
    if fields.A is not None:
        a = np.asarray(fields.A(x), dtype=float)
        kin = P - fields.e * a
    else:
        kin = P
    v = kin / (fields.m0 * mv)
    dP = -fields.grad_W(x) + 0.5 * fields.m0 * float(np.dot(v, v)) * np.asarray(
        fields.grad_mass(x), dtype=float
    )
    if fields.A is not None:
        dP = dP + fields.e * (np.asarray(fields.jac_A(x), dtype=float).T @ v)
    return v, dP


@dataclass(frozen=True)
class TrajectoryResult:
    """Recorded samples with per-sample energies and the relative drift."""

    times: np.ndarray
    positions: np.ndarray
    momenta: np.ndarray
    energies: np.ndarray
    scheme: str
    dt: float
    drift: float
    truncated: bool = False
    diagnostic: str = ""

    def states(self):
        for t, x, P in zip(self.times, self.positions, self.momenta):
            yield ClassicalState(x=x, P=P, t=float(t))


def _rk4_step(x, P, dt, fields):
    s = ClassicalState(x, P)
    k1x, k1p = eom_rhs(s, fields)
    k2x, k2p = eom_rhs(ClassicalState(x + 0.5 * dt * k1x, P + 0.5 * dt * k1p), fields)
    k3x, k3p = eom_rhs(ClassicalState(x + 0.5 * dt * k2x, P + 0.5 * dt * k2p), fields)
    k4x, k4p = eom_rhs(ClassicalState(x + dt * k3x, P + dt * k3p), fields)
    return (x + (dt / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x),
            P + (dt / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p))


def _leapfrog_step(x, P, dt, fields):
    # constant-mass separable case only: kick-drift-kick
    mc = fields.m0 * fields.const_mass
    P = P - 0.5 * dt * fields.grad_W(x)
    x = x + dt * P / mc
    P = P - 0.5 * dt * fields.grad_W(x)
    return x, P


def integrate(state0: ClassicalState, fields: ClassicalFields, dt: float, steps: int,
              scheme: str = "rk4", record_every: int = 1) -> TrajectoryResult:
    """Fixed-step integration; energies are evaluated at every recorded sample."""
    if dt <= 0:
        raise ValidationError("dt must be positive")
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    if scheme == "rk4":
        step = _rk4_step
    elif scheme == "leapfrog":
        if fields.const_mass is None or fields.A is not None:
            raise DomainError(
                "leapfrog applies only to separable constant-mass scenarios; use rk4"
            )
        step = _leapfrog_step
    else:
        raise ValidationError(f"unknown scheme {scheme!r}; valid: rk4, leapfrog")
    x = state0.x.copy()
    P = state0.P.copy()
    t = float(state0.t)
    times = [t]
    xs = [x.copy()]
    ps = [P.copy()]
    truncated = False
    diagnostic = ""
    for i in range(1, steps + 1):
        x, P = step(x, P, dt, fields)
        t = state0.t + i * dt
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(P))):
            truncated = True
            diagnostic = f"non-finite state at step {i} (t={t:.6g}); trajectory truncated"
            break
        if i % record_every == 0 or i == steps:
            times.append(t)
            xs.append(x.copy())
            ps.append(P.copy())
    times = np.asarray(times)
    xs = np.asarray(xs)
    ps = np.asarray(ps)
    energies = np.array([
        hamiltonian_eval(ClassicalState(xv, pv, tv), fields)
        for tv, xv, pv in zip(times, xs, ps)
    ])
    e0 = energies[0]
    drift = float(np.max(np.abs(energies - e0)) / max(abs(e0), 1e-300))
    return TrajectoryResult(times=times, positions=xs, momenta=ps, energies=energies,
                            scheme=scheme, dt=float(dt), drift=drift,
                            truncated=truncated, diagnostic=diagnostic)


def gradient_check(state: ClassicalState, fields: ClassicalFields,
                   eps: float = 1e-5) -> float:
    """max |eom force + central difference of H| over components."""
    _, dP = eom_rhs(state, fields)
    worst = 0.0
    for k in range(state.x.size):
        step = np.zeros_like(state.x)
        step[k] = eps
        hp = hamiltonian_eval(ClassicalState(state.x + step, state.P), fields)
        hm = hamiltonian_eval(ClassicalState(state.x - step, state.P), fields)
        worst = max(worst, abs(dP[k] + (hp - hm) / (2.0 * eps)))
    return worst


class _FastScalarSpline:
    """Scalar piecewise-cubic evaluation without per-call numpy overhead."""

    def __init__(self, ppoly):
        self.knots = [float(v) for v in ppoly.x]
        self.coeffs = ppoly.c.tolist()  # rows: c3, c2, c1, c0
        self.lo = self.knots[0]
        self.hi = self.knots[-1]
        self.nseg = len(self.knots) - 1

    def __call__(self, xv: float) -> float:
        if xv < self.lo or xv > self.hi:
            raise DomainError(f"value {xv} outside spline domain [{self.lo}, {self.hi}]")
        i = bisect_right(self.knots, xv) - 1
        if i >= self.nseg:
            i = self.nseg - 1
        t = xv - self.knots[i]
        c = self.coeffs
        return ((c[0][i] * t + c[1][i]) * t + c[2][i]) * t + c[3][i]


@dataclass(frozen=True)
class EquivalenceReport:
    """Direct x-space trajectory vs constant-mass trajectory mapped back."""

    max_discrepancy: float
    times: np.ndarray
    x_direct: np.ndarray
    x_mapped: np.ndarray
    drift_direct: float
    drift_mapped: float


def transform_equivalence_check(mass: MassProfile, potential_q: Callable,
                                d_potential_q: Callable, x0: float, v0: float,
                                dt: float, steps: int, x_domain,
                                map_points: int = 2001, record_every: int = 50,
                                e: float = 0.0, a_of_x: Optional[Callable] = None,
                                m0: float = DEFAULT_M0) -> EquivalenceReport:
    """Integrate the same 1D motion in both frames and compare positions.

    The direct route integrates (x, P) under the PDM Hamiltonian with the
    potential pulled back through the map; the mapped route integrates the
    constant-mass problem in the transformed coordinate with matched initial
    data (velocity scales by sqrt(m)) and maps recorded samples back through
    the monotone inverse.  With a vector potential the transformed-frame
    coupling uses A(x)/sqrt(m), so this doubles as the classical
    minimal-coupling form-invariance check.
    """
    x_grid = np.linspace(x_domain[0], x_domain[1], map_points)
    tmap = build_map(mass, x_grid)
    q_fast = _FastScalarSpline(tmap._forward)
    x_fast = _FastScalarSpline(tmap._inverse)

    sqrt_m = lambda xv: float(np.sqrt(mass.m(xv)))

    # direct route: canonical (x, P), potential V(q(x))
    def v_x(xvec):
        return potential_q(q_fast(float(xvec[0])))

    def grad_v_x(xvec):
        xv = float(xvec[0])
        return np.array([d_potential_q(q_fast(xv)) * sqrt_m(xv)])

    kwargs = {}
    if a_of_x is not None:
        kwargs = {"A": lambda xvec: np.array([a_of_x(float(xvec[0]))]), "e": e}
    fields_x = classical_fields(
        mass=lambda xvec: float(mass.m(float(xvec[0]))),
        grad_mass=lambda xvec: np.array([float(mass.dm(float(xvec[0])))]),
        V=v_x, grad_V=grad_v_x, m0=m0, **kwargs,
    )

    # mapped route: constant-mass problem in the transformed coordinate
    if a_of_x is not None:
        def a_q(qvec):
            xv = x_fast(float(qvec[0]))
            return np.array([a_of_x(xv) / sqrt_m(xv)])

        kwargs_q = {"A": a_q, "e": e}
    else:
        kwargs_q = {}
    fields_q = classical_fields(
        mass=1.0,
        V=lambda qvec: potential_q(float(qvec[0])),
        grad_V=lambda qvec: np.array([d_potential_q(float(qvec[0]))]),
        m0=m0, **kwargs_q,
    )

    m_at_x0 = float(mass.m(x0))
    a0 = a_of_x(x0) if a_of_x is not None else 0.0
    p0 = m0 * m_at_x0 * v0 + e * a0
    q0 = q_fast(float(x0))
    pi0 = m0 * np.sqrt(m_at_x0) * v0 + e * a0 / np.sqrt(m_at_x0)

    def run(fields, y0, p_init):
        state = ClassicalState(np.array([y0]), np.array([p_init]))
        try:
            return integrate(state, fields, dt, steps, scheme="rk4",
                             record_every=record_every)
        except DomainError as exc:
            raise IntegrationError(f"trajectory left the map domain: {exc}") from exc

    traj_x = run(fields_x, x0, p0)
    traj_q = run(fields_q, q0, pi0)
    if traj_x.truncated or traj_q.truncated:
        raise IntegrationError(traj_x.diagnostic or traj_q.diagnostic)

    lo, hi = tmap.q_range
    qs = traj_q.positions[:, 0]
    if np.any(qs < lo) or np.any(qs > hi):
        bad = int(np.argmax((qs < lo) | (qs > hi)))
        raise IntegrationError(
            f"mapped trajectory exited the transform image at t={traj_q.times[bad]:.6g}",
            last_good=float(traj_q.times[max(bad - 1, 0)]),
        )
    x_mapped = tmap.x(qs)
    disc = float(np.max(np.abs(traj_x.positions[:, 0] - x_mapped)))
    return EquivalenceReport(max_discrepancy=disc, times=traj_x.times,
                             x_direct=traj_x.positions[:, 0], x_mapped=x_mapped,
                             drift_direct=traj_x.drift, drift_mapped=traj_q.drift)
