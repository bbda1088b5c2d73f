"""Minimal coupling: gauge eligibility, Landau-type spectra, eigenfunctions.

Two vector-potential families are supported in the untransformed frame,

    landau:     A~ = B0 * (-x2, 0, 0)
    symmetric:  A~ = (B0/2) * (-x2, x1, 0)

scaled into the transformed frame by S(r)/sqrt(m(r)).  Surviving the point
transformation in the Coulomb gauge requires

    (S/m) * [div A~ + (x_j A~_j / r) * (S'/S - m'/(2m))] = 0

The divergence term vanishes for both families; x_j A~_j vanishes identically
only for the symmetric family, which is therefore eligible for every
generating pair, while the landau family survives only with constant mass.

The transverse problem separates into a shifted harmonic oscillator whose
exact levels are (2n+1)|e|B0 + k3^2, plus k1*E0/B0 - E0^2/(4 B0^2) when a
constant electric field E0 is applied along the second axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import sparse
from scipy.integrate import simpson

from .errors import DomainError, ValidationError
from .mass_models import MassProfile, ScalarMultiplier, constant_mass
from .operators import (
    DiscretizedOperator,
    PotentialSpec,
    applied_difference,
    build_pseudo_momentum,
    build_reduced_pdm,
    build_von_roos,
    default_probes,
    mm_ordering,
    symmetrize,
)
from .point_transform import GriddedWavefunction, radial_map
from .spectral_solver import SpectrumResult, _coarse_count, _richardson, solve_symmetric

GAUGE_FAMILIES = ("landau", "symmetric")


# ---------------------------------------------------------------------------
# Hermite functions (orthonormal oscillator eigenfunctions)
# ---------------------------------------------------------------------------


def hermite_function(n: int, y) -> np.ndarray:
    """Orthonormal oscillator eigenfunction h_n(y).

    Three-term recurrence on the pre-normalized functions; coefficients stay
    O(1) for any n, so there is no overflow at large order.
    """
    if n < 0 or int(n) != n:
        raise DomainError(f"quantum number must be a non-negative integer, got {n}")
    y = np.asarray(y, dtype=float)
    h_prev = np.pi**-0.25 * np.exp(-0.5 * y**2)
    if n == 0:
        return h_prev
    h_cur = np.sqrt(2.0) * y * h_prev
    for k in range(1, int(n)):
        h_next = np.sqrt(2.0 / (k + 1.0)) * y * h_cur - np.sqrt(k / (k + 1.0)) * h_prev
        h_prev, h_cur = h_cur, h_next
    return h_cur


# ---------------------------------------------------------------------------
# Vector potentials and gauge eligibility
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VectorPotentialSpec:
    """A gauge family with its field amplitude and generating pair."""

    family: str
    B0: float
    scalar: ScalarMultiplier
    mass: MassProfile

    def __post_init__(self):
        if self.family not in GAUGE_FAMILIES:
            raise ValidationError(
                f"unknown gauge family {self.family!r}; valid: {', '.join(GAUGE_FAMILIES)}"
            )
        if not self.mass.radial:
            raise DomainError("gauge checks require a radial mass profile")

    def a_tilde(self, points) -> np.ndarray:
        """Untransformed-frame potential at an array of 3-vectors."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros_like(pts)
        if self.family == "landau":
            out[:, 0] = -self.B0 * pts[:, 1]
        else:
            out[:, 0] = -0.5 * self.B0 * pts[:, 1]
            out[:, 1] = 0.5 * self.B0 * pts[:, 0]
        return out if np.asarray(points).ndim > 1 else out[0]

    def a_transformed(self, points) -> np.ndarray:
        """A(q(x)) = (S(r)/sqrt(m(r))) * A~(x)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        r = np.linalg.norm(pts, axis=-1)
        if np.any(r == 0.0):
            raise DomainError("transformed potential undefined at r=0")
        factor = self.scalar.S(r) / np.sqrt(self.mass.require_positive(r))
        out = factor[:, None] * self.a_tilde(pts)
        return out if np.asarray(points).ndim > 1 else out[0]

    def reported_q_field(self) -> float:
        """Nominal per-family field label (B0 for landau, B0/2 for symmetric).

        Bookkeeping only: the finite-difference curl of A~ is (0, 0, B0) for
        *both* families (see `curl_fd`), and the level spacing is |e|B0.
        """
        return self.B0 if self.family == "landau" else 0.5 * self.B0


def curl_fd(field_fn: Callable, point, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference curl of a 3-vector field at one point."""
    p = np.asarray(point, dtype=float)
    jac = np.empty((3, 3))
    for j in range(3):
        step = np.zeros(3)
        step[j] = h
        jac[:, j] = (np.asarray(field_fn(p + step)) - np.asarray(field_fn(p - step))) / (2 * h)
    return np.array([jac[2, 1] - jac[1, 2], jac[0, 2] - jac[2, 0], jac[1, 0] - jac[0, 1]])


def shell_sample_points(n: int = 100, r_min: float = 0.5, r_max: float = 5.0,
                        seed: int = 11) -> np.ndarray:
    """Deterministic random 3-vectors in a spherical shell."""
    rng = np.random.default_rng(seed)
    directions = rng.normal(size=(n, 3))
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    radii = rng.uniform(r_min, r_max, size=n)
    return radii[:, None] * directions


@dataclass(frozen=True)
class GaugeReport:
    family: str
    max_residual: float
    worst_point: tuple
    skipped_points: int


def gauge_divergence_report(spec: VectorPotentialSpec, points) -> GaugeReport:
    """Evaluate the transformed-frame Coulomb-gauge condition pointwise.

    div A~ vanishes identically for both families, so the residual is the
    second term: (S/m) * (x_j A~_j / r) * (S'/S - m'/(2m)).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    r = np.linalg.norm(pts, axis=-1)
    keep = r > 0
    skipped = int(np.sum(~keep))
    pts = pts[keep]
    r = r[keep]
    if r.size == 0:
        raise DomainError("all sample points sit at r=0")
    a = spec.a_tilde(pts)
    x_dot_a = np.einsum("ij,ij->i", pts, a)
    mv = spec.mass.require_positive(r)
    dmv = np.asarray(spec.mass.dm(r), dtype=float)
    sv = np.asarray(spec.scalar.S(r), dtype=float)
    dsv = np.asarray(spec.scalar.dS(r), dtype=float)
    residual = np.abs((sv / mv) * (x_dot_a / r) * (dsv / sv - dmv / (2.0 * mv)))
    worst = int(np.argmax(residual))
    return GaugeReport(
        family=spec.family,
        max_residual=float(residual[worst]),
        worst_point=tuple(map(float, pts[worst])),
        skipped_points=skipped,
    )


def gauge_divergence_residual(spec: VectorPotentialSpec, points) -> float:
    return gauge_divergence_report(spec, points).max_residual


@dataclass(frozen=True)
class EligibilityReport:
    eligible: bool
    reason: str
    worst_point: tuple
    max_residual: float


def eligibility(spec: VectorPotentialSpec, points=None,
                threshold: float = 1e-10) -> EligibilityReport:
    """Decide whether the gauge family survives the point transformation."""
    if points is None:
        points = shell_sample_points()
    report = gauge_divergence_report(spec, points)
    ok = report.max_residual <= threshold
    if ok:
        reason = (
            "x_j A~_j vanishes identically for the symmetric family"
            if spec.family == "symmetric"
            else "S'/S - m'/(2m) vanishes on the sampled shell (constant-mass branch)"
        )
    else:
        reason = (
            "x_j A~_j = -B0*x1*x2 does not vanish and S'/S - m'/(2m) != 0 "
            f"(worst residual {report.max_residual:.3e} at {report.worst_point})"
        )
    return EligibilityReport(eligible=ok, reason=reason,
                             worst_point=report.worst_point,
                             max_residual=report.max_residual)


# ---------------------------------------------------------------------------
# Exact and numeric Landau-type spectra
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LandauSolution:
    """One exact transverse level of the symmetric-gauge problem."""

    n: int
    k1: float
    k3: float
    B0: float
    e: float
    E0_field: float
    energy: float
    shifted_coordinate: str   # "zeta" (no electric field) or "eta"
    shift: float


def landau_energy(B0: float, e: float, k1: float, k3: float, n: int) -> float:
    """E_n = k3^2 + (2n+1)|e|B0; independent of k1 (level degeneracy)."""
    if n < 0 or int(n) != n:
        raise DomainError(f"quantum number must be a non-negative integer, got {n}")
    return float(k3**2 + (2 * int(n) + 1) * abs(e) * abs(B0))


def landau_energy_with_field(B0: float, e: float, E0_field: float, k1: float,
                             k3: float, n: int) -> float:
    """Electric-field shift: adds k1*E0/B0 - E0^2/(4 B0^2) to the pure level."""
    if B0 == 0.0:
        raise DomainError("the electric-field spectrum divides by B0; got B0=0")
    base = landau_energy(B0, e, k1, k3, n)
    return float(base + k1 * E0_field / B0 - E0_field**2 / (4.0 * B0**2))


def landau_solution(B0, e, k1, k3, n, E0_field: float = 0.0) -> LandauSolution:
    if E0_field == 0.0:
        energy = landau_energy(B0, e, k1, k3, n)
        tag = "zeta"
        shift = k1 / (e * B0)
    else:
        energy = landau_energy_with_field(B0, e, E0_field, k1, k3, n)
        tag = "eta"
        shift = k1 / (e * B0) - E0_field / (2.0 * e * B0**2)
    return LandauSolution(n=int(n), k1=float(k1), k3=float(k3), B0=float(B0),
                          e=float(e), E0_field=float(E0_field), energy=energy,
                          shifted_coordinate=tag, shift=float(shift))


def transverse_mode(n: int, B0: float, e: float, k1: float,
                    E0_field: float = 0.0) -> Callable:
    """Normalized analytic transverse eigenfunction of the shifted oscillator."""
    omega = abs(e) * abs(B0)
    if omega == 0.0:
        raise DomainError("transverse mode needs |e|*B0 > 0")
    shift = k1 / (e * B0) - (E0_field / (2.0 * e * B0**2) if E0_field else 0.0)
    root = np.sqrt(omega)

    def mode(q2):
        y = root * (np.asarray(q2, dtype=float) + shift)
        return root**0.5 * hermite_function(n, y)

    return mode


@dataclass(frozen=True)
class LandauNumericResult:
    """Numeric transverse solve with the closed-form comparison attached."""

    energies: np.ndarray          # after the electric-field energy relation
    raw_eigenvalues: np.ndarray   # of the shifted-oscillator operator
    analytic: np.ndarray
    spectrum: SpectrumResult
    energy_shift: float
    shift: float
    omega: float
    warnings: tuple = ()

    @property
    def max_rel_error(self) -> float:
        return float(np.max(np.abs(self.energies - self.analytic) / np.abs(self.analytic)))


def _transverse_operator(B0, e, E0_field, k1, k3, grid):
    shift = k1 / (e * B0) - (E0_field / (2.0 * e * B0**2) if E0_field else 0.0)
    omega2 = (e * B0) ** 2
    pot = PotentialSpec(
        V=lambda q: omega2 * (np.asarray(q, float) + shift) ** 2 + k3**2,
        tag="harmonic",
    )
    return symmetrize(build_von_roos(constant_mass(), pot, mm_ordering(), grid)), shift


def solve_example_numeric(B0: float, e: float, E0_field: float, k1: float, k3: float,
                          q2_domain=None, n_points: int = 4001, k: int = 6,
                          richardson: bool = True) -> LandauNumericResult:
    """Discretize the transverse problem and compare with the closed forms.

    The grid spans +-12 oscillator lengths around the displaced center unless
    a domain is given.  Richardson extrapolation over the grid and its
    2h-coarsening removes the leading O(h^2) eigenvalue error.
    """
    if e == 0.0 or B0 == 0.0:
        raise DomainError("the transverse oscillator needs e*B0 != 0")
    if k < 1:
        raise ValidationError("k must be >= 1")
    omega = abs(e) * abs(B0)
    shift = k1 / (e * B0) - (E0_field / (2.0 * e * B0**2) if E0_field else 0.0)
    if q2_domain is None:
        span = 12.0 / np.sqrt(omega)
        q2_domain = (-shift - span, -shift + span)
    grid = np.linspace(q2_domain[0], q2_domain[1], n_points)
    op, _ = _transverse_operator(B0, e, E0_field, k1, k3, grid)
    sol = solve_symmetric(op, k, compute_vectors=True, measure="dq")
    raw = sol.eigenvalues
    if richardson:
        coarse_grid = np.linspace(q2_domain[0], q2_domain[1], _coarse_count(n_points))
        op_c, _ = _transverse_operator(B0, e, E0_field, k1, k3, coarse_grid)
        raw = _richardson(raw, solve_symmetric(op_c, k, compute_vectors=False).eigenvalues)
    energy_shift = (k1 * E0_field / B0 - E0_field**2 / (4.0 * B0**2)) if E0_field else 0.0
    energies = raw + energy_shift
    analytic = np.array([
        landau_energy_with_field(B0, e, E0_field, k1, k3, n) if E0_field
        else landau_energy(B0, e, k1, k3, n)
        for n in range(k)
    ])
    warnings = []
    top = sol.eigenvectors[-1].values
    leak = float(max(abs(top[1]), abs(top[-2])))
    if leak > 1e-8:
        warnings.append(
            f"highest requested state leaks {leak:.3e} at the walls; domain may be under-resolved"
        )
    return LandauNumericResult(energies=energies, raw_eigenvalues=raw,
                               analytic=analytic, spectrum=sol,
                               energy_shift=float(energy_shift), shift=float(shift),
                               omega=float(omega), warnings=tuple(warnings))


def transverse_overlap(result: LandauNumericResult, n: int, B0, e, k1,
                       E0_field: float = 0.0) -> float:
    """|<Y_numeric, Y_analytic>| under the transformed-coordinate measure."""
    wf = result.spectrum.eigenvectors[n]
    mode = transverse_mode(n, B0, e, k1, E0_field)
    exact = GriddedWavefunction(wf.grid, mode(wf.grid).astype(complex), "dq").normalized()
    density = np.conj(wf.values) * exact.values
    return float(abs(simpson(density.real, x=wf.grid) + 1j * simpson(density.imag, x=wf.grid)))


def build_pdm_eigenfunction(n: int, k1: float, k3: float, B0: float, e: float,
                            mass: MassProfile, scalar: ScalarMultiplier, points,
                            E0_field: float = 0.0) -> np.ndarray:
    """phi(x) = m(r)**(1/4) * psi(q(x)) at an array of 3-vectors.

    psi carries the plane-wave/quadratic phase of the separation ansatz and
    the transverse oscillator mode; q(x) is the radial map of the generating
    pair.  For m = S = 1 this returns psi evaluated at the points themselves.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    q = np.atleast_2d(radial_map(scalar, mass, pts))
    r = np.linalg.norm(pts, axis=-1)
    mode = transverse_mode(n, B0, e, k1, E0_field)
    phase = np.exp(1j * (k1 * q[:, 0] + k3 * q[:, 2] + 0.5 * e * B0 * q[:, 0] * q[:, 1]))
    psi = phase * mode(q[:, 1])
    phi = mass.require_positive(r) ** 0.25 * psi
    return phi if np.asarray(points).ndim > 1 else phi[0]


# ---------------------------------------------------------------------------
# Minimal-coupling operator identity (1D reduction)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MinimalCouplingReport:
    residual: float
    spacing: float


def minimal_coupling_identity_residual(mass: MassProfile, a_field: Callable,
                                       potential: PotentialSpec, grid,
                                       e: float = 1.0, da_field: Optional[Callable] = None,
                                       probes=None, margin: int = 4) -> MinimalCouplingReport:
    """Expanded vs squared minimal-coupling operator on a 1D grid.

    ``a_field`` is the transformed-frame potential as a function of x.  The
    expanded operator adds to the fixed-ordering Hamiltonian the terms
    i*e*(dA)/sqrt(m), 2i*e*(A/sqrt(m))*[d - m'/(4m)] and e^2 A^2; the squared
    operator is (pseudo-momentum - e*A)^2 + W built by explicit matrix
    products.  The two agree analytically, so the applied difference is pure
    discretization error, O(h^2).
    """
    h15 = build_reduced_pdm(mass, potential, grid)
    pseudo = build_pseudo_momentum(mass, grid)
    xi = h15.grid
    h = h15.spacing
    mv = mass.require_positive(xi)
    dmv = np.asarray(mass.dm(xi), dtype=float)
    g = 1.0 / np.sqrt(mv)
    u = dmv / (4.0 * mv)
    a = np.asarray(a_field(xi), dtype=float)
    da = (np.asarray(da_field(xi), dtype=float) if da_field is not None
          else np.gradient(a, xi, edge_order=2))
    n = xi.size
    c = 1.0 / (2.0 * h)
    D = sparse.diags_array([np.full(n - 1, -c), np.full(n - 1, c)], offsets=[-1, 1])
    expanded = (
        h15.matrix.astype(complex)
        + 1j * e * sparse.diags_array(da * g)
        + 2j * e * sparse.diags_array(a * g) @ (D - sparse.diags_array(u))
        + sparse.diags_array((e * a) ** 2).astype(complex)
    ).tocsr()
    shifted = (pseudo.matrix - e * sparse.diags_array(a).astype(complex)).tocsr()
    squared = (shifted @ shifted + sparse.diags_array(potential.W(xi)).astype(complex)).tocsr()
    if probes is None:
        probes = default_probes(xi, h15.walls)
    wrap = lambda M: DiscretizedOperator(grid=xi, walls=h15.walls, matrix=M)
    residual = applied_difference(wrap(expanded), wrap(squared), probes, margin=margin)
    return MinimalCouplingReport(residual=residual, spacing=h)
