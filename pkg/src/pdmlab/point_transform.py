"""Point canonical transformation between x-space and q-space.

The 1D map is q(x) = Int sqrt(m) dx anchored at q(x_min) = 0; it is strictly
increasing because m > 0.  Wavefunctions map with a fixed exponent -1/4:

    psi(q) = m(x)**(-1/4) * phi(x)      phi(x) = m(x)**(1/4) * psi(q(x))

which preserves the measure, Int |phi|^2 dx = Int |psi|^2 dq.  The 3D support
is limited to the radial form q_j = (S(r)/sqrt(m(r))) * x_j used by the
electromagnetic construction; its divergence collapses to N*sqrt(m) exactly
when (m, S) is a generating pair, which `jacobian_trace_residual` checks by
finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, simpson
from scipy.interpolate import CubicSpline, PchipInterpolator

from .errors import DomainError
from .mass_models import MassProfile, ScalarMultiplier

UPSILON = -0.25  # wavefunction exponent of the map


def _is_uniform(grid, rtol=1e-8):
    d = np.diff(grid)
    return d.size > 0 and np.all(np.abs(d - d[0]) <= rtol * abs(d[0]))


def _simpson(values, grid):
    return simpson(values, x=grid)


@dataclass(frozen=True)
class GriddedWavefunction:
    """Complex samples on an ascending grid, tagged with its measure (dx/dq)."""

    grid: np.ndarray
    values: np.ndarray
    measure: str = "dx"

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if grid.ndim != 1 or grid.size != values.size:
            raise DomainError("grid and values must be 1D arrays of equal length")
        if np.any(np.diff(grid) <= 0):
            raise DomainError("wavefunction grid must be strictly ascending")
        if self.measure not in ("dx", "dq"):
            raise DomainError(f"measure must be 'dx' or 'dq', got {self.measure!r}")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def norm_squared(self) -> float:
        """Int |psi|^2 over the grid (Simpson when uniform, else trapezoid)."""
        density = np.abs(self.values) ** 2
        if _is_uniform(self.grid):
            return float(_simpson(density, self.grid))
        return float(np.trapezoid(density, self.grid))

    def normalized(self) -> "GriddedWavefunction":
        ns = self.norm_squared()
        if not ns > 0:
            raise DomainError("cannot normalize a zero wavefunction")
        return GriddedWavefunction(self.grid, self.values / np.sqrt(ns), self.measure)

    def rows(self):
        for g, v in zip(self.grid, self.values):
            yield float(g), float(v.real), float(v.imag)


@dataclass(frozen=True)
class TransformMap:
    """Tabulated q(x) with Jacobian sqrt(m) and a monotone-cubic inverse."""

    x_grid: np.ndarray
    q_of_x: np.ndarray
    jac: np.ndarray
    upsilon: float = UPSILON

    def __post_init__(self):
        object.__setattr__(self, "_forward", PchipInterpolator(self.x_grid, self.q_of_x, extrapolate=False))
        object.__setattr__(self, "_inverse", PchipInterpolator(self.q_of_x, self.x_grid, extrapolate=False))

    @property
    def q_range(self):
        return float(self.q_of_x[0]), float(self.q_of_x[-1])

    def q(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < self.x_grid[0]) or np.any(x > self.x_grid[-1]):
            raise DomainError(
                f"x outside map domain [{self.x_grid[0]}, {self.x_grid[-1]}]"
            )
        return self._forward(x)

    def x(self, q):
        q = np.asarray(q, dtype=float)
        lo, hi = self.q_range
        if np.any(q < lo) or np.any(q > hi):
            raise DomainError(f"q outside map image [{lo}, {hi}]")
        return self._inverse(q)

    def rows(self):
        for xv, qv, jv in zip(self.x_grid, self.q_of_x, self.jac):
            yield float(xv), float(qv), float(jv)


def build_map(mass: MassProfile, x_grid) -> TransformMap:
    """Cumulative Simpson quadrature of sqrt(m) with q(x_min) = 0."""
    x = np.asarray(x_grid, dtype=float)
    if x.ndim != 1 or x.size < 3 or np.any(np.diff(x) <= 0):
        raise DomainError("x_grid must be ascending with >= 3 points")
    mv = mass.require_positive(x)
    jac = np.sqrt(mv)
    q = cumulative_simpson(jac, x=x, initial=0.0)
    if np.any(np.diff(q) <= 0):
        raise DomainError("q(x) failed to be strictly increasing (check the mass profile)")
    return TransformMap(x_grid=x, q_of_x=q, jac=jac)


def push_wavefunction(psi: GriddedWavefunction, tmap: TransformMap,
                      mass: MassProfile) -> GriddedWavefunction:
    """phi(x) = m(x)**(1/4) * psi(q(x)) on the map's x grid."""
    if psi.measure != "dq":
        raise DomainError("push_wavefunction expects a dq-measure wavefunction")
    lo, hi = tmap.q_range
    if lo < psi.grid[0] or hi > psi.grid[-1]:
        raise DomainError(
            f"map image [{lo}, {hi}] exceeds the wavefunction grid "
            f"[{psi.grid[0]}, {psi.grid[-1]}]; refusing to extrapolate"
        )
    interp = CubicSpline(psi.grid, psi.values)
    mv = mass.require_positive(tmap.x_grid)
    phi = mv**0.25 * interp(tmap.q_of_x)
    return GriddedWavefunction(tmap.x_grid, phi, "dx")


def pull_wavefunction(phi: GriddedWavefunction, tmap: TransformMap,
                      mass: MassProfile) -> GriddedWavefunction:
    """psi(q) = m(x)**(-1/4) * phi(x) sampled on the map's q nodes."""
    if phi.measure != "dx":
        raise DomainError("pull_wavefunction expects a dx-measure wavefunction")
    if phi.grid[0] < tmap.x_grid[0] or phi.grid[-1] > tmap.x_grid[-1]:
        raise DomainError("wavefunction grid exceeds the map domain")
    if phi.grid.size == tmap.x_grid.size and np.allclose(phi.grid, tmap.x_grid, rtol=0, atol=1e-14):
        values = phi.values
    else:
        values = CubicSpline(phi.grid, phi.values)(tmap.x_grid)
    mv = mass.require_positive(tmap.x_grid)
    return GriddedWavefunction(tmap.q_of_x, mv**-0.25 * values, "dq")


def radial_map(scalar: ScalarMultiplier, mass: MassProfile, points,
               check_pair: bool = False, pair_tol: float = 1e-8,
               dof: int = 3) -> np.ndarray:
    """q_j = (S(r)/sqrt(m(r))) * x_j for an array of 3-vectors.

    The construction presumes (m, S) is a generating pair; that is the
    caller's responsibility unless ``check_pair`` is set, in which case the
    differential relation is verified at the sample radii.
    """
    if not mass.radial:
        raise DomainError("radial_map requires a radial mass profile")
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[-1] != 3:
        raise DomainError("points must be 3-vectors")
    r = np.linalg.norm(pts, axis=-1)
    if np.any(r == 0.0):
        raise DomainError("radial map is undefined at r=0")
    if check_pair:
        from .mass_models import pair_residual

        res = pair_residual(mass, scalar, dof, r)
        if np.max(res) > pair_tol:
            raise DomainError(
                f"(m, S) violate the generating relation: residual {np.max(res):.3e} "
                f"at r={r[int(np.argmax(res))]:.6g}"
            )
    factor = scalar.S(r) / np.sqrt(mass.require_positive(r))
    if np.any(~np.isfinite(factor)):
        bad = r[~np.isfinite(factor)][0]
        raise DomainError(f"scalar multiplier singular at r={bad}")
    out = factor[:, None] * pts
    return out if np.asarray(points).ndim > 1 else out[0]


def jacobian_trace_residual(scalar: ScalarMultiplier, mass: MassProfile, dof: int,
                            r_grid, stencil: float = 1e-4, directions: int = 4,
                            seed: int = 7) -> float:
    """max |sum_j dq_j/dx_j - N*sqrt(m)| over radii and sample directions.

    The divergence of the radial map is computed by central differences on a
    3D stencil; it equals N*sqrt(m(r)) exactly when (m, S) is a generating
    pair, so this doubles as a negative test for mismatched pairs.
    """
    if dof != 3:
        raise DomainError("the finite-difference trace check is implemented for dof=3")
    rng = np.random.default_rng(seed)
    units = [np.array([1.0, 0.0, 0.0]), np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)]
    while len(units) < directions:
        v = rng.normal(size=3)
        units.append(v / np.linalg.norm(v))
    eye = np.eye(3)
    worst = 0.0
    for r in np.asarray(r_grid, dtype=float):
        target = dof * np.sqrt(float(mass.m(r)))
        for u in units[:directions]:
            p = r * u
            div = 0.0
            for j in range(3):
                qp = radial_map(scalar, mass, p + stencil * eye[j])
                qm = radial_map(scalar, mass, p - stencil * eye[j])
                div += (qp[j] - qm[j]) / (2.0 * stencil)
            worst = max(worst, abs(div - target))
    return worst
