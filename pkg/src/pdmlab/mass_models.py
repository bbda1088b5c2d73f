"""Mass profiles, scalar multipliers, and the generating-pair catalog.

A mass profile is the positive dimensionless multiplier m of the rest mass
(units fixed repo-wide so that hbar = 2*m0 = c = 1).  A radial profile and a
scalar multiplier S(r) form a *generating pair* when they satisfy

    m(r) = S(r) * [1 + (r/N) * (S'/S - m'/(2m))]
    S(r) = N*sqrt(m)*r**(-N) * (Int r**(N-1)*sqrt(m) dr + c0)

with N the number of degrees of freedom (3 unless stated otherwise).  Either
member generates the other: the integral form by cumulative quadrature, the
differential form by integrating a first-order ODE for ln m.  The catalog
below ships the closed-form pairs used throughout the test-suite.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, IntegrationError, ValidationError

DEFAULT_DOF = 3

CATALOG_TAGS = (
    "S-unity",
    "S-equals-m",
    "S-power-b",
    "S-power-law-nu",
    "m-quadratic",
    "m-power-2b",
    "m-rational",
)

# Default working domain starts away from r=0: several catalog masses vanish
# or blow up there and the m>0 invariant must hold on the whole domain.
DEFAULT_R_MIN = 0.1


def _as_array(x):
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class MassProfile:
    """Positive dimensionless mass multiplier with first/second derivatives."""

    m: Callable
    dm: Callable
    d2m: Callable
    kind: str = "custom"
    params: Mapping = field(default_factory=dict)
    radial: bool = False

    def __call__(self, x):
        return self.m(_as_array(x))

    def require_positive(self, x):
        """Raise DomainError naming the first point where m <= 0."""
        x = _as_array(x)
        values = self.m(x)
        bad = ~(values > 0.0) | ~np.isfinite(values)
        if np.any(bad):
            where = np.atleast_1d(x)[np.atleast_1d(bad)][0]
            raise DomainError(f"mass profile is not positive at x={where!r}")
        return values


@dataclass(frozen=True)
class ScalarMultiplier:
    """Scalar multiplier S(r) of the vector-potential construction."""

    S: Callable
    dS: Callable
    kind: str = "custom"
    params: Mapping = field(default_factory=dict)

    def __call__(self, r):
        return self.S(_as_array(r))


def constant_mass(value: float = 1.0) -> MassProfile:
    if not value > 0:
        raise DomainError(f"constant mass must be positive, got {value}")
    return MassProfile(
        m=lambda x: np.full_like(_as_array(x), float(value)),
        dm=lambda x: np.zeros_like(_as_array(x)),
        d2m=lambda x: np.zeros_like(_as_array(x)),
        kind="constant",
        params={"value": float(value)},
        radial=True,
    )


def constant_scalar(value: float = 1.0) -> ScalarMultiplier:
    return ScalarMultiplier(
        S=lambda r: np.full_like(_as_array(r), float(value)),
        dS=lambda r: np.zeros_like(_as_array(r)),
        kind="constant",
        params={"value": float(value)},
    )


def reciprocal_quadratic_mass(a: float = 1.0) -> MassProfile:
    """m(x) = 1/(1 + a*x^2)^2, the smooth whole-line profile used throughout.

    For a = 1 the transformed coordinate is arctan(x), handy as an oracle.
    """
    if a <= 0:
        raise DomainError("reciprocal-quadratic mass requires a > 0")

    def m(x):
        return (1.0 + a * x**2) ** -2.0

    def dm(x):
        return -4.0 * a * x * (1.0 + a * x**2) ** -3.0

    def d2m(x):
        return (-4.0 * a * (1.0 + a * x**2) + 24.0 * a**2 * x**2) * (1.0 + a * x**2) ** -4.0

    return MassProfile(m, dm, d2m, kind="reciprocal-quadratic", params={"a": a})


def gaussian_mass(width: float = 10.0) -> MassProfile:
    """m(x) = exp(-x^2/width), positive on the whole line."""
    if width <= 0:
        raise DomainError("gaussian mass requires width > 0")

    def m(x):
        return np.exp(-np.asarray(x, float) ** 2 / width)

    def dm(x):
        x = np.asarray(x, float)
        return (-2.0 * x / width) * m(x)

    def d2m(x):
        x = np.asarray(x, float)
        return (-2.0 / width + 4.0 * x**2 / width**2) * m(x)

    return MassProfile(m, dm, d2m, kind="gaussian", params={"width": width})


def custom_mass(m, dm=None, d2m=None, radial=False, eps=1e-6) -> MassProfile:
    """Wrap callables; missing derivatives fall back to central differences."""
    if dm is None:
        dm = lambda x: (m(_as_array(x) + eps) - m(_as_array(x) - eps)) / (2 * eps)
    if d2m is None:
        _dm = dm
        d2m = lambda x: (_dm(_as_array(x) + eps) - _dm(_as_array(x) - eps)) / (2 * eps)
    return MassProfile(m=m, dm=dm, d2m=d2m, kind="custom", radial=radial)


def tabulated_mass(grid, values, radial: bool = False) -> MassProfile:
    """Mass profile from samples; monotone-cubic interpolation in between.

    Derivatives come from centered differences on the supplied grid (one-sided
    O(h^2) at the ends), themselves interpolated.
    """
    grid = _as_array(grid)
    values = _as_array(values)
    if grid.ndim != 1 or grid.size < 3 or np.any(np.diff(grid) <= 0):
        raise DomainError("tabulated mass needs an ascending grid of >= 3 points")
    if np.any(values <= 0):
        where = grid[values <= 0][0]
        raise DomainError(f"tabulated mass is not positive at x={where!r}")
    d1 = np.gradient(values, grid, edge_order=2)
    d2 = np.gradient(d1, grid, edge_order=2)
    f = PchipInterpolator(grid, values, extrapolate=False)
    f1 = PchipInterpolator(grid, d1, extrapolate=False)
    f2 = PchipInterpolator(grid, d2, extrapolate=False)
    return MassProfile(
        m=f, dm=f1, d2m=f2, kind="tabulated",
        params={"grid": grid, "values": values}, radial=radial,
    )


def tabulated_scalar(grid, values) -> ScalarMultiplier:
    grid = _as_array(grid)
    values = _as_array(values)
    if grid.ndim != 1 or grid.size < 3 or np.any(np.diff(grid) <= 0):
        raise DomainError("tabulated scalar needs an ascending grid of >= 3 points")
    f = PchipInterpolator(grid, values, extrapolate=False)
    d1 = np.gradient(values, grid, edge_order=2)
    f1 = PchipInterpolator(grid, d1, extrapolate=False)
    return ScalarMultiplier(
        S=f, dS=f1, kind="tabulated", params={"grid": grid, "values": values}
    )


def mass_from_csv(path, radial: bool = False) -> MassProfile:
    """Load a two-column (position, value) CSV; a non-numeric header row is skipped."""
    grid, values = _read_two_columns(path)
    return tabulated_mass(grid, values, radial=radial)


def scalar_from_csv(path) -> ScalarMultiplier:
    grid, values = _read_two_columns(path)
    return tabulated_scalar(grid, values)


def _read_two_columns(path):
    xs, ys = [], []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                x, y = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if not xs:  # header line
                    continue
                raise ValidationError(f"malformed CSV row {row!r} in {path}")
            xs.append(x)
            ys.append(y)
    if len(xs) < 3:
        raise ValidationError(f"{path}: need at least 3 data rows")
    return np.array(xs), np.array(ys)


# ---------------------------------------------------------------------------
# Catalog of closed-form generating pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PairCatalogEntry:
    """A closed-form (m, S) generating pair.

    ``singular_radii`` lists radii where either closed form is undefined;
    residual checks skip them.  ``quadrature_constant(r0)`` returns the c0
    that makes cumulative quadrature anchored at r0 reproduce the printed S.
    """

    tag: str
    params: Mapping
    mass: MassProfile
    scalar: ScalarMultiplier
    dof: int = DEFAULT_DOF
    singular_radii: tuple = ()

    def quadrature_constant(self, r0: float) -> float:
        r0 = float(r0)
        m0 = float(self.mass(r0))
        s0 = float(self.scalar(r0))
        return s0 * r0**self.dof / (self.dof * np.sqrt(m0))


def _entry_s_unity(lam, dof):
    # S(r) = 1  <->  m(r) = 1 / (1 + lam * r**(-2N))
    n2 = 2 * dof

    def m(r):
        return 1.0 / (1.0 + lam * r ** (-n2))

    def dm(r):
        mv = m(r)
        return n2 * lam * r ** (-n2 - 1) * mv**2

    def d2m(r):
        mv = m(r)
        dv = dm(r)
        return n2 * lam * (-(n2 + 1) * r ** (-n2 - 2) * mv**2 + 2.0 * r ** (-n2 - 1) * mv * dv)

    mass = MassProfile(m, dm, d2m, kind="catalog:S-unity", params={"lam": lam, "dof": dof}, radial=True)
    return mass, constant_scalar(1.0), (0.0,)


def _entry_s_equals_m(const):
    return constant_mass(const), constant_scalar(const), ()


def _entry_s_power_b(lam, b, dof):
    # S = m**b  <->  m = (1 + lam * r**p)**(1/(b-1)),  p = -2N(b-1)/(2b-1)
    if abs(b - 1.0) < 1e-12 or abs(2 * b - 1.0) < 1e-12:
        raise ValidationError("S-power-b requires b != 1 and b != 1/2")
    if not (b > 1.0 and lam > 0.0):
        # Wider (b, lam) ranges make the base or the fractional power
        # multivalued; restrict to the branch where the base stays positive.
        raise ValidationError("S-power-b catalog entry is restricted to b > 1, lam > 0")
    p = -2.0 * dof * (b - 1.0) / (2.0 * b - 1.0)
    q = 1.0 / (b - 1.0)

    def m(r):
        return (1.0 + lam * r**p) ** q

    def _w(r):
        base = 1.0 + lam * r**p
        return lam * p * r ** (p - 1.0) * q / base

    def dm(r):
        return m(r) * _w(r)

    def d2m(r):
        base = 1.0 + lam * r**p
        w = _w(r)
        dw = q * lam * p * ((p - 1.0) * r ** (p - 2.0) * base - lam * p * r ** (2.0 * p - 2.0)) / base**2
        return m(r) * (w * w + dw)

    def S(r):
        return m(r) ** b

    def dS(r):
        return b * m(r) ** (b - 1.0) * dm(r)

    mass = MassProfile(m, dm, d2m, kind="catalog:S-power-b", params={"lam": lam, "b": b, "dof": dof}, radial=True)
    scal = ScalarMultiplier(S, dS, kind="catalog:S-power-b", params={"lam": lam, "b": b, "dof": dof})
    return mass, scal, (0.0,)


def _entry_s_power_law_nu(lam, nu, dof):
    # S = lam*r**nu  <->  m = (2N+nu)*lam / ((2N+nu)*lam*r**(-2(N+nu)) + 2N*r**(-nu))
    if lam <= 0:
        raise ValidationError("S-power-law-nu requires lam > 0")
    a = 2.0 * dof + nu
    if a <= 0:
        raise ValidationError("S-power-law-nu requires 2N + nu > 0")
    p1 = -2.0 * (dof + nu)
    p2 = -nu

    def _den(r):
        return a * lam * r**p1 + 2.0 * dof * r**p2

    def _dden(r):
        return a * lam * p1 * r ** (p1 - 1.0) + 2.0 * dof * p2 * r ** (p2 - 1.0)

    def _d2den(r):
        return a * lam * p1 * (p1 - 1.0) * r ** (p1 - 2.0) + 2.0 * dof * p2 * (p2 - 1.0) * r ** (p2 - 2.0)

    def m(r):
        return a * lam / _den(r)

    def dm(r):
        return -a * lam * _dden(r) / _den(r) ** 2

    def d2m(r):
        den = _den(r)
        return a * lam * (2.0 * _dden(r) ** 2 / den**3 - _d2den(r) / den**2)

    def S(r):
        return lam * r**nu

    def dS(r):
        return lam * nu * r ** (nu - 1.0)

    mass = MassProfile(m, dm, d2m, kind="catalog:S-power-law-nu", params={"lam": lam, "nu": nu, "dof": dof}, radial=True)
    scal = ScalarMultiplier(S, dS, kind="catalog:S-power-law-nu", params={"lam": lam, "nu": nu, "dof": dof})
    return mass, scal, (0.0,)


def _entry_m_quadratic(lam, dof):
    # m = lam*r**2  <->  S = N*lam*r**2/(N+1)
    if lam <= 0:
        raise ValidationError("m-quadratic requires lam > 0")
    c = dof * lam / (dof + 1.0)
    mass = MassProfile(
        m=lambda r: lam * r**2,
        dm=lambda r: 2.0 * lam * r,
        d2m=lambda r: 2.0 * lam * np.ones_like(_as_array(r)),
        kind="catalog:m-quadratic", params={"lam": lam, "dof": dof}, radial=True,
    )
    scal = ScalarMultiplier(
        S=lambda r: c * r**2,
        dS=lambda r: 2.0 * c * r,
        kind="catalog:m-quadratic", params={"lam": lam, "dof": dof},
    )
    return mass, scal, (0.0,)


def _entry_m_power_2b(lam, b, dof):
    # m = lam*r**(2b)  <->  S = N*lam*r**(2b)/(N+b)
    if lam <= 0:
        raise ValidationError("m-power-2b requires lam > 0")
    if dof + b == 0:
        raise ValidationError("m-power-2b requires N + b != 0")
    c = dof * lam / (dof + b)
    mass = MassProfile(
        m=lambda r: lam * r ** (2.0 * b),
        dm=lambda r: 2.0 * b * lam * r ** (2.0 * b - 1.0),
        d2m=lambda r: 2.0 * b * (2.0 * b - 1.0) * lam * r ** (2.0 * b - 2.0),
        kind="catalog:m-power-2b", params={"lam": lam, "b": b, "dof": dof}, radial=True,
    )
    scal = ScalarMultiplier(
        S=lambda r: c * r ** (2.0 * b),
        dS=lambda r: 2.0 * b * c * r ** (2.0 * b - 1.0),
        kind="catalog:m-power-2b", params={"lam": lam, "b": b, "dof": dof},
    )
    return mass, scal, (0.0,)


def _entry_m_rational(alpha, dof):
    # m = 1/(1 + alpha*r**N)  <->  S = (2/alpha)*r**(-N)
    if alpha <= 0:
        raise ValidationError("m-rational requires alpha > 0")

    def m(r):
        return 1.0 / (1.0 + alpha * r**dof)

    def dm(r):
        return -alpha * dof * r ** (dof - 1.0) * m(r) ** 2

    def d2m(r):
        mv = m(r)
        return -alpha * dof * ((dof - 1.0) * r ** (dof - 2.0) * mv**2 + 2.0 * r ** (dof - 1.0) * mv * dm(r))

    scal = ScalarMultiplier(
        S=lambda r: (2.0 / alpha) * r ** (-float(dof)),
        dS=lambda r: -(2.0 * dof / alpha) * r ** (-float(dof) - 1.0),
        kind="catalog:m-rational", params={"alpha": alpha, "dof": dof},
    )
    mass = MassProfile(m, dm, d2m, kind="catalog:m-rational", params={"alpha": alpha, "dof": dof}, radial=True)
    return mass, scal, (0.0,)


def make_pair(tag: str, *, lam: float = 1.0, b: float = 2.0, nu: float = 1.0,
              alpha: float = 1.0, const: float = 1.0, dof: int = DEFAULT_DOF) -> PairCatalogEntry:
    """Build a catalog entry by tag; unknown tags list the valid ones."""
    dof = int(dof)
    if dof < 2:
        raise ValidationError("dof (number of degrees of freedom) must be >= 2")
    if tag == "S-unity":
        if lam <= 0:
            raise ValidationError("S-unity requires lam > 0")
        mass, scal, sing = _entry_s_unity(lam, dof)
        params = {"lam": lam, "dof": dof}
    elif tag == "S-equals-m":
        mass, scal, sing = _entry_s_equals_m(const)
        params = {"const": const, "dof": dof}
    elif tag == "S-power-b":
        mass, scal, sing = _entry_s_power_b(lam, b, dof)
        params = {"lam": lam, "b": b, "dof": dof}
    elif tag == "S-power-law-nu":
        mass, scal, sing = _entry_s_power_law_nu(lam, nu, dof)
        params = {"lam": lam, "nu": nu, "dof": dof}
    elif tag == "m-quadratic":
        mass, scal, sing = _entry_m_quadratic(lam, dof)
        params = {"lam": lam, "dof": dof}
    elif tag == "m-power-2b":
        mass, scal, sing = _entry_m_power_2b(lam, b, dof)
        params = {"lam": lam, "b": b, "dof": dof}
    elif tag == "m-rational":
        mass, scal, sing = _entry_m_rational(alpha, dof)
        params = {"alpha": alpha, "dof": dof}
    else:
        raise ValidationError(
            f"unknown catalog tag {tag!r}; valid tags: {', '.join(CATALOG_TAGS)}"
        )
    return PairCatalogEntry(tag=tag, params=params, mass=mass, scalar=scal,
                            dof=dof, singular_radii=sing)


def default_catalog(dof: int = DEFAULT_DOF):
    """One entry per tag with the parameter choices used by the test-suite."""
    return [
        make_pair("S-unity", lam=1.0, dof=dof),
        make_pair("S-equals-m", const=1.0, dof=dof),
        make_pair("S-power-b", lam=1.0, b=2.0, dof=dof),
        make_pair("S-power-law-nu", lam=1.0, nu=1.0, dof=dof),
        make_pair("m-quadratic", lam=2.0, dof=dof),
        make_pair("m-power-2b", lam=1.0, b=2.0, dof=dof),
        make_pair("m-rational", alpha=2.0, dof=dof),
    ]


# ---------------------------------------------------------------------------
# Generating relation, both directions
# ---------------------------------------------------------------------------


def scalar_from_mass(mass: MassProfile, dof: int, r_grid, c0: float = 0.0) -> ScalarMultiplier:
    """Generate S(r) from m(r) by cumulative quadrature.

    Computes S = N*sqrt(m)*r**(-N)*(I(r) + c0) where I is the cumulative
    Simpson integral of r**(N-1)*sqrt(m) anchored at the first grid point.
    ``c0`` makes the otherwise-implicit integration constant explicit; the
    closed-form families arise from particular choices of it.
    """
    if not mass.radial:
        raise DomainError("scalar_from_mass requires a radial mass profile")
    r = _as_array(r_grid)
    if r.ndim != 1 or r.size < 3 or np.any(np.diff(r) <= 0):
        raise DomainError("r_grid must be ascending with >= 3 points")
    if r[0] <= 0:
        raise DomainError(f"radii must be positive, got r={r[0]}")
    mv = mass.require_positive(r)
    integrand = r ** (dof - 1) * np.sqrt(mv)
    integral = cumulative_simpson(integrand, x=r, initial=0.0)
    s_vals = dof * np.sqrt(mv) * r ** (-float(dof)) * (integral + c0)
    return tabulated_scalar(r, s_vals)


def mass_from_scalar(scalar: ScalarMultiplier, dof: int, r0: float, m0: float,
                     r_grid, substeps: int = 8) -> MassProfile:
    """Generate m(r) from S(r) by integrating the first-order ODE for ln m.

    The differential form of the generating relation rearranges to

        (ln m)' = 2N/r + 2 S'/S - (2N/(r S)) * m

    which is integrated with classical fixed-step RK4 from (r0, m0); working
    in ln m keeps the profile positive by construction.
    """
    r = _as_array(r_grid)
    if r.ndim != 1 or r.size < 3 or np.any(np.diff(r) <= 0):
        raise DomainError("r_grid must be ascending with >= 3 points")
    if r[0] <= 0:
        raise DomainError(f"radii must be positive, got r={r[0]}")
    if not (r[0] <= r0 <= r[-1]):
        raise DomainError(f"r0={r0} lies outside the grid [{r[0]}, {r[-1]}]")
    if m0 <= 0:
        raise DomainError(f"initial mass must be positive, got {m0}")
    s_grid = np.asarray(scalar.S(r), dtype=float)
    scale = np.max(np.abs(s_grid))
    if scale == 0.0 or np.any(np.abs(s_grid) <= 1e-12 * scale) or np.any(~np.isfinite(s_grid)):
        where = r[int(np.argmin(np.abs(s_grid)))]
        raise DomainError(
            f"scalar multiplier vanishes near r={where}: singular ODE coefficient"
        )

    def rhs(radius, y):
        s = float(scalar.S(radius))
        if not np.isfinite(s) or s == 0.0:
            raise DomainError(f"scalar multiplier vanishes at r={radius}: singular ODE coefficient")
        ds = float(scalar.dS(radius))
        # exp can overflow past a pole of 1/S; the caller turns the resulting
        # non-finite state into an IntegrationError with the last good radius
        with np.errstate(over="ignore", invalid="ignore"):
            return 2.0 * dof / radius + 2.0 * ds / s - (2.0 * dof / (radius * s)) * np.exp(y)

    def rk4_span(y, ra, rb):
        h = (rb - ra) / substeps
        radius = ra
        for _ in range(substeps):
            k1 = rhs(radius, y)
            k2 = rhs(radius + 0.5 * h, y + 0.5 * h * k1)
            k3 = rhs(radius + 0.5 * h, y + 0.5 * h * k2)
            k4 = rhs(radius + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            radius += h
            if not np.isfinite(y):
                raise IntegrationError(
                    f"mass ODE diverged near r={radius}", last_good=radius - h
                )
        return y

    values = np.empty_like(r)
    split = int(np.searchsorted(r, r0))
    # forward sweep from r0 up, then backward sweep from r0 down
    y = np.log(m0)
    prev = float(r0)
    for i in range(split, r.size):
        y = rk4_span(y, prev, r[i]) if r[i] != prev else y
        values[i] = np.exp(y)
        prev = float(r[i])
    y = np.log(m0)
    prev = float(r0)
    for i in range(split - 1, -1, -1):
        y = rk4_span(y, prev, r[i])
        values[i] = np.exp(y)
        prev = float(r[i])
    return tabulated_mass(r, values, radial=True)


@dataclass(frozen=True)
class PairResidualReport:
    """Result of checking the differential generating relation on a grid."""

    tag: str
    max_residual: float
    worst_radius: float
    skipped_radii: tuple
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance


def pair_residual(mass: MassProfile, scalar: ScalarMultiplier, dof: int, r):
    """Pointwise |m - S*(1 + (r/N)*(S'/S - m'/(2m)))|."""
    r = _as_array(r)
    mv = mass.m(r)
    dmv = mass.dm(r)
    sv = scalar.S(r)
    dsv = scalar.dS(r)
    rhs = sv * (1.0 + (r / dof) * (dsv / sv - dmv / (2.0 * mv)))
    return np.abs(mv - rhs)


def verify_pair(entry: PairCatalogEntry, r_grid, tol: float = 1e-8) -> PairResidualReport:
    """Check a catalog entry against the differential generating relation.

    Radii within 1e-12 of a declared singular point are skipped and recorded.
    """
    r = _as_array(r_grid)
    skipped = []
    keep = np.ones(r.shape, dtype=bool)
    for s in entry.singular_radii:
        hit = np.isclose(r, s, rtol=0.0, atol=1e-12)
        skipped.extend(r[hit].tolist())
        keep &= ~hit
    if not np.any(keep):
        raise DomainError("all radii are singular for this entry")
    res = pair_residual(entry.mass, entry.scalar, entry.dof, r[keep])
    worst = int(np.argmax(res))
    return PairResidualReport(
        tag=entry.tag,
        max_residual=float(res[worst]),
        worst_radius=float(r[keep][worst]),
        skipped_radii=tuple(skipped),
        tolerance=float(tol),
    )
