"""Discretized 1D operators: general-ordering Hamiltonians and momenta.

All builders take the full node array of a uniform grid whose endpoints are
hard Dirichlet walls; matrices act on the interior nodes.  Derivatives use
3-point central differences, so Hamiltonians are tridiagonal and explicit
operator products (the squared momenta) are pentadiagonal.

The kinetic operator with ordering parameters (alpha, beta, gamma),
constrained by alpha + beta + gamma = -1, discretizes

    -(1/m) d2 + (m'/m^2) d - [alpha*(alpha+beta+1)+beta+1] * m'^2/m^3
        + (1+beta)/2 * m''/m^2 + V

The first-derivative coefficient m'/m^2 carries no ordering parameters, which
is what lets a single diagonal similarity symmetrize every ordering.

The pseudo-momentum (-i/sqrt(m))[d - m'/(4m)] equals the symmetric product
-(i/2)[g d + d g] with g = 1/sqrt(m); discretizing that product with the
skew-symmetric central difference gives a matrix that is Hermitian under
plain dx to rounding, not merely to O(h^2).  The momentum operator is then
sqrt(m) times it and is Hermitian under the weight m**(-1/2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import sparse

from .errors import DomainError, ValidationError
from .mass_models import MassProfile


# ---------------------------------------------------------------------------
# Ordering parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrderingParams:
    """von Roos ordering triple; the constructor enforces the sum constraint.

    Triples within 1e-12 of alpha+beta+gamma = -1 are accepted and gamma is
    snapped to -1 - alpha - beta so the stored values satisfy it exactly.
    """

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if abs(self.alpha + self.beta + self.gamma + 1.0) > 1e-12:
            raise ValidationError(
                f"ordering parameters must satisfy alpha+beta+gamma=-1, "
                f"got sum {self.alpha + self.beta + self.gamma}"
            )
        object.__setattr__(self, "gamma", -1.0 - self.alpha - self.beta)

    def coefficients(self):
        """(c1, c2) multiplying m'^2/m^3 and m''/m^2 in the kinetic operator."""
        a, b = self.alpha, self.beta
        return a * (a + b + 1.0) + b + 1.0, 0.5 * (1.0 + b)


def mm_ordering() -> OrderingParams:
    """The ordering fixed by the point transformation: (-1/4, -1/2, -1/4)."""
    return OrderingParams(-0.25, -0.5, -0.25)


def bendaniel_duke() -> OrderingParams:
    return OrderingParams(0.0, -1.0, 0.0)


def gora_williams() -> OrderingParams:
    return OrderingParams(-1.0, 0.0, 0.0)


def zhu_kroemer() -> OrderingParams:
    return OrderingParams(-0.5, 0.0, -0.5)


NAMED_ORDERINGS = {
    "mm": mm_ordering,
    "bendaniel-duke": bendaniel_duke,
    "gora-williams": gora_williams,
    "zhu-kroemer": zhu_kroemer,
}


# ---------------------------------------------------------------------------
# Potentials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PotentialSpec:
    """Scalar potential V plus an optional electromagnetic part e*phi."""

    V: Callable
    phi_scalar: Optional[Callable] = None
    charge: float = 0.0
    tag: str = "custom"
    params: dict = field(default_factory=dict)

    def W(self, x):
        x = np.asarray(x, dtype=float)
        total = np.asarray(self.V(x), dtype=float)
        if self.phi_scalar is not None:
            total = total + self.charge * np.asarray(self.phi_scalar(x), dtype=float)
        return total


def harmonic_potential(omega: float = 1.0, center: float = 0.0) -> PotentialSpec:
    return PotentialSpec(
        V=lambda q: omega**2 * (np.asarray(q, float) - center) ** 2,
        tag="harmonic", params={"omega": omega, "center": center},
    )


def box_potential() -> PotentialSpec:
    """Zero potential; the Dirichlet walls provide the confinement."""
    return PotentialSpec(V=lambda q: np.zeros_like(np.asarray(q, float)), tag="box")


def potential_from_tag(tag: str, **params) -> PotentialSpec:
    if tag == "harmonic":
        return harmonic_potential(omega=params.get("omega", 1.0),
                                  center=params.get("center", 0.0))
    if tag in ("box", "none"):
        return box_potential()
    raise ValidationError(f"unknown potential tag {tag!r}; valid: harmonic, box, none")


# ---------------------------------------------------------------------------
# Discretized operators
# ---------------------------------------------------------------------------


def uniform_spacing(grid) -> float:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 5:
        raise DomainError("grid must be a 1D array with >= 5 points")
    d = np.diff(grid)
    h = d[0]
    if h <= 0 or np.any(np.abs(d - h) > 1e-9 * abs(h)):
        raise DomainError("grid must be uniform and ascending")
    return float(h)


@dataclass(frozen=True)
class DiscretizedOperator:
    """Banded matrix acting on the interior nodes of a Dirichlet box."""

    grid: np.ndarray                  # interior nodes
    walls: tuple
    matrix: object                    # scipy sparse matrix
    hermitian_under: str = "none"     # "dx" | "weight" | "none"
    weight: Optional[np.ndarray] = None
    scale: Optional[np.ndarray] = None  # similarity scaling from symmetrize()
    boundary: str = "dirichlet"

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def size(self) -> int:
        return int(self.grid.size)

    @property
    def bandwidth(self) -> int:
        coo = self.matrix.tocoo()
        if coo.nnz == 0:
            return 0
        return int(np.max(np.abs(coo.row - coo.col)))

    def apply(self, vec):
        return self.matrix @ np.asarray(vec)

    def to_dense(self):
        return np.asarray(self.matrix.todense())

    def max_entry(self) -> float:
        data = self.matrix.tocsr().data
        return float(np.max(np.abs(data))) if data.size else 0.0

    def tridiagonal_parts(self):
        """(diagonal, off-diagonal) arrays of a symmetric tridiagonal matrix."""
        if self.bandwidth > 1:
            raise DomainError("operator is not tridiagonal")
        A = self.matrix.tocsr()
        d = np.real(A.diagonal(0))
        e_up = A.diagonal(1)
        e_dn = A.diagonal(-1)
        if np.max(np.abs(e_up - np.conj(e_dn))) > 1e-12 * max(self.max_entry(), 1.0):
            raise DomainError("operator is not Hermitian tridiagonal")
        if np.max(np.abs(np.imag(e_up))) > 0 or np.max(np.abs(np.imag(A.diagonal(0)))) > 0:
            raise DomainError("operator has complex entries; cannot reduce to real tridiagonal")
        return d, np.real(e_up)

    def coo_rows(self):
        """(i, j, re, im) rows for external inspection."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        for k in order:
            v = coo.data[k]
            yield int(coo.row[k]), int(coo.col[k]), float(np.real(v)), float(np.imag(v))


def hermiticity_defect(op: DiscretizedOperator, weight=None) -> float:
    """max-entry of A - A^dagger, optionally after weighting rows by diag(w)."""
    A = op.matrix.tocsr()
    if weight is not None:
        A = (sparse.diags_array(np.asarray(weight, dtype=float)) @ A).tocsr()
    defect = A - A.conjugate().transpose().tocsr()
    data = defect.tocsr().data
    return float(np.max(np.abs(data))) if data.size else 0.0


def _interior(grid):
    grid = np.asarray(grid, dtype=float)
    h = uniform_spacing(grid)
    return grid[1:-1], h, (float(grid[0]), float(grid[-1]))


def central_difference_matrix(n: int, h: float):
    c = 1.0 / (2.0 * h)
    return sparse.diags_array(
        [np.full(n - 1, -c), np.full(n - 1, c)], offsets=[-1, 1], format="csr"
    )


def second_difference_matrix(n: int, h: float):
    c = 1.0 / h**2
    return sparse.diags_array(
        [np.full(n - 1, c), np.full(n, -2.0 * c), np.full(n - 1, c)],
        offsets=[-1, 0, 1], format="csr",
    )


def build_von_roos(mass: MassProfile, potential: PotentialSpec,
                   ordering: OrderingParams, grid) -> DiscretizedOperator:
    """General-ordering kinetic operator plus potential, tridiagonal O(h^2)."""
    xi, h, walls = _interior(grid)
    mv = mass.require_positive(xi)
    dm = np.asarray(mass.dm(xi), dtype=float)
    d2m = np.asarray(mass.d2m(xi), dtype=float)
    c1, c2 = ordering.coefficients()
    b = dm / mv**2
    zero_order = -c1 * dm**2 / mv**3 + c2 * d2m / mv**2 + potential.W(xi)
    inv_mh2 = 1.0 / (mv * h**2)
    main = 2.0 * inv_mh2 + zero_order
    sup = -inv_mh2[:-1] + b[:-1] / (2.0 * h)    # entry (i, i+1), rows 0..n-2
    sub = -inv_mh2[1:] - b[1:] / (2.0 * h)      # entry (i, i-1), rows 1..n-1
    A = sparse.diags_array([sub, main, sup], offsets=[-1, 0, 1], format="csr")
    return DiscretizedOperator(grid=xi, walls=walls, matrix=A, hermitian_under="none")


def build_reduced_pdm(mass: MassProfile, potential: PotentialSpec, grid) -> DiscretizedOperator:
    """The fixed-ordering operator (coefficients 7/16 and 1/4)."""
    return build_von_roos(mass, potential, mm_ordering(), grid)


def symmetrize(op: DiscretizedOperator, mass: MassProfile = None) -> DiscretizedOperator:
    """Diagonal similarity turning the tridiagonal operator symmetric.

    The scaling that does it is the discrete counterpart of conjugating by
    m**(1/4); since the first-derivative coefficient is the same for every
    ordering, one construction serves them all.  Eigenvalues are preserved
    exactly; the scaling vector is recorded so eigenvectors can be mapped
    back to x-space wavefunctions.
    """
    if op.bandwidth > 1:
        raise DomainError("symmetrize expects a tridiagonal operator")
    A = op.matrix.tocsr()
    if np.max(np.abs(np.imag(A.data))) > 0:
        raise DomainError("symmetrize expects a real operator")
    d = np.real(A.diagonal(0)).copy()
    sup = np.real(A.diagonal(1))
    sub = np.real(A.diagonal(-1))
    prod = sup * sub
    if np.any(prod <= 0):
        raise DomainError(
            "off-diagonal product changed sign; grid too coarse for this mass profile"
        )
    # log-cumulative scaling avoids overflow on long grids
    log_ratio = 0.5 * (np.log(np.abs(sup)) - np.log(np.abs(sub)))
    log_scale = np.concatenate(([0.0], np.cumsum(log_ratio)))
    scale = np.exp(log_scale)
    e = np.sign(sup) * np.sqrt(prod)
    K = sparse.diags_array([e, d, e], offsets=[-1, 0, 1], format="csr")
    return DiscretizedOperator(grid=op.grid, walls=op.walls, matrix=K,
                               hermitian_under="dx", scale=scale)


def build_pseudo_momentum(mass: MassProfile, grid) -> DiscretizedOperator:
    """Discrete pseudo-momentum, exactly Hermitian under plain dx.

    Uses the symmetric product -(i/2)[diag(g) D + D diag(g)], g = 1/sqrt(m),
    whose entries (i, i+1) and (i+1, i) are conjugate by construction.  For
    m = 1 it reduces to -i times the central difference.
    """
    xi, h, walls = _interior(grid)
    g = 1.0 / np.sqrt(mass.require_positive(xi))
    c = (g[:-1] + g[1:]) / (4.0 * h)
    A = sparse.diags_array(
        [1j * c, -1j * c], offsets=[-1, 1], format="csr", dtype=complex
    )
    return DiscretizedOperator(grid=xi, walls=walls, matrix=A, hermitian_under="dx")


def build_pdm_momentum(mass: MassProfile, grid) -> DiscretizedOperator:
    """Momentum operator sqrt(m) * pseudo-momentum; Hermitian under m**(-1/2) dx."""
    pseudo = build_pseudo_momentum(mass, grid)
    mv = mass.require_positive(pseudo.grid)
    A = (sparse.diags_array(np.sqrt(mv)) @ pseudo.matrix).tocsr()
    return DiscretizedOperator(grid=pseudo.grid, walls=pseudo.walls, matrix=A,
                               hermitian_under="weight", weight=mv**-0.5)


# ---------------------------------------------------------------------------
# Operator-identity residuals
# ---------------------------------------------------------------------------


def default_probes(x, walls):
    """Smooth O(1) probe functions supported away from the walls."""
    lo, hi = walls
    span = hi - lo
    mid = 0.5 * (lo + hi)
    sig = span / 10.0
    u = (np.asarray(x, float) - mid) / sig
    return [
        np.exp(-(u**2)),
        np.exp(-(u**2)) * np.cos(3.0 * u),
        np.exp(-((u + 0.8) ** 2)) * u,
    ]


def applied_difference(op_a, op_b, probes, margin: int = 4) -> float:
    """max over probes of |(A - B) f| on interior nodes, a few rows off each wall."""
    diff = op_a.matrix - op_b.matrix
    worst = 0.0
    for f in probes:
        r = np.abs(diff @ f)
        core = r[margin:-margin] if margin else r
        worst = max(worst, float(np.max(core)))
    return worst


@dataclass(frozen=True)
class KineticIdentityReport:
    """Residuals of the two kinetic-energy factorizations against the
    fixed-ordering Hamiltonian.

    ``simplistic_residual``: squared pseudo-momentum plus V (discretization-
    limited, O(h^2)).  ``naive_residual``: momentum-squared over m plus V,
    which is *not* the same operator for non-constant mass and stays bounded
    away from zero as the grid refines.
    """

    simplistic_residual: float
    naive_residual: float
    spacing: float


def kinetic_identity_residual(mass: MassProfile, potential: PotentialSpec, grid,
                              probes=None, margin: int = 4) -> KineticIdentityReport:
    h15 = build_reduced_pdm(mass, potential, grid)
    pseudo = build_pseudo_momentum(mass, grid)
    momentum = build_pdm_momentum(mass, grid)
    xi = h15.grid
    mv = mass.require_positive(xi)
    Vd = sparse.diags_array(potential.W(xi))
    A1 = (pseudo.matrix @ pseudo.matrix + Vd).tocsr()
    A2 = (sparse.diags_array(1.0 / mv) @ (momentum.matrix @ momentum.matrix) + Vd).tocsr()
    if probes is None:
        probes = default_probes(xi, h15.walls)
    wrap = lambda M: DiscretizedOperator(grid=xi, walls=h15.walls, matrix=M)
    r1 = applied_difference(wrap(A1), h15, probes, margin=margin)
    r2 = applied_difference(wrap(A2), h15, probes, margin=margin)
    return KineticIdentityReport(simplistic_residual=r1, naive_residual=r2,
                                 spacing=h15.spacing)
