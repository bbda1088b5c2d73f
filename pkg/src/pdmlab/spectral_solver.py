"""Eigensolvers and the isospectrality / ordering-ambiguity experiments.

The reference problem is always the constant-mass solve on a uniform grid in
the transformed coordinate; the position-dependent-mass solve on the x grid
is judged against it.  Both are plain 3-point discretizations, so their
eigenvalues agree to O(h^2) and the agreement order is itself testable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import eig, eigh_tridiagonal

from .errors import ConfinementError, ConvergenceError, DomainError, ValidationError
from .mass_models import MassProfile, constant_mass
from .operators import (
    DiscretizedOperator,
    OrderingParams,
    PotentialSpec,
    build_von_roos,
    mm_ordering,
    symmetrize,
)
from .point_transform import GriddedWavefunction, build_map

RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class SpectrumResult:
    """Ascending eigenvalues with residual metadata and optional eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: Optional[list]
    residuals: np.ndarray
    grid_meta: dict

    def __iter__(self):
        return iter(self.eigenvalues)


def solve_symmetric(op: DiscretizedOperator, k: int, compute_vectors: bool = True,
                    measure: str = "dx", residual_tol: float = RESIDUAL_TOL) -> SpectrumResult:
    """k lowest eigenpairs of a symmetric tridiagonal operator.

    Eigenvalues come from Sturm-sequence bisection (LAPACK stebz) and
    eigenvectors from inverse iteration (stein).  When the operator carries a
    similarity scaling from `symmetrize`, eigenvectors are mapped back and
    re-normalized under the stated measure on the full grid (walls included
    as zeros).
    """
    if op.hermitian_under != "dx":
        raise DomainError("solve_symmetric expects an operator Hermitian under dx")
    n = op.size
    if k < 0 or int(k) != k:
        raise ValidationError(f"k must be a non-negative integer, got {k}")
    k = int(k)
    if k > n:
        raise ValidationError(f"requested k={k} eigenvalues but the matrix has size {n}")
    meta = {
        "n_points": n + 2,
        "spacing": op.spacing,
        "domain": [float(op.walls[0]), float(op.walls[1])],
    }
    if k == 0:
        return SpectrumResult(np.empty(0), [] if compute_vectors else None,
                              np.empty(0), meta)
    d, e = op.tridiagonal_parts()
    try:
        w, v = eigh_tridiagonal(d, e, select="i", select_range=(0, k - 1),
                                lapack_driver="stebz")
    except Exception as exc:  # pragma: no cover - LAPACK failure path
        raise ConvergenceError(f"tridiagonal eigensolver failed: {exc}") from exc
    order = np.argsort(w)
    w = w[order]
    v = v[:, order]
    norm = op.max_entry()
    residuals = np.empty(k)
    for i in range(k):
        residuals[i] = float(np.max(np.abs(op.apply(v[:, i]) - w[i] * v[:, i])))
        if residuals[i] > residual_tol * max(norm, 1.0):
            raise ConvergenceError(
                f"eigenpair {i} residual {residuals[i]:.3e} exceeds "
                f"{residual_tol:.1e} * |H|"
            )
    vectors = None
    if compute_vectors:
        full_grid = np.concatenate(([op.walls[0]], op.grid, [op.walls[1]]))
        vectors = []
        for i in range(k):
            interior = v[:, i]
            if op.scale is not None:
                interior = interior / op.scale
            padded = np.concatenate(([0.0], interior, [0.0]))
            wf = GriddedWavefunction(full_grid, padded.astype(complex), measure).normalized()
            peak = np.argmax(np.abs(wf.values))
            if wf.values[peak].real < 0:
                wf = GriddedWavefunction(wf.grid, -wf.values, measure)
            vectors.append(wf)
    return SpectrumResult(w, vectors, residuals, meta)


def solve_general(op: DiscretizedOperator, k: int, max_size: int = 1201) -> np.ndarray:
    """k lowest eigenvalues via a dense general solver (cross-check tool).

    Dense eig is O(n^3); this is deliberately capped and exists to validate
    the symmetrized path against an independent route at desk scale.
    """
    if op.size > max_size:
        raise ValidationError(
            f"dense cross-check limited to {max_size} interior nodes, got {op.size}"
        )
    w = eig(op.to_dense(), right=False)
    w = w[np.abs(w.imag) <= 1e-8 * np.maximum(np.abs(w.real), 1.0)].real
    w.sort()
    if w.size < k:
        raise ConvergenceError("general solver returned fewer real eigenvalues than requested")
    return w[:k]


def reference_q_operator(potential_q: PotentialSpec, q_grid) -> DiscretizedOperator:
    """Textbook constant-mass operator on a uniform grid in the transformed coordinate."""
    return symmetrize(build_von_roos(constant_mass(), potential_q, mm_ordering(), q_grid))


def _richardson(fine: np.ndarray, coarse: np.ndarray) -> np.ndarray:
    return (4.0 * fine - coarse) / 3.0


def _coarse_count(n_points: int) -> int:
    if (n_points - 1) % 2:
        raise ValidationError("Richardson extrapolation needs an even interval count")
    return (n_points - 1) // 2 + 1


@dataclass(frozen=True)
class IsospectralityReport:
    eigenvalues_q: np.ndarray
    eigenvalues_x: np.ndarray
    max_rel_diff: float
    tolerance: float
    grid_meta: dict

    @property
    def passed(self) -> bool:
        return self.max_rel_diff <= self.tolerance


def _check_confinement(potential_q: PotentialSpec, q_lo, q_hi, top_energy):
    if potential_q.tag != "harmonic":
        return  # box-like potentials confine through the Dirichlet walls
    wall_height = min(float(potential_q.W(q_lo)), float(potential_q.W(q_hi)))
    if top_energy >= 0.8 * wall_height:
        raise ConfinementError(
            f"highest requested level E={top_energy:.6g} is not confined by the "
            f"potential wall {wall_height:.6g} on the transformed image "
            f"[{q_lo:.6g}, {q_hi:.6g}]; enlarge the x domain"
        )


def _solve_pair(mass: MassProfile, potential_q: PotentialSpec, x_domain,
                n_points: int, k: int, ordering: OrderingParams):
    """One (q-reference, x-space) eigenvalue pair on matched Dirichlet boxes."""
    x = np.linspace(x_domain[0], x_domain[1], n_points)
    tmap = build_map(mass, x)
    q_lo, q_hi = tmap.q_range
    q_grid = np.linspace(q_lo, q_hi, n_points)
    ref = solve_symmetric(reference_q_operator(potential_q, q_grid), k,
                          compute_vectors=False)
    if k:
        _check_confinement(potential_q, q_lo, q_hi, float(ref.eigenvalues[-1]))
    potential_x = PotentialSpec(V=lambda xs: potential_q.W(tmap.q(xs)), tag=potential_q.tag)
    op_x = symmetrize(build_von_roos(mass, potential_x, ordering, x))
    sol_x = solve_symmetric(op_x, k, compute_vectors=False)
    return ref.eigenvalues, sol_x.eigenvalues


def isospectrality_check(mass: MassProfile, potential_q: PotentialSpec, x_domain,
                         n_points: int, k: int, tol: float = 1e-3,
                         richardson: bool = False) -> IsospectralityReport:
    """Compare the transformed-coordinate and x-space spectra level by level."""
    if n_points < 16:
        raise ValidationError("n_points must be >= 16")
    e_q, e_x = _solve_pair(mass, potential_q, x_domain, n_points, k, mm_ordering())
    if richardson:
        nc = _coarse_count(n_points)
        e_qc, e_xc = _solve_pair(mass, potential_q, x_domain, nc, k, mm_ordering())
        e_q, e_x = _richardson(e_q, e_qc), _richardson(e_x, e_xc)
    denom = np.maximum(np.abs(e_q), 1e-300)
    max_rel = float(np.max(np.abs(e_x - e_q) / denom)) if k else 0.0
    meta = {"n_points": n_points, "domain": list(map(float, x_domain)), "k": k,
            "richardson": bool(richardson)}
    return IsospectralityReport(e_q, e_x, max_rel, float(tol), meta)


@dataclass(frozen=True)
class OrderingSweepReport:
    """Spectra of several orderings against the transformed-coordinate reference."""

    reference: np.ndarray
    orderings: list          # (name, OrderingParams) pairs as given
    spectra: list            # eigenvalue arrays, one per ordering
    deviations: list         # per-ordering, per-level |E - E_ref|/|E_ref|
    residuals: list          # per-ordering solver residuals
    grid_meta: dict

    def max_deviation(self, index: int) -> float:
        return float(np.max(self.deviations[index]))


def ordering_sweep(mass: MassProfile, potential_q: PotentialSpec, x_domain,
                   n_points: int, k: int,
                   orderings: Sequence) -> OrderingSweepReport:
    """Solve the x-space problem for each ordering and tabulate deviations."""
    x = np.linspace(x_domain[0], x_domain[1], n_points)
    tmap = build_map(mass, x)
    q_lo, q_hi = tmap.q_range
    q_grid = np.linspace(q_lo, q_hi, n_points)
    ref = solve_symmetric(reference_q_operator(potential_q, q_grid), k,
                          compute_vectors=False)
    potential_x = PotentialSpec(V=lambda xs: potential_q.W(tmap.q(xs)), tag=potential_q.tag)
    spectra = []
    deviations = []
    residuals = []
    named = []
    for item in orderings:
        name, ordering = item if isinstance(item, tuple) else (repr(item), item)
        op_x = symmetrize(build_von_roos(mass, potential_x, ordering, x))
        sol = solve_symmetric(op_x, k, compute_vectors=False)
        spectra.append(sol.eigenvalues)
        denom = np.maximum(np.abs(ref.eigenvalues), 1e-300)
        deviations.append(np.abs(sol.eigenvalues - ref.eigenvalues) / denom)
        residuals.append(sol.residuals)
        named.append((name, ordering))
    meta = {"n_points": n_points, "domain": list(map(float, x_domain)), "k": k}
    return OrderingSweepReport(ref.eigenvalues, named, spectra, deviations, residuals, meta)
