"""Exterior-value problem and the measurement map.

Galerkin formulation with hat elements on the active node set: with the
dense stiffness A and lumped potential term h q, the interior values solve

    (A_OO + h diag(q)) u_O = -A_OW f,

the full solution is f on the window, u_O on the domain and zero
elsewhere, and the measurement is the nodal fractional Laplacian on the
window,

    Lambda f = (A_WO u_O + A_WW f) / h.

The Schur-complement structure makes the measurement map self-adjoint on
L2(w) for real potentials, which the tests exercise as reciprocity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EigenvalueError, SingularSolveError, SupportError
from .fracop import FracLapDense
from .geometry import (Geometry, GridFunction, GridSpec, Potential,
                       interval_mask, make_grid_function, support_mask)
from .spaces import dual_norm_on_window, sobolev_norm

#: relative spectral gap below which the restricted operator is rejected
GAP_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class ForwardSolution:
    """Solution of the exterior-value problem with its diagnostics."""

    u: GridFunction             # support omega_w: u_O on omega, f on w
    q: Potential
    f: GridFunction
    residual: float             # |A u + h q u|_2(omega) / |A_OW f|_2
    eigen_gap: float
    apriori_ratio: float        # |u|_{H^s} / |f|_{H^s-surrogate on w}


@dataclass(frozen=True, eq=False)
class Measurement:
    """Nodal measurement on the window plus its noise bookkeeping."""

    lambda_f: GridFunction
    noise_level: float
    seed: int | None


def _partition(geom: Geometry, spec: GridSpec, op: FracLapDense):
    """Positions of the omega and w nodes inside the active set."""
    omega_idx = np.nonzero(interval_mask(spec, geom.omega))[0]
    w_idx = np.nonzero(interval_mask(spec, geom.w))[0]
    pos = {g: i for i, g in enumerate(op.active)}
    io = np.array([pos[g] for g in omega_idx])
    iw = np.array([pos[g] for g in w_idx])
    return omega_idx, w_idx, io, iw


def _q_values(q) -> np.ndarray:
    """Nodal values of a potential given as Potential or GridFunction."""
    return q.values.values if isinstance(q, Potential) else q.values


def system_matrix(geom: Geometry, spec: GridSpec, op: FracLapDense,
                  q) -> np.ndarray:
    """A_OO + h diag(q) over the omega nodes."""
    omega_idx, _, io, _ = _partition(geom, spec, op)
    A = op.matrix[np.ix_(io, io)]
    return A + spec.h * np.diag(_q_values(q)[omega_idx])


def eigen_gap(geom: Geometry, spec: GridSpec, op: FracLapDense, q) -> float:
    """Smallest singular value of the restricted system over its largest.

    Accepts a Potential or any GridFunction of nodal values (the latter
    allows probing resonant shifts that are not admissible potentials).
    """
    M = system_matrix(geom, spec, op, q)
    sv = np.linalg.svd(M, compute_uv=False)
    return float(sv[-1] / sv[0])


def solve_forward(geom: Geometry, spec: GridSpec, op: FracLapDense,
                  q: Potential, f: GridFunction,
                  gap_tol: float = GAP_TOL) -> ForwardSolution:
    """Solve the exterior-value problem for data f on the window.

    Raises EigenvalueError when the relative spectral gap of the
    restricted operator falls below gap_tol (zero too close to an
    eigenvalue), and SingularSolveError on factorization failure.
    """
    if np.any(f.values[~support_mask(geom, spec, "w")] != 0.0):
        raise SupportError("exterior data must be supported in w")
    gap = eigen_gap(geom, spec, op, q)
    if gap < gap_tol:
        raise EigenvalueError(
            f"relative spectral gap {gap:.3e} below tolerance {gap_tol:.0e}")
    omega_idx, w_idx, io, iw = _partition(geom, spec, op)
    M = system_matrix(geom, spec, op, q)
    rhs = -op.matrix[np.ix_(io, iw)] @ f.values[w_idx]
    try:
        u_omega = np.linalg.solve(M, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSolveError(f"dense solve failed: {exc}") from exc
    vals = np.zeros(spec.n_super)
    vals[omega_idx] = u_omega
    vals[w_idx] = f.values[w_idx]
    u = make_grid_function(geom, spec, vals, "omega_w")
    rhs_norm = float(np.linalg.norm(rhs))
    res = float(np.linalg.norm(M @ u_omega - rhs))
    residual = res / rhs_norm if rhs_norm > 0 else res
    f_norm = sobolev_norm(f, geom.s)
    ratio = sobolev_norm(u, geom.s) / f_norm if f_norm > 0 else 0.0
    return ForwardSolution(u=u, q=q, f=f, residual=residual, eigen_gap=gap,
                           apriori_ratio=ratio)


def dtn_map(geom: Geometry, spec: GridSpec, op: FracLapDense,
            sol: ForwardSolution) -> Measurement:
    """Measurement on the window: nodal fractional Laplacian of u."""
    omega_idx, w_idx, io, iw = _partition(geom, spec, op)
    lam_w = (op.matrix[np.ix_(iw, io)] @ sol.u.values[omega_idx]
             + op.matrix[np.ix_(iw, iw)] @ sol.f.values[w_idx]) / spec.h
    vals = np.zeros(spec.n_super)
    vals[w_idx] = lam_w
    lam = make_grid_function(geom, spec, vals, "w")
    return Measurement(lambda_f=lam, noise_level=0.0, seed=None)


#: number of window modes carrying the noise draw
NOISE_MODES = 8


def add_noise(geom: Geometry, m: Measurement, eps: float, seed: int) -> Measurement:
    """Perturb a measurement to a relative dual-norm noise level eps.

    The perturbation is a Gaussian draw over the first NOISE_MODES sine
    modes of the window, rescaled so that its dual norm equals eps times
    the dual norm of the clean measurement; deterministic given the seed.
    A band-limited draw keeps the discrepancy principle operative: fully
    rough node noise is mostly orthogonal to the range of the smoothing
    continuation operator, which flattens the residual as a function of
    the regularization parameter and makes the bracket unattainable.
    """
    if eps < 0:
        raise ValueError("noise level must be nonnegative")
    if eps == 0:
        return Measurement(lambda_f=m.lambda_f, noise_level=0.0, seed=seed)
    spec = m.lambda_f.spec
    wmask = support_mask(geom, spec, "w")
    xw = spec.nodes()[wmask]
    lo, hi = xw[0], xw[-1]
    rng = np.random.default_rng(seed)
    coeff = rng.standard_normal(NOISE_MODES)
    z = (xw - lo) / (hi - lo)
    pert = np.zeros(spec.n_super)
    pert[wmask] = sum(c * np.sin((k + 1) * np.pi * z)
                      for k, c in enumerate(coeff))
    pert_gf = GridFunction(spec=spec, values=pert, support="w")
    s = geom.s
    scale = (eps * dual_norm_on_window(geom, m.lambda_f, s)
             / dual_norm_on_window(geom, pert_gf, s))
    vals = m.lambda_f.values + scale * pert
    noisy = make_grid_function(geom, spec, vals, "w")
    return Measurement(lambda_f=noisy, noise_level=float(eps), seed=seed)


def export_measurement_csv(geom: Geometry, m: Measurement, path,
                           header_comment: str = "") -> None:
    """CSV with one row per window node: node_x, lambda_value."""
    spec = m.lambda_f.spec
    wmask = support_mask(geom, spec, "w")
    x = spec.nodes()[wmask]
    vals = m.lambda_f.values[wmask]
    seed = "" if m.seed is None else str(m.seed)
    with open(path, "w", encoding="utf-8") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write(f"# s={geom.s:.17g} epsilon={m.noise_level:.17g} seed={seed}\n")
        fh.write("node_x,lambda_value\n")
        for xx, vv in zip(x, vals):
            fh.write(f"{xx:.17g},{vv:.17g}\n")
