"""Quantitative unique-continuation diagnostics on extension fields.

Each routine evaluates both sides of one a priori inequality on a concrete
solution and reports the implied constant; nothing here asserts the
inequality, since the analytic constants are not numeric.  Fitted
quantities (vanishing order, three-ball exponents, annulus exponents) are
descriptive least-squares measurements that downstream regression tests
lock against golden envelopes.

The radial weight used in the doubling machinery is

    psi(r) = -ln r + (1/10) (ln r * arctan(ln r) - (1/2) ln(1 + ln^2 r)),

whose increment |psi(r) - psi(4r)| stays inside a fixed positive band on
(0, 1]; the band endpoints are scanned, not asserted from theory.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .errors import (DegenerateError, DomainError, GeometryError,
                     ZeroDataError, ZeroMassError)
from .extension import (ExtensionField, Region, trace_mass_sq,
                        weighted_gradient_norm, weighted_norm)
from .geometry import Geometry, GridFunction, interval_mask
from .spaces import oscillation_ratio, sobolev_norm


@dataclass(frozen=True)
class LemmaCheck:
    """Both sides of one inequality plus the implied constant."""

    name: str
    lhs: float
    rhs_core: float
    implied_constant: float
    params: dict = dataclass_field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class DoublingReport:
    """Mass-vs-radius scan with doubling ratios and a power-law fit."""

    center: float
    radii: np.ndarray
    masses: np.ndarray
    ratios: np.ndarray          # N(2r) / N(r), one per radius
    beta_hat: float | None
    c_hat: float | None
    fit_residual: float | None  # sup |log N - fit| over the scan
    r0: float
    mode: str                   # "bulk" or "boundary"
    zero_mass: bool


def carleman_weight(r: float) -> float:
    """Radial weight psi(r); psi(1) = 0 and psi is slightly convexified."""
    if r <= 0:
        raise DomainError(f"carleman weight needs r > 0, got {r}")
    lr = np.log(r)
    return float(-lr + 0.1 * (lr * np.arctan(lr) - 0.5 * np.log1p(lr * lr)))


def carleman_gap_check(r_min: float, r_max: float,
                       n_points: int = 256) -> tuple[float, float]:
    """(min, max) of |psi(r) - psi(4r)| over a logarithmic scan."""
    if not 0 < r_min <= r_max:
        raise DomainError("need 0 < r_min <= r_max")
    if r_min == r_max:
        g = abs(carleman_weight(r_min) - carleman_weight(4 * r_min))
        return g, g
    rs = np.geomspace(r_min, r_max, max(n_points, 200))
    gaps = np.array([abs(carleman_weight(r) - carleman_weight(4 * r))
                     for r in rs])
    return float(np.min(gaps)), float(np.max(gaps))


def caccioppoli_check(geom: Geometry, field: ExtensionField, q_sup: float,
                      x0: float, r: float) -> LemmaCheck:
    """Weighted gradient over B_r^+ against weighted mass over B_2r^+.

    rhs core is (1 + |q|_inf^(1/2s)) r^-1 N(2r); the hypothesis needs
    4r within the distance from x0 to the domain boundary.
    """
    dist = min(x0 - geom.omega[0], geom.omega[1] - x0)
    if 4 * r > dist:
        raise GeometryError(
            f"GeometryError: 4r = {4*r} exceeds dist(x0, boundary) = {dist}")
    s = field.s
    lhs = weighted_gradient_norm(field, Region("half_ball", (x0, 0.0), r))
    n2r = weighted_norm(field, Region("half_ball", (x0, 0.0), 2 * r))
    rhs_core = (1.0 + q_sup ** (1.0 / (2 * s))) / r * n2r
    implied = lhs / rhs_core if rhs_core > 0 else 0.0
    return LemmaCheck("caccioppoli", lhs, rhs_core, implied,
                      {"x0": x0, "r": r, "q_sup": q_sup})


#: proof-side constant of the flat-slab lower bound; recorded, not asserted
PERSISTENCE_CALIBRATION = 1.0


def persistence_check(geom: Geometry, field: ExtensionField, f: GridFunction,
                      h: float, calibration: float = PERSISTENCE_CALIBRATION
                      ) -> LemmaCheck:
    """Mass of the extension on the slab w x [h, 1] against the data norms.

    rhs = (F^(-1/s)/C - h) |f|_{H^s} - h^(1-s)/sqrt(2s) |f|_{L2} with the
    calibration C recorded in the params; the crossover h0 is the largest
    slab height keeping the mass above half of F^(-1/s)/(2C) |f|_{H^s}.
    """
    if not 0 < h < 1:
        raise DomainError(f"slab height must lie in (0,1), got {h}")
    if not np.any(f.values):
        raise ZeroDataError("persistence bound needs f != 0")
    s = field.s
    F = oscillation_ratio(geom, f, s)
    fhs = sobolev_norm(f, s)
    fl2 = sobolev_norm(f, 0.0)
    c_s = 1.0 / np.sqrt(2 * s)
    lhs = weighted_norm(field, Region("slab", x_interval=geom.w,
                                      y_interval=(h, 1.0)))
    rhs = (F ** (-1.0 / s) / calibration - h) * fhs - c_s * h ** (1 - s) * fl2
    # crossover height: threshold from the proof's choice 2 C0 = F^(-1/s)/C
    threshold = 0.25 * F ** (-1.0 / s) / calibration * fhs
    h0 = None
    for hh in np.geomspace(0.999, 1e-3, 60):
        mass = weighted_norm(field, Region("slab", x_interval=geom.w,
                                           y_interval=(hh, 1.0)))
        if mass >= threshold:
            h0 = float(hh)
            break
    implied = lhs / rhs if rhs > 0 else float("inf")
    return LemmaCheck("persistence", lhs, rhs, implied,
                      {"h": h, "F": F, "calibration": calibration, "h0": h0})


def annulus_ratio(geom: Geometry, field: ExtensionField, f: GridFunction,
                  R: float, center: float = 0.0) -> LemmaCheck:
    """Mass of B_2R^+ over the annulus B_R^+ minus B_{R/2}^+.

    The implied exponent log(ratio)/log(F) is descriptive only.
    """
    ball = weighted_norm(field, Region("half_ball", (center, 0.0), 2 * R))
    ann = weighted_norm(field, Region("annulus", (center, 0.0), R))
    if ball == 0.0 or ann < 1e-14 * ball:
        raise ZeroMassError("annulus mass is numerically zero")
    lhs = ball / ann
    F = oscillation_ratio(geom, f, field.s)
    gamma_hat = float(np.log(lhs) / np.log(F)) if F > 1 else float("nan")
    return LemmaCheck("annulus", lhs, F, gamma_hat,
                      {"R": R, "center": center, "gamma_hat": gamma_hat})


def three_balls_exponent(field: ExtensionField, center: tuple[float, float],
                         r: float) -> LemmaCheck:
    """Largest alpha with N(r) <= N(r/2)^alpha N(2r)^(1-alpha) at C = 1.

    Requires interior balls: the outer ball B_2r around the center must
    stay inside the open upper half plane.
    """
    x0, y0 = center
    if y0 - 2 * r <= 0:
        raise GeometryError(
            f"GeometryError: B_2r at height {y0} touches the trace line")
    n_half = weighted_norm(field, Region("half_ball", center, r / 2))
    n_mid = weighted_norm(field, Region("half_ball", center, r))
    n_two = weighted_norm(field, Region("half_ball", center, 2 * r))
    if n_half <= 0 or n_two <= 0:
        raise ZeroMassError("three-ball masses must be positive")
    if n_half == n_two:
        raise DegenerateError("equal inner and outer masses")
    alpha = float(np.log(n_mid / n_two) / np.log(n_half / n_two))
    return LemmaCheck("three_balls", n_mid, n_half ** alpha * n_two ** (1 - alpha),
                      alpha, {"center": center, "r": r, "alpha": alpha,
                              "masses": (n_half, n_mid, n_two)})


def _fit_power_law(radii: np.ndarray, masses: np.ndarray):
    """Least squares log N = beta log r + log C; sup-norm residual."""
    lr = np.log(radii)
    lm = np.log(masses)
    A = np.vstack([lr, np.ones_like(lr)]).T
    coef, *_ = np.linalg.lstsq(A, lm, rcond=None)
    beta, logc = float(coef[0]), float(coef[1])
    resid = float(np.max(np.abs(lm - (beta * lr + logc))))
    return beta, float(np.exp(logc)), resid


def doubling_scan_bulk(geom: Geometry, field: ExtensionField, x0: float,
                       radii) -> DoublingReport:
    """Doubling ratios of weighted half-ball masses centered at (x0, 0).

    All radii must stay below r0 = dist(x0, boundary)/10.
    """
    if not (geom.omega[0] < x0 < geom.omega[1]):
        raise GeometryError(f"GeometryError: center {x0} outside omega")
    dist = min(x0 - geom.omega[0], geom.omega[1] - x0)
    r0 = dist / 10.0
    radii = np.asarray(sorted(radii), dtype=float)
    if np.any(radii > r0 * (1 + 1e-12)):
        raise GeometryError(
            f"GeometryError: radius {radii.max()} exceeds r0 = {r0}")
    masses = np.array([weighted_norm(field, Region("half_ball", (x0, 0.0), r))
                       for r in radii])
    doubled = np.array([weighted_norm(field, Region("half_ball", (x0, 0.0), 2 * r))
                        for r in radii])
    zero_mass = bool(np.any(masses <= 0))
    ratios = np.where(masses > 0, doubled / np.where(masses > 0, masses, 1.0),
                      np.inf)
    if zero_mass:
        beta = c = resid = None
    else:
        beta, c, resid = _fit_power_law(radii, masses)
    return DoublingReport(center=x0, radii=radii, masses=masses, ratios=ratios,
                          beta_hat=beta, c_hat=c, fit_residual=resid,
                          r0=r0, mode="bulk", zero_mass=zero_mass)


def doubling_scan_boundary(geom: Geometry, u: GridFunction, x0: float,
                           radii) -> DoublingReport:
    """Doubling ratios of trace masses on intervals around x0.

    Radii must stay below dist(x0, boundary)/4; the fitted power law
    gives the empirical vanishing order of u at x0.
    """
    if not (geom.omega[0] < x0 < geom.omega[1]):
        raise GeometryError(f"GeometryError: center {x0} outside omega")
    dist = min(x0 - geom.omega[0], geom.omega[1] - x0)
    r0 = dist / 4.0
    radii = np.asarray(sorted(radii), dtype=float)
    if np.any(radii > r0 * (1 + 1e-12)):
        raise GeometryError(
            f"GeometryError: radius {radii.max()} exceeds r0 = {r0}")

    def mass(r):
        return float(np.sqrt(trace_mass_sq(u.spec, u.values, x0, r)))

    masses = np.array([mass(r) for r in radii])
    omega_mask = interval_mask(u.spec, geom.omega)
    total = float(np.sqrt(u.spec.h * np.sum(u.values[omega_mask] ** 2)))
    if total == 0.0 or masses[0] < 1e-14 * total:
        raise ZeroMassError("smallest-radius trace mass is numerically zero")
    doubled = np.array([mass(2 * r) for r in radii])
    ratios = doubled / masses
    beta, c, resid = _fit_power_law(radii, masses)
    return DoublingReport(center=x0, radii=radii, masses=masses, ratios=ratios,
                          beta_hat=beta, c_hat=c, fit_residual=resid,
                          r0=r0, mode="boundary", zero_mass=False)


def boundary_bulk_check(geom: Geometry, field: ExtensionField,
                        u: GridFunction, x0: float, r: float,
                        c0: float = 0.25) -> LemmaCheck:
    """Interpolation of a small half-ball mass by bulk and trace masses.

    lhs = N(c0 r); rhs core = (N(2r) + b)^alpha b^(1-alpha) with b the
    trace mass on B'_{3r/2} and alpha from the three-ball exponent at the
    matching center (x0, r) with radius r/5.
    """
    if not 0 < c0 < 0.5:
        raise DomainError(f"c0 must lie in (0, 1/2), got {c0}")
    if not (geom.omega[0] < x0 - 2 * r and x0 + 2 * r < geom.omega[1]):
        raise GeometryError("GeometryError: B_2r' leaves omega")
    tb = three_balls_exponent(field, (x0, r), r / 5.0)
    alpha = tb.implied_constant
    lhs = weighted_norm(field, Region("half_ball", (x0, 0.0), c0 * r))
    n2r = weighted_norm(field, Region("half_ball", (x0, 0.0), 2 * r))
    b = float(np.sqrt(trace_mass_sq(u.spec, u.values, x0, 1.5 * r)))
    rhs_core = (n2r + b) ** alpha * b ** (1 - alpha)
    implied = lhs / rhs_core if rhs_core > 0 else 0.0
    return LemmaCheck("boundary_bulk", lhs, rhs_core, implied,
                      {"x0": x0, "r": r, "c0": c0, "alpha": alpha})
