"""Closed-form steady-state occupations of the target atom under
asymmetric driving.

When the second atom is driven far more weakly than the first, its
motion can be traced out and the stationary conditions of the effective
two-level model close on a small set of density-matrix elements of the
reduced space (atom-1 level, atom-1 phonon in {0, 1}, atom-2 level).
This module assembles and solves that linear system, evaluates the
printed closed form it eliminates to, and provides the single-atom and
vanishing-recoil limits.

Element labels: ``p0d_d0p`` is <+,0;d| rho |d,0;+> etc., with ``d`` and
``p`` the dark and upper dressed level of each atom, the digit the
phonon number of atom 1, and everything quoted relative to the
reference population rho_{d0d,d0d} = 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .darkstate import EffectiveParams

ASYMMETRY_WARN_RATIO = 0.2
RATE_HIERARCHY_WARN = 3.0
PHASE_TOL = 1e-9


class SingularReducedSystemError(ValueError):
    """The reduced steady-state system lost rank."""

    def __init__(self, denominator: str):
        self.denominator = denominator
        super().__init__(f"vanishing denominator: {denominator}")


@dataclass(frozen=True)
class ReducedSolution:
    """Steady elements of the traced two-atom model, relative to the
    ground reference population."""

    p0d_p0d: float
    d0p_d0p: float
    d1d_d1d: float
    p0d_d0p: complex
    d1d_p0d: complex
    d1d_d0p: complex
    p1d_p1d: float
    d1p_d0d: complex
    p1d_d0d: complex
    n1: float

    def conjugate_pairs(self) -> dict[str, tuple[complex, complex]]:
        return {
            "p0d_d0p": (self.p0d_d0p, np.conj(self.p0d_d0p)),
            "d1d_p0d": (self.d1d_p0d, np.conj(self.d1d_p0d)),
            "d1d_d0p": (self.d1d_d0p, np.conj(self.d1d_d0p)),
        }


def _pair_rates(eff: EffectiveParams) -> tuple[float, float, float, float, float, float]:
    if eff.n_atoms != 2:
        raise ValueError("the reduced model describes exactly two atoms")
    g1, g2 = eff.gamma_eff
    gl = eff.gamma_eff_left[0][1]
    gr = eff.gamma_eff_right[0][1]
    u = eff.sideband_coupling(1)
    return g1, g2, gl, gr, u, eff.nu


def _check_regime(eff: EffectiveParams, *, need_phase: bool) -> None:
    if need_phase:
        residue = math.remainder(eff.xi, 2 * math.pi)
        if abs(residue) > PHASE_TOL:
            raise ValueError(
                f"reduced model requires xi = 0 mod 2*pi, got xi={eff.xi!r}")
    om1, om2 = eff.omega_eff[0], eff.omega_eff[1]
    if om1 > 0 and abs(om2 / om1) > ASYMMETRY_WARN_RATIO:
        warnings.warn(
            f"drive asymmetry omega_eff2/omega_eff1 = {om2 / om1:.3g} above "
            f"{ASYMMETRY_WARN_RATIO}; the traced model assumes a weakly "
            "driven second atom", stacklevel=3)


def _warn_rate_hierarchy(eff: EffectiveParams) -> None:
    g1, g2, gl, gr, _, nu = _pair_rates(eff)
    worst = max(g1, g2, abs(gl), abs(gr))
    if worst > 0 and nu / worst < RATE_HIERARCHY_WARN:
        warnings.warn(
            f"nu/max(effective rates) = {nu / worst:.3g} below "
            f"{RATE_HIERARCHY_WARN}; the closed form is leading order in "
            "rates over nu", stacklevel=3)


def reduced_linear_system(eff: EffectiveParams) -> ReducedSolution:
    """Assemble and solve the stationary equations of the traced model.

    The six coupled conditions plus the three directly-determined
    elements fix every retained matrix element relative to the ground
    population; the target occupation is the sum of the two phonon-one
    populations.
    """
    g1, g2, gl, gr, u, nu = _pair_rates(eff)
    _check_regime(eff, need_phase=True)
    if g2 <= 0:
        raise SingularReducedSystemError("gamma_eff(2)")

    # Real unknowns: [A, B, C, ReX, ImX, ReY, ImY, ReZ, ImZ] with
    # A = rho_p0d,p0d, B = rho_d0p,d0p, C = rho_d1d,d1d,
    # X = rho_p0d,d0p, Y = rho_d1d,p0d, Z = rho_d1d,d0p.
    def lin(*pairs, const=0.0):
        row = np.zeros(10, dtype=complex)
        for coeff, idx in pairs:
            row[idx] += coeff
        row[9] = const
        return row

    A = lin((1, 0))
    B = lin((1, 1))
    C = lin((1, 2))
    X = lin((1, 3), (1j, 4))
    Xc = lin((1, 3), (-1j, 4))
    Y = lin((1, 5), (1j, 6))
    Yc = lin((1, 5), (-1j, 6))
    Z = lin((1, 7), (1j, 8))
    Zc = lin((1, 7), (-1j, 8))
    source = 1j * g1 * u**2 / (8 * nu**2)

    equations = [
        u * (Yc - Y) + 2j * g1 * A + 2j * gl * (Xc + X),
        -u * Zc - 2j * gl * B - 2j * gr * A - 1j * (g1 + g2) * Xc,
        u * (A - C) - 2j * gl * Z - 1j * g1 * Y,
        -2j * gr * (X + Xc) - 2j * g2 * B,
        u * X - 2j * gr * Y - 1j * g2 * Z,
        u * (Yc - Y) + lin(const=source),
    ]
    rows, rhs = [], []
    for eq in equations:
        for part in (eq.real, eq.imag):
            if np.any(np.abs(part[:9]) > 0) or part[9] != 0:
                rows.append(part[:9])
                rhs.append(-part[9])
    matrix = np.array(rows)
    rhs = np.array(rhs)
    if matrix.shape[0] != 9:
        raise SingularReducedSystemError("stationary system lost equations")
    try:
        sol = np.linalg.solve(matrix, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularReducedSystemError(str(exc)) from exc
    defect = np.linalg.norm(matrix @ sol - rhs)
    if defect > 1e-10 * (np.linalg.norm(matrix) * np.linalg.norm(sol) + 1.0):
        raise SingularReducedSystemError("ill-conditioned stationary system")

    a, b, c, rx, ix, ry, iy, rz, iz = sol
    p1d_p1d = u**2 / (16 * nu**2)
    return ReducedSolution(
        p0d_p0d=a, d0p_d0p=b, d1d_d1d=c,
        p0d_d0p=complex(rx, ix), d1d_p0d=complex(ry, iy),
        d1d_d0p=complex(rz, iz),
        p1d_p1d=p1d_p1d,
        d1p_d0d=-1j * gr * u / (8 * nu**2),
        p1d_d0d=-(4 * nu - 1j * g2) * u / (16 * nu**2),
        n1=p1d_p1d + c)


def single_atom_occupation(gamma_eff: float, eta_eff: float,
                           omega_eff: float, nu: float) -> float:
    """Steady phonon occupation of standalone dark-state sideband
    cooling: linewidth broadening plus off-resonant sideband drive."""
    if nu <= 0:
        raise ValueError("nu must be > 0")
    return (gamma_eff**2 / (16 * nu**2)
            + (eta_eff * omega_eff)**2 / (8 * nu**2))


def closed_form_n1(eff: EffectiveParams) -> float:
    """Target-atom steady occupation in closed form.

    The first two terms are the single-atom result; the remaining two
    are the directional-coupling corrections.  Exactly reproduces
    :func:`reduced_linear_system` and collapses to the single-atom
    expression when either cross rate vanishes.
    """
    g1, g2, gl, gr, u, nu = _pair_rates(eff)
    _check_regime(eff, need_phase=False)
    _warn_rate_hierarchy(eff)
    if g2 <= 0:
        raise SingularReducedSystemError("gamma_eff(2)")
    base = single_atom_occupation(g1, eff.eta_eff, eff.omega_eff[0], nu)
    exchange = -(g1 / g2) * gr * gl / (4 * nu**2)
    bracket = (g1 + g2) / g1 * (g1 * g2 / 4 - gr * gl) + u**2 / 4
    if bracket == 0:
        raise SingularReducedSystemError(
            "(gamma_eff(1)+gamma_eff(2))/gamma_eff(1) * "
            "(gamma_eff(1) gamma_eff(2)/4 - gamma_R gamma_L) + "
            "(eta_eff omega_eff(1))^2/4")
    feedback = ((g1 + g2)**2 / (g1 * g2) * gr * gl / bracket
                * u**2 / (16 * nu**2))
    return base + exchange + feedback


def lamb_dicke_limit_n1(eff: EffectiveParams) -> float:
    """Vanishing-recoil limit of :func:`closed_form_n1`: the occupation
    is no longer bounded by the target atom's own linewidth."""
    g1, g2, gl, gr, _, nu = _pair_rates(eff)
    if g2 <= 0:
        raise SingularReducedSystemError("gamma_eff(2)")
    return g1**2 / (16 * nu**2) - (g1 / g2) * gr * gl / (4 * nu**2)


def ratio_limit(gamma_left: float, gamma_right: float) -> float:
    """Vanishing-recoil cooling ratio against the single-atom limit:
    1 - 4 gL gR / (gL + gR)^2.  Zero at balanced rates, one at
    unidirectional coupling."""
    total = gamma_left + gamma_right
    if total <= 0:
        raise ValueError("need gamma_left + gamma_right > 0")
    return 1.0 - 4.0 * gamma_left * gamma_right / total**2
