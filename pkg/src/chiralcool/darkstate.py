"""Dressed-state reduction of the three-level model.

At two-photon resonance each driven Lambda atom has a dark state |d>
decoupled from the light and two dressed states |+/-> at energies
omega_+/-.  Holding the upper dressed state at the trap frequency
(omega_+ = nu) makes the red sideband |d, n> <-> |+, n-1> resonant, and
the dynamics closes on the {|d>, |+>} pair: an effective two-level
sideband cooling model with drive-tunable decay rates and exchange
couplings.  This module computes that mapping and assembles the
effective generator.

The mapping is trustworthy only in a hierarchy of scales (detuning much
larger than the control Rabi frequency, which in turn dwarfs the trap
frequency, with the effective rates small against it);
:func:`validity_report` quantifies each ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .core import (
    HilbertSpace,
    chiral_dissipator_term,
    hamiltonian_liouvillian,
    phonon_annihilation,
    transition_operator,
)
from .model import PhysicalParams

EIT_RESONANCE_TOL = 1e-6
DEFAULT_HIERARCHY_THRESHOLD = 3.0


def mixing_angles(omega_g: float, omega_r: float, delta: float) -> tuple[float, float]:
    """Dressing angles (theta, phi) of a driven Lambda atom.

    theta fixes the dark state |d> = cos(theta)|g> - sin(theta)|r| via
    tan(theta) = omega_g/omega_r.  phi is chosen on the branch where
    |+> = sin(phi)|e> - cos(phi)|b> is the omega_+ eigenvector with
    sin(phi) >= 0 (cos(phi) <= 0 on this branch; only sin(phi) enters
    the effective rates).
    """
    big_omega = math.hypot(omega_g, omega_r)
    if big_omega == 0.0:
        raise ValueError("mixing angles undefined: both Rabi frequencies zero")
    theta = math.atan2(omega_g, omega_r)
    root = math.hypot(delta, big_omega)
    sin_phi = big_omega / math.hypot(big_omega, delta + root)
    cos_phi = -(delta + root) / math.hypot(big_omega, delta + root)
    return theta, math.atan2(sin_phi, cos_phi)


def dressed_energies(omega_g: float, omega_r: float,
                     delta: float) -> tuple[float, float, float]:
    """(omega_+, omega_-, omega_d) of the driven spin Hamiltonian."""
    root = math.sqrt(omega_g**2 + omega_r**2 + delta**2)
    return (-delta + root) / 2.0, (-delta - root) / 2.0, 0.0


@dataclass(frozen=True)
class EffectiveParams:
    """Dark-state-mapped quantities for the two-level sideband model.

    ``gamma_eff_left``/``gamma_eff_right`` are full pairwise matrices
    (site-indexed, diagonal included); the diagonal entries sum to the
    per-atom ``gamma_eff``.
    """

    theta: tuple[float, ...]
    phi: tuple[float, ...]
    omega_eff: tuple[float, ...]
    eta_eff: float
    gamma_eff: tuple[float, ...]
    gamma_eff_left: tuple[tuple[float, ...], ...]
    gamma_eff_right: tuple[tuple[float, ...], ...]
    xi: float
    nu: float

    @property
    def n_atoms(self) -> int:
        return len(self.theta)

    def sideband_coupling(self, site: int = 1) -> float:
        """eta_eff * omega_eff of ``site`` (1-based), the red-sideband
        drive strength."""
        return self.eta_eff * self.omega_eff[site - 1]


def effective_params(params: PhysicalParams) -> EffectiveParams:
    """Map physical drive and decay parameters onto the effective
    two-level model."""
    deltas = params.detunings()
    theta, phi, omega_eff, gamma_eff = [], [], [], []
    for og, om_r, d in zip(params.omega_g, params.omega_r, deltas):
        th, ph = mixing_angles(og, om_r, d)
        sin_phi = math.sin(ph)
        theta.append(th)
        phi.append(ph)
        omega_eff.append(og * om_r * sin_phi / math.hypot(og, om_r))
        gamma_eff.append(sin_phi**2 * (params.gamma_g * math.cos(th) ** 2
                                       + params.gamma_r * math.sin(th) ** 2))
    eta_eff = (params.eta_g * math.cos(params.psi_g)
               - params.eta_r * math.cos(params.psi_r))

    def pairwise(gamma_g_dir: float, gamma_r_dir: float):
        rows = []
        for mu in range(params.n_atoms):
            row = []
            for nu_ in range(params.n_atoms):
                row.append(
                    math.sin(phi[mu]) * math.sin(phi[nu_])
                    * (gamma_g_dir * math.cos(theta[mu]) * math.cos(theta[nu_])
                       + gamma_r_dir * math.sin(theta[mu]) * math.sin(theta[nu_])))
            rows.append(tuple(row))
        return tuple(rows)

    return EffectiveParams(
        theta=tuple(theta), phi=tuple(phi), omega_eff=tuple(omega_eff),
        eta_eff=eta_eff, gamma_eff=tuple(gamma_eff),
        gamma_eff_left=pairwise(params.gamma_g_left, params.gamma_r_left),
        gamma_eff_right=pairwise(params.gamma_g_right, params.gamma_r_right),
        xi=params.xi, nu=params.nu)


def effective_liouvillian(eff: EffectiveParams,
                          space: HilbertSpace) -> sparse.csr_matrix:
    """Generator of the effective sideband-cooling model.

    The Hamiltonian keeps the trap and dressed-state energies explicit
    (both at nu, the resonance that makes the red sideband static) plus
    the full sideband coupling; the off-resonant blue-sideband leg is
    then detuned by 2 nu rather than dropped, which is what produces the
    finite steady occupation.  Dissipation has per-atom decay at
    gamma_eff and directional cross terms between distinct sites.
    """
    if space.internal_dim != 2:
        raise ValueError("effective model needs a two-level space")
    if space.n_atoms != eff.n_atoms:
        raise ValueError(
            f"space has {space.n_atoms} atoms, parameters {eff.n_atoms}")
    H = sparse.csr_matrix((space.total_dim, space.total_dim), dtype=complex)
    for j in range(1, space.n_atoms + 1):
        a = phonon_annihilation(space, j)
        x = (a + a.getH()).tocsr()
        lower = transition_operator(space, j, "d", "+")
        H = H + eff.nu * (a.getH() @ a)
        H = H + eff.nu * transition_operator(space, j, "+", "+")
        H = H + 0.5j * eff.eta_eff * eff.omega_eff[j - 1] * (
            lower @ x - x @ lower.getH())
    for mu in range(1, space.n_atoms + 1):
        for nu_ in range(1, space.n_atoms + 1):
            if mu == nu_:
                continue
            rate = (eff.gamma_eff_left[mu - 1][nu_ - 1] if mu < nu_
                    else eff.gamma_eff_right[mu - 1][nu_ - 1])
            if rate == 0.0:
                continue
            hop = (transition_operator(space, mu, "+", "d")
                   @ transition_operator(space, nu_, "d", "+"))
            hop = np.exp(1j * eff.xi * abs(mu - nu_)) * hop
            H = H - 0.5j * rate * (hop - hop.getH())
    L = hamiltonian_liouvillian(H.tocsr())
    for mu in range(1, space.n_atoms + 1):
        raising = transition_operator(space, mu, "+", "d")
        for nu_ in range(1, space.n_atoms + 1):
            if mu == nu_:
                continue
            lowering = transition_operator(space, nu_, "d", "+")
            gap = mu - nu_
            left = eff.gamma_eff_left[mu - 1][nu_ - 1]
            right = eff.gamma_eff_right[mu - 1][nu_ - 1]
            if left:
                L = L + chiral_dissipator_term(
                    left, np.exp(-1j * eff.xi * gap), raising, lowering)
            if right:
                L = L + chiral_dissipator_term(
                    right, np.exp(+1j * eff.xi * gap), raising, lowering)
    for mu in range(1, space.n_atoms + 1):
        raising = transition_operator(space, mu, "+", "d")
        if eff.gamma_eff[mu - 1]:
            L = L + chiral_dissipator_term(
                eff.gamma_eff[mu - 1], 1.0, raising, raising.getH())
    return L.tocsr()


@dataclass(frozen=True)
class AtomValidity:
    """Scale hierarchy of one atom.  Each ``*_ratio`` should be large
    for the dark-state mapping to hold; ``ok`` flags ratios above the
    chosen threshold."""

    site: int
    delta_over_omega_r: float
    omega_r_over_nu: float
    sideband_drive_over_nu: float
    gamma_eff_over_nu: float
    eit_resonance_offset: float

    def flags(self, threshold: float) -> dict[str, bool]:
        return {
            "delta_over_omega_r": self.delta_over_omega_r >= threshold,
            "omega_r_over_nu": self.omega_r_over_nu >= threshold,
            "nu_over_sideband_drive": (
                self.sideband_drive_over_nu > 0
                and 1.0 / self.sideband_drive_over_nu >= threshold),
            "nu_over_gamma_eff": (
                self.gamma_eff_over_nu > 0
                and 1.0 / self.gamma_eff_over_nu >= threshold),
            "eit_resonance": abs(self.eit_resonance_offset) <= EIT_RESONANCE_TOL,
        }


@dataclass(frozen=True)
class ValidityReport:
    atoms: tuple[AtomValidity, ...]
    threshold: float

    @property
    def all_pass(self) -> bool:
        return not self.warnings()

    def warnings(self, sites: tuple[int, ...] | None = None) -> list[str]:
        out = []
        for atom in self.atoms:
            if sites is not None and atom.site not in sites:
                continue
            for name, ok in atom.flags(self.threshold).items():
                if not ok:
                    out.append(f"atom {atom.site}: {name} below threshold")
        return out

    def min_ratio(self, site: int) -> float:
        """Smallest hierarchy ratio of ``site`` (1-based)."""
        atom = self.atoms[site - 1]
        ratios = [atom.delta_over_omega_r, atom.omega_r_over_nu]
        if atom.sideband_drive_over_nu > 0:
            ratios.append(1.0 / atom.sideband_drive_over_nu)
        if atom.gamma_eff_over_nu > 0:
            ratios.append(1.0 / atom.gamma_eff_over_nu)
        return min(ratios)

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "atoms": [
                {
                    "site": a.site,
                    "delta_over_omega_r": a.delta_over_omega_r,
                    "omega_r_over_nu": a.omega_r_over_nu,
                    "sideband_drive_over_nu": a.sideband_drive_over_nu,
                    "gamma_eff_over_nu": a.gamma_eff_over_nu,
                    "eit_resonance_offset": a.eit_resonance_offset,
                    "flags": a.flags(self.threshold),
                }
                for a in self.atoms
            ],
        }


def validity_report(params: PhysicalParams,
                    threshold: float = DEFAULT_HIERARCHY_THRESHOLD) -> ValidityReport:
    """Quantify the scale hierarchy behind the dark-state mapping and
    the sideband cooling condition, atom by atom."""
    eff = effective_params(params)
    deltas = params.detunings()
    atoms = []
    for j in range(params.n_atoms):
        w_plus, _, _ = dressed_energies(params.omega_g[j], params.omega_r[j],
                                        deltas[j])
        omega_r = params.omega_r[j]
        atoms.append(AtomValidity(
            site=j + 1,
            delta_over_omega_r=(deltas[j] / omega_r if omega_r else math.inf),
            omega_r_over_nu=omega_r / params.nu,
            sideband_drive_over_nu=abs(eff.eta_eff * eff.omega_eff[j]) / params.nu,
            gamma_eff_over_nu=eff.gamma_eff[j] / params.nu,
            eit_resonance_offset=(w_plus - params.nu) / params.nu,
        ))
    return ValidityReport(atoms=tuple(atoms), threshold=threshold)
