"""Full three-level master equation for trapped Lambda atoms coupled
through a directional photonic channel.

The generator combines, per atom, the trap and laser Hamiltonian to
first order in the Lamb-Dicke parameters, and, between atoms, coherent
spin-exchange plus directional collective decay whose left/right rates
may differ.  All frequencies and rates are quoted in units of the trap
frequency ``nu`` (canonically 1); rescale inputs before constructing
:class:`PhysicalParams` if they come in other units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse

from .core import (
    HilbertSpace,
    build_space,
    chiral_dissipator_term,
    hamiltonian_liouvillian,
    phonon_annihilation,
    site_operator,
    transition_operator,
)

RATE_SPLIT_TOL = 1e-12


def eit_resonance_detuning(omega_g: float, omega_r: float, nu: float = 1.0) -> float:
    """Two-photon detuning placing the upper dressed state at the trap
    frequency (omega_plus = nu), the resonance condition for dark-state
    sideband cooling."""
    if nu <= 0:
        raise ValueError("nu must be > 0")
    return -nu + (omega_g**2 + omega_r**2) / (4.0 * nu)


@dataclass(frozen=True)
class PhysicalParams:
    """Complete description of the driven, trapped atom array.

    Per-atom sequences are ordered by site (atom 1 first).  ``delta``
    may be None, meaning every atom is held at the EIT cooling
    resonance.  Directional decay rates are stored per transition leg
    and direction; use :meth:`from_directionality` for the common case
    of one directionality fraction ``beta`` applied to both legs.
    """

    omega_g: tuple[float, ...]
    omega_r: tuple[float, ...]
    gamma_g_left: float
    gamma_g_right: float
    gamma_r_left: float
    gamma_r_right: float
    delta: tuple[float, ...] | None = None
    eta_g: float = 0.15
    eta_r: float = 0.15
    psi_g: float = math.pi / 4
    psi_r: float = 3 * math.pi / 4
    xi: float = 2 * math.pi
    nu: float = 1.0
    n_max: int = 2

    def __post_init__(self):
        object.__setattr__(self, "omega_g", tuple(float(x) for x in self.omega_g))
        object.__setattr__(self, "omega_r", tuple(float(x) for x in self.omega_r))
        if self.delta is not None:
            object.__setattr__(self, "delta", tuple(float(x) for x in self.delta))
        if len(self.omega_g) != len(self.omega_r):
            raise ValueError("omega_g and omega_r must have one entry per atom")
        if not self.omega_g:
            raise ValueError("need at least one atom")
        if self.delta is not None and len(self.delta) != len(self.omega_g):
            raise ValueError("delta must have one entry per atom")
        for name in ("gamma_g_left", "gamma_g_right", "gamma_r_left",
                     "gamma_r_right", "eta_g", "eta_r"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if any(x < 0 for x in self.omega_g) or any(x < 0 for x in self.omega_r):
            raise ValueError("Rabi frequencies must be >= 0")
        if self.nu <= 0:
            raise ValueError("nu must be > 0")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @classmethod
    def from_directionality(cls, omega_g, omega_r, gamma_g: float, gamma_r: float,
                            beta: float, **kwargs) -> "PhysicalParams":
        """Split total rates gamma_g, gamma_r into left/right legs with the
        same right-propagating fraction ``beta`` on both transitions."""
        if not 0.0 <= beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")
        return cls(
            omega_g=tuple(omega_g), omega_r=tuple(omega_r),
            gamma_g_left=(1.0 - beta) * gamma_g, gamma_g_right=beta * gamma_g,
            gamma_r_left=(1.0 - beta) * gamma_r, gamma_r_right=beta * gamma_r,
            **kwargs)

    @property
    def n_atoms(self) -> int:
        return len(self.omega_g)

    @property
    def gamma_g(self) -> float:
        return self.gamma_g_left + self.gamma_g_right

    @property
    def gamma_r(self) -> float:
        return self.gamma_r_left + self.gamma_r_right

    @property
    def beta(self) -> float:
        """Right-propagating fraction of the total decay rate."""
        total = self.gamma_g + self.gamma_r
        if total == 0.0:
            return math.nan
        return (self.gamma_g_right + self.gamma_r_right) / total

    @property
    def auto_eit_detuning(self) -> bool:
        return self.delta is None

    def detunings(self) -> tuple[float, ...]:
        """Per-atom two-photon detunings, resolving the EIT-resonance
        default."""
        if self.delta is not None:
            return self.delta
        return tuple(eit_resonance_detuning(g, r, self.nu)
                     for g, r in zip(self.omega_g, self.omega_r))

    def single_atom(self, site: int) -> "PhysicalParams":
        """Standalone single-atom parameters of ``site`` (1-based): local
        drives, total decay rates, no exchange partner."""
        j = site - 1
        delta = None if self.delta is None else (self.delta[j],)
        return replace(self, omega_g=(self.omega_g[j],),
                       omega_r=(self.omega_r[j],), delta=delta)


def space_for(params: PhysicalParams, max_dim: int = 10_000) -> HilbertSpace:
    """Three-level space matching the parameter set."""
    return build_space(params.n_atoms, 3, params.n_max, max_dim=max_dim)


def _check_space(params: PhysicalParams, space: HilbertSpace) -> None:
    if space.internal_dim != 3:
        raise ValueError("full model needs a three-level space")
    if space.n_atoms != params.n_atoms:
        raise ValueError(
            f"space has {space.n_atoms} atoms, params describe {params.n_atoms}")


def lamb_dicke_hamiltonian(params: PhysicalParams,
                           space: HilbertSpace) -> sparse.csr_matrix:
    """Single-atom part of the Hamiltonian: detunings, traps, carrier
    drives on both legs and their first-order sideband (Lamb-Dicke)
    corrections projected on the motional axis."""
    _check_space(params, space)
    delta = params.detunings()
    H = sparse.csr_matrix((space.total_dim, space.total_dim), dtype=complex)
    kappa_g = params.eta_g * math.cos(params.psi_g)
    kappa_r = params.eta_r * math.cos(params.psi_r)
    for j in range(1, space.n_atoms + 1):
        a = phonon_annihilation(space, j)
        x = (a + a.getH()).tocsr()
        s_eg = transition_operator(space, j, "e", "g")
        s_er = transition_operator(space, j, "e", "r")
        H = H - delta[j - 1] * transition_operator(space, j, "e", "e")
        H = H + params.nu * (a.getH() @ a)
        H = H + (params.omega_g[j - 1] / 2.0) * (s_eg + s_eg.getH())
        H = H + (params.omega_r[j - 1] / 2.0) * (s_er + s_er.getH())
        H = H + 1j * kappa_g * (params.omega_g[j - 1] / 2.0) * (
            s_eg @ x - x @ s_eg.getH())
        H = H + 1j * kappa_r * (params.omega_r[j - 1] / 2.0) * (
            s_er @ x - x @ s_er.getH())
    return H.tocsr()


def _directional_rates(params: PhysicalParams) -> dict[str, tuple[float, float]]:
    """Per leg: (left rate, right rate), consistency-checked."""
    for leg, left, right, total in (
            ("g", params.gamma_g_left, params.gamma_g_right, params.gamma_g),
            ("r", params.gamma_r_left, params.gamma_r_right, params.gamma_r)):
        if abs(left + right - total) > RATE_SPLIT_TOL * max(1.0, total):
            raise ValueError(f"directional rates of leg {leg} do not sum")
    return {"g": (params.gamma_g_left, params.gamma_g_right),
            "r": (params.gamma_r_left, params.gamma_r_right)}


def chiral_exchange_hamiltonian(params: PhysicalParams,
                                space: HilbertSpace) -> sparse.csr_matrix:
    """Coherent spin-exchange mediated by the directional channel.

    Left-propagating terms carry excitation toward lower site index,
    right-propagating toward higher, each with phase exp(i xi |mu - nu|)
    for equidistant traps.  Zero for a single atom.
    """
    _check_space(params, space)
    H = sparse.csr_matrix((space.total_dim, space.total_dim), dtype=complex)
    if space.n_atoms < 2:
        return H
    rates = _directional_rates(params)
    for leg in ("g", "r"):
        gamma_left, gamma_right = rates[leg]
        for mu in range(1, space.n_atoms + 1):
            for nu_ in range(1, space.n_atoms + 1):
                if mu == nu_:
                    continue
                rate = gamma_left if mu < nu_ else gamma_right
                if rate == 0.0:
                    continue
                hop = (transition_operator(space, mu, "e", leg)
                       @ transition_operator(space, nu_, leg, "e"))
                hop = np.exp(1j * params.xi * abs(mu - nu_)) * hop
                H = H - 0.5j * rate * (hop - hop.getH())
    return H.tocsr()


def chiral_dissipator(params: PhysicalParams,
                      space: HilbertSpace) -> sparse.csr_matrix:
    """Directional collective decay: double site sum over both legs and
    both propagation directions.  For one atom it reduces to ordinary
    decay at the total rates."""
    _check_space(params, space)
    n2 = space.total_dim ** 2
    L = sparse.csr_matrix((n2, n2), dtype=complex)
    rates = _directional_rates(params)
    for leg in ("g", "r"):
        gamma_left, gamma_right = rates[leg]
        for mu in range(1, space.n_atoms + 1):
            raising = transition_operator(space, mu, "e", leg)
            for nu_ in range(1, space.n_atoms + 1):
                lowering = transition_operator(space, nu_, leg, "e")
                gap = mu - nu_
                if gamma_left:
                    L = L + chiral_dissipator_term(
                        gamma_left, np.exp(-1j * params.xi * gap),
                        raising, lowering)
                if gamma_right:
                    L = L + chiral_dissipator_term(
                        gamma_right, np.exp(+1j * params.xi * gap),
                        raising, lowering)
    return L.tocsr()


def liouvillian(params: PhysicalParams,
                space: HilbertSpace | None = None) -> sparse.csr_matrix:
    """Full generator: coherent part plus directional dissipator."""
    if space is None:
        space = space_for(params)
    H = lamb_dicke_hamiltonian(params, space) + chiral_exchange_hamiltonian(
        params, space)
    return (hamiltonian_liouvillian(H) + chiral_dissipator(params, space)).tocsr()
