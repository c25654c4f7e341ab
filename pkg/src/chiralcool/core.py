"""Operator and superoperator algebra on truncated atom-phonon spaces.

Conventions shared by every module in this package:

* Each site (atom) carries an internal level ``alpha`` and a phonon
  number ``n``; the per-site basis index is ``alpha * (n_max + 1) + n``.
  Global product-basis indices are site-major with site 1 most
  significant, i.e. the global index is the base-``site_dim`` number
  whose leading digit belongs to site 1.
* Internal levels are numbered ``g=0, r=1, e=2`` in the three-level
  model and ``d=0, +=1`` in the two-level dark-state model.
* Superoperators act on row-major (C-order) vectorised matrices.  The
  stacking order is an internal choice; use :func:`apply_superoperator`
  rather than reshaping by hand, and rely on the apply-consistency
  contract checked in the test suite.

Operators are ``scipy.sparse`` CSR matrices (dense ``numpy`` arrays are
accepted on input); density matrices are dense complex arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
EIGENVALUE_FLOOR = -1e-8

LEVEL_NAMES = {
    3: {"g": 0, "r": 1, "e": 2},
    2: {"d": 0, "+": 1},
}


class SpaceSizeError(ValueError):
    """Requested Hilbert space exceeds the configured safety cap."""


@dataclass(frozen=True)
class HilbertSpace:
    """Truncated composite basis: one internal level and one phonon
    register per atom.

    Attributes
    ----------
    n_atoms : number of sites.
    internal_dim : 3 for {g, r, e}, 2 for {d, +}.
    n_max : highest retained Fock state (phonons 0..n_max).
    """

    n_atoms: int
    internal_dim: int
    n_max: int

    @property
    def site_dim(self) -> int:
        return self.internal_dim * (self.n_max + 1)

    @property
    def total_dim(self) -> int:
        return self.site_dim ** self.n_atoms

    @property
    def levels(self) -> dict[str, int]:
        return LEVEL_NAMES[self.internal_dim]

    def site_index(self, level: int, n: int) -> int:
        """Per-site index of |level, n> (internal-level-major)."""
        if not (0 <= level < self.internal_dim and 0 <= n <= self.n_max):
            raise ValueError(f"no basis state (level={level}, n={n})")
        return level * (self.n_max + 1) + n

    def index(self, states: tuple[tuple[int, int], ...]) -> int:
        """Global index of the product state ((level, n) for site 1, 2, ...)."""
        if len(states) != self.n_atoms:
            raise ValueError(f"need {self.n_atoms} per-site states")
        k = 0
        for level, n in states:
            k = k * self.site_dim + self.site_index(level, n)
        return k

    def unindex(self, k: int) -> tuple[tuple[int, int], ...]:
        """Inverse of :meth:`index`."""
        if not 0 <= k < self.total_dim:
            raise ValueError(f"index {k} outside space of dim {self.total_dim}")
        out = []
        for _ in range(self.n_atoms):
            k, site = divmod(k, self.site_dim)
            out.append(divmod(site, self.n_max + 1))
        return tuple(reversed(out))

    def level_index(self, level: int | str) -> int:
        if isinstance(level, str):
            try:
                return self.levels[level]
            except KeyError:
                raise ValueError(
                    f"unknown level {level!r} for internal_dim={self.internal_dim}"
                ) from None
        if not 0 <= level < self.internal_dim:
            raise ValueError(f"level {level} outside 0..{self.internal_dim - 1}")
        return level


def build_space(n_atoms: int, internal_dim: int, n_max: int,
                max_dim: int = 10_000) -> HilbertSpace:
    """Construct a :class:`HilbertSpace`, rejecting oversized requests.

    ``total_dim = (internal_dim * (n_max + 1)) ** n_atoms`` must not
    exceed ``max_dim``.
    """
    if n_atoms < 1:
        raise ValueError("n_atoms must be >= 1")
    if internal_dim not in (2, 3):
        raise ValueError("internal_dim must be 2 or 3")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    space = HilbertSpace(n_atoms, internal_dim, n_max)
    if space.total_dim > max_dim:
        raise SpaceSizeError(
            f"total_dim {space.total_dim} exceeds cap {max_dim}; "
            "raise max_dim explicitly if this is intentional"
        )
    return space


def destroy(n_max: int) -> sparse.csr_matrix:
    """Truncated phonon annihilation operator: a|n> = sqrt(n)|n-1>."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return sparse.csr_matrix(
        np.diag(np.sqrt(np.arange(1.0, n_max + 1)), k=1).astype(complex)
    )


def _as_sparse(op) -> sparse.csr_matrix:
    if sparse.issparse(op):
        return op.tocsr().astype(complex)
    return sparse.csr_matrix(np.asarray(op, dtype=complex))


def site_operator(space: HilbertSpace, site: int, local_op) -> sparse.csr_matrix:
    """Embed a single-site operator at ``site`` (1-based), identity elsewhere."""
    if not 1 <= site <= space.n_atoms:
        raise ValueError(f"site {site} outside 1..{space.n_atoms}")
    local = _as_sparse(local_op)
    if local.shape != (space.site_dim, space.site_dim):
        raise ValueError(
            f"local operator has shape {local.shape}, expected "
            f"({space.site_dim}, {space.site_dim})"
        )
    out = None
    for s in range(1, space.n_atoms + 1):
        factor = local if s == site else sparse.identity(
            space.site_dim, dtype=complex, format="csr")
        out = factor if out is None else sparse.kron(out, factor, format="csr")
    return out


def transition_operator(space: HilbertSpace, site: int, upper: int | str,
                        lower: int | str) -> sparse.csr_matrix:
    """Embedded |upper><lower| on the internal levels of ``site``."""
    up = space.level_index(upper)
    lo = space.level_index(lower)
    local_int = sparse.csr_matrix(
        ([1.0 + 0j], ([up], [lo])), shape=(space.internal_dim,) * 2)
    local = sparse.kron(local_int, sparse.identity(space.n_max + 1, dtype=complex),
                        format="csr")
    return site_operator(space, site, local)


def phonon_annihilation(space: HilbertSpace, site: int) -> sparse.csr_matrix:
    """Embedded annihilation operator of the phonon register at ``site``."""
    local = sparse.kron(sparse.identity(space.internal_dim, dtype=complex),
                        destroy(space.n_max), format="csr")
    return site_operator(space, site, local)


def phonon_number(space: HilbertSpace, site: int) -> sparse.csr_matrix:
    a = phonon_annihilation(space, site)
    return (a.getH() @ a).tocsr()


def vectorize(X) -> np.ndarray:
    """Row-major vectorisation of a matrix."""
    return np.asarray(X, dtype=complex).reshape(-1)


def unvectorize(v, dim: int) -> np.ndarray:
    return np.asarray(v, dtype=complex).reshape(dim, dim)


def apply_superoperator(S, X) -> np.ndarray:
    """Apply a superoperator to a matrix, returning a matrix."""
    X = np.asarray(X, dtype=complex)
    dim = X.shape[0]
    if S.shape[1] != dim * dim:
        raise ValueError(
            f"superoperator acts on dim {S.shape[1]}, matrix is {dim}x{dim}")
    return unvectorize(S @ vectorize(X), dim)


def max_deviation_from_hermitian(O) -> float:
    """Max elementwise |O - O^dagger|."""
    if sparse.issparse(O):
        diff = (O - O.getH()).tocoo()
        return float(abs(diff.data).max()) if diff.nnz else 0.0
    O = np.asarray(O)
    return float(abs(O - O.conj().T).max())


def is_hermitian(O, tol: float = HERMITICITY_TOL) -> bool:
    return max_deviation_from_hermitian(O) <= tol


def hamiltonian_liouvillian(H) -> sparse.csr_matrix:
    """Superoperator of the coherent part: rho -> -i[H, rho].

    Rejects H deviating from Hermiticity by more than ``HERMITICITY_TOL``.
    """
    H = _as_sparse(H)
    dev = max_deviation_from_hermitian(H)
    if dev > HERMITICITY_TOL:
        raise ValueError(f"Hamiltonian not Hermitian (max deviation {dev:.2e})")
    ident = sparse.identity(H.shape[0], dtype=complex, format="csr")
    return (-1j * (sparse.kron(H, ident, format="csr")
                   - sparse.kron(ident, H.T, format="csr"))).tocsr()


def chiral_dissipator_term(rate: float, phase: complex, A, B) -> sparse.csr_matrix:
    """One directional Lindblad term:

        rho -> -(rate/2) * phase * (A B rho + rho A B - 2 B rho A).

    ``A`` and ``B`` are embedded raising/lowering operators of a pair of
    sites; summed over site pairs and both propagation directions these
    terms assemble the full nonreciprocal dissipator.  ``phase`` must be
    unimodular and ``rate`` nonnegative.
    """
    if rate < 0:
        raise ValueError("rate must be >= 0")
    if abs(abs(phase) - 1.0) > 1e-12:
        raise ValueError(f"phase must be unimodular, got |phase|={abs(phase)}")
    A = _as_sparse(A)
    B = _as_sparse(B)
    if A.shape != B.shape:
        raise ValueError(f"operator shapes differ: {A.shape} vs {B.shape}")
    if rate == 0.0:
        n2 = A.shape[0] ** 2
        return sparse.csr_matrix((n2, n2), dtype=complex)
    ident = sparse.identity(A.shape[0], dtype=complex, format="csr")
    AB = (A @ B).tocsr()
    return (-(rate / 2.0) * phase * (
        sparse.kron(AB, ident, format="csr")
        + sparse.kron(ident, AB.T, format="csr")
        - 2.0 * sparse.kron(B, A.T, format="csr")
    )).tocsr()


def expectation(rho, O) -> complex:
    """trace(rho O) for a density matrix and an observable."""
    rho = np.asarray(rho, dtype=complex)
    if sparse.issparse(O):
        if O.shape[0] != rho.shape[0]:
            raise ValueError(f"dimension mismatch: {rho.shape} vs {O.shape}")
        return complex(O.multiply(rho.T).sum())
    O = np.asarray(O, dtype=complex)
    if O.shape[0] != rho.shape[0]:
        raise ValueError(f"dimension mismatch: {rho.shape} vs {O.shape}")
    return complex(np.trace(rho @ O))


def check_density_matrix(rho, herm_tol: float = TRACE_TOL,
                         trace_tol: float = TRACE_TOL,
                         eig_floor: float = EIGENVALUE_FLOOR) -> None:
    """Raise ValueError unless rho is Hermitian, unit-trace and positive
    down to ``eig_floor``."""
    rho = np.asarray(rho)
    dev = float(abs(rho - rho.conj().T).max())
    if dev > herm_tol:
        raise ValueError(f"density matrix not Hermitian (deviation {dev:.2e})")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr} != 1")
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if w.min() < eig_floor:
        raise ValueError(f"density matrix min eigenvalue {w.min():.2e}")


def hermitian_basis(dim: int) -> sparse.csc_matrix:
    """Unitary change of coordinates: real Hermitian coords -> vec(rho).

    Columns are the vectorised orthonormal Hermitian basis: the ``dim``
    diagonal projectors first (so the trace functional is the sum of the
    first ``dim`` coordinates), then for each i<j the symmetric pair
    (e_ij + e_ji)/sqrt2 and i(e_ij - e_ji)/sqrt2.  A Hermitian matrix has
    real coordinates in this basis, so a Hermiticity-preserving
    superoperator conjugated by this map is a real matrix.
    """
    sq2 = 1.0 / np.sqrt(2.0)
    rows = np.empty(2 * dim * dim - dim, dtype=np.int64)
    cols = np.empty_like(rows)
    vals = np.empty(rows.shape, dtype=complex)
    rows[:dim] = np.arange(dim) * dim + np.arange(dim)
    cols[:dim] = np.arange(dim)
    vals[:dim] = 1.0
    k = dim
    col = dim
    for i in range(dim):
        for j in range(i + 1, dim):
            rows[k:k + 2] = (i * dim + j, j * dim + i)
            cols[k:k + 2] = col
            vals[k:k + 2] = (sq2, sq2)
            k += 2
            col += 1
            rows[k:k + 2] = (i * dim + j, j * dim + i)
            cols[k:k + 2] = col
            vals[k:k + 2] = (1j * sq2, -1j * sq2)
            k += 2
            col += 1
    n2 = dim * dim
    return sparse.csc_matrix((vals, (rows, cols)), shape=(n2, n2))
