import numpy as np
import pytest
from scipy.linalg import expm

import chiralcool as cc
from chiralcool.core import vectorize, unvectorize
from chiralcool.darkstate import dressed_energies
from conftest import dense, random_density


def partial_trace_site2(rho, site_dim):
    r = rho.reshape(site_dim, site_dim, site_dim, site_dim)
    return np.einsum("ikjk->ij", r)


class TestEitDetuning:
    @pytest.mark.parametrize("og, om_r, nu, expected", [
        (1.5, 15.0, 1.0, 55.8125),
        (0.0, 2.0, 1.0, 0.0),
        (3.0, 30.0, 1.0, 226.25),
    ])
    def test_values(self, og, om_r, nu, expected):
        assert cc.eit_resonance_detuning(og, om_r, nu) == pytest.approx(
            expected, abs=1e-12)

    def test_places_upper_dressed_state_at_nu(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            og, om_r = rng.uniform(0.1, 5.0), rng.uniform(0.5, 40.0)
            nu = rng.uniform(0.5, 2.0)
            delta = cc.eit_resonance_detuning(og, om_r, nu)
            w_plus, _, _ = dressed_energies(og, om_r, delta)
            assert w_plus == pytest.approx(nu, abs=1e-12)

    def test_rejects_bad_nu(self):
        with pytest.raises(ValueError):
            cc.eit_resonance_detuning(1.0, 2.0, 0.0)


class TestPhysicalParams:
    def test_directional_split_sums(self):
        p = cc.PhysicalParams.from_directionality(
            [1.0], [2.0], 1.8, 0.6, 0.35)
        assert p.gamma_g_left + p.gamma_g_right == pytest.approx(1.8, abs=1e-12)
        assert p.gamma_r_left + p.gamma_r_right == pytest.approx(0.6, abs=1e-12)
        assert p.beta == pytest.approx(0.35, abs=1e-12)

    def test_auto_eit_default(self, common_params):
        deltas = common_params.detunings()
        assert deltas[0] == pytest.approx(55.8125, abs=1e-12)
        assert deltas[1] == pytest.approx(-0.431875, abs=1e-12)
        for j, d in enumerate(deltas):
            w_plus, _, _ = dressed_energies(
                common_params.omega_g[j], common_params.omega_r[j], d)
            assert w_plus == pytest.approx(1.0, abs=1e-12)

    def test_validation(self):
        with pytest.raises(ValueError):
            cc.PhysicalParams.from_directionality([1.0], [2.0, 3.0], 1, 1, 0.5)
        with pytest.raises(ValueError):
            cc.PhysicalParams.from_directionality([1.0], [2.0], 1, 1, 1.5)
        with pytest.raises(ValueError):
            cc.PhysicalParams(
                omega_g=(1.0,), omega_r=(2.0,), gamma_g_left=-0.1,
                gamma_g_right=0.0, gamma_r_left=0.0, gamma_r_right=0.0)

    def test_single_atom_keeps_total_rates(self, common_params):
        single = common_params.single_atom(2)
        assert single.n_atoms == 1
        assert single.omega_g == (0.15,)
        assert single.gamma_g == pytest.approx(common_params.gamma_g)
        assert single.gamma_r == pytest.approx(common_params.gamma_r)


class TestLambDickeHamiltonian:
    def test_drives_off_pure_phonon_spectrum(self):
        p = cc.PhysicalParams.from_directionality(
            [0.0], [0.0], 0.0, 0.0, 0.5, delta=(0.0,), n_max=2)
        space = cc.space_for(p)
        H = dense(cc.lamb_dicke_hamiltonian(p, space))
        evals = np.sort(np.linalg.eigvalsh(H))
        assert np.allclose(evals, np.repeat([0.0, 1.0, 2.0], 3), atol=1e-12)

    def test_carrier_only_conserves_phonon_number(self, common_params):
        from dataclasses import replace
        p = replace(common_params, eta_g=0.0, eta_r=0.0)
        space = cc.space_for(p)
        H = cc.lamb_dicke_hamiltonian(p, space)
        n_total = cc.phonon_number(space, 1) + cc.phonon_number(space, 2)
        comm = H @ n_total - n_total @ H
        assert abs(dense(comm)).max() < 1e-10

    def test_spin_block_eigenvalues(self, atom1_params):
        # oracle: dense eigensolve of the 3x3 carrier block (basis g, r, e)
        og, om_r = atom1_params.omega_g[0], atom1_params.omega_r[0]
        delta = atom1_params.detunings()[0]
        block = np.array([
            [0.0, 0.0, og / 2],
            [0.0, 0.0, om_r / 2],
            [og / 2, om_r / 2, -delta],
        ])
        evals = np.sort(np.linalg.eigvalsh(block))
        assert evals[0] == pytest.approx(-56.8125, abs=1e-10)
        assert evals[1] == pytest.approx(0.0, abs=1e-12)
        assert evals[2] == pytest.approx(1.0, abs=1e-10)
        # the full single-atom Hamiltonian at eta=0 is the outer sum of
        # spin block and phonon ladder
        from dataclasses import replace
        p = replace(atom1_params, eta_g=0.0, eta_r=0.0)
        space = cc.space_for(p)
        H = dense(cc.lamb_dicke_hamiltonian(p, space))
        expected = np.sort(np.add.outer(evals, [0.0, 1.0, 2.0]).ravel())
        assert np.allclose(np.sort(np.linalg.eigvalsh(H)), expected, atol=1e-9)

    def test_hermitian(self, common_params):
        space = cc.space_for(common_params)
        H = cc.lamb_dicke_hamiltonian(common_params, space)
        assert cc.core.is_hermitian(H, 1e-12)


class TestChiralExchangeHamiltonian:
    def test_zero_rates_zero_operator(self):
        p = cc.PhysicalParams.from_directionality(
            [1.0, 1.0], [4.0, 4.0], 0.0, 0.0, 0.5, n_max=1)
        space = cc.space_for(p)
        assert cc.chiral_exchange_hamiltonian(p, space).nnz == 0

    def test_single_atom_zero(self, atom1_params):
        space = cc.space_for(atom1_params)
        assert cc.chiral_exchange_hamiltonian(atom1_params, space).nnz == 0

    def test_hermitian_for_random_phase(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            p = cc.PhysicalParams.from_directionality(
                [1.0, 0.5], [4.0, 2.0], 1.3, 0.4, 0.7,
                xi=rng.uniform(0, 2 * np.pi), n_max=1)
            space = cc.space_for(p)
            H = cc.chiral_exchange_hamiltonian(p, space)
            assert cc.core.is_hermitian(H, 1e-12)

    def test_matches_hand_built_exchange(self):
        # two atoms, xi = 2 pi: unit phases, pure spin-exchange structure
        p = cc.PhysicalParams.from_directionality(
            [0.5, 0.5], [2.0, 2.0], 1.0, 0.0, 0.5, xi=2 * np.pi, n_max=1)
        space = cc.space_for(p)
        got = dense(cc.chiral_exchange_hamiltonian(p, space))
        hop21 = dense(cc.transition_operator(space, 2, "e", "g")
                      @ cc.transition_operator(space, 1, "g", "e"))
        hop12 = dense(cc.transition_operator(space, 1, "e", "g")
                      @ cc.transition_operator(space, 2, "g", "e"))
        phase = np.exp(1j * p.xi)
        expected = (-0.5j * p.gamma_g_right * (phase * hop21 - np.conj(phase) * hop21.conj().T)
                    - 0.5j * p.gamma_g_left * (phase * hop12 - np.conj(phase) * hop12.conj().T))
        assert abs(got - expected).max() < 1e-12


class TestChiralDissipator:
    def test_single_atom_total_decay(self, atom1_params):
        from dataclasses import replace
        p = replace(atom1_params, omega_g=(0.0,), omega_r=(0.0,),
                    delta=(0.0,), n_max=1)
        space = cc.space_for(p)
        L = cc.liouvillian(p, space)
        k = space.index(((2, 0),))
        rho0 = np.zeros((space.total_dim,) * 2, dtype=complex)
        rho0[k, k] = 1.0
        t = 0.05
        rho_t = unvectorize(expm(dense(L) * t) @ vectorize(rho0),
                            space.total_dim)
        pop = rho_t[k, k].real
        assert pop == pytest.approx(np.exp(-(p.gamma_g + p.gamma_r) * t),
                                    rel=1e-8)

    def test_trace_annihilated(self, common_params):
        space = cc.space_for(common_params)
        D = cc.chiral_dissipator(common_params, space)
        rng = np.random.default_rng(2)
        rho = random_density(rng, space.total_dim)
        assert abs(np.trace(cc.apply_superoperator(D, rho))) < 1e-10

    def test_cascade_no_back_action(self):
        """beta = 1: tracing out the downstream atom gives exactly the
        single-atom equation of motion, for arbitrary two-atom states."""
        p2 = cc.PhysicalParams.from_directionality(
            [1.5, 0.15], [15.0, 1.5], 18.0, 2.0, 1.0, n_max=1)
        p1 = p2.single_atom(1)
        s2, s1 = cc.space_for(p2), cc.space_for(p1)
        L2, L1 = cc.liouvillian(p2, s2), cc.liouvillian(p1, s1)
        rng = np.random.default_rng(14)
        for _ in range(5):
            rho = random_density(rng, s2.total_dim)
            lhs = partial_trace_site2(cc.apply_superoperator(L2, rho),
                                      s2.site_dim)
            rhs = cc.apply_superoperator(L1, partial_trace_site2(
                rho, s2.site_dim))
            assert abs(lhs - rhs).max() < 1e-8

    def test_cascade_mirror_beta_zero(self):
        """beta = 0: atom 2 is upstream."""
        p2 = cc.PhysicalParams.from_directionality(
            [1.5, 0.15], [15.0, 1.5], 18.0, 2.0, 0.0, n_max=1)
        p1 = p2.single_atom(2)
        s2, s1 = cc.space_for(p2), cc.space_for(p1)
        L2, L1 = cc.liouvillian(p2, s2), cc.liouvillian(p1, s1)
        rng = np.random.default_rng(15)
        d = s2.site_dim
        for _ in range(5):
            rho = random_density(rng, s2.total_dim)
            reduced = np.einsum(
                "kikj->ij", rho.reshape(d, d, d, d))
            lhs = np.einsum(
                "kikj->ij",
                cc.apply_superoperator(L2, rho).reshape(d, d, d, d))
            rhs = cc.apply_superoperator(L1, reduced)
            assert abs(lhs - rhs).max() < 1e-8


class TestLiouvillian:
    def test_free_evolution_keeps_diagonals_stationary(self):
        p = cc.PhysicalParams.from_directionality(
            [0.0], [0.0], 0.0, 0.0, 0.5, delta=(0.0,), n_max=2)
        space = cc.space_for(p)
        L = cc.liouvillian(p, space)
        rho = np.diag(np.linspace(0.3, 0.05, space.total_dim)).astype(complex)
        rho /= np.trace(rho)
        assert abs(cc.apply_superoperator(L, rho)).max() < 1e-14

    def test_single_atom_unique_steady_state(self, atom1_params):
        space = cc.space_for(atom1_params)
        result = cc.steady_state(cc.liouvillian(atom1_params, space),
                                 space=space)
        assert result.null_space_dimension == 1
        assert result.converged

    def test_two_atom_star_point_unique_kernel(self, common_params):
        space = cc.space_for(common_params)
        result = cc.steady_state(cc.liouvillian(common_params, space),
                                 space=space, check_kernel=True)
        assert result.null_space_dimension == 1
        assert abs(result.slow_eigenvalue) > 1e-9
        assert result.residual <= 1e-9 * result.scale

    def test_mirror_symmetry_spectrum(self):
        """Swapping atom labels with beta -> 1 - beta mirrors the chiral
        channel; the generator spectrum is invariant."""
        kwargs = dict(n_max=1, xi=1.3)
        p = cc.PhysicalParams.from_directionality(
            [1.5, 0.15], [15.0, 1.5], 6.0, 2.0, 0.7, **kwargs)
        q = cc.PhysicalParams.from_directionality(
            [0.15, 1.5], [1.5, 15.0], 6.0, 2.0, 0.3, **kwargs)
        Lp = dense(cc.liouvillian(p))
        Lq = dense(cc.liouvillian(q))
        ep = np.linalg.eigvals(Lp)
        eq = np.linalg.eigvals(Lq)
        forward = np.abs(ep[:, None] - eq[None, :]).min(axis=1).max()
        backward = np.abs(eq[:, None] - ep[None, :]).min(axis=1).max()
        assert max(forward, backward) < 1e-9
