import math
from dataclasses import replace

import numpy as np
import pytest

import chiralcool as cc
from chiralcool.analytic import single_atom_occupation
from chiralcool.darkstate import AtomValidity
from conftest import random_density


def eig_oracle(og, om_r, delta):
    """Independent 2x2 eigensolve of the {|e>, |b>} block; returns
    (omega_plus, <e|+>) with the <e|+> >= 0 sign convention."""
    omt = math.hypot(og, om_r)
    block = np.array([[-delta, omt / 2], [omt / 2, 0.0]])
    w, V = np.linalg.eigh(block)
    v = V[:, np.argmax(w)]
    if v[0] < 0:
        v = -v
    return w.max(), v[0]


class TestMixingAngles:
    def test_symmetric_drive(self):
        theta, _ = cc.mixing_angles(3.0, 3.0, 10.0)
        assert theta == pytest.approx(np.pi / 4, abs=1e-14)

    def test_against_eigensolve(self):
        theta, phi = cc.mixing_angles(1.5, 15.0, 55.8125)
        _, sin_phi_oracle = eig_oracle(1.5, 15.0, 55.8125)
        assert theta == pytest.approx(0.09967, abs=1e-5)
        assert math.sin(phi) == pytest.approx(sin_phi_oracle, abs=1e-12)
        assert math.sin(phi) == pytest.approx(0.13152, abs=1e-5)
        assert math.sin(phi) >= 0

    def test_random_against_eigensolve(self):
        rng = np.random.default_rng(20)
        for _ in range(25):
            og, om_r = rng.uniform(0.1, 5), rng.uniform(0.1, 30)
            delta = rng.uniform(-10, 100)
            _, phi = cc.mixing_angles(og, om_r, delta)
            _, sin_oracle = eig_oracle(og, om_r, delta)
            assert math.sin(phi) == pytest.approx(sin_oracle, abs=1e-12)

    def test_far_detuned_limit(self):
        omt = 3.0
        delta = 1e7
        _, phi = cc.mixing_angles(omt, 0.0, delta)
        assert math.sin(phi) == pytest.approx(omt / (2 * delta), rel=1e-3)

    def test_undefined_for_zero_drives(self):
        with pytest.raises(ValueError, match="zero"):
            cc.mixing_angles(0.0, 0.0, 1.0)


class TestDressedEnergies:
    def test_eit_point(self):
        w_plus, w_minus, w_dark = cc.dressed_energies(1.5, 15.0, 55.8125)
        assert w_plus == pytest.approx(1.0, abs=1e-12)
        assert w_minus == pytest.approx(-56.8125, abs=1e-12)
        assert w_dark == 0.0

    def test_trace_identity(self):
        rng = np.random.default_rng(21)
        for _ in range(20):
            og, om_r, delta = rng.uniform(0.1, 10, size=3)
            w_plus, w_minus, _ = cc.dressed_energies(og, om_r, delta)
            assert w_plus + w_minus == pytest.approx(-delta, abs=1e-12)


class TestDressedStates:
    def test_dark_state_decoupled(self):
        rng = np.random.default_rng(22)
        for _ in range(10):
            og, om_r = rng.uniform(0.1, 5), rng.uniform(0.5, 20)
            delta = rng.uniform(-5, 80)
            theta, _ = cc.mixing_angles(og, om_r, delta)
            carrier = np.array([
                [0.0, 0.0, og / 2],
                [0.0, 0.0, om_r / 2],
                [og / 2, om_r / 2, -delta],
            ])   # basis g, r, e
            dark = np.array([math.cos(theta), -math.sin(theta), 0.0])
            assert abs(carrier @ dark).max() < 1e-12

    def test_eigenvector_orthonormality(self):
        theta, phi = cc.mixing_angles(1.5, 15.0, 55.8125)
        bright = np.array([math.sin(theta), math.cos(theta), 0.0])
        dark = np.array([math.cos(theta), -math.sin(theta), 0.0])
        excited = np.array([0.0, 0.0, 1.0])
        plus = math.sin(phi) * excited - math.cos(phi) * bright
        minus = math.cos(phi) * excited + math.sin(phi) * bright
        for a, b in [(plus, minus), (dark, plus), (dark, minus)]:
            assert abs(a @ b) < 1e-12
        for v in (plus, minus, dark):
            assert v @ v == pytest.approx(1.0, abs=1e-12)


class TestEffectiveParams:
    def test_common_parameter_values(self, common_params):
        eff = cc.effective_params(common_params)
        assert eff.eta_eff == pytest.approx(0.15 * math.sqrt(2), abs=1e-14)
        assert eff.eta_eff == pytest.approx(0.21213, abs=1e-5)
        assert eff.omega_eff[0] == pytest.approx(0.19630, abs=1e-5)
        assert eff.gamma_eff[0] == pytest.approx(0.30861, abs=1e-5)
        # recompute through the eigensolve oracle
        _, sin_phi = eig_oracle(1.5, 15.0, 55.8125)
        theta = math.atan2(1.5, 15.0)
        omega_oracle = 1.5 * 15.0 * sin_phi / math.hypot(1.5, 15.0)
        gamma_oracle = sin_phi**2 * (18.0 * math.cos(theta)**2
                                     + 2.0 * math.sin(theta)**2)
        assert eff.omega_eff[0] == pytest.approx(omega_oracle, abs=1e-12)
        assert eff.gamma_eff[0] == pytest.approx(gamma_oracle, abs=1e-12)

    def test_orthogonal_projections_kill_recoil(self, common_params):
        p = replace(common_params, psi_g=np.pi / 2, psi_r=np.pi / 2)
        assert cc.effective_params(p).eta_eff == pytest.approx(0.0, abs=1e-16)

    def test_gamma_eff_identity(self, common_params):
        eff = cc.effective_params(common_params)
        for j in range(2):
            expected = math.sin(eff.phi[j])**2 * (
                common_params.gamma_g * math.cos(eff.theta[j])**2
                + common_params.gamma_r * math.sin(eff.theta[j])**2)
            assert eff.gamma_eff[j] == pytest.approx(expected, abs=1e-12)
            assert abs(math.tan(eff.theta[j])
                       - common_params.omega_g[j] / common_params.omega_r[j]) < 1e-12

    def test_pairwise_diagonal_sums_to_self_rate(self, common_params):
        eff = cc.effective_params(common_params)
        for j in range(2):
            total = (eff.gamma_eff_left[j][j] + eff.gamma_eff_right[j][j])
            assert total == pytest.approx(eff.gamma_eff[j], abs=1e-12)

    def test_cross_rate_cauchy_schwarz(self):
        rng = np.random.default_rng(23)
        for _ in range(25):
            og = rng.uniform(0.1, 4, size=2)
            om_r = rng.uniform(1.0, 20, size=2)
            p = cc.PhysicalParams.from_directionality(
                og, om_r, rng.uniform(0.5, 20), rng.uniform(0.1, 5),
                rng.uniform(0, 1))
            eff = cc.effective_params(p)
            cross = eff.gamma_eff_left[0][1] + eff.gamma_eff_right[0][1]
            bound = math.sqrt(eff.gamma_eff[0] * eff.gamma_eff[1])
            assert cross <= bound + 1e-12
            if abs(eff.theta[0] - eff.theta[1]) > 1e-3:
                assert cross < bound
        # equal mixing angles saturate the bound
        p = cc.PhysicalParams.from_directionality(
            [1.0, 2.0], [10.0, 20.0], 18.0, 2.0, 0.6)
        eff = cc.effective_params(p)
        cross = eff.gamma_eff_left[0][1] + eff.gamma_eff_right[0][1]
        assert cross == pytest.approx(
            math.sqrt(eff.gamma_eff[0] * eff.gamma_eff[1]), abs=1e-12)


class TestEffectiveLiouvillian:
    def test_single_atom_matches_sideband_formula(self):
        eff = cc.EffectiveParams(
            theta=(0.1,), phi=(0.5,), omega_eff=(0.14,), eta_eff=0.2121,
            gamma_eff=(0.15,), gamma_eff_left=((0.0,),),
            gamma_eff_right=((0.0,),), xi=2 * np.pi, nu=1.0)
        space = cc.build_space(1, 2, 2)
        L = cc.effective_liouvillian(eff, space)
        result = cc.steady_state(L, space=space)
        got = cc.expectation(result.rho, cc.phonon_number(space, 1)).real
        predicted = single_atom_occupation(0.15, 0.2121, 0.14, 1.0)
        assert got == pytest.approx(predicted, rel=2e-2)

    def test_decoupled_pair_equals_two_singles(self):
        pair = cc.EffectiveParams(
            theta=(0.1, 0.2), phi=(0.5, 0.4), omega_eff=(0.2, 0.1),
            eta_eff=0.2, gamma_eff=(0.2, 0.3),
            gamma_eff_left=((0.0, 0.0), (0.0, 0.0)),
            gamma_eff_right=((0.0, 0.0), (0.0, 0.0)), xi=2 * np.pi, nu=1.0)
        space2 = cc.build_space(2, 2, 1)
        res2 = cc.steady_state(cc.effective_liouvillian(pair, space2),
                               space=space2, check_kernel=False)
        single = cc.EffectiveParams(
            theta=(0.1,), phi=(0.5,), omega_eff=(0.2,), eta_eff=0.2,
            gamma_eff=(0.2,), gamma_eff_left=((0.0,),),
            gamma_eff_right=((0.0,),), xi=2 * np.pi, nu=1.0)
        space1 = cc.build_space(1, 2, 1)
        res1 = cc.steady_state(cc.effective_liouvillian(single, space1),
                               space=space1)
        n_pair = cc.expectation(res2.rho, cc.phonon_number(space2, 1)).real
        n_single = cc.expectation(res1.rho, cc.phonon_number(space1, 1)).real
        assert n_pair == pytest.approx(n_single, abs=1e-10)

    def test_trace_preservation(self, common_params):
        eff = cc.effective_params(common_params)
        space = cc.build_space(2, 2, 1)
        L = cc.effective_liouvillian(eff, space)
        rng = np.random.default_rng(24)
        rho = random_density(rng, 16)
        assert abs(np.trace(cc.apply_superoperator(L, rho))) < 1e-10

    def test_full_vs_effective_steady_state(self):
        """Strong-hierarchy parameters: the two-level reduction tracks the
        full three-level steady occupation within 20 percent."""
        p = cc.PhysicalParams.from_directionality(
            [3.0, 0.03], [30.0, 30.0], 18.0, 2.0, 0.5, eta_g=0.1, eta_r=0.1)
        report = cc.validity_report(p)
        assert report.min_ratio(1) > 3.5
        space = cc.space_for(p)
        full = cc.steady_state(cc.liouvillian(p, space), space=space,
                               check_kernel=False)
        n_full = cc.expectation(full.rho, cc.phonon_number(space, 1)).real
        eff = cc.effective_params(p)
        espace = cc.build_space(2, 2, 2)
        ered = cc.steady_state(cc.effective_liouvillian(eff, espace),
                               space=espace, check_kernel=False)
        n_eff = cc.expectation(ered.rho, cc.phonon_number(espace, 1)).real
        assert abs(n_full - n_eff) / n_full < 0.20


class TestValidityReport:
    def test_common_parameters_target_atom(self, common_params):
        report = cc.validity_report(common_params)
        atom1 = report.atoms[0]
        assert atom1.delta_over_omega_r == pytest.approx(3.7208, abs=1e-4)
        assert atom1.omega_r_over_nu == pytest.approx(15.0, abs=1e-12)
        assert atom1.sideband_drive_over_nu == pytest.approx(0.041641, abs=1e-5)
        assert atom1.gamma_eff_over_nu == pytest.approx(0.30861, abs=1e-5)
        assert all(atom1.flags(report.threshold).values())
        assert not report.warnings(sites=(1,))
        # the weakly driven partner atom is far outside the mapping regime
        assert report.warnings(sites=(2,))

    def test_weak_control_field_warns(self):
        p = cc.PhysicalParams.from_directionality([0.2], [2.0], 18.0, 2.0, 1.0)
        report = cc.validity_report(p)
        assert any("omega_r_over_nu" in w for w in report.warnings())

    def test_stronger_control_means_larger_detuning_ratio(self):
        sets = [(1.5, 15.0), (3.0, 30.0)]
        ratios = []
        for og, om_r in sets:
            p = cc.PhysicalParams.from_directionality([og], [om_r], 18.0, 2.0, 1.0)
            ratios.append(cc.validity_report(p).atoms[0].delta_over_omega_r)
        assert ratios[1] > ratios[0]

    def test_detuning_off_resonance_flagged(self):
        p = cc.PhysicalParams.from_directionality(
            [1.5], [15.0], 18.0, 2.0, 1.0, delta=(40.0,))
        report = cc.validity_report(p)
        assert not report.atoms[0].flags(report.threshold)["eit_resonance"]

    def test_serialisable(self, common_params):
        import json
        blob = json.dumps(cc.validity_report(common_params).to_dict())
        assert "delta_over_omega_r" in blob
