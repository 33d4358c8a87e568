"""Core types, dimensionless reduction, and the saturable qubit response."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.constants import e as E_CHARGE
from scipy.constants import hbar as HBAR

from qls import (
    DriveSpec,
    MicroscopicParams,
    ModelParams,
    derive_dimensionless,
    qubit_response,
)
from qls.errors import NonPositiveParameter
from qls.model import linear_beta, response_denominator


def make_micro(**overrides):
    base = dict(
        josephson_energy=HBAR * 2 * np.pi * 5e9,
        plasma_frequency=2 * np.pi * 20e9,
        coupling_alpha=0.05,
        qubit_size=3e-6,
        line_inductance_per_length=4e-7,
        line_capacitance_per_length=1.6e-10,
        system_length=1e-3,
        qubit_spacing=1e-5,
        qubit_count=10,
        relaxation_time=1e-7,
    )
    base.update(overrides)
    return MicroscopicParams(**base)


class TestMicroscopicParams:
    def test_rejects_nonpositive(self):
        with pytest.raises(NonPositiveParameter):
            make_micro(josephson_energy=0.0)
        with pytest.raises(NonPositiveParameter):
            make_micro(relaxation_time=-1.0)

    def test_rejects_overlong_array(self):
        with pytest.raises(ValueError):
            make_micro(qubit_count=200, qubit_spacing=1e-5)  # 2 mm > 1 mm

    def test_warns_on_large_qubit(self):
        with pytest.warns(UserWarning, match="w/l"):
            make_micro(qubit_size=2e-4)


class TestDeriveDimensionless:
    def test_alpha_scaling(self):
        # eta is linear in alpha, g quadratic in eta hence quartic... in
        # alpha it is quadratic through eta^2.
        p1 = derive_dimensionless(make_micro(coupling_alpha=0.05))
        p2 = derive_dimensionless(make_micro(coupling_alpha=0.10))
        assert p2.interaction_eta == pytest.approx(2.0 * p1.interaction_eta, rel=1e-12)
        assert p2.coupling_g == pytest.approx(4.0 * p1.coupling_g, rel=1e-12)

    def test_infinite_relaxation_time_kills_gamma(self):
        p = derive_dimensionless(make_micro(relaxation_time=1e12))
        assert p.gamma_q == pytest.approx(0.0, abs=1e-15)

    def test_round_trip_to_target_gamma_and_g(self):
        # Invert the definitions for the canonical dip parameters
        # Gamma = 1e-2, g = 0.06 and check the forward map reproduces them.
        target_gamma, target_g, target_eta = 1e-2, 0.06, 0.3
        e_j = HBAR * 2 * np.pi * 5e9
        omega_q = e_j / HBAR
        alpha = 0.01
        omega_p = (2.0 * e_j / HBAR) * np.sqrt(target_eta / alpha)
        l0, c0_per_len, ell = 4e-7, 1.6e-10, 1e-3
        c0 = 1.0 / np.sqrt(l0 * c0_per_len)
        w = target_g * E_CHARGE**2 * c0 * l0 * ell / (2.0 * target_eta**2 * HBAR)
        t_relax = 1.0 / (target_gamma * omega_q)
        micro = make_micro(
            josephson_energy=e_j,
            plasma_frequency=omega_p,
            coupling_alpha=alpha,
            qubit_size=w,
            line_inductance_per_length=l0,
            line_capacitance_per_length=c0_per_len,
            system_length=ell,
            relaxation_time=t_relax,
        )
        params = derive_dimensionless(micro)
        assert params.gamma_q == pytest.approx(target_gamma, rel=1e-12)
        assert params.coupling_g == pytest.approx(target_g, rel=1e-12)
        assert params.interaction_eta == pytest.approx(target_eta, rel=1e-12)
        # sanity: the inverted geometry is physically reasonable (micron scale)
        assert 1e-7 < w < 1e-4

    def test_geometry_maps_to_phase_lengths(self):
        micro = make_micro()
        params = derive_dimensionless(micro)
        omega_q = micro.josephson_energy / HBAR
        c0 = 1.0 / np.sqrt(
            micro.line_inductance_per_length * micro.line_capacitance_per_length
        )
        assert params.length_kl == pytest.approx(omega_q * 1e-3 / c0, rel=1e-12)
        assert params.spacing_ka == pytest.approx(omega_q * 1e-5 / c0, rel=1e-12)
        assert params.qubit_count == 10


class TestDriveSpec:
    def test_validation(self):
        DriveSpec(omega=1.0, power=0.0)
        with pytest.raises(NonPositiveParameter):
            DriveSpec(omega=0.0, power=1.0)
        with pytest.raises(NonPositiveParameter):
            DriveSpec(omega=1.0, power=-1.0)


class TestQubitResponse:
    params = ModelParams(gamma_q=1e-2, coupling_g=0.06, interaction_eta=0.5)

    def test_resonant_weak_drive_is_imaginary(self):
        q = 1e-6
        resp = qubit_response(1.0, q, self.params)
        expected = 1j * self.params.interaction_eta * q / self.params.gamma_q
        assert resp.s_value == pytest.approx(expected, rel=1e-6)

    def test_lossless_limit_matches_nondissipative_form(self):
        p0 = ModelParams(gamma_q=0.0, coupling_g=0.06, interaction_eta=0.5)
        omega, q = 0.95, 0.3
        resp = qubit_response(omega, q, p0)
        eta = p0.interaction_eta
        expected = eta * q * (1 - omega) / ((1 - omega) ** 2 + eta**2 * q**2)
        assert resp.s_value.imag == 0.0
        assert resp.s_value.real == pytest.approx(expected, rel=1e-12)

    def test_lossless_resonant_zero_drive_is_zero(self):
        p0 = ModelParams(gamma_q=0.0, coupling_g=0.06)
        resp = qubit_response(1.0, 0.0, p0)
        assert resp.s_value == 0.0
        assert resp.beta == 0.0

    def test_strong_drive_asymptote(self):
        omega = 1.02
        q = 1e4
        resp = qubit_response(omega, q, self.params)
        expected_mag = abs((1 - omega) + 1j * self.params.gamma_q) / (
            self.params.interaction_eta * q
        )
        assert abs(resp.s_value) == pytest.approx(expected_mag, rel=1e-4)

    def test_beta_shares_denominator(self):
        omega, q = 0.98, 0.7
        resp = qubit_response(omega, q, self.params)
        denom = response_denominator(omega, q, self.params)
        lorentz = ((1 - omega) + 1j * self.params.gamma_q) / denom
        assert resp.beta == pytest.approx(self.params.coupling_g * lorentz, rel=1e-12)
        assert resp.saturation_term == pytest.approx(
            (self.params.interaction_eta * abs(q)) ** 2, rel=1e-12
        )

    def test_linear_beta_is_zero_drive_beta(self):
        omega = 1.03
        assert linear_beta(omega, self.params) == qubit_response(
            omega, 0.0, self.params
        ).beta

    @given(
        omega=st.floats(0.5, 1.5),
        q=st.floats(1e-8, 1e4),
        gamma=st.floats(1e-6, 0.5),
    )
    @settings(max_examples=200, deadline=None)
    def test_denominator_bounded_below_and_absorptive(self, omega, q, gamma):
        params = ModelParams(gamma_q=gamma, coupling_g=0.1, interaction_eta=0.7)
        assert response_denominator(omega, q, params) >= gamma**2
        resp = qubit_response(omega, q, params)
        assert np.isfinite(resp.s_value.real) and np.isfinite(resp.s_value.imag)
        # absorptive sign convention for a real positive drive
        assert resp.s_value.imag >= 0.0

    @given(omega=st.floats(0.5, 1.5), q=st.floats(1e-8, 1e3))
    @settings(max_examples=100, deadline=None)
    def test_odd_in_drive(self, omega, q):
        resp_p = qubit_response(omega, q, self.params)
        resp_m = qubit_response(omega, -q, self.params)
        assert resp_m.s_value == pytest.approx(-resp_p.s_value, rel=1e-12)

    def test_saturation_monotone(self):
        omega = 1.01
        qs = np.logspace(-3, 3, 60)
        gains = [abs(qubit_response(omega, q, self.params).s_value) / q for q in qs]
        assert all(g1 > g2 for g1, g2 in zip(gains, gains[1:]))
