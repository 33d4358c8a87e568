"""Closed-form low-power transmission: single qubit and effective barrier.

The single qubit gives a Lorentzian dip

    D(omega) = [1 + (g/4)(g + 4*Gamma) / ((omega - 1)^2 + Gamma^2)]^-1

and a dense array acts as a rectangular barrier with strength

    K(omega) = (g c0 / (omega_q a)) * ((1 - omega) + i*Gamma)
               / ((1 - omega)^2 + Gamma^2),

transmitted per |cos(kl sqrt(K)) + (i/2) sqrt(K) sin(kl sqrt(K))|^-2. That
default form is the strong-barrier asymptote: it drops a 1/sqrt(K) matching
term and carries an interference sign that only matters once K is complex.
The full plane-wave matching factor (sqrt(K) + 1/sqrt(K))/2 is available
through ``variant="matched"`` for cross-checks (the two agree for K >> 1,
and only the matched variant is exactly flux-conserving for real K).
"""

from __future__ import annotations

from dataclasses import dataclass

import warnings

import numpy as np

from . import lattice
from .errors import DenseArrayViolation, TrigOverflow
from .model import C0, OMEGA_Q, ModelParams, TransmissionResult, linear_beta

# exp(|Im z|) overflows a double near 709; stay safely below.
_IM_CLAMP = 700.0

# Numerical slack on the physical bound D <= 1.
_D_EPS = 1e-10


@dataclass(frozen=True)
class BarrierCoefficient:
    """Effective barrier strength of the dense array at one frequency."""

    k_value: complex
    wavevector: complex
    kl_product: complex


def _exp_cos_sin(z: complex) -> tuple[complex, complex]:
    """cos(z), sin(z) via exponentials, guarded against overflow."""
    if abs(z.imag) > _IM_CLAMP:
        raise TrigOverflow(
            f"|Im(kl*sqrt(K))| = {abs(z.imag):.1f} > {_IM_CLAMP:.0f}; "
            "the barrier is opaque beyond double precision"
        )
    ep = np.exp(1j * z)
    em = np.exp(-1j * z)
    return 0.5 * (ep + em), (ep - em) / 2j


def single_qubit_linear_d(omega: float, params: ModelParams) -> TransmissionResult:
    """Low-power transmission past a single qubit.

    D comes from the closed form; R and absorption are filled from the
    companion single-site transfer matrix so the result carries the full
    (D, R, absorption) triple. ``residual`` reports the relative deviation
    between the two routes (zero to rounding at gamma_line = 0).
    """
    detune = omega / OMEGA_Q - 1.0
    g = params.coupling_g
    gamma = params.gamma_q
    d = 1.0 / (1.0 + 0.25 * g * (g + 4.0 * gamma) / (detune**2 + gamma**2))
    companion = lattice.linear_transfer_matrix_d(
        omega, _single_site(params), linear_beta(omega, params)
    )
    resid = abs(companion.d - d) / d if d > 0.0 else 0.0
    return TransmissionResult(
        d=float(d),
        r=companion.r,
        absorption=float(1.0 - d - companion.r),
        residual=float(resid),
    )


def _single_site(params: ModelParams) -> ModelParams:
    if params.qubit_count == 1 and params.spacing_ka > 0.0:
        return params
    return ModelParams(
        gamma_q=params.gamma_q,
        coupling_g=params.coupling_g,
        interaction_eta=params.interaction_eta,
        line_damping=params.line_damping,
        length_kl=params.length_kl,
        spacing_ka=params.spacing_ka if params.spacing_ka > 0.0 else 1.0,
        qubit_count=1,
    )


def barrier_coefficient(omega: float, params: ModelParams) -> BarrierCoefficient:
    """Barrier strength K(omega), wavevector, and phase length k*l."""
    if not params.spacing_ka > 0.0:
        raise ValueError("barrier_coefficient requires spacing_ka > 0")
    detune = 1.0 - omega / OMEGA_Q
    lorentz = (detune + 1j * params.gamma_q) / (detune**2 + params.gamma_q**2)
    k_value = (params.coupling_g * C0 / (OMEGA_Q * params.spacing_ka)) * lorentz
    k = lattice.wavevector(omega, params)
    ell = params.length_kl * C0 / OMEGA_Q
    return BarrierCoefficient(k_value=k_value, wavevector=k, kl_product=k * ell)


def array_linear_d(
    omega: float, params: ModelParams, *, variant: str = "asymptotic"
) -> TransmissionResult:
    """Low-power transmission through the dense array as an effective barrier.

    ``variant="asymptotic"`` (default) evaluates the strong-barrier form
    with the (1/2) sqrt(K) prefactor; ``variant="matched"`` uses the full
    rectangular-barrier matching factor (sqrt(K) + 1/sqrt(K))/2 with the
    opposite interference sign. Reflection is always filled from the full
    matching, and the asymptotic form can exceed D = 1 once K is complex;
    such points are flagged ``nonphysical_d`` rather than rejected.

    Emits :class:`DenseArrayViolation` (a warning) when k*a >= 0.2.
    """
    if variant not in ("asymptotic", "matched"):
        raise ValueError(f"unknown variant {variant!r}")
    coeff = barrier_coefficient(omega, params)
    flags = []
    ka = abs(coeff.wavevector) * params.spacing_ka
    if ka >= 0.2:
        warnings.warn(
            DenseArrayViolation(f"k*a = {ka:.3f} >= 0.2; dense-array formula degraded"),
            stacklevel=2,
        )
        flags.append("dense_array_violation")
    if abs(coeff.kl_product) >= 1.0:
        flags.append("long_system")
    if abs(coeff.k_value) * abs(coeff.wavevector) ** 2 <= 10.0 * OMEGA_Q**2:
        flags.append("weak_barrier_regime")

    if coeff.k_value == 0.0:
        return TransmissionResult(d=1.0, r=0.0, absorption=0.0, flags=tuple(flags))
    sqrt_k = np.sqrt(coeff.k_value)  # principal branch, Re >= 0
    z = coeff.kl_product * sqrt_k
    cos_z, sin_z = _exp_cos_sin(z)
    if variant == "asymptotic":
        amp = cos_z + 0.5j * sqrt_k * sin_z
    else:
        amp = cos_z - 0.5j * (sqrt_k + 1.0 / sqrt_k) * sin_z
    with np.errstate(over="ignore"):
        denom = abs(amp) ** 2
    d = 0.0 if np.isinf(denom) else 1.0 / denom
    # Reflected amplitude from the same plane-wave matching (exact for the
    # matched variant: |amp|^2 - |refl|^2 = 1 when K and k are real).
    refl = 0.5j * (sqrt_k - 1.0 / sqrt_k) * sin_z
    with np.errstate(over="ignore", invalid="ignore"):
        ratio = np.abs(refl) ** 2 / denom
    r = float(ratio) if np.isfinite(ratio) else 1.0
    if d > 1.0 + _D_EPS:
        flags.append("nonphysical_d")
    return TransmissionResult(
        d=float(d),
        r=r,
        absorption=float(1.0 - d - r),
        flags=tuple(flags),
    )
