"""Domain types and the saturable qubit response.

Everything downstream works in dimensionless units: frequencies in units of
the qubit frequency (omega_q = 1), velocities in units of the line's wave
speed (c0 = 1), charge amplitudes in units of the elementary charge. The
conversion from a microscopic SI description lives in
:func:`derive_dimensionless`; all solvers consume :class:`ModelParams`.

The qubit enters the wave problem through a saturable Lorentzian response:
a drive of complex amplitude ``q`` at frequency ``omega`` induces

    S = eta * ((1 - omega) + i*Gamma) / ((1 - omega)^2 + Gamma^2 + eta^2 |q|^2) * q

whose power-broadened denominator encodes the equalization of level
populations at strong drive. :func:`bloch_oracle` provides an independent
time-domain check of this formula by integrating the driven, damped two-level
density matrix and reading off the steady-state coherence.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import e as _E_CHARGE
from scipy.constants import hbar as _HBAR
from scipy.integrate import solve_ivp

from .errors import NonPositiveParameter, NotConverged

# Working units of every solver. Frozen here so the one place the
# normalization enters the scattering conventions is greppable.
OMEGA_Q = 1.0
C0 = 1.0


@dataclass(frozen=True)
class MicroscopicParams:
    """SI-unit description of the device.

    Attributes
    ----------
    josephson_energy : float
        Junction energy scale E_J in joules; sets the qubit splitting.
    plasma_frequency : float
        Junction plasma frequency in rad/s.
    coupling_alpha : float
        Dimensionless qubit-line coupling coefficient; spans roughly
        1e-2 (weakly coupled) to 4e2 (galvanically coupled) devices.
    qubit_size : float
        Geometric size w of one lumped circuit in meters, w << system_length.
    line_inductance_per_length : float
        L0 in H/m.
    line_capacitance_per_length : float
        C0 in F/m.
    system_length : float
        Total line length carrying qubits, in meters.
    qubit_spacing : float
        Distance between adjacent qubits in meters.
    qubit_count : int
        Number of qubits in the array.
    relaxation_time : float
        Qubit relaxation time T in seconds.
    line_damping : float
        Phenomenological line damping rate in rad/s (may be zero).
    """

    josephson_energy: float
    plasma_frequency: float
    coupling_alpha: float
    qubit_size: float
    line_inductance_per_length: float
    line_capacitance_per_length: float
    system_length: float
    qubit_spacing: float
    qubit_count: int
    relaxation_time: float
    line_damping: float = 0.0

    def __post_init__(self):
        positive = (
            ("josephson_energy", self.josephson_energy),
            ("plasma_frequency", self.plasma_frequency),
            ("coupling_alpha", self.coupling_alpha),
            ("qubit_size", self.qubit_size),
            ("line_inductance_per_length", self.line_inductance_per_length),
            ("line_capacitance_per_length", self.line_capacitance_per_length),
            ("system_length", self.system_length),
            ("qubit_spacing", self.qubit_spacing),
            ("relaxation_time", self.relaxation_time),
        )
        for name, value in positive:
            if not value > 0.0:
                raise NonPositiveParameter(f"{name} must be > 0, got {value!r}")
        if self.qubit_count < 1:
            raise NonPositiveParameter(f"qubit_count must be >= 1, got {self.qubit_count!r}")
        if self.line_damping < 0.0:
            raise NonPositiveParameter(f"line_damping must be >= 0, got {self.line_damping!r}")
        if self.qubit_count * self.qubit_spacing > self.system_length * (1 + 1e-12):
            raise ValueError(
                "qubit_count * qubit_spacing exceeds system_length "
                f"({self.qubit_count} * {self.qubit_spacing} > {self.system_length})"
            )
        if self.qubit_size / self.system_length >= 0.1:
            warnings.warn(
                "qubit_size is not small against system_length (w/l >= 0.1); "
                "the point-scatterer treatment degrades",
                stacklevel=2,
            )


@dataclass(frozen=True)
class ModelParams:
    """Dimensionless parameter set consumed by every solver.

    Attributes
    ----------
    gamma_q : float
        Qubit relaxation rate Gamma = 1/(T * omega_q). Zero is accepted to
        allow lossless cross-checks even though real devices always have
        Gamma > 0.
    coupling_g : float
        Qubit-line interaction strength g; controls the depth of the
        resonant transmission dip.
    interaction_eta : float
        Drive-saturation strength eta; eta^2 |q|^2 broadens the response.
    line_damping : float
        Line damping gamma/omega_q (gives the wavevector its imaginary part).
    length_kl : float
        System length in units of c0/omega_q, i.e. k*l evaluated on
        resonance.
    spacing_ka : float
        Qubit spacing in the same units, i.e. k*a on resonance.
    qubit_count : int
        Number of point scatterers for lattice solvers.
    """

    gamma_q: float
    coupling_g: float
    interaction_eta: float = 1.0
    line_damping: float = 0.0
    length_kl: float = 0.0
    spacing_ka: float = 0.0
    qubit_count: int = 1

    def __post_init__(self):
        if self.gamma_q < 0.0:
            raise NonPositiveParameter(f"gamma_q must be >= 0, got {self.gamma_q!r}")
        if self.coupling_g < 0.0:
            raise NonPositiveParameter(f"coupling_g must be >= 0, got {self.coupling_g!r}")
        if not self.interaction_eta > 0.0:
            raise NonPositiveParameter(
                f"interaction_eta must be > 0, got {self.interaction_eta!r}"
            )
        if self.line_damping < 0.0:
            raise NonPositiveParameter(f"line_damping must be >= 0, got {self.line_damping!r}")
        if self.length_kl < 0.0 or self.spacing_ka < 0.0:
            raise NonPositiveParameter("length_kl and spacing_ka must be >= 0")
        if self.qubit_count < 1:
            raise NonPositiveParameter(f"qubit_count must be >= 1, got {self.qubit_count!r}")


@dataclass(frozen=True)
class DriveSpec:
    """One scattering problem: drive frequency and incident power.

    ``power`` is |A|^2 where A is the incident charge amplitude in units of
    the elementary charge.
    """

    omega: float
    power: float

    def __post_init__(self):
        if not self.omega > 0.0:
            raise NonPositiveParameter(f"omega must be > 0, got {self.omega!r}")
        if self.power < 0.0:
            raise NonPositiveParameter(f"power must be >= 0, got {self.power!r}")


@dataclass(frozen=True)
class QubitResponse:
    """Saturable response of one qubit to a local drive amplitude.

    ``s_value`` is the induced coherence amplitude, ``beta`` the coupling
    coefficient entering the wave equation (units of omega_q^2), and
    ``saturation_term`` the dimensionless power-broadening eta^2 |q|^2.
    """

    s_value: complex
    beta: complex
    saturation_term: float


@dataclass(frozen=True)
class TransmissionResult:
    """Transmission outcome for one (omega, power) point.

    ``absorption`` is 1 - d - r. ``branch`` is one of ``lower``, ``middle``,
    ``upper`` (multivalued regimes) or ``unique``. ``residual`` is the
    solver's own consistency measure (root residual, conservation drift, or
    cross-check deviation depending on the producing operation). ``flags``
    carries diagnostic regime notes, never errors.
    """

    d: float
    r: float
    absorption: float
    branch: str = "unique"
    residual: float = 0.0
    converged: bool = True
    flags: tuple = field(default_factory=tuple)


def derive_dimensionless(micro: MicroscopicParams) -> ModelParams:
    """Map microscopic SI constants onto the dimensionless groups.

    The qubit frequency is omega_q = E_J / hbar and the line wave speed
    c0 = 1/sqrt(L0 C0). The derived groups are

        eta   = alpha * (hbar * omega_p / (2 E_J))^2
        g     = 2 eta^2 * hbar * w / (e^2 * c0 * L0 * l)
        Gamma = 1 / (T * omega_q)

    together with the geometry expressed as on-resonance phase lengths.
    """
    omega_q = micro.josephson_energy / _HBAR
    c0 = 1.0 / np.sqrt(
        micro.line_inductance_per_length * micro.line_capacitance_per_length
    )
    eta = micro.coupling_alpha * (
        _HBAR * micro.plasma_frequency / (2.0 * micro.josephson_energy)
    ) ** 2
    g = (
        2.0
        * eta**2
        * _HBAR
        * micro.qubit_size
        / (
            _E_CHARGE**2
            * c0
            * micro.line_inductance_per_length
            * micro.system_length
        )
    )
    return ModelParams(
        gamma_q=1.0 / (micro.relaxation_time * omega_q),
        coupling_g=g,
        interaction_eta=eta,
        line_damping=micro.line_damping / omega_q,
        length_kl=omega_q * micro.system_length / c0,
        spacing_ka=omega_q * micro.qubit_spacing / c0,
        qubit_count=micro.qubit_count,
    )


def response_denominator(omega: float, q_amp: complex, params: ModelParams) -> float:
    """Power-broadened Lorentzian denominator; >= Gamma^2 > 0 for Gamma > 0."""
    detune = 1.0 - omega / OMEGA_Q
    sat = (params.interaction_eta * abs(q_amp)) ** 2
    return detune * detune + params.gamma_q**2 + sat


def qubit_response(omega: float, q_amp: complex, params: ModelParams) -> QubitResponse:
    """Saturable qubit response S and wave-equation coupling beta.

    Parameters
    ----------
    omega : float
        Drive frequency in units of omega_q; must be positive.
    q_amp : complex
        Local charge amplitude at the qubit, in units of e.
    params : ModelParams

    Returns
    -------
    QubitResponse
        With ``beta = g * c0 * omega_q * ((1 - omega) + i*Gamma) / denom``
        sharing the same saturated denominator as S.

    Notes
    -----
    For Gamma = 0 at exact resonance the numerator's q prefactor keeps the
    response finite (S -> 0 with q), so no special casing is needed beyond
    avoiding 0/0 at q = 0.
    """
    if not omega > 0.0:
        raise NonPositiveParameter(f"omega must be > 0, got {omega!r}")
    detune = 1.0 - omega / OMEGA_Q
    denom = response_denominator(omega, q_amp, params)
    numer = detune + 1j * params.gamma_q
    if denom == 0.0:
        # Only reachable for Gamma = 0, omega = omega_q, q = 0.
        return QubitResponse(s_value=0.0 + 0.0j, beta=0.0 + 0.0j, saturation_term=0.0)
    lorentz = numer / denom
    s_value = params.interaction_eta * lorentz * q_amp
    beta = params.coupling_g * C0 * OMEGA_Q * lorentz
    sat = (params.interaction_eta * abs(q_amp)) ** 2
    return QubitResponse(s_value=s_value, beta=beta, saturation_term=sat)


def linear_beta(omega: float, params: ModelParams) -> complex:
    """Coupling beta evaluated at vanishing drive (the linear response)."""
    return qubit_response(omega, 0.0, params).beta


def _bloch_rhs(t, v, omega, gamma, drive):
    """Bloch equations for H = (1/2) sigma_z + drive*cos(omega t) sigma_x.

    Longitudinal and transverse relaxation share the single rate ``gamma``,
    pulling toward the ground state z = -1.
    """
    x, y, z = v
    f = drive * np.cos(omega * t)
    return (
        -y - gamma * x,
        x - 2.0 * f * z - gamma * y,
        2.0 * f * y - gamma * (z + 1.0),
    )


def bloch_oracle(
    omega: float,
    q_amp: float,
    params: ModelParams,
    t_max: float | None = None,
    *,
    extract_periods: int = 8,
    samples_per_period: int = 64,
    rtol: float = 1e-9,
    drift_tol: float = 1e-4,
) -> complex:
    """Time-domain density-matrix estimate of the qubit response.

    Integrates the driven two-level Bloch equations from the ground state to
    a steady state, projects the coherence rho_01 = (x - i y)/2 onto the
    drive-frequency harmonic over the last ``extract_periods`` drive periods,
    and rescales so the result is directly comparable with
    ``qubit_response(...).s_value``.

    This deliberately stays in the lab frame with the full cosine drive: it
    shares none of the rotating-frame steps that produce the closed-form
    response, so agreement between the two is a genuine consistency check.

    Parameters
    ----------
    omega, q_amp, params
        Drive frequency, real drive amplitude, and model constants.
        Requires Gamma > 0 so a steady state exists.
    t_max : float, optional
        Total integration window. Defaults to 12/Gamma plus the extraction
        window, rounded to whole drive periods.

    Raises
    ------
    NotConverged
        If the per-period harmonic amplitude still drifts by more than
        ``drift_tol`` (relative) over the last 20% of the extraction window.
    """
    if not params.gamma_q > 0.0:
        raise NonPositiveParameter("bloch_oracle requires gamma_q > 0 for a steady state")
    if not omega > 0.0:
        raise NonPositiveParameter(f"omega must be > 0, got {omega!r}")
    period = 2.0 * np.pi / omega
    if t_max is None:
        t_max = 12.0 / params.gamma_q + extract_periods * period
    n_total = max(int(np.ceil(t_max / period)), extract_periods + 1)
    t_end = n_total * period
    t_start = t_end - extract_periods * period
    if t_start <= 0.0:
        raise NonPositiveParameter("t_max too short for the extraction window")

    drive = params.interaction_eta * q_amp
    n_pts = extract_periods * samples_per_period + 1
    t_eval = np.linspace(t_start, t_end, n_pts)
    sol = solve_ivp(
        _bloch_rhs,
        (0.0, t_end),
        (0.0, 0.0, -1.0),
        method="DOP853",
        rtol=rtol,
        atol=1e-13,
        t_eval=t_eval,
        args=(omega, params.gamma_q, drive),
    )
    if not sol.success:
        raise NotConverged(f"Bloch integration failed: {sol.message}")

    x, y, _ = sol.y
    coherence = 0.5 * (x - 1j * y)
    kernel = np.exp(1j * omega * sol.t)
    window = extract_periods * period
    value = -2.0 * np.trapezoid(coherence * kernel, sol.t) / window

    # Per-period harmonic over the last 20% of the window: any residual
    # transient shows up as a drift between periods.
    n_check = max(2, int(np.ceil(0.2 * extract_periods)))
    per_period = []
    for m in range(extract_periods - n_check, extract_periods):
        sl = slice(m * samples_per_period, (m + 1) * samples_per_period + 1)
        per_period.append(
            -2.0 * np.trapezoid(coherence[sl] * kernel[sl], sol.t[sl]) / period
        )
    scale = max(abs(value), 1e-300)
    drift = max(abs(p - value) for p in per_period) / scale
    if drift > drift_tol:
        raise NotConverged(
            f"steady-state harmonic drifts by {drift:.3e} (> {drift_tol:.1e}) "
            "over the last periods; increase t_max"
        )
    return complex(value)
