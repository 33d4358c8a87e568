"""Exact treatment of the qubit array as N point scatterers.

Each qubit is a delta scatterer: the field is a superposition of plane waves
``A exp(ikx) + B exp(-ikx)`` on every segment, continuous at the sites, with
the derivative jumping by ``-2 k zeta_n q_n`` at site n. The dimensionless
site coupling

    zeta_n = beta_n / (2 * omega_q * c0)

is the one frozen normalization constant of this module
(:data:`SITE_COUPLING_SCALE`); it makes the single-scatterer transmission
equal the closed-form Lorentzian dip of :mod:`qls.linear` identically, which
is what lets this module act as the machine-precision oracle for every
closed form. Sites sit at x_n = (n - 1/2) a, so N cells of length a fill
[0, N a] with half-cells at both ends.

The linear problem composes 2x2 transfer matrices; the nonlinear problem
fixes the transmitted amplitude and recurses from the output back to the
input, evaluating the saturable coupling at each site's local amplitude.
Parameterizing by output amplitude keeps the recursion single-valued even
where the transmission-vs-power curve folds over.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import Diverged, SingularMatrix
from .model import C0, OMEGA_Q, ModelParams, TransmissionResult, qubit_response

# zeta = SITE_COUPLING_SCALE * beta; derivative jump = -2 k zeta q. Frozen and
# unit-tested against the analytic single-scatterer solution.
SITE_COUPLING_SCALE = 1.0 / (2.0 * OMEGA_Q * C0)

# Renormalize the running matrix product when entries exceed this magnitude
# (deep band gaps grow exponentially with N).
_RENORM_LIMIT = 1e100


def wavevector(omega: float, params: ModelParams) -> complex:
    """Line wavevector k = sqrt(omega^2 + i*gamma*omega) / c0.

    Principal square root; for omega > 0 and gamma >= 0 this lands in the
    first quadrant automatically (Re k > 0, Im k >= 0, the decaying
    convention). Rotate by pi if a pathological input ever flips the sign.
    """
    k = np.sqrt(complex(omega * omega, params.line_damping * omega)) / C0
    if k.real < 0.0:
        k = -k
    if params.line_damping == 0.0:
        k = complex(k.real, 0.0)
    return k


def site_positions(params: ModelParams) -> np.ndarray:
    """Scatterer positions (n - 1/2) a for n = 1..N, in units of c0/omega_q."""
    a = params.spacing_ka
    n = params.qubit_count
    return (np.arange(1, n + 1) - 0.5) * a


def _site_matrix(zeta: complex, k: complex, x: float) -> np.ndarray:
    """Map (A, B) on the left of a site to (A, B) on its right."""
    phase = np.exp(2j * k * x)
    return np.array(
        [
            [1.0 + 1j * zeta, 1j * zeta / phase],
            [-1j * zeta * phase, 1.0 - 1j * zeta],
        ],
        dtype=complex,
    )


@dataclass(frozen=True)
class LatticeField:
    """Field profile over the lattice: site values plus per-segment waves.

    ``segment_coefficients`` holds (A, B) for the N+1 segments delimited by
    the sites; segment 0 is the incident side. ``site_amplitudes[n]`` is the
    field at site n evaluated from either adjacent segment (they agree to
    machine precision by construction).
    """

    site_amplitudes: np.ndarray
    segment_coefficients: np.ndarray
    wavevector: complex
    spacing: float

    def value_from_segment(self, seg: int, x: float) -> complex:
        a, b = self.segment_coefficients[seg]
        return a * np.exp(1j * self.wavevector * x) + b * np.exp(-1j * self.wavevector * x)

    def derivative_from_segment(self, seg: int, x: float) -> complex:
        a, b = self.segment_coefficients[seg]
        ik = 1j * self.wavevector
        return ik * (a * np.exp(ik * x) - b * np.exp(-ik * x))


def _compose(zetas, k, xs):
    """Product of site matrices, right-to-left, with overflow renormalization.

    Returns (matrix, log_scale): the true product is matrix * exp(log_scale).
    """
    m = np.eye(2, dtype=complex)
    log_scale = 0.0
    for zeta, x in zip(zetas, xs):
        m = _site_matrix(zeta, k, x) @ m
        peak = np.max(np.abs(m))
        if peak > _RENORM_LIMIT:
            m /= peak
            log_scale += np.log(peak)
    return m, log_scale


def linear_transfer_matrix_d(
    omega: float, params: ModelParams, beta_linear: complex
) -> TransmissionResult:
    """Exact linear transmission through N identical scatterers.

    ``beta_linear`` is the coupling evaluated at vanishing amplitude (use
    :func:`qls.model.linear_beta`); it is passed explicitly so cross-checks
    can freeze or replace it. Unit incident wave from the left, purely
    outgoing on the right; D = |t|^2, R = |r|^2.
    """
    k = wavevector(omega, params)
    zeta = SITE_COUPLING_SCALE * beta_linear
    xs = site_positions(params)
    m, log_scale = _compose([zeta] * params.qubit_count, k, xs)
    m22 = m[1, 1]
    if not np.isfinite(m22) or m22 == 0.0:
        raise SingularMatrix(f"composed matrix has m22 = {m22!r}")
    r = -m[1, 0] / m22
    # det(site) = 1, so t = 1 / (m22 * scale); evaluate via logs to survive
    # deep gaps where |m22| alone would overflow a double.
    log_t = -(np.log(abs(m22)) + log_scale)
    d = np.exp(2.0 * log_t) if log_t > -350.0 else 0.0
    rr = abs(r) ** 2
    return TransmissionResult(d=float(d), r=float(rr), absorption=float(1.0 - d - rr))


def lattice_field(
    omega: float, params: ModelParams, beta_linear: complex
) -> LatticeField:
    """Segment-by-segment field for the linear scattering solution."""
    k = wavevector(omega, params)
    zeta = SITE_COUPLING_SCALE * beta_linear
    xs = site_positions(params)
    m, log_scale = _compose([zeta] * params.qubit_count, k, xs)
    if not np.isfinite(m[1, 1]) or m[1, 1] == 0.0:
        raise SingularMatrix(f"composed matrix has m22 = {m[1, 1]!r}")
    if log_scale != 0.0:
        raise SingularMatrix("field reconstruction not supported in overflow regime")
    r = -m[1, 0] / m[1, 1]
    coeffs = np.empty((params.qubit_count + 1, 2), dtype=complex)
    coeffs[0] = (1.0, r)
    vec = np.array([1.0, r], dtype=complex)
    for n, x in enumerate(xs, start=1):
        vec = _site_matrix(zeta, k, x) @ vec
        coeffs[n] = vec
    sites = np.array(
        [
            coeffs[n][0] * np.exp(1j * k * x) + coeffs[n][1] * np.exp(-1j * k * x)
            for n, x in enumerate(xs)
        ]
    )
    return LatticeField(
        site_amplitudes=sites,
        segment_coefficients=coeffs,
        wavevector=k,
        spacing=params.spacing_ka,
    )


def lattice_dispersion_check(
    omega: float, params: ModelParams, beta_linear: complex
) -> complex:
    """Bloch factor cos(K a) per lattice cell for the infinite array.

    Returns cos(ka) - zeta * sin(ka); |result| > 1 flags a gap (evanescent
    Bloch solutions). N is ignored: this is the infinite-lattice
    idealization of the same per-site convention used by the transfer
    matrix.
    """
    k = wavevector(omega, params)
    zeta = SITE_COUPLING_SCALE * beta_linear
    ka = k * params.spacing_ka
    return complex(np.cos(ka) - zeta * np.sin(ka))


def in_band_gap(omega: float, params: ModelParams, beta_linear: complex) -> bool:
    """True when the infinite-lattice Bloch factor flags evanescent waves."""
    return abs(lattice_dispersion_check(omega, params, beta_linear)) > 1.0


def nonlinear_backward_recursion_d(
    omega: float,
    params: ModelParams,
    transmitted_amp: float,
    *,
    return_field: bool = False,
):
    """Nonlinear lattice transmission at fixed transmitted amplitude.

    Fixes the outgoing wave t*exp(ikx) with |t| = ``transmitted_amp`` beyond
    the last site and recurses site by site toward the input, evaluating the
    saturable coupling at each site's local amplitude. The leftmost segment
    then splits into incident A and reflected B, giving

        D = |t / A|^2,   P = |A|^2.

    Returns ``(TransmissionResult, P)``; with ``return_field=True`` a
    :class:`LatticeField` of the nonlinear solution is appended.

    Raises
    ------
    Diverged
        If any site amplitude exceeds 1e6 times the transmitted amplitude
        (passive scatterers cannot amplify; this flags a corrupted state).
    """
    if not transmitted_amp > 0.0:
        raise ValueError(f"transmitted_amp must be > 0, got {transmitted_amp!r}")
    k = wavevector(omega, params)
    xs = site_positions(params)
    n_sites = params.qubit_count
    coeffs = np.empty((n_sites + 1, 2), dtype=complex)
    coeffs[n_sites] = (transmitted_amp, 0.0)
    sites = np.empty(n_sites, dtype=complex)
    limit = 1e6 * transmitted_amp

    vec = np.array([transmitted_amp, 0.0], dtype=complex)
    for n in range(n_sites - 1, -1, -1):
        x = xs[n]
        q_site = vec[0] * np.exp(1j * k * x) + vec[1] * np.exp(-1j * k * x)
        if abs(q_site) > limit:
            raise Diverged(
                f"site amplitude {abs(q_site):.3e} exceeds {limit:.3e} at site {n + 1}"
            )
        sites[n] = q_site
        zeta = SITE_COUPLING_SCALE * qubit_response(omega, q_site, params).beta
        site_m = _site_matrix(zeta, k, x)
        # Site matrices are unimodular; invert in closed form.
        inv = np.array(
            [[site_m[1, 1], -site_m[0, 1]], [-site_m[1, 0], site_m[0, 0]]],
            dtype=complex,
        )
        vec = inv @ vec
        coeffs[n] = vec

    a_in, b_in = coeffs[0]
    if a_in == 0.0 or not np.isfinite(a_in):
        raise SingularMatrix(f"incident amplitude came out as {a_in!r}")
    power = abs(a_in) ** 2
    d = transmitted_amp**2 / power
    rr = abs(b_in / a_in) ** 2
    result = TransmissionResult(d=float(d), r=float(rr), absorption=float(1.0 - d - rr))
    if return_field:
        fld = LatticeField(
            site_amplitudes=sites,
            segment_coefficients=coeffs,
            wavevector=k,
            spacing=params.spacing_ka,
        )
        return result, float(power), fld
    return result, float(power)
