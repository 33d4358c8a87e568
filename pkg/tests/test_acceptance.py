"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Every criterion runs at its stated tolerance and wall-clock budget. Helper
assertions funnel through _report so the summary is greppable:

    pytest tests/test_acceptance.py -v -s
"""

import hashlib
import os
import subprocess
import sys
import time

import numpy as np

from qls import (
    ModelParams,
    array_linear_d,
    bloch_oracle,
    closed_form_nonlinear_d,
    linear_beta,
    linear_transfer_matrix_d,
    nonlinear_backward_recursion_d,
    qubit_response,
    shoot_nonlinear_bvp,
    shooting_trajectory,
    single_qubit_linear_d,
    single_qubit_nonlinear_roots,
    trace_d_vs_power,
    z_parameter,
)
from qls.continuum import params_for_continuum
from qls.lattice import in_band_gap


def _report(cid, ok, detail, elapsed, budget):
    status = "PASS" if ok else "FAIL"
    line = f"[{cid}] {status} ({elapsed:.2f}s / budget {budget:.0f}s) {detail}"
    print(line)
    assert ok, line
    assert elapsed < budget, f"[{cid}] exceeded runtime budget: {elapsed:.2f}s >= {budget}s"


def dip_params(gamma, g):
    return ModelParams(gamma_q=gamma, coupling_g=g, interaction_eta=1.0, spacing_ka=1.0)


def array_params(g_over_a, kl, gamma, n=100):
    a = kl / n
    return ModelParams(
        gamma_q=gamma, coupling_g=g_over_a * a, interaction_eta=1.0,
        length_kl=kl, spacing_ka=a, qubit_count=n,
    )


def test_c01_single_qubit_dip_pin():
    t0 = time.perf_counter()
    params = dip_params(1e-2, 0.06)
    d_res = single_qubit_linear_d(1.0, params).d
    ok = abs(d_res - 0.0625) < 1e-12
    omegas = np.linspace(0.9, 1.1, 10001)
    ds = np.array([single_qubit_linear_d(w, params).d for w in omegas])
    ok = ok and abs(omegas[int(np.argmin(ds))] - 1.0) < 1e-12
    _report(
        "C01", ok,
        f"D(omega_q)={d_res:.15f}, argmin at omega={omegas[int(np.argmin(ds))]:.6f}",
        time.perf_counter() - t0, 1.0,
    )


def test_c02_transfer_matrix_cross_oracle():
    t0 = time.perf_counter()
    params = dip_params(1e-2, 0.06)
    worst = 0.0
    for omega in np.linspace(0.9, 1.1, 200):
        d_cf = single_qubit_linear_d(omega, params).d
        d_tm = linear_transfer_matrix_d(omega, params, linear_beta(omega, params)).d
        worst = max(worst, abs(d_tm - d_cf) / d_cf)
    _report(
        "C02", worst < 1e-10, f"worst relative deviation {worst:.3e}",
        time.perf_counter() - t0, 1.0,
    )


def test_c03_lossless_unitarity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst = 0.0
    for n in (1, 10, 100):
        params = ModelParams(
            gamma_q=0.0, coupling_g=0.05, interaction_eta=1.0,
            length_kl=0.02 * n, spacing_ka=0.02, qubit_count=n,
        )
        for omega in rng.uniform(0.8, 1.2, size=100):
            beta = linear_beta(omega, params)
            assert beta.imag == 0.0
            res = linear_transfer_matrix_d(omega, params, beta)
            worst = max(worst, abs(res.d + res.r - 1.0))
    _report(
        "C03", worst < 1e-12, f"worst |D+R-1| = {worst:.3e} over N in (1,10,100)",
        time.perf_counter() - t0, 5.0,
    )


def test_c04_bistability_window_and_folds():
    t0 = time.perf_counter()
    params = dip_params(1e-2, 0.346)  # g/Gamma = 34.6
    p_grid = np.logspace(-6, 0, 1000)
    counts = np.array(
        [len(single_qubit_nonlinear_roots(1.0, params, p)) for p in p_grid]
    )
    window_ok = np.any(counts == 3)

    none_ok = True
    for rho in (0.5, 1.0):
        low = dip_params(1e-2, rho * 1e-2)
        for p in np.logspace(-8, 2, 1000):
            if len(single_qubit_nonlinear_roots(1.0, low, p)) != 1:
                none_ok = False
                break

    curve_a = trace_d_vs_power(1.0, params, np.logspace(-4, -1, 200))
    curve_b = trace_d_vs_power(1.0, params, np.logspace(-4.2, -0.9, 173))
    folds_ok = len(curve_a.fold_points) == 2 and len(curve_b.fold_points) == 2
    repro_ok = folds_ok and all(
        abs(pa - pb) / pa < 1e-6 and abs(da - db) / da < 1e-6
        for (pa, da), (pb, db) in zip(curve_a.fold_points, curve_b.fold_points)
    )
    regress_ok = folds_ok and (
        abs(curve_a.fold_points[0][0] - 6.491581958e-3) / 6.491581958e-3 < 1e-6
        and abs(curve_a.fold_points[1][0] - 9.440610858e-3) / 9.440610858e-3 < 1e-6
    )
    detail = (
        f"window={window_ok}, low-ratio none={none_ok}, "
        f"folds at P={[f'{p:.9e}' for p, _ in curve_a.fold_points]}, "
        f"regrid reproducible={repro_ok}, regression={regress_ok}"
    )
    _report(
        "C04", window_ok and none_ok and repro_ok and regress_ok, detail,
        time.perf_counter() - t0, 10.0,
    )


def test_c05_lattice_vs_transcendental_s_curve():
    t0 = time.perf_counter()
    params = ModelParams(
        gamma_q=1e-2, coupling_g=0.346, interaction_eta=1.0,
        length_kl=0.5, spacing_ka=0.5, qubit_count=1,
    )
    amps = np.logspace(-3, -0.5, 100)
    worst = 0.0
    powers = []
    for amp in amps:
        res, power = nonlinear_backward_recursion_d(1.0, params, amp)
        roots = single_qubit_nonlinear_roots(1.0, params, power)
        worst = max(worst, min(abs(root - res.d) for root in roots))
        powers.append(power)
    # the sampled powers must actually span the fold region
    spans = min(powers) < 6.49e-3 and max(powers) > 9.45e-3
    _report(
        "C05", worst < 1e-6 and spans,
        f"worst |D_lattice - D_root| = {worst:.3e} over 100 matched powers",
        time.perf_counter() - t0, 10.0,
    )


def _interior_maxima_above(omegas, ds, threshold):
    idx = np.nonzero(
        (ds[1:-1] > ds[:-2]) & (ds[1:-1] >= ds[2:]) & (ds[1:-1] > threshold)
    )[0] + 1
    return idx


def test_c06_resonant_transparency_fig4():
    t0 = time.perf_counter()
    omegas = np.linspace(0.9, 1.1, 20001)

    weak = array_params(9.0, 0.01, 3e-3)
    ds_weak = np.array([array_linear_d(w, weak).d for w in omegas])
    weak_peaks = _interior_maxima_above(omegas, ds_weak, 0.5)
    crossings = int(np.sum(np.diff(ds_weak < 0.5)))
    weak_ok = len(weak_peaks) == 0 and crossings == 2

    strong = array_params(900.0, 0.01, 3e-3)
    ds_strong = np.array([array_linear_d(w, strong).d for w in omegas])
    strong_peaks = _interior_maxima_above(omegas, ds_strong, 0.5)
    peak_exists = len(strong_peaks) > 0
    peak_in_gap = peak_exists and all(
        in_band_gap(omegas[i], strong, linear_beta(omegas[i], strong))
        for i in strong_peaks
    )
    best = float(ds_strong[1:-1].max())
    detail = (
        f"g*c0/(wq*a)=9: single dip, no peak>0.5: {weak_ok}; "
        f"g*c0/(wq*a)=900: peak>0.5 exists: {peak_exists} "
        f"(max internal D={best:.3e}), inside dispersion gap: {peak_in_gap}"
    )
    _report(
        "C06", weak_ok and peak_exists and peak_in_gap, detail,
        time.perf_counter() - t0, 5.0,
    )


def test_c07_peak_multiplication_fig5():
    t0 = time.perf_counter()
    omegas = np.linspace(0.9, 1.1, 40001)
    counts = {}
    for kl in (0.08, 0.32):
        params = array_params(9.0, kl, 3e-3)
        ds = np.array([array_linear_d(w, params).d for w in omegas])
        inside = ds < 0.5
        if np.any(inside):
            first, last = np.nonzero(inside)[0][[0, -1]]
        else:
            first, last = 0, len(omegas) - 1
        peaks = _interior_maxima_above(
            omegas[first : last + 1], ds[first : last + 1], 0.5
        )
        counts[kl] = len(peaks)
    ok = counts[0.32] > counts[0.08]
    _report(
        "C07", ok, f"peaks>0.5 inside band: kl=0.32 -> {counts[0.32]}, kl=0.08 -> {counts[0.08]}",
        time.perf_counter() - t0, 5.0,
    )


def test_c08_first_integral_conservation():
    t0 = time.perf_counter()
    params = params_for_continuum(kl=5.0, coefficient=8.0, omega=0.98, gamma=1e-3)
    states = shooting_trajectory(0.98, params, 1.0, n_samples=201)
    c_vals = np.array([s.angular_constant for s in states])
    e_vals = np.array([s.energy_constant for s in states])
    drift_c = float(np.ptp(c_vals) / abs(c_vals[-1]))
    drift_e = float(np.ptp(e_vals) / abs(e_vals[-1]))
    _report(
        "C08", max(drift_c, drift_e) < 1e-8,
        f"drift over full trajectory: C {drift_c:.3e}, energy {drift_e:.3e}",
        time.perf_counter() - t0, 2.0,
    )


def test_c09_high_power_recovery():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    ok = True
    worst = 1.0
    for _ in range(10):  # single-qubit cases
        gamma = 10.0 ** rng.uniform(-3, -2)
        rho = 10.0 ** rng.uniform(0.5, 1.7)
        omega = 1.0 + rng.uniform(-2, 2) * gamma
        params = dip_params(gamma, rho * gamma)
        m0 = (omega - 1.0) ** 2 + gamma**2
        power = 1e5 * m0 * (1.0 + rho)
        roots = single_qubit_nonlinear_roots(omega, params, power)
        ok = ok and len(roots) == 1
        worst = min(worst, roots[-1])
    for _ in range(10):  # array closed-form cases
        coeff = 10.0 ** rng.uniform(0.3, 1.7)
        params = params_for_continuum(
            kl=12.0, coefficient=coeff, omega=0.98, gamma=1e-3
        )
        roots = closed_form_nonlinear_d(0.98, params, 1000.0 * coeff)
        ok = ok and len(roots) == 1
        worst = min(worst, roots[-1])
    _report(
        "C09", ok and worst > 0.99,
        f"min recovered D over 20-point sample = {worst:.5f}",
        time.perf_counter() - t0, 5.0,
    )


def test_c10_closed_form_vs_shooting():
    t0 = time.perf_counter()
    worst = 0.0
    n_points = 0
    for omega in (0.96, 0.965, 0.97, 0.975, 0.98):
        params = params_for_continuum(kl=12.0, coefficient=2.0, omega=omega, gamma=1e-3)
        for r_ell in np.logspace(np.log10(25.0), np.log10(250.0), 20):
            one_minus_z = 1.0 - z_parameter(omega, params, r_ell)
            assert 0.0 < one_minus_z < 0.05  # stated validity regime
            res, power = shoot_nonlinear_bvp(omega, params, r_ell)
            roots = closed_form_nonlinear_d(omega, params, power)
            dev = min(abs(root - res.d) for root in roots) / res.d
            worst = max(worst, dev)
            n_points += 1
    _report(
        "C10", worst < 0.10 and n_points == 100,
        f"worst relative deviation {worst:.3%} over {n_points} in-regime points",
        time.perf_counter() - t0, 60.0,
    )


def test_c11_bloch_oracle_agreement():
    t0 = time.perf_counter()
    gamma = 1.5e-3
    params = ModelParams(gamma_q=gamma, coupling_g=0.06, interaction_eta=1.0)
    worst = 0.0
    for omega in np.linspace(0.9, 1.1, 5):
        for ratio in (0.01, 0.1, 1.0, 10.0):
            q = ratio * gamma
            got = bloch_oracle(omega, q, params)
            want = qubit_response(omega, q, params).s_value
            worst = max(worst, abs(got - want) / abs(want))
    _report(
        "C11", worst < 0.05,
        f"worst oracle-vs-formula deviation {worst:.3%} over 20-point grid",
        time.perf_counter() - t0, 120.0,
    )


def test_c12_repro_determinism(tmp_path):
    t0 = time.perf_counter()
    digests = {}
    times = {}
    for workers in (1, 4, 16):
        out_dir = tmp_path / f"w{workers}"
        env = dict(os.environ, QLS_WORKERS=str(workers))
        t_run = time.perf_counter()
        proc = subprocess.run(
            [sys.executable, "-m", "qls.cli", "repro", "fig2", "--out-dir", str(out_dir)],
            capture_output=True,
            text=True,
            env=env,
        )
        times[workers] = time.perf_counter() - t_run
        assert proc.returncode == 0, proc.stderr
        digests[workers] = hashlib.sha256((out_dir / "fig2.csv").read_bytes()).hexdigest()
    ok = len(set(digests.values())) == 1
    slowest = max(times.values())
    detail = f"sha256={next(iter(digests.values()))[:16]}..., per-run max {slowest:.2f}s"
    print(f"[C12] {'PASS' if ok and slowest < 5.0 else 'FAIL'} "
          f"({time.perf_counter() - t0:.2f}s total) {detail}")
    assert ok, f"CSV digests differ across worker counts: {digests}"
    assert slowest < 5.0, f"repro run exceeded budget: {slowest:.2f}s"
