"""Acceptance suite: one test group per numbered criterion, each printing a summary line."""

import math
import time

import numpy as np
import pytest
from scipy.signal import find_peaks

from fdcollide.config import with_params
from fdcollide.contact import ContactLaw, PowerLawPotential
from fdcollide.energy import (EnergyLedger, assert_balance_with_source, assert_conservative, assert_dissipative,
                              record)
from fdcollide.grid_ops import (GridFunction1D, GridFunction2D, delta_t_backward, delta_x_forward,
                                delta_x_forward_2d, delta_xx, delta_y_forward, inner_product_1d, norm_1d, norm_2d,
                                sbp_residual_1d, sbp_residual_2d)
from fdcollide.lumped import LumpedSpec, lumped_bounds, simulate_lumped
from fdcollide.membrane import (MalletMembraneModel, MalletSpec, MembraneSpec, StringMembraneModel,
                                StringMembraneSpec, energy_2d, init_mallet_membrane, step_mallet_membrane)
from fdcollide.presets import preset
from fdcollide.reed import (ReedBoreModel, ReedSpec, clarinet_profile, energy_reed_bore, init_reed_bore,
                            ramped_pressure, step_reed_bore)
from fdcollide.runner import simulate
from fdcollide.solvers import (ScalarContactEquation, VectorContactEquation, bisection_oracle, solve_scalar,
                               solve_vector)
from fdcollide.strings import (BarrierSpec, HammerSpec, StringSpec, energy_string, hammer_distribution,
                               init_hammer_string, init_string_barrier, make_grid, parabolic_barrier,
                               penetration_bound, readout, step_hammer_string, step_hammer_string_nonconservative,
                               step_string_barrier, triangle_shape)

K44 = 1.0 / 44100
K88 = 1.0 / 88200
K22 = 1.0 / 22050


# -- 1 ------------------------------------------------------------------------------


def test_criterion_01_lossless_lumped(measured):
    t0 = time.perf_counter()
    run = simulate_lumped(LumpedSpec(M=0.01, u0=-0.05, v0=10.0, law=ContactLaw.power_law(1e8, 2.5), k=K44,
                                     steps=882))
    elapsed = time.perf_counter() - t0
    eps = float(np.max(np.abs(run.ledger.epsilon)))
    v = run.velocity
    ratio = abs(abs(v[-1]) - abs(v[0])) / abs(v[0])
    measured(f"max|eps|={eps:.2e} speed mismatch={ratio:.2e} runtime={elapsed:.2f}s")
    assert run.force.max() > 0 and v[-1] < 0
    assert eps < 1e-12
    assert ratio < 1e-10
    assert elapsed < 1.0


# -- 2 ------------------------------------------------------------------------------


def test_criterion_02_rigid_limit_penetration(measured):
    spec = LumpedSpec(M=0.01, u0=-0.05, v0=10.0, law=ContactLaw.power_law(1e16, 1.2), k=K44, steps=882)
    run = simulate_lumped(spec)
    pen = float(run.u.max())
    measured(f"max penetration={pen:.3e} m")
    assert 0.0 < pen < 8e-8
    assert pen <= lumped_bounds(spec, run.ledger.h0)[1]


# -- 3 ------------------------------------------------------------------------------


@pytest.mark.parametrize("beta", [0.3, 1.0, 3.0])
def test_criterion_03_lossy_lumped(beta, measured):
    run = simulate_lumped(LumpedSpec(M=0.01, u0=-0.05, v0=10.0, law=ContactLaw.power_law(1e8, 2.3, beta), k=K44,
                                     steps=882))
    h = np.asarray(run.ledger.h_total)
    rise = float(np.max(np.diff(h)) / h[0])
    measured(f"beta={beta}: largest relative rise={rise:.1e}, exit speed={abs(run.velocity[-1]):.3f}")
    assert assert_dissipative(run.ledger, 1e-12)
    assert abs(run.velocity[-1]) < 10.0


# -- 4 ------------------------------------------------------------------------------


def _c4(sigma=0.5, E=2e11, k=K44):
    return StringSpec(rho=0.0063, T=670.0, E=E, r=5e-4, sigma0=sigma, sigma1=sigma, L=0.62, k=k)


def _hammer_run(spec, v, steps, stepper=step_hammer_string):
    hammer = HammerSpec(M=0.0029, position=0.12, v_in=v, law=ContactLaw.power_law(4.5e9, 2.5))
    grid = make_grid(spec)
    g = hammer_distribution(grid, spec.L, hammer.position)
    st = init_hammer_string(spec, hammer, grid)
    led = EnergyLedger(spec.k)
    record(led, energy_string(spec, grid, hammer, st, g))
    force = np.empty(steps)
    for n in range(steps):
        st = stepper(spec, hammer, grid, g, st)
        force[n] = st.force
        record(led, energy_string(spec, grid, hammer, st, g))
    return force, led


def test_criterion_04_hammer_string(measured):
    t0 = time.perf_counter()
    durations = []
    for v in (1.0, 2.0, 4.0):
        force, _ = _hammer_run(_c4(), v, 2205)
        durations.append(np.count_nonzero(force > 0) * K44)
    _, led = _hammer_run(_c4(sigma=0.0), 2.0, 2205)
    elapsed = time.perf_counter() - t0
    eps = float(np.max(np.abs(led.epsilon)))
    measured("contact ms at v=1,2,4: " + ", ".join(f"{1e3 * d:.3f}" for d in durations)
             + f"; lossless max|eps|={eps:.2e}; runtime={elapsed:.1f}s")
    assert durations[0] > durations[1] > durations[2] > 0
    assert eps < 1e-12
    assert elapsed < 30.0


# -- 5 ------------------------------------------------------------------------------


def _second_difference_sign_changes(force):
    d2 = np.diff(force, 2)
    s = np.sign(d2[d2 != 0.0])
    return int(np.count_nonzero(s[1:] != s[:-1]))


def test_criterion_05_explicit_force_instability(measured):
    spec = _c4(sigma=0.0, E=0.0)
    steps = 441
    f_cons, led = _hammer_run(spec, 1.5, steps)
    f_expl, _ = _hammer_run(spec, 1.5, steps, step_hammer_string_nonconservative)
    n_cons = _second_difference_sign_changes(f_cons)
    n_expl = _second_difference_sign_changes(f_expl)
    h = np.asarray(led.h_total)
    bounded = bool(np.all(h <= led.h0 * (1.0 + 1e-12)))
    measured(f"second-difference sign changes explicit={n_expl} conservative={n_cons} "
             f"(need > {10 * n_cons}); conservative energy bounded={bounded}")
    assert bounded
    assert n_expl > 10 * n_cons


# -- 6 ------------------------------------------------------------------------------


def _barrier(sigma1, k=K88):
    spec = StringSpec(rho=0.0063, T=670.0, E=0.0, r=5e-4, sigma0=0.0, sigma1=sigma1, L=0.62, k=k)
    grid = make_grid(spec)
    barrier = BarrierSpec(parabolic_barrier(grid, spec.L, -1e-3, 5e-3), ContactLaw.power_law(1e13, 1.3))
    return spec, grid, barrier


def _first_peak(y, k, floor_hz=50.0, rel_height=0.2):
    # lowest spectral peak above floor_hz reaching rel_height of the largest one
    y = y - y.mean()
    mag = np.abs(np.fft.rfft(y * np.hanning(y.size)))
    f = np.fft.rfftfreq(y.size, k)
    mag[f < floor_hz] = 0.0
    peaks, _ = find_peaks(mag, height=rel_height * mag.max())
    return float(f[peaks[0]])


def test_criterion_06_barrier_penetration(measured):
    spec, grid, barrier = _barrier(5e-4)
    st = init_string_barrier(grid, triangle_shape(grid, spec.L, 0.3, 2e-3), barrier)
    led = EnergyLedger(spec.k)
    record(led, energy_string(spec, grid, barrier, st))
    for _ in range(4410):
        st = step_string_barrier(spec, barrier, grid, st)
        record(led, energy_string(spec, grid, barrier, st))
    bound = penetration_bound(grid, barrier.law, led.h0)
    measured(f"max penetration={st.eta_max:.3e} m, bound={bound:.3e} m")
    assert 0.0 < st.eta_max < 3e-6
    assert st.eta_max <= bound
    assert assert_balance_with_source(led, 1e-12)


def test_criterion_06_barrier_pitch_rises_with_amplitude(measured):
    spec, grid, barrier = _barrier(0.0)
    peaks = []
    for amplitude in (5e-4, 2e-3, 1e-2):
        st = init_string_barrier(grid, triangle_shape(grid, spec.L, 0.3, amplitude), barrier)
        out = np.empty(44100)
        for n in range(out.size):
            st = step_string_barrier(spec, barrier, grid, st)
            out[n] = readout(grid, st.u, 0.8)
        peaks.append(_first_peak(out, spec.k))
    measured("first peak Hz at 0.5/2/10 mm: " + ", ".join(f"{p:.0f}" for p in peaks))
    assert peaks[0] < peaks[1] < peaks[2]


# -- 7 ------------------------------------------------------------------------------


def _reed_run(p_m, duration=0.5):
    reed = ReedSpec(M_r=3.37e-6, S_r=1.46e-4, sigma_r=1500.0, omega_r=23250.0, H=4e-4, w=0.012,
                    law=ContactLaw.power_law(1e13, 1.3))
    model = ReedBoreModel.build(reed, clarinet_profile(reed.c, K88), K88)
    steps = int(round(duration / K88))
    P = ramped_pressure(p_m, K88, steps)
    st = init_reed_bore(model)
    led = EnergyLedger(K88)
    record(led, energy_reed_bore(model, st))
    z = np.empty(steps - 1)
    for n in range(1, steps):
        st = step_reed_bore(model, st, P[n])
        record(led, energy_reed_bore(model, st))
        z[n - 1] = st.z
    return z, led, reed.H


def test_criterion_07_reed(measured):
    t0 = time.perf_counter()
    z_soft, led_soft, H = _reed_run(2000.0)
    elapsed = time.perf_counter() - t0
    z_hard, led_hard, _ = _reed_run(2500.0)
    pen = max(0.0, float(-z_hard.min() - H))
    measured(f"2000 Pa min z={z_soft.min():.3e} (H={H:g}); 2500 Pa penetration={pen:.2e} m; "
             f"balance worst={max(assert_balance_with_source(led_soft).worst, assert_balance_with_source(led_hard).worst):.1e}; "
             f"runtime={elapsed:.1f}s per 0.5 s")
    assert z_soft.min() > -H
    assert z_hard.min() < -H and pen < 1.5e-8
    assert assert_balance_with_source(led_soft, 1e-10)
    assert assert_balance_with_source(led_hard, 1e-10)
    assert elapsed < 60.0


# -- 8 ------------------------------------------------------------------------------


def test_criterion_08_mallet_membrane(measured):
    membrane = MembraneSpec(rho=0.26, T=3325.0, sigma0=0.0, L=0.6, k=K22)
    corner = 0.1 / math.sqrt(2.0) / 0.6
    durations, worst = [], 0.0
    for v in (1.0, 2.0, 3.0):
        mallet = MalletSpec(M=0.028, x=corner, y=corner, v_in=v, law=ContactLaw.power_law(1.6e8, 2.54))
        model = MalletMembraneModel.build(membrane, mallet)
        st = init_mallet_membrane(model)
        led = EnergyLedger(K22)
        record(led, energy_2d(model, st))
        contact = 0
        for _ in range(1102):
            st = step_mallet_membrane(model, st)
            record(led, energy_2d(model, st))
            contact += st.force > 0
        durations.append(contact * K22)
        worst = max(worst, float(np.max(np.abs(led.epsilon))))
        assert assert_conservative(led, 1e-11)
    measured("contact ms at v=1,2,3: " + ", ".join(f"{1e3 * d:.2f}" for d in durations)
             + f"; max|eps|={worst:.2e}")
    assert durations[0] > durations[1] > durations[2] > 0
    assert worst < 1e-11


# -- 9 ------------------------------------------------------------------------------


def test_criterion_09_string_membrane(measured):
    rng = np.random.default_rng(2024)
    cfg = preset("string_membrane_demo")
    worst_adj = 0.0
    for attached in (True, False):
        wire = StringSpec(rho=2e-3, T=60.0, E=0.0, r=2e-4, sigma0=0.0, sigma1=0.0, L=0.3, k=K22)
        drum = MembraneSpec(rho=0.26, T=3325.0, sigma0=0.0, L=0.6, k=K22)
        model = StringMembraneModel.build(StringMembraneSpec(wire, drum, ContactLaw.power_law(1e9, 1.5),
                                                             start=(0.15, 0.3), angle=0.3, gap=5e-4,
                                                             attached=attached))
        hs, hm = model.sgrid.h, model.h
        for _ in range(500):
            a = rng.standard_normal(model.Bc.shape[0])
            w = rng.standard_normal((model.N + 1, model.N + 1))
            lhs = hm * hm * float(np.sum(model.spread(a) * w))
            rhs = hs * float(a @ (model.Bc @ w.ravel()))
            worst_adj = max(worst_adj, abs(lhs - rhs) / (hs * float(np.abs(a) @ np.abs(model.Bc @ w.ravel()))))
    worst_eps = 0.0
    for attached in (True, False):
        ledger, _, _ = simulate(with_params(cfg, coupling__attached=attached))
        assert np.any(ledger.column("contact") > 0)
        assert assert_conservative(ledger, 1e-11)
        worst_eps = max(worst_eps, float(np.max(np.abs(ledger.epsilon))))
    measured(f"adjoint mismatch={worst_adj:.1e}; coupled max|eps| over 0.1 s={worst_eps:.1e}")
    assert worst_adj < 1e-13
    assert worst_eps < 1e-11


# -- 10 -----------------------------------------------------------------------------


def _random_equation(rng):
    pot = PowerLawPotential(10 ** rng.uniform(4, 14), rng.uniform(1.0, 3.5))
    m = 10 ** rng.uniform(-12, -3)
    a = rng.uniform(-1e-3, 1e-3) * 10 ** rng.uniform(-3, 0)
    b = rng.uniform(-1e-3, 1e-3) * 10 ** rng.uniform(-3, 0)
    c = rng.choice([0.0, rng.uniform(0, 2)])
    return ScalarContactEquation(m=m, a=a, b=b, potential=pot, c=c)


def test_criterion_10_solvers(measured):
    rng = np.random.default_rng(10)
    eps = np.finfo(float).eps
    min_slope, worst = np.inf, 0.0
    for _ in range(1000):
        eq = _random_equation(rng)
        for r in rng.uniform(-2e-3, 2e-3, 5):
            min_slope = min(min_slope, eq.dG(r))
        lo, hi = eq.bracket()
        pad = 8 * eps * max(abs(lo), abs(hi), abs(eq.b))
        ref = bisection_oracle(eq.G, (lo - pad, hi + pad))
        root = solve_scalar(eq).root
        worst = max(worst, abs(root - ref) / max(abs(ref), abs(eq.b), 1e-300))
    worst_vec = 0.0
    for _ in range(50):
        pot = PowerLawPotential(10 ** rng.uniform(6, 12), rng.uniform(1.0, 3.0))
        n = int(rng.integers(1, 40))
        d = 10 ** rng.uniform(-9, -5, n)
        a = rng.uniform(-1e-4, 1e-4, n)
        b = rng.uniform(-1e-4, 1e-4, n)
        vec = solve_vector(VectorContactEquation(np.diag(d), a, b, pot)).root
        ref = np.array([solve_scalar(ScalarContactEquation(m=di, a=ai, b=bi, potential=pot)).root
                        for di, ai, bi in zip(d, a, b)])
        worst_vec = max(worst_vec, float(np.max(np.abs(vec - ref) / np.maximum(np.abs(ref), np.abs(b)))))
    measured(f"min G'={min_slope:.3g}; Newton vs bisection={worst:.1e}; vector vs scalar={worst_vec:.1e}")
    assert min_slope >= 1.0
    assert worst <= 1e-12
    assert worst_vec <= 1e-13


# -- 11 -----------------------------------------------------------------------------


def test_criterion_11_operator_identities(measured):
    rng = np.random.default_rng(11)
    worst = dict(sbp1=0.0, sbp2=0.0, dt=0.0, dx=0.0, dxdy=0.0)
    for _ in range(1000):
        N = int(rng.integers(3, 40))
        h = 10 ** rng.uniform(-3, 0)
        k = 10 ** rng.uniform(-5, -1)
        a = rng.standard_normal(N + 1)
        b = rng.standard_normal(N + 5)
        r1, r2 = sbp_residual_1d(a, b, h)
        scale1 = (h * np.abs(a).sum() + 2 * np.abs(a).max()) * np.abs(b).max() * 16.0 / h**4
        worst["sbp1"] = max(worst["sbp1"], r1 / scale1, r2 / scale1)

        M = int(rng.integers(2, 20))
        a2 = rng.standard_normal((M + 1, M + 1))
        b2 = rng.standard_normal((M + 3, M + 3))
        rx, ry = sbp_residual_2d(a2, b2, h)
        scale2 = (h * h + h) * np.abs(a2).sum() * np.abs(b2).max() * 4.0 / h**2
        worst["sbp2"] = max(worst["sbp2"], rx / scale2, ry / scale2)

        u_now, u_prev = rng.standard_normal(N + 1), rng.standard_normal(N + 1)
        lhs = inner_product_1d(GridFunction1D(u_now, h), GridFunction1D(u_prev, h))
        rhs = -(k * k / 4.0) * norm_1d(GridFunction1D(delta_t_backward(u_now, u_prev, k), h)) ** 2
        worst["dt"] = max(worst["dt"], (rhs - lhs) / (h * float(np.sum(u_now**2 + u_prev**2))))

        g = GridFunction1D(a, h)
        dx = norm_1d(delta_x_forward(g), "lower")
        worst["dx"] = max(worst["dx"], dx / ((2.0 / h) * norm_1d(g)) - 1.0,
                          norm_1d(delta_xx(g), "interior") / ((2.0 / h) * dx) - 1.0)

        w = GridFunction2D(a2, h)
        n0 = (2.0 / h) * norm_2d(w)
        worst["dxdy"] = max(worst["dxdy"], norm_2d(delta_x_forward_2d(w), "x_lower") / n0 - 1.0,
                            norm_2d(delta_y_forward(w), "y_lower") / n0 - 1.0)
    measured(", ".join(f"{key}={val:.1e}" for key, val in worst.items()))
    assert worst["sbp1"] <= 1e-12 and worst["sbp2"] <= 1e-12
    assert worst["dt"] <= 1e-12 and worst["dx"] <= 1e-12 and worst["dxdy"] <= 1e-12
