import math

import numpy as np
import pytest

from fdcollide.contact import ContactLaw
from fdcollide.energy import EnergyLedger, assert_balance_with_source, assert_dissipative, record
from fdcollide.exceptions import ConfigError
from fdcollide.reed import (
    BoreProfile,
    ReedBoreModel,
    ReedSpec,
    clarinet_profile,
    energy_reed_bore,
    init_reed_bore,
    ramped_pressure,
    stable_grid_spacing_bore,
    step_reed_bore,
)

K88 = 1.0 / 88200


def reed_spec(**kw):
    base = dict(M_r=3.37e-6, S_r=1.46e-4, sigma_r=1500.0, omega_r=23250.0, H=4e-4, w=0.012,
                law=ContactLaw.power_law(1e13, 1.3))
    base.update(kw)
    return ReedSpec(**base)


def run(p_m, steps, reed=None, k=K88):
    reed = reed or reed_spec()
    model = ReedBoreModel.build(reed, clarinet_profile(reed.c, k), k)
    P = ramped_pressure(p_m, k, steps + 1)
    st = init_reed_bore(model)
    led = EnergyLedger(k)
    record(led, energy_reed_bore(model, st))
    z = []
    for n in range(1, steps):
        st = step_reed_bore(model, st, P[n])
        record(led, energy_reed_bore(model, st))
        z.append(st.z)
    return np.array(z), led, st, model


def test_bore_profile_sampling():
    prof = clarinet_profile(340.0, K88)
    assert prof.h >= stable_grid_spacing_bore(340.0, K88)
    assert prof.N == math.floor(0.66 / (340.0 * K88))
    assert prof.S[0] == pytest.approx(math.pi * 0.0075**2)
    assert prof.S[-1] == pytest.approx(math.pi * 0.03**2)
    assert np.all(np.diff(prof.S) >= -1e-18)


def test_bore_too_fine_rejected():
    bore = BoreProfile.from_radii((0.0, 0.66), (0.0075, 0.0075), 0.66, 400)
    with pytest.raises(ConfigError, match="stability"):
        ReedBoreModel.build(reed_spec(), bore, K88)


def test_invalid_profile_and_reed():
    with pytest.raises(ConfigError):
        BoreProfile(np.array([1.0, -1.0, 1.0]), 1.0)
    with pytest.raises(ConfigError):
        reed_spec(H=0.0)


def test_ramp():
    P = ramped_pressure(2000.0, 0.001, 20, attack=0.01)
    assert P[0] == 0.0 and P[5] == pytest.approx(1000.0) and P[10] == 2000.0 and P[-1] == 2000.0
    assert np.all(ramped_pressure(5.0, 0.1, 3, attack=0.0) == 5.0)


def test_no_pressure_stays_at_rest():
    z, led, st, _ = run(0.0, 200)
    assert np.all(z == 0.0) and np.all(st.Psi == 0.0)
    assert np.all(np.array(led.h_total) == 0.0)


def test_driven_balance_holds_every_step():
    z, led, _, _ = run(2500.0, 4000)
    assert assert_balance_with_source(led, 1e-10)
    assert z.min() < 0.0


def test_undriven_decay_is_dissipative():
    reed = reed_spec()
    k = K88
    model = ReedBoreModel.build(reed, clarinet_profile(reed.c, k), k)
    st = init_reed_bore(model)
    # release the reed from a displaced position with no mouth pressure
    st.z = st.z_prev = 2e-4
    led = EnergyLedger(k)
    record(led, energy_reed_bore(model, st))
    for _ in range(2000):
        st = step_reed_bore(model, st, 0.0)
        record(led, energy_reed_bore(model, st))
    assert assert_dissipative(led, 1e-12)
    assert assert_balance_with_source(led, 1e-10)


def test_energy_components():
    _, led, _, _ = run(2000.0, 500)
    assert led.component_names == ("bore_kinetic", "bore_potential", "reed_kinetic", "reed_spring", "contact")
    assert np.all(led.column("reed_kinetic") >= 0) and np.all(led.column("contact") >= 0)
