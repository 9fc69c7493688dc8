import numpy as np
import pytest

from fdcollide.contact import ContactLaw
from fdcollide.energy import assert_balance_with_source, assert_conservative, assert_dissipative
from fdcollide.exceptions import ConfigError
from fdcollide.lumped import LumpedSpec, energy_lumped, init_lumped, lumped_bounds, simulate_lumped, step_lumped

K44 = 1.0 / 44100


def _spec(alpha=2.5, beta=0.0, K=1e8, steps=882, u0=-0.05, v0=10.0):
    return LumpedSpec(M=0.01, u0=u0, v0=v0, law=ContactLaw.power_law(K, alpha, beta), k=K44, steps=steps)


def test_free_flight_is_linear():
    run = simulate_lumped(_spec(u0=-1.0, v0=1.0, steps=100))
    t = np.arange(101) * K44
    assert np.allclose(run.u, -1.0 + t, rtol=0, atol=1e-13)
    assert np.all(run.force == 0.0)


def test_lossless_collision_conserves_and_reverses_velocity():
    run = simulate_lumped(_spec())
    assert assert_conservative(run.ledger, 1e-12)
    v = run.velocity
    assert v[0] == pytest.approx(10.0, rel=1e-14)
    assert v[-1] == pytest.approx(-10.0, rel=1e-10)
    assert run.force.max() > 0


def test_contact_duration_shrinks_as_alpha_decreases():
    durations = [np.count_nonzero(simulate_lumped(_spec(alpha=a)).force) for a in (1.5, 2.5, 3.5)]
    assert durations[0] < durations[1] < durations[2]


@pytest.mark.parametrize("beta", [0.3, 1.0, 3.0])
def test_hunt_crossley_loss_is_dissipative(beta):
    run = simulate_lumped(_spec(alpha=2.3, beta=beta))
    assert assert_dissipative(run.ledger, 1e-12)
    assert assert_balance_with_source(run.ledger, 1e-12)
    assert abs(run.velocity[-1]) < 10.0


def test_penetration_respects_energy_bound():
    spec = _spec()
    run = simulate_lumped(spec)
    vmax, umax = lumped_bounds(spec, run.ledger.h0)
    assert run.u.max() <= umax
    assert np.abs(run.velocity).max() <= vmax * (1 + 1e-12)


def test_start_in_contact_is_rejected():
    with pytest.raises(ConfigError):
        init_lumped(_spec(u0=1e-3))
    with pytest.raises(ConfigError):
        LumpedSpec(M=0.0, u0=0.0, v0=0.0, law=ContactLaw.power_law(1, 2), k=1.0, steps=1)


def test_single_step_matches_hand_solution_without_contact():
    spec = _spec(u0=-1.0, v0=2.0)
    s1 = init_lumped(spec)
    s2 = step_lumped(spec, s1)
    assert s2.u_now == pytest.approx(-1.0 + 4.0 * K44, rel=1e-15)
    h, q = energy_lumped(spec, s2)
    assert h == pytest.approx(0.5 * 0.01 * 4.0, rel=1e-12) and q == 0.0
