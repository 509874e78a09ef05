import numpy as np
import pytest

from arbocontrol.model import ModelParams, ModelVariant
from arbocontrol.equilibria import offspring_number
from arbocontrol.simulate import (
    DEFAULT_INITIAL_STATE,
    IntegrationError,
    PulseEntry,
    PulseSchedule,
    integrate,
    run_strategy,
    strategy_params,
    strategy_schedule,
)

STD = ModelVariant()
NOVACC = ModelVariant(vaccination=False)
Y0 = np.array(DEFAULT_INITIAL_STATE, dtype=float)


# --- schedules ---------------------------------------------------------


def test_pulse_entry_validation():
    PulseEntry("c_m", 0.3, 7.0, 1.0)
    with pytest.raises(ValueError):
        PulseEntry("c_m", 0.3, 7.0, 0.0)  # zero duration
    with pytest.raises(ValueError):
        PulseEntry("c_m", 0.3, 7.0, 8.0)  # duration beyond period
    with pytest.raises(ValueError):
        PulseEntry("nonsense", 0.3, 7.0, 1.0)
    with pytest.raises(ValueError):
        PulseEntry("alpha_1", 1.0, 7.0, 1.0)  # protection must stay below 1
    with pytest.raises(ValueError):
        PulseEntry("c_m", -0.1, 7.0, 1.0)
    with pytest.raises(ValueError):
        PulseEntry("c_m", 0.3, 7.0, 1.0, start=10.0, end=5.0)


def test_pulse_entry_accepts_alias_spellings():
    assert PulseEntry("cm", 0.3, 7.0, 1.0).control == "c_m"
    assert PulseEntry("alpha1", 0.3, 7.0, 1.0).control == "alpha_1"


def test_pulse_phase_and_switch_times():
    entry = PulseEntry("c_m", 0.3, 7.0, 1.0, start=0.0, end=21.0)
    assert entry.active_at(0.5)
    assert not entry.active_at(1.5)
    assert entry.active_at(7.2)
    sched = PulseSchedule([entry])
    times = sched.switch_times(0.0, 21.0)
    for expected in (1.0, 7.0, 8.0, 14.0, 15.0, 21.0):
        assert any(abs(t - expected) < 1e-12 for t in times), expected


def test_schedule_resolves_active_overrides():
    sched = PulseSchedule([PulseEntry("c_m", 0.3, 7.0, 1.0)])
    active = sched.active_at(0.5)
    assert active is not None and active.c_m == 0.3
    assert sched.active_at(3.0) is None


# --- integration -------------------------------------------------------


def test_integrate_validates_inputs():
    p = ModelParams()
    with pytest.raises(ValueError):
        integrate(p, Y0, (0.0, 10.0), rtol=1e-2)  # above allowed band
    with pytest.raises(ValueError):
        integrate(p, Y0, (0.0, 10.0), rtol=1e-13)  # below allowed band
    with pytest.raises(ValueError):
        integrate(p, Y0, (10.0, 0.0))
    with pytest.raises(ValueError):
        integrate(p, Y0[:-1], (0.0, 10.0))
    bad = Y0.copy()
    bad[0] = -5.0
    with pytest.raises(ValueError):
        integrate(p, bad, (0.0, 10.0))


def test_trajectory_shape_and_channels():
    p = ModelParams()
    t_eval = np.linspace(0.0, 30.0, 61)
    traj = integrate(p, Y0, (0.0, 30.0), t_eval=t_eval)
    assert traj.states.shape == (61, 11)
    assert traj.t.shape == (61,)
    assert len(traj.labels) == 11
    np.testing.assert_allclose(traj.t, t_eval)
    assert traj.states.min() >= 0.0
    assert traj.cumulative_infections[0] == 0.0
    assert np.all(np.diff(traj.cumulative_infections) >= -1e-9)


def test_cumulative_channel_matches_quadrature():
    # the twelfth channel is the integral of new human infections, so its
    # derivative equals the infection inflow along the trajectory
    from arbocontrol.model import force_of_infection, derive_constants
    p = ModelParams()
    t_eval = np.linspace(0.0, 20.0, 401)
    traj = integrate(p, Y0, (0.0, 20.0), t_eval=t_eval)
    pi = derive_constants(p).pi
    inflow = np.array([
        force_of_infection(s, p)[0] * (s[0] + pi * s[1])
        for s in traj.states])
    recon = np.concatenate([[0.0], np.cumsum(
        0.5 * (inflow[1:] + inflow[:-1]) * np.diff(t_eval))])
    dev = np.abs(recon - traj.cumulative_infections)
    assert dev.max() <= 1e-3 * max(1.0, traj.cumulative_infections.max())


def test_no_infection_keeps_cumulative_at_zero():
    p = ModelParams(beta_hv=0.0)
    y0 = Y0.copy()
    y0[6] = y0[7] = 0.0  # no infected vectors either
    y0[2] = y0[3] = 0.0
    traj = integrate(p, y0, (0.0, 50.0), t_eval=np.linspace(0, 50, 11))
    assert traj.cumulative_infections.max() <= 1e-9


def test_self_convergence_between_tolerance_levels():
    p = ModelParams()
    t_eval = np.linspace(0.0, 100.0, 26)
    coarse = integrate(p, Y0, (0.0, 100.0), rtol=1e-8, atol=1e-10,
                       t_eval=t_eval)
    fine = integrate(p, Y0, (0.0, 100.0), rtol=1e-10, atol=1e-12,
                     t_eval=t_eval)
    dev = np.max(np.abs(coarse.states - fine.states)
                 / np.maximum(1.0, np.abs(fine.states)))
    assert dev <= 1e-5


def test_neutral_pulse_matches_unscheduled_run():
    # pulsing the adulticide at the baseline value is a no-op, and the
    # segmented integration must agree with the plain one
    p = ModelParams()
    sched = PulseSchedule([PulseEntry("c_m", p.c_m, 7.0, 1.0)])
    t_eval = np.linspace(0.0, 30.0, 31)
    plain = integrate(p, Y0, (0.0, 30.0), t_eval=t_eval)
    pulsed = integrate(p, Y0, (0.0, 30.0), schedule=sched, t_eval=t_eval)
    dev = np.max(np.abs(plain.states - pulsed.states)
                 / np.maximum(1.0, np.abs(plain.states)))
    assert dev <= 1e-10


def test_pulse_actually_changes_the_outcome():
    p = ModelParams()
    sched = PulseSchedule([PulseEntry("c_m", 0.5, 7.0, 1.0)])
    t_eval = np.linspace(0.0, 60.0, 61)
    plain = integrate(p, Y0, (0.0, 60.0), t_eval=t_eval)
    pulsed = integrate(p, Y0, (0.0, 60.0), schedule=sched, t_eval=t_eval)
    assert (pulsed.infected_vectors()[-1]
            < 0.9 * plain.infected_vectors()[-1])


def test_splitting_a_pulse_window_does_not_change_the_run():
    # one entry over [0, 40) versus the same pulses split at t = 20,
    # phase-aligned because 20 is a multiple of the period
    p = ModelParams()
    one = PulseSchedule([PulseEntry("c_m", 0.4, 5.0, 1.0, 0.0, 40.0)])
    two = PulseSchedule([PulseEntry("c_m", 0.4, 5.0, 1.0, 0.0, 20.0),
                         PulseEntry("c_m", 0.4, 5.0, 1.0, 20.0, 40.0)])
    t_eval = np.linspace(0.0, 40.0, 81)
    a = integrate(p, Y0, (0.0, 40.0), schedule=one, t_eval=t_eval)
    b = integrate(p, Y0, (0.0, 40.0), schedule=two, t_eval=t_eval)
    dev = np.max(np.abs(a.states - b.states)
                 / np.maximum(1.0, np.abs(a.states)))
    assert dev <= 1e-7


def test_vectors_collapse_below_offspring_threshold():
    p = ModelParams(mu_b=0.5)
    assert offspring_number(p) < 1.0
    traj = integrate(p, Y0, (0.0, 2000.0),
                     t_eval=np.array([0.0, 2000.0]))
    final = traj.states[-1]
    assert final[5:8].sum() <= 1e-3 * Y0[5:8].sum()
    assert final[8:].sum() <= 1e-3 * Y0[8:].sum()


def test_full_and_reduced_models_agree_without_vaccination():
    p = ModelParams(xi=0.0, omega=0.0)
    y0_full = Y0.copy()
    y0_full[1] = 0.0
    y0_red = np.concatenate([y0_full[:1], y0_full[2:]])
    t_eval = np.linspace(0.0, 80.0, 17)
    full = integrate(p, y0_full, (0.0, 80.0), t_eval=t_eval,
                     rtol=1e-10, atol=1e-12)
    red = integrate(p, y0_red, (0.0, 80.0), NOVACC, t_eval=t_eval,
                    rtol=1e-10, atol=1e-12)
    merged = np.delete(full.states, 1, axis=1)
    dev = np.max(np.abs(merged - red.states)
                 / np.maximum(1.0, np.abs(red.states)))
    assert dev <= 1e-6
    assert np.max(full.states[:, 1]) == 0.0


# --- strategies --------------------------------------------------------


def test_strategy_params_per_tag():
    p = ModelParams()
    pa = strategy_params(p, "A", {"alpha_1": 0.4})
    assert pa.alpha_1 == 0.4 and pa.alpha_2 == 1.0
    assert pa.c_m == 0.0 and pa.eta_1 == 0.0 and pa.eta_2 == 0.0
    pd = strategy_params(p, "D", {"alpha_2": 0.6})
    assert pd.alpha_2 == 0.6 and pd.alpha_1 == 0.0
    with pytest.raises(ValueError):
        strategy_params(p, "Z", {})


def test_pulsed_strategies_have_schedules():
    sb = strategy_schedule("B", {"c_m": 0.3})
    assert sb.entries and sb.entries[0].control == "c_m"
    assert sb.entries[0].period == 7.0
    sc = strategy_schedule("C", {"eta_1": 0.2, "eta_2": 0.2})
    assert {e.control for e in sc.entries} == {"eta_1", "eta_2"}
    assert all(e.period == 15.0 for e in sc.entries)
    assert not strategy_schedule("A", {"alpha_1": 0.5}).entries


def test_protection_sweep_reduces_infections_monotonically():
    p = ModelParams()
    totals = []
    finals_EL = []
    for level in (0.0, 0.2, 0.4, 0.6, 0.8):
        traj, summary = run_strategy(p, "A", {"alpha_1": level},
                                     horizon=200.0, n_samples=201)
        totals.append(summary.cumulative_infections)
        finals_EL.append((summary.final_eggs, summary.final_larvae))
    assert all(x > y for x, y in zip(totals, totals[1:]))
    # individual protection leaves the aquatic stages untouched
    eggs = [e for e, _ in finals_EL]
    larvae = [l for _, l in finals_EL]
    assert (max(eggs) - min(eggs)) <= 1e-3 * max(eggs)
    assert (max(larvae) - min(larvae)) <= 1e-3 * max(larvae)


def test_zero_level_adulticide_pulse_is_identity():
    p = ModelParams()
    base, _ = run_strategy(p, "B", {"c_m": 0.0}, horizon=120.0,
                           n_samples=121)
    ref_params = strategy_params(p, "B", {"c_m": 0.0})
    ref = integrate(ref_params, Y0, (0.0, 120.0),
                    t_eval=np.linspace(0.0, 120.0, 121))
    dev = np.max(np.abs(base.states - ref.states)
                 / np.maximum(1.0, np.abs(ref.states)))
    assert dev <= 1e-10


def test_stronger_adulticide_never_raises_final_vector_load():
    p = ModelParams()
    finals = []
    for level in (0.0, 0.1, 0.2, 0.3, 0.4):
        _, summary = run_strategy(p, "B", {"c_m": level}, horizon=150.0,
                                  n_samples=151)
        finals.append(summary.final_infected_vectors)
    assert all(x >= y - 1e-9 * max(1.0, x)
               for x, y in zip(finals, finals[1:]))


def test_summary_internal_consistency():
    p = ModelParams()
    traj, summary = run_strategy(p, "A", {"alpha_1": 0.2}, horizon=100.0,
                                 n_samples=101)
    assert summary.tag == "A"
    assert summary.peak_infected_humans >= summary.final_infected_humans
    assert summary.cumulative_infections == pytest.approx(
        traj.cumulative_infections[-1])
    assert summary.final_eggs == pytest.approx(traj.states[-1][8])
    assert summary.final_larvae == pytest.approx(traj.states[-1][9])
