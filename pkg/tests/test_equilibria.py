import numpy as np
import pytest

from arbocontrol.model import ModelParams, ModelVariant, in_feasible_region
from arbocontrol.equilibria import (
    EquilibriumSolveReport,
    back_substitute,
    beta_hv_critical,
    disease_free_state,
    disease_free_states,
    endemic_polynomial,
    newton_steady_states,
    residual,
    solve_endemic,
    trivial_state,
)

STD = ModelVariant()
NOVACC = ModelVariant(vaccination=False)
MASS = ModelVariant(incidence="mass_action")
D0 = ModelVariant(delta_zero=True)


def bistable_params():
    """Configuration with a backward branch: two endemic states below
    the threshold."""
    return ModelParams(Lambda_h=10, epsilon=1, beta_vh=0.8, eta_h=1,
                       eta_v=1, sigma=0.01428, delta=1, alpha_1=0.001,
                       alpha_2=1, c_m=0.0001, Gamma_E=1e5, Gamma_L=5e4,
                       beta_hv=0.0105)


def test_trivial_state_is_a_steady_state():
    p = ModelParams()
    for variant in (STD, NOVACC):
        st = trivial_state(p, variant)
        assert residual(st, p, variant) <= 1e-10


def test_disease_free_state_is_a_steady_state():
    p = ModelParams()
    for variant in (STD, NOVACC, MASS):
        st = disease_free_state(p, variant)
        scale = max(1.0, np.abs(st).max())
        assert residual(st, p, variant) <= 1e-10 * scale
        # aquatic stages and adults present, no infection anywhere
        assert st[-3:].min() > 0.0
        infected = (2, 3, 6, 7) if variant.vaccination else (1, 2, 5, 6)
        assert all(st[i] == 0.0 for i in infected)


def test_disease_free_state_requires_persistent_vectors():
    with pytest.raises(ValueError):
        disease_free_state(ModelParams(mu_b=0.5))


def test_disease_free_states_listing():
    p = ModelParams()
    eqs = disease_free_states(p, STD)
    assert [e.kind for e in eqs] == ["trivial", "disease_free"]
    eqs_sub = disease_free_states(ModelParams(mu_b=0.5), STD)
    assert [e.kind for e in eqs_sub] == ["trivial"]


def test_quartic_sign_convention_and_diagnostic_flag():
    p = ModelParams()
    poly = endemic_polynomial(p, STD)
    assert poly.family == "full_quartic"
    assert poly.coefficients[0] < 0.0
    # the printed form of the linear coefficient is inconsistent with the
    # other four; the reconstruction flags it and takes precedence
    assert poly.transcription_flagged
    assert poly.transcription_deviation > 1e-6


def test_quartic_degenerates_without_vaccine_leakage():
    # full efficacy removes the vaccinated infection route and two roots
    poly = endemic_polynomial(ModelParams(epsilon=1.0), STD)
    c = np.asarray(poly.coefficients, dtype=float)
    scale = np.abs(c).max()
    assert abs(c[0]) <= 1e-12 * scale
    assert abs(c[1]) <= 1e-12 * scale


def test_novacc_quadratic_leading_sign():
    poly = endemic_polynomial(ModelParams(), NOVACC)
    assert poly.family == "novacc_quadratic"
    assert poly.coefficients[0] < 0.0


def test_mass_action_quadratic_signs():
    p = ModelParams()
    poly = endemic_polynomial(p, MASS)
    e2, e1, e0 = poly.coefficients
    assert e2 > 0.0
    R0m = poly.extras["R_0m"]
    assert np.sign(e0) == -np.sign(R0m * R0m - 1.0)


def test_delta_zero_quadratic_signs():
    p = ModelParams(delta=0.0)
    poly = endemic_polynomial(p, D0)
    a2 = poly.coefficients[0]
    assert a2 > 0.0


def test_mass_action_without_vaccination_is_rejected():
    with pytest.raises(ValueError):
        endemic_polynomial(ModelParams(),
                           ModelVariant(incidence="mass_action",
                                        vaccination=False))


def test_polynomial_evaluates_like_numpy():
    poly = endemic_polynomial(ModelParams(), STD)
    lam = 3.7e-5
    assert poly(lam) == pytest.approx(
        np.polyval(poly.coefficients, lam), rel=1e-12)


def test_back_substitution_gives_equilibrium_residual():
    p = bistable_params()
    rep = solve_endemic(p, STD)
    assert len(rep.equilibria) == 2
    for eq in rep.equilibria:
        st2 = back_substitute(eq.lambda_root, p, STD)
        scale = max(1.0, np.abs(st2).max())
        assert residual(st2, p, STD) <= 1e-6 * scale


def test_endemic_states_strictly_infected_and_feasible():
    p = ModelParams()
    for variant in (STD, NOVACC, MASS):
        rep = solve_endemic(p, variant)
        assert rep.equilibria, variant
        for eq in rep.equilibria:
            infected = (2, 3, 6, 7) if variant.vaccination else (1, 2, 5, 6)
            assert all(eq.state[i] > 0.0 for i in infected)
            scale = max(1.0, np.abs(eq.state).max())
            assert eq.residual <= 1e-6 * scale
            assert in_feasible_region(eq.state, p, variant)


def test_solve_endemic_empty_when_vectors_collapse():
    rep = solve_endemic(ModelParams(mu_b=0.5), STD)
    assert rep.equilibria == []
    assert "dies out" in rep.message


def test_solve_endemic_flags_threshold_degeneracy():
    p = ModelParams()
    bstar = beta_hv_critical(p)
    rep = solve_endemic(p.with_updates(beta_hv=bstar), STD)
    assert rep.degenerate_at_threshold


def test_roots_sorted_and_distinct():
    rep = solve_endemic(bistable_params(), STD)
    lams = [eq.lambda_root for eq in rep.equilibria]
    assert lams == sorted(lams)
    assert lams[0] < lams[1]


def test_newton_search_agrees_with_polynomial_solve():
    p = bistable_params()
    rep = solve_endemic(p, STD)
    found = newton_steady_states(p, STD, n_starts=30, seed=3)
    # every polynomial equilibrium appears in the Newton sweep
    for eq in rep.equilibria:
        dists = [np.max(np.abs(eq.state - f) / np.maximum(1.0, np.abs(f)))
                 for f in found]
        assert min(dists) <= 1e-6


def test_report_carries_polynomial():
    rep = solve_endemic(ModelParams(), STD)
    assert isinstance(rep, EquilibriumSolveReport)
    assert rep.polynomial is not None
    assert rep.polynomial.family == "full_quartic"
