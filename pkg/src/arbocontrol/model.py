"""Core model definitions: parameters, derived constants, and vector fields.

The state of the full system collects eleven compartments. Humans are split
into susceptible, vaccinated, exposed, infectious and recovered classes.
Adult mosquitoes are split into susceptible, exposed and infectious classes,
and the immature stages track eggs, larvae and pupae with finite carrying
capacities. A reduced ten compartment system without the vaccinated class is
available as a variant, as is a mass action incidence option.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
import math

import numpy as np

__all__ = [
    "PARAM_NAMES",
    "DEFAULT_PARAMS",
    "ModelParams",
    "DerivedConstants",
    "ModelVariant",
    "ControlOverrides",
    "STATE_LABELS",
    "STATE_LABELS_NOVACC",
    "N_FLOOR",
    "DegeneratePopulationError",
    "derive_constants",
    "force_of_infection",
    "rhs",
    "numerical_jacobian",
    "state_dim",
    "human_population",
    "adult_vector_population",
    "region_bounds",
    "in_feasible_region",
]

N_FLOOR = 1e-9

# Baseline parameter values used throughout the reported experiments.
# Rates are per day; Lambda_h is humans per day; Gamma_E and Gamma_L are
# habitat capacities in individuals.
DEFAULT_PARAMS = {
    "Lambda_h": 2.5,
    "mu_h": 1.0 / (67.0 * 365.0),
    "xi": 0.5,
    "omega": 0.05,
    "epsilon": 0.61,
    "a": 1.0,
    "beta_hv": 0.75,
    "beta_vh": 0.75,
    "gamma_h": 1.0 / 14.0,
    "gamma_v": 1.0 / 21.0,
    "delta": 0.001,
    "sigma": 0.1428,
    "eta_h": 0.35,
    "eta_v": 0.35,
    "mu_v": 1.0 / 30.0,
    "theta": 0.08,
    "mu_b": 6.0,
    "Gamma_E": 10000.0,
    "Gamma_L": 5000.0,
    "mu_E": 0.2,
    "mu_L": 0.4,
    "mu_P": 0.4,
    "s": 0.7,
    "l": 0.5,
    "eta_1": 0.001,
    "eta_2": 0.3,
    "alpha_1": 0.2,
    "alpha_2": 0.5,
    "c_m": 0.01,
}

PARAM_NAMES = tuple(DEFAULT_PARAMS)

# Parameters that must stay inside the unit interval, open at 1.
_UNIT_CLOSED = ("epsilon", "beta_hv", "beta_vh", "eta_h", "eta_v")
# Strictly positive parameters.
_POSITIVE = ("Gamma_E", "Gamma_L", "mu_h", "mu_v")

STATE_LABELS = ("S_h", "V_h", "E_h", "I_h", "R_h",
                "S_v", "E_v", "I_v", "E", "L", "P")
STATE_LABELS_NOVACC = ("S_h", "E_h", "I_h", "R_h",
                       "S_v", "E_v", "I_v", "E", "L", "P")


class DegeneratePopulationError(ValueError):
    """Raised when the human population is too small to normalise contact."""


@dataclass(frozen=True)
class ModelParams:
    """Full parameter set for the transmission model.

    Defaults reproduce the baseline configuration. Validation happens on
    construction and raises ValueError naming the offending field.
    """

    Lambda_h: float = DEFAULT_PARAMS["Lambda_h"]
    mu_h: float = DEFAULT_PARAMS["mu_h"]
    xi: float = DEFAULT_PARAMS["xi"]
    omega: float = DEFAULT_PARAMS["omega"]
    epsilon: float = DEFAULT_PARAMS["epsilon"]
    a: float = DEFAULT_PARAMS["a"]
    beta_hv: float = DEFAULT_PARAMS["beta_hv"]
    beta_vh: float = DEFAULT_PARAMS["beta_vh"]
    gamma_h: float = DEFAULT_PARAMS["gamma_h"]
    gamma_v: float = DEFAULT_PARAMS["gamma_v"]
    delta: float = DEFAULT_PARAMS["delta"]
    sigma: float = DEFAULT_PARAMS["sigma"]
    eta_h: float = DEFAULT_PARAMS["eta_h"]
    eta_v: float = DEFAULT_PARAMS["eta_v"]
    mu_v: float = DEFAULT_PARAMS["mu_v"]
    theta: float = DEFAULT_PARAMS["theta"]
    mu_b: float = DEFAULT_PARAMS["mu_b"]
    Gamma_E: float = DEFAULT_PARAMS["Gamma_E"]
    Gamma_L: float = DEFAULT_PARAMS["Gamma_L"]
    mu_E: float = DEFAULT_PARAMS["mu_E"]
    mu_L: float = DEFAULT_PARAMS["mu_L"]
    mu_P: float = DEFAULT_PARAMS["mu_P"]
    s: float = DEFAULT_PARAMS["s"]
    l: float = DEFAULT_PARAMS["l"]
    eta_1: float = DEFAULT_PARAMS["eta_1"]
    eta_2: float = DEFAULT_PARAMS["eta_2"]
    alpha_1: float = DEFAULT_PARAMS["alpha_1"]
    alpha_2: float = DEFAULT_PARAMS["alpha_2"]
    c_m: float = DEFAULT_PARAMS["c_m"]

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ValueError(f"{f.name} must be a finite number, got {v!r}")
            if v < 0:
                raise ValueError(f"{f.name} must be nonnegative, got {v}")
        for name in _UNIT_CLOSED:
            v = getattr(self, name)
            if v > 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if not (0.0 <= self.alpha_1 < 1.0):
            raise ValueError(f"alpha_1 must lie in [0, 1), got {self.alpha_1}")
        if not (0.0 < self.alpha_2 <= 1.0):
            raise ValueError(f"alpha_2 must lie in (0, 1], got {self.alpha_2}")
        for name in _POSITIVE:
            v = getattr(self, name)
            if v <= 0.0:
                raise ValueError(f"{name} must be positive, got {v}")

    def asdict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def with_updates(self, **kw) -> "ModelParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class ModelVariant:
    """Selects the structural variant of the vector field.

    incidence is either "standard" (frequency dependent, divided by the
    human population) or "mass_action". vaccination toggles the eleven
    compartment system against the reduced ten compartment one.
    delta_zero forces the disease induced death rate to zero without
    touching the parameter set.
    """

    incidence: str = "standard"
    vaccination: bool = True
    delta_zero: bool = False

    def __post_init__(self):
        if self.incidence not in ("standard", "mass_action"):
            raise ValueError(
                f"incidence must be 'standard' or 'mass_action', got {self.incidence!r}")


@dataclass(frozen=True)
class ControlOverrides:
    """Instantaneous control levels overriding the parameter set.

    A None field keeps the value from ModelParams. Used by the pulse
    scheduler to switch controls on and off during integration.
    """

    alpha_1: float | None = None
    c_m: float | None = None
    eta_1: float | None = None
    eta_2: float | None = None
    alpha_2: float | None = None

    def resolve(self, p: ModelParams) -> tuple[float, float, float, float, float]:
        """Effective (alpha_1, c_m, eta_1, eta_2, alpha_2) given params p."""
        a1 = p.alpha_1 if self.alpha_1 is None else self.alpha_1
        cm = p.c_m if self.c_m is None else self.c_m
        e1 = p.eta_1 if self.eta_1 is None else self.eta_1
        e2 = p.eta_2 if self.eta_2 is None else self.eta_2
        a2 = p.alpha_2 if self.alpha_2 is None else self.alpha_2
        if not (0.0 <= a1 < 1.0):
            raise ValueError(f"alpha_1 override must lie in [0, 1), got {a1}")
        if not (0.0 < a2 <= 1.0):
            raise ValueError(f"alpha_2 override must lie in (0, 1], got {a2}")
        for name, v in (("c_m", cm), ("eta_1", e1), ("eta_2", e2)):
            if v < 0:
                raise ValueError(f"{name} override must be nonnegative, got {v}")
        return a1, cm, e1, e2, a2


@dataclass(frozen=True)
class DerivedConstants:
    """Grouped rate constants and capacities used across the analysis.

    k1 .. k9 are the usual exit rates of the linearised compartments,
    K_E and K_L the effective capacities after mechanical control,
    pi the leakage factor of the vaccine, k10 and k11 the infectivity
    weights, K12 the capacity mixing term and n the offspring number
    minus one.
    """

    k1: float
    k2: float
    k3: float
    k4: float
    k5: float
    k6: float
    k7: float
    k8: float
    k9: float
    K_E: float
    K_L: float
    pi: float
    k10: float
    k11: float
    K12: float
    n: float


def derive_constants(p: ModelParams,
                     active: ControlOverrides | None = None,
                     delta_zero: bool = False) -> DerivedConstants:
    """Compute the derived constants, honouring any control overrides."""
    if active is None:
        a1, cm, e1, e2, a2 = p.alpha_1, p.c_m, p.eta_1, p.eta_2, p.alpha_2
    else:
        a1, cm, e1, e2, a2 = active.resolve(p)
    delta = 0.0 if delta_zero else p.delta
    k1 = p.xi + p.mu_h
    k2 = p.omega + p.mu_h
    k3 = p.mu_h + p.gamma_h
    k4 = p.mu_h + delta + p.sigma
    k5 = p.s + p.mu_E + e1
    k6 = p.l + p.mu_L + e2
    k7 = p.theta + p.mu_P
    k8 = p.mu_v + cm
    k9 = p.mu_v + p.gamma_v + cm
    K_E = a2 * p.Gamma_E
    K_L = a2 * p.Gamma_L
    pi = 1.0 - p.epsilon
    k10 = p.gamma_h + p.eta_h * k4
    k11 = p.gamma_v + p.eta_v * k8
    K12 = p.s * K_E + k6 * K_L
    # Basic offspring number of the vector population minus one.
    n = (p.mu_b * p.theta * p.l * p.s) / (k5 * k6 * k7 * k8) - 1.0
    return DerivedConstants(k1, k2, k3, k4, k5, k6, k7, k8, k9,
                            K_E, K_L, pi, k10, k11, K12, n)


def state_dim(variant: ModelVariant) -> int:
    return 11 if variant.vaccination else 10


def _split(state, variant: ModelVariant):
    if variant.vaccination:
        return state
    s = np.asarray(state, dtype=float)
    # Insert a zero vaccinated slot so downstream code sees one layout.
    return np.concatenate([s[:1], [0.0], s[1:]])


def human_population(state, variant: ModelVariant = ModelVariant()) -> float:
    st = _split(state, variant)
    return float(st[0] + st[1] + st[2] + st[3] + st[4])


def adult_vector_population(state, variant: ModelVariant = ModelVariant()) -> float:
    st = _split(state, variant)
    return float(st[5] + st[6] + st[7])


def force_of_infection(state, p: ModelParams,
                       variant: ModelVariant = ModelVariant(),
                       active: ControlOverrides | None = None
                       ) -> tuple[float, float]:
    """Controlled forces of infection acting on humans and on vectors.

    Returns (lambda_h, lambda_v) with the personal protection factor
    1 - alpha_1 already applied. Standard incidence divides by the living
    human population and raises DegeneratePopulationError when that
    population falls to N_FLOOR or below. Mass action incidence skips the
    division; the population check still applies since the model has no
    meaning without hosts.
    """
    st = _split(state, variant)
    a1 = p.alpha_1 if (active is None or active.alpha_1 is None) else active.alpha_1
    N_h = st[0] + st[1] + st[2] + st[3] + st[4]
    if N_h <= N_FLOOR:
        raise DegeneratePopulationError(
            f"human population {N_h!r} at or below floor {N_FLOOR}")
    red = 1.0 - a1
    infectious_v = p.eta_v * st[6] + st[7]
    infectious_h = p.eta_h * st[2] + st[3]
    if variant.incidence == "mass_action":
        lam_h = p.a * red * p.beta_hv * infectious_v
        lam_v = p.a * red * p.beta_vh * infectious_h
    else:
        lam_h = p.a * red * p.beta_hv * infectious_v / N_h
        lam_v = p.a * red * p.beta_vh * infectious_h / N_h
    return float(lam_h), float(lam_v)


def rhs(t: float, state, p: ModelParams,
        variant: ModelVariant = ModelVariant(),
        active: ControlOverrides | None = None) -> np.ndarray:
    """Time derivative of the state. Pure function of its arguments.

    The layout follows STATE_LABELS (or STATE_LABELS_NOVACC when the
    vaccinated class is dropped). t is accepted for solver compatibility
    and ignored; all time dependence enters through `active`.
    """
    del t
    k = derive_constants(p, active, delta_zero=variant.delta_zero)
    lam_h, lam_v = force_of_infection(state, p, variant, active)
    st = _split(state, variant)
    S_h, V_h, E_h, I_h, R_h, S_v, E_v, I_v, E, L, P = st
    N_v = S_v + E_v + I_v

    dE_egg = p.mu_b * (1.0 - E / k.K_E) * N_v - k.k5 * E
    dL = p.s * E * (1.0 - L / k.K_L) - k.k6 * L
    dP = p.l * L - k.k7 * P
    dS_v = p.theta * P - lam_v * S_v - k.k8 * S_v
    dE_v = lam_v * S_v - k.k9 * E_v
    dI_v = p.gamma_v * E_v - k.k8 * I_v

    dI_h = p.gamma_h * E_h - k.k4 * I_h
    dR_h = p.sigma * I_h - p.mu_h * R_h

    if variant.vaccination:
        dS_h = p.Lambda_h + p.omega * V_h - (lam_h + p.xi + p.mu_h) * S_h
        dV_h = p.xi * S_h - (k.pi * lam_h + p.omega + p.mu_h) * V_h
        dE_h = lam_h * (S_h + k.pi * V_h) - k.k3 * E_h
        return np.array([dS_h, dV_h, dE_h, dI_h, dR_h,
                         dS_v, dE_v, dI_v, dE_egg, dL, dP])

    dS_h = p.Lambda_h - (lam_h + p.mu_h) * S_h
    dE_h = lam_h * S_h - k.k3 * E_h
    return np.array([dS_h, dE_h, dI_h, dR_h,
                     dS_v, dE_v, dI_v, dE_egg, dL, dP])


def numerical_jacobian(state, p: ModelParams,
                       variant: ModelVariant = ModelVariant(),
                       active: ControlOverrides | None = None,
                       h_scale: float = 1e-7) -> np.ndarray:
    """Jacobian of the vector field by central differences.

    Per coordinate step h_i = h_scale * max(1, |state_i|).
    """
    x = np.asarray(state, dtype=float)
    n = len(x)
    J = np.empty((n, n))
    for i in range(n):
        h = h_scale * max(1.0, abs(x[i]))
        xp = x.copy()
        xp[i] += h
        xm = x.copy()
        xm[i] -= h
        J[:, i] = (rhs(0.0, xp, p, variant, active)
                   - rhs(0.0, xm, p, variant, active)) / (2.0 * h)
    return J


def region_bounds(p: ModelParams,
                  active: ControlOverrides | None = None) -> dict:
    """Upper bounds of the forward invariant region.

    Keys: N_h, E, L, P, N_v. States inside these bounds stay inside under
    the flow, up to the stated relative slack used by the membership test.
    """
    k = derive_constants(p, active)
    P_max = p.l * k.K_L / k.k7
    return {
        "N_h": p.Lambda_h / p.mu_h,
        "E": k.K_E,
        "L": k.K_L,
        "P": P_max,
        "N_v": p.theta * P_max / k.k8,
    }


def in_feasible_region(state, p: ModelParams,
                       variant: ModelVariant = ModelVariant(),
                       active: ControlOverrides | None = None,
                       rel_slack: float = 1e-6) -> bool:
    """Membership test for the biologically feasible region.

    Componentwise nonnegativity plus the capacity bounds from
    region_bounds, each allowed a relative slack.
    """
    st = _split(state, variant)
    if np.any(np.asarray(st) < -rel_slack):
        return False
    b = region_bounds(p, active)
    N_h = st[0] + st[1] + st[2] + st[3] + st[4]
    N_v = st[5] + st[6] + st[7]
    checks = [
        (N_h, b["N_h"]),
        (st[8], b["E"]),
        (st[9], b["L"]),
        (st[10], b["P"]),
        (N_v, b["N_v"]),
    ]
    for value, bound in checks:
        if value > bound * (1.0 + rel_slack):
            return False
    return True
