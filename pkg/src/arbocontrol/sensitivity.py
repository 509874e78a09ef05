"""Parameter sensitivity of the reproduction number.

Local normalised indices by central differences (with the three indices
that are exact by proportionality returned analytically), and global
Latin hypercube sampling with partial rank correlation coefficients.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from .model import DEFAULT_PARAMS, PARAM_NAMES, ModelParams
from .equilibria import offspring_number, reproduction_number

__all__ = [
    "local_index",
    "local_indices",
    "lhs_sample",
    "reproduction_outputs",
    "prcc",
    "prcc_table",
    "default_ranges",
]

# Parameters whose upper range must stay inside the unit interval.
_UNIT_CLIPPED = ("epsilon", "beta_hv", "beta_vh", "eta_h", "eta_v",
                 "alpha_1", "alpha_2")

# R0 is exactly proportional to a and to the square roots of the two
# transmission probabilities, so these indices need no differencing.
_ANALYTIC = {"a": 1.0, "beta_hv": 0.5, "beta_vh": 0.5}


def local_index(p: ModelParams, name: str, rel: float = 1e-6) -> float:
    """Normalised local sensitivity index of R0 to one parameter.

    (x / R0) * dR0/dx by central differences with relative step `rel`.
    A parameter sitting at zero has index zero by the normalisation.
    Raises ValueError when R0 is zero, where the index is undefined.
    """
    if name not in PARAM_NAMES:
        raise ValueError(f"unknown parameter {name!r}")
    r0 = reproduction_number(p)
    if r0 == 0.0:
        raise ValueError(
            "sensitivity index undefined: R0 is 0 at these parameters")
    if name in _ANALYTIC:
        return _ANALYTIC[name]
    x = getattr(p, name)
    if x == 0.0:
        return 0.0
    h = rel * abs(x)
    rp = reproduction_number(p.with_updates(**{name: x + h}))
    rm = reproduction_number(p.with_updates(**{name: x - h}))
    return float(x * (rp - rm) / (2.0 * h * r0))


def local_indices(p: ModelParams, names=None, rel: float = 1e-6) -> dict:
    """Normalised local indices for every parameter (or the given ones)."""
    if names is None:
        names = PARAM_NAMES
    return {name: local_index(p, name, rel) for name in names}


def default_ranges(p: ModelParams | None = None) -> dict:
    """Half to one and a half times each baseline value, clipped so every
    sample stays inside the parameter's validity region."""
    base = p.asdict() if p is not None else dict(DEFAULT_PARAMS)
    out = {}
    for name in PARAM_NAMES:
        m = base[name]
        lo, hi = 0.5 * m, 1.5 * m
        if name in _UNIT_CLIPPED:
            hi = min(hi, 1.0)
        out[name] = (lo, hi)
    return out


def lhs_sample(n: int, seed: int, ranges: dict | None = None,
               p: ModelParams | None = None) -> np.ndarray:
    """Latin hypercube sample of all parameters, shape (n, 29).

    Each parameter range is split into n equal strata with one uniform
    draw per stratum, and the strata are permuted independently per
    parameter. The counter based generator makes the design a pure
    function of the seed.
    """
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    rng = np.random.Generator(np.random.Philox(seed))
    rg = default_ranges(p)
    if ranges:
        for name, pair in ranges.items():
            if name not in PARAM_NAMES:
                raise ValueError(f"unknown parameter {name!r} in ranges")
            lo, hi = float(pair[0]), float(pair[1])
            if not (lo < hi):
                raise ValueError(f"range for {name} must have lo < hi")
            rg[name] = (lo, hi)
    X = np.empty((n, len(PARAM_NAMES)))
    for j, name in enumerate(PARAM_NAMES):
        lo, hi = rg[name]
        strata = (np.arange(n) + rng.random(n)) / n
        vals = lo + strata * (hi - lo)
        X[:, j] = rng.permutation(vals)
    return X


def reproduction_outputs(X: np.ndarray) -> np.ndarray:
    """R0 for each sampled row. Rows where the vector population cannot
    persist are kept, with R0 recorded as zero."""
    out = np.empty(len(X))
    for i, row in enumerate(X):
        p = ModelParams(**dict(zip(PARAM_NAMES, row)))
        out[i] = reproduction_number(p) if offspring_number(p) > 1.0 else 0.0
    return out


def prcc(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Partial rank correlation of each column of X with y.

    Rank transform with average ties, then for each parameter correlate
    the residuals of linear regressions of that parameter and of the
    output on all remaining parameters. Degenerate (constant) columns
    get nan.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, k = X.shape
    R = np.column_stack([rankdata(X[:, j]) for j in range(k)])
    ry = rankdata(y)
    out = np.empty(k)
    for j in range(k):
        others = np.delete(R, j, axis=1)
        design = np.column_stack([np.ones(n), others])
        res_x = R[:, j] - design @ np.linalg.lstsq(design, R[:, j],
                                                   rcond=None)[0]
        res_y = ry - design @ np.linalg.lstsq(design, ry, rcond=None)[0]
        sx = np.linalg.norm(res_x)
        sy = np.linalg.norm(res_y)
        if sx <= 1e-12 * np.sqrt(n) or sy <= 1e-12 * np.sqrt(n):
            out[j] = float("nan")
            continue
        out[j] = float((res_x @ res_y) / (sx * sy))
    return out


def prcc_table(p: ModelParams, n: int, seed: int,
               ranges: dict | None = None):
    """LHS design, outputs and PRCC values in one call.

    Returns (names, prcc_values, outputs).
    """
    X = lhs_sample(n, seed, ranges, p)
    y = reproduction_outputs(X)
    g = prcc(X, y)
    return list(PARAM_NAMES), g, y
