"""Command line interface: config parsing, delimited output, figures and
run manifests.

Every subcommand reads an optional flat key=value config, writes CSV
results plus a manifest with SHA-256 digests of the outputs into the
chosen directory, and uses deterministic settings throughout so a replay
of the same command is byte identical.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .model import (
    DEFAULT_PARAMS,
    PARAM_NAMES,
    ModelParams,
    ModelVariant,
    STATE_LABELS,
)
from .equilibria import (
    NumericalError,
    compute_thresholds,
    disease_free_states,
    solve_endemic,
    beta_hv_critical,
)
from .stability import classify, bifurcation_sweep
from .simulate import (
    DEFAULT_INITIAL_STATE,
    PulseEntry,
    PulseSchedule,
    integrate,
    run_strategy,
    STRATEGY_TAGS,
)
from .sensitivity import local_indices, prcc_table

__all__ = [
    "ConfigError",
    "parse_config",
    "parse_ranges",
    "parse_schedule",
    "format_value",
    "emit_csv",
    "emit_svg",
    "main",
]

SVG_HASHSALT = "arbocontrol"


class ConfigError(ValueError):
    """Bad input file content; message carries the line number."""


# ---------------------------------------------------------------------------
# parsing


def _parse_flat(text: str, source: str = "config"):
    """key=value lines; blank lines and # comments allowed."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(
                f"{source} line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        yield lineno, key.strip(), value.strip()


def parse_config(text: str, source: str = "config") -> tuple[ModelParams, dict]:
    """Parse a flat key=value parameter file.

    Keys are the transliterated parameter names (beta_hv, Gamma_E,
    alpha_1 and so on). Unknown keys and non numeric values raise
    ConfigError with the line number; missing keys fall back to the
    baseline defaults and are recorded by the caller's manifest.
    """
    provided = {}
    for lineno, key, value in _parse_flat(text, source):
        if key not in PARAM_NAMES:
            raise ConfigError(f"{source} line {lineno}: unknown key {key!r}")
        try:
            x = float(value)
        except ValueError:
            raise ConfigError(
                f"{source} line {lineno}: value for {key} is not a number: "
                f"{value!r}") from None
        provided[key] = x
    try:
        p = ModelParams(**provided)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    return p, provided


def parse_ranges(text: str, source: str = "ranges") -> dict:
    """Parse a sampling range file: lines of name=lo,hi."""
    out = {}
    for lineno, key, value in _parse_flat(text, source):
        if key not in PARAM_NAMES:
            raise ConfigError(f"{source} line {lineno}: unknown key {key!r}")
        parts = value.split(",")
        if len(parts) != 2:
            raise ConfigError(
                f"{source} line {lineno}: expected {key}=lo,hi")
        try:
            lo, hi = float(parts[0]), float(parts[1])
        except ValueError:
            raise ConfigError(
                f"{source} line {lineno}: non numeric bound in {value!r}"
            ) from None
        if not lo < hi:
            raise ConfigError(
                f"{source} line {lineno}: need lo < hi for {key}")
        out[key] = (lo, hi)
    return out


def parse_schedule(text: str, source: str = "schedule") -> PulseSchedule:
    """Parse a pulse schedule CSV.

    Header control,level,period,duration,start,end; `end` may be inf.
    """
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        return PulseSchedule()
    header = [h.strip() for h in rows[0]]
    expected = ["control", "level", "period", "duration", "start", "end"]
    if header != expected:
        raise ConfigError(
            f"{source} line 1: header must be {','.join(expected)}")
    entries = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 6:
            raise ConfigError(
                f"{source} line {lineno}: expected 6 fields, got {len(row)}")
        try:
            entry = PulseEntry(
                control=row[0].strip(),
                level=float(row[1]),
                period=float(row[2]),
                duration=float(row[3]),
                start=float(row[4]),
                end=float(row[5]),
            )
        except ValueError as exc:
            raise ConfigError(f"{source} line {lineno}: {exc}") from None
        entries.append(entry)
    return PulseSchedule(entries)


# ---------------------------------------------------------------------------
# emission


def format_value(x) -> str:
    """Delimited-file rendering: floats at 17 significant digits (enough
    to round trip bit for bit), everything else as plain text."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        if math.isnan(x):
            return "nan"
        return f"{float(x):.17g}"
    return str(x)


def emit_csv(path, header, rows) -> Path:
    """Write an RFC 4180 CSV (CRLF, minimal quoting). Empty tables give a
    header only file."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\r\n",
                            quoting=csv.QUOTE_MINIMAL)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(x) for x in row])
    return path


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n", quoting=csv.QUOTE_MINIMAL)
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(x) for x in row])
    return buf.getvalue()


def emit_svg(fig, path) -> Path:
    """Save a figure as deterministic SVG: fixed hash salt, no date
    metadata, text kept as text."""
    import matplotlib
    path = Path(path)
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASHSALT,
                                "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    import matplotlib.pyplot as plt
    plt.close(fig)
    return path


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    h.update(Path(path).read_bytes())
    return h.hexdigest()


def write_manifest(out_dir: Path, subcommand: str, p: ModelParams,
                   provided: dict, flags: dict, outputs: list,
                   extra: dict | None = None,
                   name: str = "manifest.txt") -> Path:
    lines = [("version", __version__), ("subcommand", subcommand)]
    for key in sorted(flags):
        if key == "out":
            # the output directory is wherever the manifest lives; recording
            # it would make otherwise identical runs differ byte for byte
            continue
        lines.append((f"flag.{key}", format_value(flags[key])))
    for key in PARAM_NAMES:
        lines.append((f"param.{key}", format_value(getattr(p, key))))
    defaulted = sorted(set(PARAM_NAMES) - set(provided))
    lines.append(("defaulted", ",".join(defaulted)))
    if extra:
        for key in sorted(extra):
            lines.append((key, format_value(extra[key])))
    for path in outputs:
        lines.append((f"sha256.{Path(path).name}", _sha256(path)))
    path = Path(out_dir) / name
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in lines:
            fh.write(f"{key}={value}\n")
    return path


# ---------------------------------------------------------------------------
# figures


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def figure_trajectory(traj, title="trajectory"):
    plt = _pyplot()
    fig, axes = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    axes[0].plot(traj.t, traj.infected_humans(), color="tab:red")
    axes[0].set_ylabel("infected humans")
    axes[0].set_title(title)
    axes[1].plot(traj.t, traj.infected_vectors(), color="tab:blue")
    axes[1].set_ylabel("infected vectors")
    axes[1].set_xlabel("time (days)")
    fig.tight_layout()
    return fig


def figure_bifurcation(rows, title="equilibrium branches"):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 5))
    branches = sorted({r["branch"] for r in rows})
    for b in branches:
        pts = [r for r in rows if r["branch"] == b
               and np.isfinite(r["lambda_root"])]
        for style, want in (("-", "stable"), ("--", "unstable")):
            xs = [r["beta_hv"] for r in pts if r["stable"] == want]
            ys = [r["E_h"] for r in pts if r["stable"] == want]
            if xs:
                ax.plot(xs, ys, style,
                        color="black" if b == 0 else f"C{b}",
                        label=f"branch {b} ({want})")
    ax.set_xlabel("transmission probability to humans")
    ax.set_ylabel("exposed humans at equilibrium")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig


def figure_tornado(names, values, title):
    plt = _pyplot()
    order = np.argsort([abs(v) if np.isfinite(v) else -1 for v in values])
    names = [names[i] for i in order]
    values = [values[i] for i in order]
    fig, ax = plt.subplots(figsize=(6, 0.28 * len(names) + 1.5))
    ax.barh(range(len(names)), values,
            color=["tab:red" if v < 0 else "tab:blue" for v in values])
    ax.set_yticks(range(len(names)))
    ax.set_yticklabels(names, fontsize=7)
    ax.axvline(0.0, color="black", linewidth=0.8)
    ax.set_title(title)
    fig.tight_layout()
    return fig


def figure_histogram(y, title):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(y, bins=40, color="tab:gray")
    ax.axvline(1.0, color="tab:red", linewidth=1.0)
    ax.set_xlabel("reproduction number")
    ax.set_ylabel("samples")
    ax.set_title(title)
    fig.tight_layout()
    return fig


def figure_strategies(curves, title="strategy comparison"):
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(7, 5))
    for label, t, y in curves:
        ax.plot(t, y, label=label)
    ax.set_xlabel("time (days)")
    ax.set_ylabel("infected humans")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    return fig


# ---------------------------------------------------------------------------
# subcommands


def _variant_from_args(args) -> ModelVariant:
    return ModelVariant(
        incidence=getattr(args, "incidence", "standard").replace("-", "_"),
        vaccination=not getattr(args, "no_vaccination", False),
        delta_zero=getattr(args, "delta_zero", False),
    )


def _variant_tag(v: ModelVariant) -> str:
    parts = [v.incidence,
             "vaccination" if v.vaccination else "no-vaccination"]
    if v.delta_zero:
        parts.append("delta-zero")
    return "+".join(parts)


def _load(args) -> tuple[ModelParams, dict]:
    if args.config:
        text = Path(args.config).read_text(encoding="utf-8")
        return parse_config(text, source=args.config)
    return ModelParams(), {}


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_thresholds(args) -> int:
    p, provided = _load(args)
    report = compute_thresholds(p)
    header = ["name", "value", "applicable"]
    rows = report.rows()
    out = _outdir(args)
    path = emit_csv(out / "thresholds.csv", header, rows)
    sys.stdout.write(csv_text(header, rows))
    write_manifest(out, "thresholds", p, provided,
                   {"config": args.config or "", "out": str(args.out)},
                   [path])
    return 0


def _equilibrium_rows(p, variant):
    rows = []
    eqs = disease_free_states(p, variant)
    rep = solve_endemic(p, variant)
    eqs.extend(rep.equilibria)
    for eq in eqs:
        try:
            eq.stability = classify(eq.state, p, variant).verdict
        except ValueError as exc:
            eq.stability = f"error: {exc}"
        st = eq.state
        if not variant.vaccination:
            st = np.concatenate([st[:1], [0.0], st[1:]])
        rows.append([eq.kind] + list(st) + [eq.residual, eq.stability])
    return rows, rep


def cmd_equilibria(args) -> int:
    p, provided = _load(args)
    variant = _variant_from_args(args)
    rows, rep = _equilibrium_rows(p, variant)
    header = ["kind"] + list(STATE_LABELS) + ["residual", "stability"]
    out = _outdir(args)
    path = emit_csv(out / "equilibria.csv", header, rows)
    sys.stdout.write(csv_text(header, rows))
    extra = {"variant": _variant_tag(variant)}
    if rep.degenerate_at_threshold:
        extra["degenerate_at_threshold"] = "true"
        print(rep.message, file=sys.stderr)
    write_manifest(out, "equilibria", p, provided,
                   {"config": args.config or "", "out": str(args.out),
                    "variant": _variant_tag(variant)},
                   [path], extra=extra)
    return 0


def cmd_bifurcation(args) -> int:
    p, provided = _load(args)
    variant = _variant_from_args(args)
    if args.beta_min is None or args.beta_max is None:
        bstar = beta_hv_critical(p)
        lo = args.beta_min if args.beta_min is not None else 0.2 * bstar
        hi = args.beta_max if args.beta_max is not None else min(
            2.0 * bstar, 0.999)
    else:
        lo, hi = args.beta_min, args.beta_max
    rows = bifurcation_sweep(p, (lo, hi), args.n, variant)
    header = ["beta_hv", "R0", "branch", "lambda_root", "E_h", "E_v",
              "stable"]
    out = _outdir(args)
    path = emit_csv(out / "bifurcation.csv", header,
                    [[r[h] for h in header] for r in rows])
    outputs = [path]
    fig = figure_bifurcation(rows)
    outputs.append(emit_svg(fig, out / "bifurcation.svg"))
    write_manifest(out, "bifurcation", p, provided,
                   {"config": args.config or "", "out": str(args.out),
                    "beta_min": lo, "beta_max": hi, "n": args.n,
                    "variant": _variant_tag(variant)},
                   outputs)
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def _parse_initial(text: str, dim: int) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != dim:
        raise ConfigError(
            f"initial state needs {dim} comma separated values, got "
            f"{len(parts)}")
    try:
        return np.array([float(x) for x in parts])
    except ValueError:
        raise ConfigError("initial state has a non numeric entry") from None


def cmd_simulate(args) -> int:
    p, provided = _load(args)
    variant = _variant_from_args(args)
    dim = 11 if variant.vaccination else 10
    if args.initial:
        y0 = _parse_initial(args.initial, dim)
    elif variant.vaccination:
        y0 = DEFAULT_INITIAL_STATE.copy()
    else:
        full = DEFAULT_INITIAL_STATE
        y0 = np.concatenate([full[:1], full[2:]])
    schedule = None
    if args.schedule:
        schedule = parse_schedule(
            Path(args.schedule).read_text(encoding="utf-8"),
            source=args.schedule)
    t_eval = np.linspace(0.0, args.horizon, args.samples)
    traj = integrate(p, y0, (0.0, args.horizon), variant, schedule,
                     rtol=args.rtol, atol=args.atol, t_eval=t_eval)
    labels = list(traj.labels)
    header = ["t"] + labels + ["cumulative_infections"]
    rows = [[traj.t[i]] + list(traj.states[i])
            + [traj.cumulative_infections[i]] for i in range(len(traj.t))]
    out = _outdir(args)
    path = emit_csv(out / "trajectory.csv", header, rows)
    outputs = [path, emit_svg(figure_trajectory(traj),
                              out / "trajectory.svg")]
    write_manifest(out, "simulate", p, provided,
                   {"config": args.config or "", "out": str(args.out),
                    "horizon": args.horizon, "samples": args.samples,
                    "rtol": args.rtol, "atol": args.atol,
                    "schedule": args.schedule or "",
                    "initial": args.initial or "",
                    "variant": _variant_tag(variant)},
                   outputs)
    print(f"wrote {path} ({len(rows)} rows)")
    return 0


def _parse_levels(pairs) -> dict:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise ConfigError(f"--level expects name=value, got {item!r}")
        name, _, value = item.partition("=")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise ConfigError(f"--level {name}: not a number: {value!r}"
                              ) from None
    return out


def _parse_grids(pairs) -> dict:
    out = {}
    for item in pairs or []:
        if "=" not in item:
            raise ConfigError(f"--grid expects name=v1,v2,..., got {item!r}")
        name, _, value = item.partition("=")
        try:
            out[name.strip()] = [float(x) for x in value.split(",")]
        except ValueError:
            raise ConfigError(f"--grid {name}: non numeric level") from None
    return out


def cmd_strategy(args) -> int:
    p, provided = _load(args)
    levels = _parse_levels(args.level)
    grids = _parse_grids(args.grid)
    combos = [dict(levels)]
    for name, values in grids.items():
        combos = [dict(c, **{name: v}) for c in combos for v in values]
    control_cols = ["alpha_1", "c_m", "eta_1", "eta_2", "alpha_2"]
    header = (["tag"] + control_cols
              + ["cumulative_infections", "peak_infected_humans",
                 "final_infected_humans", "final_infected_vectors",
                 "final_eggs", "final_larvae"])
    rows = []
    curves = []
    from .simulate import strategy_params
    for combo in combos:
        traj, summary = run_strategy(p, args.tag, combo,
                                     horizon=args.horizon,
                                     rtol=args.rtol, atol=args.atol)
        p_eff = strategy_params(p, args.tag, combo)
        shown = {name: combo.get(name, getattr(p_eff, name))
                 for name in control_cols}
        rows.append([summary.tag] + [shown[c] for c in control_cols]
                    + [summary.cumulative_infections,
                       summary.peak_infected_humans,
                       summary.final_infected_humans,
                       summary.final_infected_vectors,
                       summary.final_eggs, summary.final_larvae])
        label = ",".join(f"{k}={combo[k]:g}" for k in sorted(combo)) or "base"
        curves.append((f"{summary.tag} {label}", traj.t,
                       traj.infected_humans()))
    out = _outdir(args)
    path = emit_csv(out / "strategy.csv", header, rows)
    outputs = [path, emit_svg(figure_strategies(curves),
                              out / "strategy.svg")]
    write_manifest(out, "strategy", p, provided,
                   {"config": args.config or "", "out": str(args.out),
                    "tag": args.tag, "horizon": args.horizon,
                    "rtol": args.rtol, "atol": args.atol,
                    "level": ";".join(args.level or []),
                    "grid": ";".join(args.grid or [])},
                   outputs)
    sys.stdout.write(csv_text(header, rows))
    return 0


def cmd_sensitivity(args) -> int:
    p, provided = _load(args)
    out = _outdir(args)
    if args.mode == "local":
        table = local_indices(p)
        header = ["parameter", "index"]
        rows = [[k, v] for k, v in table.items()]
        path = emit_csv(out / "sensitivity_local.csv", header, rows)
        outputs = [path]
        if args.plot:
            fig = figure_tornado(list(table), list(table.values()),
                                 "local sensitivity of R0")
            outputs.append(emit_svg(fig, out / "tornado.svg"))
        sys.stdout.write(csv_text(header, rows))
        write_manifest(out, "sensitivity-local", p, provided,
                       {"config": args.config or "", "out": str(args.out),
                        "plot": args.plot},
                       outputs)
        return 0
    ranges = None
    if args.ranges:
        ranges = parse_ranges(Path(args.ranges).read_text(encoding="utf-8"),
                              source=args.ranges)
    names, g, y = prcc_table(p, args.n, args.seed, ranges)
    header = ["parameter", "prcc"]
    rows = [[names[i], g[i]] for i in range(len(names))]
    path = emit_csv(out / "sensitivity_prcc.csv", header, rows)
    outputs = [path]
    stats = (float(np.mean(y)), float(np.std(y)), float(np.mean(y > 1.0)))
    sys.stdout.write("mean,std,p_gt_1\r\n")
    sys.stdout.write(",".join(format_value(v) for v in stats) + "\r\n")
    if args.plot:
        outputs.append(emit_svg(
            figure_tornado(names, list(g), "PRCC of R0"),
            out / "prcc_tornado.svg"))
        outputs.append(emit_svg(
            figure_histogram(y, "sampled reproduction numbers"),
            out / "r0_histogram.svg"))
    write_manifest(out, "sensitivity-global", p, provided,
                   {"config": args.config or "", "out": str(args.out),
                    "n": args.n, "seed": args.seed,
                    "ranges": args.ranges or "", "plot": args.plot},
                   outputs,
                   extra={"stats.mean": stats[0], "stats.std": stats[1],
                          "stats.p_gt_1": stats[2]})
    return 0


def cmd_selfcheck(args) -> int:
    p, provided = _load(args)
    out = _outdir(args)
    outputs = []
    report = compute_thresholds(p)
    outputs.append(emit_csv(out / "selfcheck_thresholds.csv",
                            ["name", "value", "applicable"], report.rows()))
    variant = ModelVariant()
    rows, _ = _equilibrium_rows(p, variant)
    outputs.append(emit_csv(
        out / "selfcheck_equilibria.csv",
        ["kind"] + list(STATE_LABELS) + ["residual", "stability"], rows))
    bstar = beta_hv_critical(p)
    sweep = bifurcation_sweep(p, (0.5 * bstar, min(1.5 * bstar, 0.999)), 5,
                              variant)
    header = ["beta_hv", "R0", "branch", "lambda_root", "E_h", "E_v",
              "stable"]
    outputs.append(emit_csv(out / "selfcheck_bifurcation.csv", header,
                            [[r[h] for h in header] for r in sweep]))
    schedule = PulseSchedule([PulseEntry("c_m", 0.2, 7.0, 1.0, 0.0, 50.0)])
    t_eval = np.linspace(0.0, 50.0, 101)
    traj = integrate(p, DEFAULT_INITIAL_STATE.copy(), (0.0, 50.0),
                     schedule=schedule, t_eval=t_eval)
    labels = list(traj.labels)
    outputs.append(emit_csv(
        out / "selfcheck_trajectory.csv",
        ["t"] + labels + ["cumulative_infections"],
        [[traj.t[i]] + list(traj.states[i]) + [traj.cumulative_infections[i]]
         for i in range(len(traj.t))]))
    table = local_indices(p)
    outputs.append(emit_csv(out / "selfcheck_sensitivity_local.csv",
                            ["parameter", "index"],
                            [[k, v] for k, v in table.items()]))
    names, g, y = prcc_table(p, 200, 0)
    outputs.append(emit_csv(out / "selfcheck_sensitivity_prcc.csv",
                            ["parameter", "prcc"],
                            [[names[i], g[i]] for i in range(len(names))]))
    stats = (float(np.mean(y)), float(np.std(y)), float(np.mean(y > 1.0)))
    write_manifest(out, "selfcheck", p, provided,
                   {"config": args.config or "", "out": str(args.out)},
                   outputs,
                   extra={"stats.mean": stats[0], "stats.std": stats[1],
                          "stats.p_gt_1": stats[2]},
                   name="selfcheck_manifest.txt")
    for path in outputs:
        print(f"selfcheck wrote {Path(path).name}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arbocontrol",
        description="Analysis toolkit for a vector borne disease model "
                    "with vaccination and vector control.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, variant=False):
        sp.add_argument("--config", help="flat key=value parameter file")
        sp.add_argument("--out", default=".", help="output directory")
        if variant:
            sp.add_argument("--incidence", default="standard",
                            choices=["standard", "mass-action",
                                     "mass_action"])
            sp.add_argument("--no-vaccination", action="store_true")
            sp.add_argument("--delta-zero", action="store_true")

    sp = sub.add_parser("thresholds", help="reproduction numbers and "
                        "persistence thresholds")
    common(sp)
    sp.set_defaults(func=cmd_thresholds)

    sp = sub.add_parser("equilibria", help="boundary and endemic steady "
                        "states with stability")
    common(sp, variant=True)
    sp.set_defaults(func=cmd_equilibria)

    sp = sub.add_parser("bifurcation", help="equilibrium branches against "
                        "the transmission probability")
    common(sp, variant=True)
    sp.add_argument("--beta-min", type=float, default=None)
    sp.add_argument("--beta-max", type=float, default=None)
    sp.add_argument("--n", type=int, default=101, help="sweep points")
    sp.set_defaults(func=cmd_bifurcation)

    sp = sub.add_parser("simulate", help="integrate the model, optionally "
                        "with a pulse schedule")
    common(sp, variant=True)
    sp.add_argument("--horizon", type=float, default=500.0)
    sp.add_argument("--samples", type=int, default=1001)
    sp.add_argument("--rtol", type=float, default=1e-8)
    sp.add_argument("--atol", type=float, default=1e-10)
    sp.add_argument("--schedule", help="pulse schedule CSV file")
    sp.add_argument("--initial", help="comma separated initial state")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("strategy", help="run a named control strategy "
                        "over a level grid")
    common(sp)
    sp.add_argument("--tag", required=True,
                    choices=list(STRATEGY_TAGS))
    sp.add_argument("--level", action="append",
                    help="control level name=value (repeatable)")
    sp.add_argument("--grid", action="append",
                    help="control level grid name=v1,v2,... (repeatable)")
    sp.add_argument("--horizon", type=float, default=500.0)
    sp.add_argument("--rtol", type=float, default=1e-8)
    sp.add_argument("--atol", type=float, default=1e-10)
    sp.set_defaults(func=cmd_strategy)

    sp = sub.add_parser("sensitivity", help="local indices or global PRCC")
    sp.add_argument("mode", choices=["local", "global"])
    common(sp)
    sp.add_argument("--n", type=int, default=1000, help="sample count")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--ranges", help="sampling ranges file (name=lo,hi)")
    sp.add_argument("--plot", action="store_true",
                    help="also write tornado (and histogram) SVGs")
    sp.set_defaults(func=cmd_sensitivity)

    sp = sub.add_parser("selfcheck", help="deterministic subset of every "
                        "pipeline; reruns are byte identical")
    common(sp)
    sp.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
