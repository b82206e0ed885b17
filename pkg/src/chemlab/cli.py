"""Command-line harness: condition checks, simulation runs, parameter sweeps.

Exit codes (documented contract; no failure path exits 0):

    0  success
    1  configuration or usage error (argparse uses 2 for malformed argv)
    3  blow-up detector tripped
    4  dt hit its floor
    5  positivity could not be maintained at any dt >= dt_min
    6  an a-priori bound was violated on the trajectory
    7  heat-regression verification failed (--verify-heat)
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import conditions, monitors
from .config import ConfigError, ExperimentConfig, parse_config
from .model import (
    CosineBump,
    DomainKind,
    FieldState,
    build_grid,
    evaluate_initial,
    integrate_field,
    make_initial_data,
)
from .solver import StepStatus, simulate
from .svg import line_chart

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_BLOWUP = 3
EXIT_DT_FLOOR = 4
EXIT_NEGATIVITY = 5
EXIT_BOUNDS = 6
EXIT_VERIFY = 7

_STATUS_EXIT = {
    StepStatus.OK: EXIT_OK,
    StepStatus.BLOWUP_DETECTED: EXIT_BLOWUP,
    StepStatus.DT_FLOOR_HIT: EXIT_DT_FLOOR,
    StepStatus.NEGATIVITY_FAULT: EXIT_NEGATIVITY,
}


def _threads() -> int:
    raw = os.environ.get("CHEMLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _load(path: str) -> ExperimentConfig:
    text = Path(path).read_text()
    return parse_config(text)


def _mass_ceiling(cfg: ExperimentConfig, initial_state: FieldState, grid) -> float:
    """Monitor ceiling: max of the discrete initial mass and the logistic
    capacity.  Without quadratic damping no capacity exists: birth alone
    (mu = 0, lam > 0) grows the mass without bound, so the ceiling is
    infinite and the mass check is vacuous; with both rates zero the mass
    is conserved at its initial value."""
    mass0 = integrate_field(initial_state.u, grid, cfg.domain)
    if cfg.model.mu > 0.0:
        return max(mass0, cfg.model.lam / cfg.model.mu * cfg.domain.measure)
    if cfg.model.lam > 0.0:
        return math.inf
    return mass0


def _setup(cfg: ExperimentConfig):
    grid = build_grid(cfg.domain, cfg.grid_shape)
    data = make_initial_data(cfg.u0_spec, cfg.v0_spec, cfg.domain, grid)
    state = evaluate_initial(data, grid)
    return grid, data, state


def _sanitize(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _sanitize(v) for k, v in value.items()}
    return value


# --- check ---------------------------------------------------------------


def cmd_check(cfg: ExperimentConfig, out=None) -> int:
    out = out if out is not None else sys.stdout
    grid, data, _ = _setup(cfg)
    model = cfg.model
    try:
        model.require_positive_rates()
        cls = conditions.gamma_class(model.gamma, model.n)
    except (conditions.TheoremScopeError, ValueError) as exc:
        print(f"error: {exc}", file=out)
        return EXIT_CONFIG
    gc = conditions.critical_gamma(model.n)
    print(f"gamma = {model.gamma:.12g}, critical exponent 2n/(n+1) = {gc:.12g}"
          f" -> {cls.value}", file=out)
    payload: dict = {"gamma": model.gamma, "critical_gamma": gc,
                     "gamma_class": cls.value}
    if cls is conditions.GammaClass.STRICT_RANGE:
        print("condition (A1): covered -- bounded for any positive coefficients",
              file=out)
    elif cls is conditions.GammaClass.UNCOVERED:
        print("uncovered: no boundedness statement applies below the "
              "critical exponent", file=out)
    else:
        v0_sup = data.v0_sup
        M = conditions.compute_M(data.u0_mass, model.lam, model.mu,
                                 cfg.domain.measure)
        rep = conditions.condition_a2(model, v0_sup, M, cfg.c_gn)
        reg, consts = conditions.remark_regimes(
            model, v0_sup, data.u0_mass, cfg.domain.measure, cfg.c_gn
        )
        found = conditions.search_p_eta(model, v0_sup, M, cfg.c_gn)
        verdict = "satisfied" if rep.satisfied else "not satisfied"
        print(f"M = {M:.12g}  (initial mass {data.u0_mass:.12g}, "
              f"logistic {model.lam / model.mu * cfg.domain.measure:.12g})",
              file=out)
        print(f"K1(n/2, n) = {rep.K1:.12g}   K2(n/2, n, 0) = {rep.K2:.12g}",
              file=out)
        print(f"F = {consts.F:.12g}   kappa = {consts.kappa:.12g}   "
              f"mu_bar = {consts.mu_bar:.12g}", file=out)
        if consts.E is not None:
            print(f"E = {consts.E:.12g}", file=out)
        if consts.mass_limit is not None:
            print(f"mass limit = {consts.mass_limit:.12g}", file=out)
        print(f"condition (A2): lhs = {rep.lhs:.12g} vs rhs = {rep.rhs:.12g} "
              f"-> {verdict} (conditional on C_GN = {cfg.c_gn:g})", file=out)
        print(f"regime: {reg.regime.value} -> "
              f"{'satisfied' if reg.satisfied else 'not satisfied'}", file=out)
        if found is None:
            print("search: no feasible (p, eta) on the grid", file=out)
        else:
            p, eta, grep = found
            print(f"search: feasible at p = {p:.12g}, eta = {eta:.12g} "
                  f"(lhs = {grep.lhs:.12g}, rhs = {grep.rhs:.12g})", file=out)
        payload.update(
            condition_a2=_sanitize(asdict(rep)),
            regimes=_sanitize(asdict(reg)),
            regime_constants=_sanitize(asdict(consts)),
            search=None if found is None else {
                "p": found[0], "eta": found[1],
                "report": _sanitize(asdict(found[2])),
            },
        )
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "check_report.json").write_text(json.dumps(payload, indent=2))
    return EXIT_OK


# --- simulate ------------------------------------------------------------


def _write_final_state(path: Path, state: FieldState, grid, domain) -> None:
    coords = grid.meshgrid()
    names = {1: ["x"], 2: ["x", "y"], 3: ["x", "y", "z"]}[len(grid.shape)]
    if domain.kind is DomainKind.RADIAL_BALL:
        names = ["r"]
    with path.open("w") as fh:
        fh.write("index," + ",".join(names) + ",u,v\n")
        flat_c = [c.ravel() for c in coords]
        fu = state.u.ravel()
        fv = state.v.ravel()
        for i in range(fu.size):
            cs = ",".join(repr(float(c[i])) for c in flat_c)
            fh.write(f"{i},{cs},{repr(float(fu[i]))},{repr(float(fv[i]))}\n")


def _verify_heat(cfg: ExperimentConfig, grid, state: FieldState, out) -> int:
    model = cfg.model
    if (model.chi, model.lam, model.mu, model.c) != (0.0, 0.0, 0.0, 0.0):
        print("error: --verify-heat needs all coupling/source coefficients "
              "zero", file=out)
        return EXIT_CONFIG
    if cfg.domain.kind is not DomainKind.INTERVAL or not isinstance(
        cfg.u0_spec, CosineBump
    ):
        print("error: --verify-heat needs an interval domain with a cosine "
              "u0", file=out)
        return EXIT_CONFIG
    length = cfg.domain.extents[0]
    x = grid.axis_centers(0)
    decay = math.exp(-((math.pi / length) ** 2) * state.t)
    exact = cfg.u0_spec.baseline + cfg.u0_spec.amplitude * decay * np.cos(
        math.pi * x / length
    )
    err = float(np.abs(state.u - exact).max())
    print(f"heat verification: max |u - exact| = {err:.6e}", file=out)
    if err > 5e-4:
        print("heat verification FAILED (tolerance 5e-4)", file=out)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_simulate(cfg: ExperimentConfig, verify_heat: bool = False,
                 out=None) -> int:
    out = out if out is not None else sys.stdout
    grid, data, state = _setup(cfg)
    M = _mass_ceiling(cfg, state, grid)
    v0_sup = data.v0_sup

    def observer(snapshot: FieldState):
        return monitors.record(
            snapshot, cfg.model, grid, cfg.domain, cfg.monitor_p, M, v0_sup,
            interp_q=cfg.interp_q,
        )

    outcome, recs = simulate(state, cfg.model, grid, cfg.domain, cfg.solver,
                             observer=observer)
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    with (outdir / "diagnostics.csv").open("w") as fh:
        fh.write(monitors.csv_header() + "\n")
        for rec in recs:
            fh.write(rec.to_csv_row() + "\n")
    _write_final_state(outdir / "final_state.csv", outcome.state, grid,
                       cfg.domain)
    if cfg.emit_svg and recs:
        chart = line_chart(
            [r.t for r in recs],
            {
                "mass": [r.mass for r in recs],
                "linf_u": [r.linf_u for r in recs],
                "linf_v": [r.linf_v for r in recs],
                "phi": [r.phi for r in recs],
            },
            title="diagnostics",
        )
        (outdir / "diagnostics.svg").write_text(chart)
    print(f"finished at t = {outcome.state.t:.12g} with status "
          f"{outcome.status.value}; {len(recs)} diagnostic records -> "
          f"{outdir / 'diagnostics.csv'}", file=out)
    if outcome.status is not StepStatus.OK:
        return _STATUS_EXIT[outcome.status]
    if recs:
        report = monitors.verify_trajectory_bounds(recs, M, v0_sup)
        if not report.ok:
            for failure in report.failures:
                print(f"bound violation: {failure}", file=out)
            return EXIT_BOUNDS
        print(f"a-priori bounds hold on all {len(recs)} records "
              f"(phi sup {report.phi_sup:.6g} at t = {report.phi_sup_t:.6g})",
              file=out)
    if verify_heat:
        return _verify_heat(cfg, grid, outcome.state, out)
    return EXIT_OK


# --- sweep ---------------------------------------------------------------

_SWEEPABLE_PREFIXES = ("model.", "initial.", "conditions.", "solver.")


def _parse_axis(spec: str) -> tuple[str, list[float]]:
    if "=" not in spec:
        raise ConfigError(f"bad axis spec '{spec}': expected key=start:stop:count")
    key, _, rng = spec.partition("=")
    key = key.strip()
    if not key.startswith(_SWEEPABLE_PREFIXES):
        raise ConfigError(f"key '{key}' is not sweepable")
    parts = rng.split(":")
    if len(parts) != 3:
        raise ConfigError(f"bad axis range '{rng}': expected start:stop:count")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad axis range '{rng}': {exc}") from exc
    if count < 1:
        raise ConfigError("axis count must be >= 1 (empty value list)")
    if count == 1:
        return key, [start]
    step = (stop - start) / (count - 1)
    return key, [start + i * step for i in range(count)]


def _override_config(text: str, overrides: dict[str, float]) -> ExperimentConfig:
    kept = []
    for line in text.splitlines():
        stripped = line.split("#", 1)[0].strip()
        key = stripped.partition("=")[0].strip() if "=" in stripped else None
        if key in overrides:
            continue
        kept.append(line)
    for key, value in overrides.items():
        kept.append(f"{key} = {value!r}")
    return parse_config("\n".join(kept))


def _sweep_point(text: str, overrides: dict[str, float]):
    cfg = _override_config(text, overrides)
    model = cfg.model
    model.require_positive_rates()
    cls = conditions.gamma_class(model.gamma, model.n)
    if cls is conditions.GammaClass.CRITICAL:
        grid = build_grid(cfg.domain, cfg.grid_shape)
        data = make_initial_data(cfg.u0_spec, cfg.v0_spec, cfg.domain, grid)
        rep, _ = conditions.remark_regimes(
            model, data.v0_sup, data.u0_mass, cfg.domain.measure, cfg.c_gn
        )
        return rep.lhs, rep.rhs, rep.satisfied, rep.regime.value
    if cls is conditions.GammaClass.STRICT_RANGE:
        return math.nan, math.nan, True, conditions.Regime.NOT_APPLICABLE.value
    return math.nan, math.nan, None, conditions.Regime.NOT_APPLICABLE.value


def cmd_sweep(config_path: str, axis_specs: list[str], out=None) -> int:
    out = out if out is not None else sys.stdout
    text = Path(config_path).read_text()
    cfg = parse_config(text)
    if not 1 <= len(axis_specs) <= 2:
        print("error: sweep needs one or two --axis arguments", file=out)
        return EXIT_CONFIG
    axes = [_parse_axis(s) for s in axis_specs]
    points: list[dict[str, float]] = []
    if len(axes) == 1:
        key, values = axes[0]
        points = [{key: v} for v in values]
    else:
        (k1, v1), (k2, v2) = axes
        points = [{k1: a, k2: b} for a in v1 for b in v2]
    workers = _threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda ov: _sweep_point(text, ov), points))
    else:
        results = [_sweep_point(text, ov) for ov in points]
    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    keys = [k for k, _ in axes]
    path = outdir / "sweep.csv"
    with path.open("w") as fh:
        fh.write(",".join(keys) + ",lhs,rhs,satisfied,regime\n")
        for ov, (lhs, rhs, sat, regime) in zip(points, results):
            vals = ",".join(repr(ov[k]) for k in keys)
            sat_s = "" if sat is None else ("true" if sat else "false")
            fh.write(f"{vals},{repr(lhs)},{repr(rhs)},{sat_s},{regime}\n")
    print(f"swept {len(points)} points -> {path}", file=out)
    return EXIT_OK


# --- inequality ----------------------------------------------------------


def cmd_inequality(q: float, shape: int, trials: int, seed: int,
                   out=None) -> int:
    out = out if out is not None else sys.stdout
    from .model import DomainSpec

    domain = DomainSpec(DomainKind.INTERVAL, (1.0,))
    grid = build_grid(domain, [shape])
    x = grid.axis_centers(0)
    rng = np.random.default_rng(seed)
    ratios = []
    for _ in range(trials):
        coef = rng.uniform(0.2, 1.0, 5)
        w = np.zeros_like(x)
        for k in range(1, 6):
            w += coef[k - 1] * np.cos(k * np.pi * x)
        _, _, ratio = monitors.check_interpolation_inequality(w, q, grid, domain)
        ratios.append(ratio)
    arr = np.array(ratios)
    print(f"interpolation check: q = {q:g}, shape = {shape}, "
          f"trials = {trials}", file=out)
    print(f"ratio rhs/lhs: min = {arr.min():.6g}, median = "
          f"{np.median(arr):.6g}, max = {arr.max():.6g}", file=out)
    return EXIT_OK


# --- entry point ----------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chemlab",
        description="Numerical laboratory for a consumption-chemotaxis "
        "system with gradient-dependent logistic damping.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="evaluate the boundedness conditions")
    p_check.add_argument("config")

    p_sim = sub.add_parser("simulate", help="run the solver and the monitors")
    p_sim.add_argument("config")
    p_sim.add_argument("--verify-heat", action="store_true",
                       help="compare the final state against the exact "
                       "Neumann heat solution")

    p_sweep = sub.add_parser("sweep", help="map a condition over parameter axes")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--axis", action="append", required=True,
                         metavar="key=start:stop:count")

    p_ineq = sub.add_parser("inequality",
                            help="spot-check the interpolation inequality "
                            "on random fields")
    p_ineq.add_argument("--q", type=float, default=1.0)
    p_ineq.add_argument("--shape", type=int, default=256)
    p_ineq.add_argument("--trials", type=int, default=50)
    p_ineq.add_argument("--seed", type=int, default=0)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "check":
            return cmd_check(_load(args.config))
        if args.command == "simulate":
            return cmd_simulate(_load(args.config), verify_heat=args.verify_heat)
        if args.command == "sweep":
            return cmd_sweep(args.config, args.axis)
        if args.command == "inequality":
            return cmd_inequality(args.q, args.shape, args.trials, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (conditions.TheoremScopeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"filesystem error: {exc.filename}: {exc.strerror}",
              file=sys.stderr)
        return EXIT_CONFIG
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
