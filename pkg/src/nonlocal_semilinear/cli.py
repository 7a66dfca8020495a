"""Configuration-driven experiment runner.

Usage::

    nonlocal-semilinear COMMAND CONFIG [--out DIR]

``CONFIG`` is a YAML (or JSON) file; every field is optional and the fully
resolved configuration is echoed into the header of each output file.
Commands: ``verify-kernel``, ``solve``, ``lambda-star``, ``bifurcation``,
``eigen`` and ``nonexist``.

Exit status: 0 on success, 2 when the configuration fails validation, 3 on
a numerical failure (including a diverged solve) and 64 for usage errors
such as an unknown command.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from .domain import Domain, make_graded_grid
from .errors import (
    AssumptionError,
    ConfigurationError,
    DegenerateInputError,
    DomainError,
    NumericalError,
    PreconditionError,
    UnsupportedError,
)
from .greenop import assemble, trace_quotient
from .kernel import (
    GreenKernel,
    KernelParams,
    critical_exponent,
    dimension_threshold,
    kernel_estimate_scan,
    satisfies_dimension_condition,
)
from .measure import WeightedMeasure, normalize
from .semilinear import (
    SemilinearProblem,
    bifurcation_sweep,
    check_solution_bounds,
    lambda_star,
    minimal_solution,
    residual,
)
from .spectral import eigen_report, stability_index
from .verify import (
    check_3g,
    check_marcinkiewicz_uniform,
    nonexistence_probe,
    probe_points_toward,
)

log = logging.getLogger("nonlocal_semilinear.cli")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_USAGE = 0, 2, 3, 64
COMMANDS = ("verify-kernel", "solve", "lambda-star", "bifurcation", "eigen", "nonexist")

DEFAULTS: dict = {
    "operator": {"family": "RFL", "s": 0.25, "truncation": None},
    "domain": {"kind": "interval", "a": 0.0, "b": 1.0, "center": None, "radius": 1.0, "N": None},
    "grid": {"n": 256, "grading": 2.0, "n_angular": 16},
    "problem": {
        "p": 1.5,
        "lambda": None,
        "lambda_fraction": 0.25,
        "mu": {"atoms": [{"x": 0.5, "mass": 1.0}], "normalize": True},
        "sweep_fractions": [0.1, 0.3, 0.5, 0.7, 0.9],
        "sweep": None,
        "tol": 1e-10,
        "max_iter": 200000,
    },
    "lambda_star": {"rtol": 1e-3},
    "verify": {
        "samples": 10000,
        "q_factors": [0.9, 1.1],
        "probe_deltas": [0.1, 0.01, 0.001],
        "boundary_point": None,
        "refine": 4,
    },
    "solve": {"trace_eps": [0.1, 0.05, 0.025]},
    "eigen": {"k": 3, "lambda_fractions": [0.25, 0.5, 0.75, 0.99]},
    "nonexist": {"p_values": None, "lambda": 0.15},
    "seed": 0,
    "output": {"directory": "out", "formats": ["csv", "json"]},
}

# -- configuration ----------------------------------------------------------------

def _merge(base: dict, over: dict, path: tuple = ()) -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if key not in base:
            raise ConfigurationError(f"unknown config key {'.'.join(path + (key,))!r}")
        if isinstance(base[key], dict) and key != "mu":
            if not isinstance(val, dict):
                raise ConfigurationError(f"config key {'.'.join(path + (key,))!r} must be a mapping")
            out[key] = _merge(base[key], val, path + (key,))
        else:
            out[key] = val
    return out


def resolve_config(raw: dict | None) -> dict:
    """Merge ``raw`` over the defaults and validate kernel assumptions."""
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigurationError("config must be a mapping at top level")
    cfg = _merge(DEFAULTS, raw)
    if isinstance(cfg["output"]["formats"], str):
        cfg["output"]["formats"] = [cfg["output"]["formats"]]
    unknown = set(cfg["output"]["formats"]) - {"csv", "json"}
    if unknown:
        raise ConfigurationError(f"unknown output formats {sorted(unknown)}")
    if not isinstance(cfg["seed"], int):
        raise ConfigurationError("seed must be an integer")
    op = cfg["operator"]
    if op["family"] not in ("RFL", "SFL"):
        raise ConfigurationError(f"operator.family must be RFL or SFL, got {op['family']!r}")
    # validates the kernel assumptions before anything is built
    params_for(cfg)
    return cfg


def load_config(path: str | Path) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}") from exc
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"cannot parse config: {exc}") from exc
    return resolve_config(raw)


def domain_for(cfg: dict) -> Domain:
    d = cfg["domain"]
    if d["kind"] == "interval":
        return Domain.interval(float(d.get("a", 0.0)), float(d.get("b", 1.0)))
    if d["kind"] == "ball":
        center = d["center"]
        N = int(d["N"]) if d["N"] is not None else (len(center) if center else 1)
        return Domain.ball(center, float(d["radius"]), N)
    raise ConfigurationError(f"unknown domain kind {d['kind']!r}")


def params_for(cfg: dict) -> KernelParams:
    op = cfg["operator"]
    N = domain_for(cfg).N
    gamma = op["s"] if op["family"] == "RFL" else 1.0
    return KernelParams(float(op["s"]), float(gamma), N)


def kernel_for(cfg: dict) -> GreenKernel:
    op = cfg["operator"]
    domain = domain_for(cfg)
    if op["family"] == "RFL":
        return GreenKernel.rfl(float(op["s"]), domain)
    return GreenKernel.sfl(float(op["s"]), domain, op["truncation"])


def measure_for(cfg: dict, gamma: float, domain: Domain) -> WeightedMeasure:
    mu_cfg = cfg["problem"]["mu"]
    mu = WeightedMeasure.from_dict({"atoms": mu_cfg.get("atoms", [])}, domain)
    if mu_cfg.get("normalize", True):
        mu = normalize(mu, gamma)
    return mu


# -- output ---------------------------------------------------------------------------

def _header_lines(cfg: dict, command: str) -> list[str]:
    return [
        f"# schema_version: {SCHEMA_VERSION}",
        f"# command: {command}",
        "# config: " + json.dumps(cfg, sort_keys=True),
    ]


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def write_csv(path: Path, cfg: dict, command: str, columns: list[str], rows) -> None:
    if "csv" not in cfg["output"]["formats"]:
        return
    buf = io.StringIO()
    for line in _header_lines(cfg, command):
        buf.write(line + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue())


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else repr(f)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path: Path, cfg: dict, command: str, result: dict) -> None:
    if "json" not in cfg["output"]["formats"]:
        return
    doc = {"schema_version": SCHEMA_VERSION, "command": command, "config": cfg,
           "result": _jsonable(result)}
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


# -- commands -------------------------------------------------------------------------

class _Context:
    """Lazily built operator and problem shared by the command bodies."""

    def __init__(self, cfg: dict):
        self.cfg = cfg
        self.kernel = kernel_for(cfg)
        g = cfg["grid"]
        self.grid = make_graded_grid(self.kernel.domain, int(g["n"]), float(g["grading"]),
                                     int(g["n_angular"]))
        self._gop = None

    @property
    def gop(self):
        if self._gop is None:
            self._gop = assemble(self.kernel, self.grid)
        return self._gop

    def problem(self, lam: float = 0.0, p: float | None = None) -> SemilinearProblem:
        pc = self.cfg["problem"]
        mu = measure_for(self.cfg, self.kernel.gamma, self.kernel.domain)
        return SemilinearProblem(self.gop, float(pc["p"] if p is None else p), float(lam), mu,
                                 tol=float(pc["tol"]), max_iter=int(pc["max_iter"]))

    def lambda_star(self, template: SemilinearProblem) -> float:
        return lambda_star(template, rtol=float(self.cfg["lambda_star"]["rtol"]))

    def resolved_lambda(self) -> tuple[float, float | None]:
        pc = self.cfg["problem"]
        if pc["lambda"] is not None:
            return float(pc["lambda"]), None
        ls = self.lambda_star(self.problem())
        return float(pc["lambda_fraction"]) * ls, ls

    def boundary_point(self) -> float:
        bp = self.cfg["verify"]["boundary_point"]
        if bp is None:
            dom = self.kernel.domain
            return float(dom.center_point[0] + dom.ball_radius)
        return float(bp)


def _warn_dimension(ctx: _Context) -> None:
    params = ctx.kernel.params
    if not satisfies_dimension_condition(params):
        log.warning("dimension condition not satisfied: N = %d < N_{s,gamma} = %.6g; stability results are "
                    "reported but not covered by the theory", params.N, dimension_threshold(params))


def cmd_verify_kernel(ctx: _Context, out: Path) -> int:
    cfg, k, g = ctx.cfg, ctx.kernel, ctx.grid
    vc = cfg["verify"]
    scan = kernel_estimate_scan(k, g)
    const = check_3g(k, g, int(vc["samples"]), int(cfg["seed"]))
    pstar = critical_exponent(k.params)
    rows = []
    if g.N == 1:
        deltas = [float(d) for d in vc["probe_deltas"]]
        probes = probe_points_toward(ctx.boundary_point(), deltas, k.domain)
        for f in vc["q_factors"]:
            q = float(f) * pstar
            vals = check_marcinkiewicz_uniform(k, g, q, k.gamma, probes, int(vc["refine"]))
            rows += [[q, k.gamma, d, v] for d, v in zip(deltas, vals)]
    result = {"scan": json.loads(scan.to_json()), "ratio": scan.ratio, "p_star": pstar}
    write_json(out / "scan.json", cfg, "verify-kernel", result)
    write_csv(out / "threeg.csv", cfg, "verify-kernel", ["constant", "samples", "seed"],
              [[const, int(vc["samples"]), int(cfg["seed"])]])
    write_csv(out / "marcinkiewicz.csv", cfg, "verify-kernel", ["q", "alpha", "delta_y", "value"], rows)
    return EXIT_OK


def cmd_solve(ctx: _Context, out: Path) -> int:
    cfg = ctx.cfg
    lam, ls = ctx.resolved_lambda()
    prob = ctx.problem(lam)
    rep = minimal_solution(prob)
    result = rep.to_dict(ctx.grid, ctx.kernel.gamma)
    result["lambda_star"] = ls
    trace_rows = []
    if rep.converged:
        result["residual_check"] = residual(prob, rep.u)
        lower_ok, C = check_solution_bounds(rep.u, ctx.gop, prob.mu, lam, prob.G_mu)
        result["lower_bound_ok"] = lower_ok
        for eps in cfg["solve"]["trace_eps"]:
            trace_rows.append([float(eps), trace_quotient(rep.u, ctx.kernel, ctx.grid, float(eps))])
    write_json(out / "solve.json", cfg, "solve", result)
    if rep.converged:
        cols = [f"x{i}" for i in range(ctx.grid.N)]
        write_csv(out / "solution.csv", cfg, "solve", ["index", *cols, "u"],
                  [[i, *ctx.grid.nodes[i], rep.u[i]] for i in range(ctx.grid.n)])
        write_csv(out / "trace.csv", cfg, "solve", ["epsilon", "trace_quotient"], trace_rows)
        return EXIT_OK
    log.error("minimal iteration %s at lambda=%g", rep.status, lam)
    return EXIT_NUMERIC


def cmd_lambda_star(ctx: _Context, out: Path) -> int:
    template = ctx.problem()
    ls = ctx.lambda_star(template)
    c_p = template.c_p
    result = {"lambda_star": ls, "p": template.p, "p_star": critical_exponent(ctx.kernel.params),
              "c_p": c_p, "rtol": float(ctx.cfg["lambda_star"]["rtol"])}
    write_json(out / "lambda_star.json", ctx.cfg, "lambda-star", result)
    return EXIT_OK


def _sweep_lambdas(ctx: _Context, template: SemilinearProblem) -> tuple[list[float], float | None]:
    pc = ctx.cfg["problem"]
    if pc["sweep"] is not None:
        return [float(v) for v in pc["sweep"]], None
    ls = ctx.lambda_star(template)
    return [float(f) * ls for f in pc["sweep_fractions"]], ls


def cmd_bifurcation(ctx: _Context, out: Path) -> int:
    _warn_dimension(ctx)
    template = ctx.problem()
    lambdas, _ = _sweep_lambdas(ctx, template)
    rows = bifurcation_sweep(template, lambdas)
    write_csv(out / "branch.csv", ctx.cfg, "bifurcation", ["lambda", "norm_minimal", "norm_second"],
              [[r["lambda"], r["norm_minimal"], r["norm_second"]] for r in rows])
    return EXIT_OK


def cmd_eigen(ctx: _Context, out: Path) -> int:
    _warn_dimension(ctx)
    cfg = ctx.cfg
    report = eigen_report(ctx.gop, int(cfg["eigen"]["k"]))
    template = ctx.problem()
    ls = ctx.lambda_star(template)
    rows = []
    for f in cfg["eigen"]["lambda_fractions"]:
        lam = float(f) * ls
        rep = minimal_solution(template.with_lambda(lam))
        sigma = stability_index(ctx.gop, rep.u, template.p) if rep.converged else math.nan
        rows.append([lam, float(f), sigma])
    report["lambda_star"] = ls
    write_json(out / "eigen.json", cfg, "eigen", report)
    write_csv(out / "stability.csv", cfg, "eigen", ["lambda", "fraction", "sigma"], rows)
    return EXIT_OK


def cmd_nonexist(ctx: _Context, out: Path) -> int:
    cfg = ctx.cfg
    if ctx.grid.N != 1:
        raise PreconditionError("the nonexistence probe is implemented on intervals")
    nc, vc = cfg["nonexist"], cfg["verify"]
    pstar = critical_exponent(ctx.kernel.params)
    p_values = nc["p_values"] if nc["p_values"] is not None else [pstar + 0.2, 0.9 * pstar]
    rows = []
    for p in p_values:
        template = ctx.problem(float(nc["lambda"]), float(p))
        for r in nonexistence_probe(template, ctx.boundary_point(),
                                    [float(d) for d in vc["probe_deltas"]], int(vc["refine"])):
            rows.append([r.p, r.delta_y, r.integral, r.solve_status])
    write_csv(out / "nonexistence.csv", cfg, "nonexist", ["p", "delta_y", "integral", "solve_status"], rows)
    return EXIT_OK


_HANDLERS = {
    "verify-kernel": cmd_verify_kernel,
    "solve": cmd_solve,
    "lambda-star": cmd_lambda_star,
    "bifurcation": cmd_bifurcation,
    "eigen": cmd_eigen,
    "nonexist": cmd_nonexist,
}


def run(cfg: dict, command: str, out_dir: str | Path | None = None) -> int:
    """Run ``command`` on an already resolved config and return the exit status."""
    if command not in _HANDLERS:
        log.error("unknown command %r; choose from %s", command, ", ".join(COMMANDS))
        return EXIT_USAGE
    out = Path(out_dir if out_dir is not None else cfg["output"]["directory"])
    out.mkdir(parents=True, exist_ok=True)
    try:
        return _HANDLERS[command](_Context(cfg), out)
    except (AssumptionError, ConfigurationError, DomainError, UnsupportedError,
            PreconditionError, DegenerateInputError) as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_INVALID
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nonlocal-semilinear",
                     description="Green-operator experiments for nonlocal semilinear problems.")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("config", help="YAML or JSON experiment config")
    parser.add_argument("--out", default=None, help="output directory (overrides output.directory)")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config)
    except (ConfigurationError, AssumptionError, DomainError) as exc:
        log.error("invalid configuration: %s", exc)
        return EXIT_INVALID
    return run(cfg, args.command, args.out)


if __name__ == "__main__":
    sys.exit(main())
