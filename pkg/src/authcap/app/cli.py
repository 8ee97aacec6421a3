"""
Command-line front end.

    authcap region --theorem 3 --lt 0.1 --lq 0.3 --point 0.25,0.1,0.25
    authcap sweep --mode r-vs-alpha --kappa 0.25 --compare gungor --format csv
    authcap simulate-simmons --n 4 --key-count 4 --codes 1000 --format csv

Results go to stdout (or ``--output``); logs go to stderr and the JSON log
file.  Exit codes: 0 success, 2 invalid input, 3 enumeration budget, 4
solver non-convergence.
"""

import argparse
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np
from dotenv import load_dotenv

from app.base import BaseCommand, csv_text
from app.config import QUANTITIES, SWEEP_MODES, THEOREMS, RunConfig
from app.errors import AuthcapError, BudgetExceededError, ValidationError
from app.iproject import ProjectionProblem, l_func, project
from app.probcore import ChannelPair, CondDist, bsc_pair, compose, from_json, identity_channel, uniform
from app.regions import (AuxiliaryChoice, BscFamily, RatePoint, SweepSettings, best_gungor, bsc_auxiliary,
                         gungor_contains, max_alpha_gungor, max_alpha_theorem1, max_alpha_theorem3,
                         rate_split, region_bounds, sweep_bsc, theorem1_backoff_contains, theorem1_contains,
                         theorem2_transform, theorem3_contains)
from app.simkit import (CodeParams, build_simmons, build_typeclass_code, epsilon_exact, epsilon_monte_carlo,
                        omega_exact, omega_monte_carlo, remap_transform, remapped_rates,
                        simmons_impersonation_success, simmons_params, simmons_substitution_success)
from app.typelab import CondNType, NType
from shared.utils.log_setup import setup_logging

logger = logging.getLogger("authcap.cli")

DEFAULTS = RunConfig()


# ==============================================================================
# Inputs shared by several commands
# ==============================================================================

def _load(path: str, kind: str = "cond") -> CondDist:
    file = Path(path)
    if not file.is_file():
        raise ValidationError(f"distribution file not found: {file}")
    return from_json(file.read_text(), kind)


def channel_pair(config: RunConfig) -> ChannelPair:
    pair = bsc_pair(config.lt, config.lq)
    t = _load(config.t_path) if config.t_path else pair.t
    q = _load(config.q_path) if config.q_path else pair.q
    return ChannelPair(t, q)


def auxiliary(config: RunConfig) -> AuxiliaryChoice:
    """Kernels from files when all three are given, else the symmetric family."""
    paths = (config.rho_path, config.sigma_path, config.tau_path)
    if any(paths) and not all(paths):
        raise ValidationError("--rho, --sigma and --tau must be given together")
    if all(paths):
        return AuxiliaryChoice(_load(config.rho_path), _load(config.sigma_path, "det"),
                               _load(config.tau_path, "dist"), config.j, label="from files")
    return bsc_auxiliary(config.lambda_rho, config.cloud, config.j)


def rate_point(config: RunConfig) -> RatePoint:
    if not config.point:
        raise ValidationError("--point r,alpha,kappa is required")
    return RatePoint.parse(config.point)


def _svg_plot(path: str, xs: list[float], curves: dict[str, list[float]], xlabel: str, ylabel: str) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "authcap"
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, ys in curves.items():
        ax.plot(xs, ys, label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(curves) > 1:
        ax.legend()
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)


# ==============================================================================
# Commands
# ==============================================================================

class RegionCommand(BaseCommand):

    def __init__(self, config: RunConfig):
        super().__init__("region", config)

    def compute(self) -> dict:
        c = self.config
        p = rate_point(c)
        pair = channel_pair(c)
        if c.theorem == "gungor":
            return self._gungor(p, pair)

        aux = auxiliary(c)
        bounds = region_bounds(pair, aux, c.resolution, c.family)
        result: dict[str, Any] = {
            "theorem": c.theorem,
            "point": p.as_dict(),
            "aux": aux.label,
            "bounds": {"mutual": bounds.mutual, "conditional": bounds.conditional, "L": bounds.l_value},
        }
        if c.theorem == "1":
            verdict = theorem1_contains(p, aux, pair, bounds=bounds, tol=c.tol)
            result["max_alpha"] = max_alpha_theorem1(bounds, p.r, p.kappa, aux.j)
        elif c.theorem == "3":
            verdict = theorem3_contains(p, aux, pair, bounds=bounds, tol=c.tol)
            result["max_alpha"] = max_alpha_theorem3(bounds, p.r, p.kappa, aux.j)
        else:
            verdict = theorem1_backoff_contains(p, aux, pair, c.gamma1, c.gamma2, resolution=c.resolution,
                                                family=c.family, tol=c.tol)
            split = rate_split(p, bounds, aux.j, c.gamma1, c.gamma2, verdict.witness["L_gamma"])
            result["rate_split"] = None if split is None else vars(split)
        result["verdict"] = verdict.to_json()
        self.stats['items_computed'] += 1
        return result

    def _gungor(self, p: RatePoint, pair: ChannelPair) -> dict:
        """Kernel files fix (rho, tau); otherwise the symmetric choices are searched."""
        c = self.config
        options = dict(kappa_step=c.kappa_step, resolution=c.resolution, family=c.family)
        if c.rho_path or c.tau_path:
            rho = _load(c.rho_path) if c.rho_path else identity_channel(pair.x_size)
            tau = _load(c.tau_path, "dist") if c.tau_path else uniform(rho.in_size)
            found = max_alpha_gungor(pair, rho, tau, p.r, p.kappa, **options)
            best = None if found is None else found[0]
            label = "from files"
        else:
            choice = best_gungor(pair, p.r, p.kappa, rho_steps=c.rho_steps, tau_steps=c.tau_steps, **options)
            rho, tau = (choice.rho, choice.tau) if choice else (identity_channel(2), uniform(2))
            best = None if choice is None else choice.alpha
            label = None if choice is None else choice.label
        verdict = gungor_contains(p, pair, rho, tau, tol=c.tol, **options)
        self.stats['items_computed'] += 1
        return {"theorem": c.theorem, "point": p.as_dict(), "aux": label, "verdict": verdict.to_json(),
                "max_alpha": best}

    def render_json(self, result: dict) -> dict:
        return result

    def render_csv(self, result: dict) -> str:
        verdict = result["verdict"]
        rows = [{"constraint": name, "slack": slack, "binding": name in verdict["binding_constraints"]}
                for name, slack in verdict["slacks"].items()]
        return csv_text(rows, ["constraint", "slack", "binding"])


class SweepCommand(BaseCommand):

    def __init__(self, config: RunConfig):
        super().__init__("sweep", config)

    def compute(self) -> list:
        c = self.config
        family = BscFamily(c.lt, c.lq, c.j)
        fixed = {k: v for k, v in (("r", c.r), ("kappa", c.kappa)) if v is not None}
        abscissae = [float(x) for x in np.linspace(c.x_min, c.x_max, c.points)]
        settings = SweepSettings(resolution=c.resolution, rho_steps=c.rho_steps, refine=c.refine,
                                 compare_gungor=c.compare == "gungor", relaxed=c.relaxed,
                                 kappa_step=c.kappa_step, tau_steps=c.tau_steps)
        curve = sweep_bsc(family, c.mode, fixed, abscissae, settings, threads=c.threads, progress=c.progress)
        self.stats['items_computed'] += len(curve)
        return curve

    def _columns(self) -> list[str]:
        columns = ["x", "value", "binding_constraint"]
        if self.config.compare == "gungor":
            columns.append("gungor_value")
        if self.config.relaxed:
            columns.append("relaxed_value")
        return columns

    def _rows(self, curve: list) -> list[dict]:
        return [{"x": p.x, "value": p.value, "binding_constraint": p.binding_constraint, "aux": p.aux_label,
                 "gungor_value": p.gungor_value, "relaxed_value": p.relaxed_value} for p in curve]

    def render_json(self, curve: list) -> dict:
        keep = self._columns() + ["aux"]
        return {"mode": self.config.mode, "points": [{k: row[k] for k in keep} for row in self._rows(curve)]}

    def render_csv(self, curve: list) -> str:
        return csv_text(self._rows(curve), self._columns())

    def after_write(self, curve: list) -> None:
        if not self.config.svg:
            return
        xs = [p.x for p in curve]
        curves = {"theorem 3": [p.value for p in curve]}
        if self.config.compare == "gungor":
            curves["comparison"] = [p.gungor_value for p in curve]
        xlabel = {"r-vs-alpha": "r", "alpha-vs-kappa": "kappa", "alpha-vs-lambda_t": "lambda_t"}[self.config.mode]
        _svg_plot(self.config.svg, xs, curves, xlabel, "alpha")


class ProjectCommand(BaseCommand):

    def __init__(self, config: RunConfig):
        super().__init__("project", config)

    def compute(self):
        c = self.config
        pair = channel_pair(c)
        aux = auxiliary(c)
        weights = compose(aux.sigma, aux.tau)
        reference = pair.t if c.projection == "both" else pair.q
        target = _load(c.target_path) if c.target_path else compose(reference, aux.rho, broadcast=True)
        problem = ProjectionProblem(reference, aux.rho, weights, target, mode=c.projection)
        self.stats['items_computed'] += 1
        return project(problem, strict=c.strict)

    def render_json(self, result) -> dict:
        return {
            "mode": self.config.projection,
            "value": result.value,
            "iterations": result.iterations,
            "converged": result.converged,
            "minimizer": None if result.minimizer is None else result.minimizer.table.tolist(),
        }

    def render_csv(self, result) -> str:
        rows = [{"quantity": "F", "value": result.value, "iterations": result.iterations,
                 "converged": result.converged}]
        return csv_text(rows, ["quantity", "value", "iterations", "converged"])


class LFuncCommand(BaseCommand):

    def __init__(self, config: RunConfig):
        super().__init__("lfunc", config)

    def compute(self):
        c = self.config
        aux = auxiliary(c)
        found = l_func(channel_pair(c), aux.rho, aux.sigma, aux.tau, resolution=c.resolution,
                       family=c.family, threads=c.threads)
        self.stats['items_computed'] += found.evaluations
        return found

    def render_json(self, found) -> dict:
        return {"L": found.value, "witness": found.witness.rows.tolist(), "evaluations": found.evaluations,
                "parts": found.parts}

    def render_csv(self, found) -> str:
        rows = [{"quantity": "L", "value": found.value}] + [
            {"quantity": name, "value": value} for name, value in found.parts.items()]
        return csv_text(rows, ["quantity", "value"])


class TransformCommand(BaseCommand):

    def __init__(self, config: RunConfig):
        super().__init__("transform", config)

    def compute(self) -> dict:
        c = self.config
        p = rate_point(c)
        image = theorem2_transform(p, c.beta, c.j)
        finite = remapped_rates(p.r, p.alpha, p.kappa, c.beta, c.n, c.j)
        self.stats['items_computed'] += 1
        return {"point": p.as_dict(), "beta": c.beta, "j": c.j, "image": image.as_dict(),
                "finite_blocklength": {"n": c.n, "r": finite[0], "alpha": finite[1], "kappa": finite[2]}}

    def render_json(self, result: dict) -> dict:
        return result

    def render_csv(self, result: dict) -> str:
        rows = [{"coordinate": k, "value": v, "image": result["image"][k]} for k, v in result["point"].items()]
        return csv_text(rows, ["coordinate", "value", "image"])


def _exact_row(quantity: str, value: Fraction) -> dict:
    return {"quantity": quantity, "value": float(value), "method": "exact", "stderr": 0.0,
            "rational": f"{value.numerator}/{value.denominator}"}


SIM_COLUMNS = ["quantity", "value", "method", "stderr", "rational"]


class SimulateSimmonsCommand(BaseCommand):

    def __init__(self, config: RunConfig):
        super().__init__("simulate-simmons", config)

    def compute(self) -> list[dict]:
        c = self.config
        params = simmons_params(c.n, c.key_count, c.x_size, c.j)
        substitution = impersonation = Fraction(0)
        dominated = 0
        for offset in range(c.codes):
            code = build_simmons(params, c.seed + offset)
            sub = simmons_substitution_success(code)
            imp = simmons_impersonation_success(code)
            substitution += sub
            impersonation += imp
            dominated += imp <= sub
            self.stats['items_computed'] += 1
        rows = [
            _exact_row("substitution", substitution / c.codes),
            _exact_row("impersonation", impersonation / c.codes),
            {"quantity": "reference", "value": 2.0 ** (-math.log2(c.key_count) / 2), "method": "exact",
             "stderr": 0.0, "rational": ""},
            {"quantity": "impersonation_dominated", "value": float(dominated), "method": "exact",
             "stderr": 0.0, "rational": f"{dominated}/{c.codes}"},
        ]
        if c.quantity in ("omega", "epsilon") and c.codes == 1:
            noiseless = identity_channel(c.x_size)
            if c.quantity == "omega":
                rows.append(_exact_row("omega", omega_exact(code, noiseless, c.round_i, c.budget, c.threads)))
            else:
                rows.append(_exact_row("epsilon", epsilon_exact(code, noiseless, c.round_i, c.budget, c.threads)))
        return rows

    def render_json(self, rows: list[dict]) -> dict:
        c = self.config
        return {"n": c.n, "key_count": c.key_count, "codes": c.codes, "seed": c.seed, "rows": rows}

    def render_csv(self, rows: list[dict]) -> str:
        return csv_text(rows, SIM_COLUMNS)


class SimulateCodeCommand(BaseCommand):
    """
    A type-class code over binary alphabets with a single cloud centre type:
    u has ``--weight`` ones, and x flips ``--rho-flips`` positions of each
    symbol value of u.
    """

    def __init__(self, config: RunConfig):
        super().__init__("simulate-code", config)

    def _types(self) -> tuple[CondNType, CondNType, NType]:
        c = self.config
        weight = c.n // 2 if c.weight is None else c.weight
        if not 0 <= weight <= c.n:
            raise ValidationError(f"--weight must lie in 0..{c.n}")
        zeros, ones = c.n - weight, weight
        if c.rho_flips > min(zeros, ones):
            raise ValidationError(f"--rho-flips {c.rho_flips} exceeds the positions of one symbol value")
        tau = NType((c.n,))
        sigma = CondNType(tau, ((zeros, ones),))
        f = c.rho_flips
        rho = CondNType(sigma.out_type(), ((zeros - f, f), (f, ones - f)))
        return rho, sigma, tau

    def compute(self) -> list[dict]:
        c = self.config
        if c.x_size != 2:
            raise ValidationError("simulate-code runs over binary alphabets")
        pair = channel_pair(c)
        rho, sigma, tau = self._types()
        params = CodeParams(n=c.n, message_count=c.message_count, key_count=c.key_count, j=c.j,
                            cloud_count=c.cloud_count)
        code = build_typeclass_code(params, rho, sigma, tau, pair.t, c.seed)
        if c.reduced_count is not None:
            code = remap_transform(code, c.reduced_count, c.seed)
        if c.quantity == "epsilon":
            exact, sampled, channel = epsilon_exact, epsilon_monte_carlo, pair.t
        elif c.quantity == "omega":
            exact, sampled, channel = omega_exact, omega_monte_carlo, pair.q
        else:
            raise ValidationError(f"{c.quantity} applies to keyed-subset codes only")
        rows = []
        try:
            rows.append(_exact_row(c.quantity, exact(code, channel, c.round_i, c.budget, c.threads)))
        except BudgetExceededError as e:
            if not c.samples:
                raise
            self.logger.warning(f"Exact {c.quantity} skipped, falling back to Monte Carlo: {e}")
        if c.samples:
            mc = sampled(code, channel, c.samples, c.seed, c.round_i, c.progress)
            rows.append({"quantity": c.quantity, "value": mc.estimate, "method": "mc", "stderr": mc.stderr,
                         "rational": ""})
        self.stats['items_computed'] += len(rows)
        self.code = code
        return rows

    def render_json(self, rows: list[dict]) -> dict:
        return {"code": self.code.to_json(), "rows": rows}

    def render_csv(self, rows: list[dict]) -> str:
        return csv_text(rows, SIM_COLUMNS)


COMMAND_CLASSES: dict[str, type[BaseCommand]] = {
    "region": RegionCommand,
    "sweep": SweepCommand,
    "project": ProjectCommand,
    "lfunc": LFuncCommand,
    "transform": TransformCommand,
    "simulate-simmons": SimulateSimmonsCommand,
    "simulate-code": SimulateCodeCommand,
}


# ==============================================================================
# Argument parsing
# ==============================================================================

def _flag(parser: argparse.ArgumentParser, name: str, dest: str, kind=str, help: str = "", **kwargs) -> None:
    default = getattr(DEFAULTS, dest)
    parser.add_argument(name, dest=dest, type=kind, default=None, help=f"{help} (default: {default})", **kwargs)


def _switch(parser: argparse.ArgumentParser, name: str, dest: str, value: bool, help: str) -> None:
    parser.add_argument(name, dest=dest, action="store_const", const=value, default=None,
                        help=f"{help} (default: {getattr(DEFAULTS, dest)})")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    _flag(common, "--lt", "lt", float, "main channel crossover probability")
    _flag(common, "--lq", "lq", float, "adversary channel crossover probability")
    _flag(common, "--t", "t_path", str, "main channel kernel JSON, overrides --lt")
    _flag(common, "--q", "q_path", str, "adversary channel kernel JSON, overrides --lq")
    _flag(common, "--j", "j", int, "rounds served by one key")
    _flag(common, "--threads", "threads", int, "worker threads (else AUTHCAP_THREADS, else 1)")
    _flag(common, "--output", "output", str, "write the result here instead of stdout")
    _flag(common, "--format", "format", str, "result format", choices=("json", "csv"))
    _flag(common, "--seed", "seed", int, "random seed")
    _switch(common, "--progress", "progress", True, "show a progress bar on stderr")
    common.add_argument("--config", dest="config_file", default=None, help="JSON file with option values")

    aux = argparse.ArgumentParser(add_help=False)
    _flag(aux, "--lambda-rho", "lambda_rho", float, "crossover of the symmetric rho")
    _flag(aux, "--cloud", "cloud", str, "symmetric auxiliary family", choices=("single-cloud", "binary-cloud"))
    _flag(aux, "--rho", "rho_path", str, "rho(x|u) kernel JSON")
    _flag(aux, "--sigma", "sigma_path", str, "sigma(u|w) kernel JSON with unique parents")
    _flag(aux, "--tau", "tau_path", str, "tau(w) distribution JSON")
    _flag(aux, "--resolution", "resolution", int, "adversary kernel grid cells per unit")
    _flag(aux, "--family", "family", str, "adversary kernel family", choices=("simplex", "bsc"))

    sim = argparse.ArgumentParser(add_help=False)
    _flag(sim, "--n", "n", int, "blocklength")
    _flag(sim, "--key-count", "key_count", int, "number of keys")
    _flag(sim, "--x-size", "x_size", int, "input alphabet size")
    _flag(sim, "--quantity", "quantity", str, "operational quantity", choices=QUANTITIES)
    _flag(sim, "--round", "round_i", int, "attacked round")
    _flag(sim, "--budget", "budget", int, "cap on exhaustive enumeration size")

    parser = argparse.ArgumentParser(prog="authcap", description="Authentication rate regions and codes.")
    sub = parser.add_subparsers(dest="command", required=True)

    region = sub.add_parser("region", parents=[common, aux], help="test a rate point")
    _flag(region, "--theorem", "theorem", str, "region", choices=THEOREMS)
    _flag(region, "--point", "point", str, "r,alpha,kappa")
    _flag(region, "--gamma1", "gamma1", float, "conditional-rate margin")
    _flag(region, "--gamma2", "gamma2", float, "sum-rate margin")
    _flag(region, "--tol", "tol", float, "slack tolerance in bits")
    _flag(region, "--kappa-step", "kappa_step", float, "kappa_tilde grid step")
    _flag(region, "--rho-steps", "rho_steps", int, "comparison lambda_rho grid cells over [0, 1/2]")
    _flag(region, "--tau-steps", "tau_steps", int, "comparison tau grid cells over [1/2, 1)")

    sweep = sub.add_parser("sweep", parents=[common], help="trace a boundary of the symmetric family")
    _flag(sweep, "--mode", "mode", str, "abscissa and ordinate", choices=SWEEP_MODES)
    _flag(sweep, "--r", "r", float, "fixed message rate")
    _flag(sweep, "--kappa", "kappa", float, "fixed key rate")
    _flag(sweep, "--x-min", "x_min", float, "first abscissa")
    _flag(sweep, "--x-max", "x_max", float, "last abscissa")
    _flag(sweep, "--points", "points", int, "number of abscissae")
    _flag(sweep, "--resolution", "resolution", int, "adversary kernel grid cells per unit")
    _flag(sweep, "--rho-steps", "rho_steps", int, "lambda_rho grid cells over [0, 1/2]")
    _switch(sweep, "--no-refine", "refine", False, "skip the local lambda_rho refinement")
    _flag(sweep, "--compare", "compare", str, "add a comparison curve", choices=("gungor",))
    _switch(sweep, "--relaxed", "relaxed", True, "add heuristic points with relaxed sigma")
    _flag(sweep, "--kappa-step", "kappa_step", float, "kappa_tilde grid step")
    _flag(sweep, "--tau-steps", "tau_steps", int, "comparison tau grid cells over [1/2, 1)")
    _flag(sweep, "--svg", "svg", str, "also plot the curve to this SVG file")

    proj = sub.add_parser("project", parents=[common, aux], help="evaluate a constrained KL projection")
    _flag(proj, "--projection", "projection", str, "marginal constraints", choices=("both", "output"))
    _flag(proj, "--target", "target_path", str, "target law JSON (default: the reference through rho)")
    _switch(proj, "--strict", "strict", True, "fail on non-convergence")

    sub.add_parser("lfunc", parents=[common, aux], help="evaluate L with its minimizing adversary kernel")

    transform = sub.add_parser("transform", parents=[common], help="trade message rate for authentication")
    _flag(transform, "--point", "point", str, "r,alpha,kappa")
    _flag(transform, "--beta", "beta", float, "rate moved from messages to authentication")
    _flag(transform, "--n", "n", int, "blocklength for the finite-length rates")

    simmons = sub.add_parser("simulate-simmons", parents=[common, sim], help="keyed-subset codes")
    _flag(simmons, "--codes", "codes", int, "number of seeded codes averaged")

    code = sub.add_parser("simulate-code", parents=[common, sim], help="type-class code")
    _flag(code, "--message-count", "message_count", int, "messages")
    _flag(code, "--cloud-count", "cloud_count", int, "cloud centres")
    _flag(code, "--weight", "weight", int, "ones in every satellite u, n // 2 when unset")
    _flag(code, "--rho-flips", "rho_flips", int, "flipped positions per symbol value of u")
    _flag(code, "--reduced-count", "reduced_count", int, "apply the keyed remapping down to this many messages")
    _flag(code, "--samples", "samples", int, "Monte Carlo draws for the quantity (0 skips)")
    return parser


def parse_config(argv: list[str] | None = None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    config_file = args.pop("config_file", None)
    return RunConfig.resolve(args, config_file)


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    setup_logging("authcap")
    try:
        config = parse_config(argv)
    except SystemExit as e:
        return int(e.code or 0)
    except AuthcapError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code

    try:
        COMMAND_CLASSES[config.command](config).run()
    except AuthcapError as e:
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
