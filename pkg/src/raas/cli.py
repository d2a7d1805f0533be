"""Command-line front end.

Exit codes: 0 success, 1 oracle-check disagreement or skipped check, 2 parse
error, 3 validation error, 4 no implementable action (market collapse),
5 unbounded design LP.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import designer, metrics, oracle, repro, two_by_two
from .scenario import (
    PriceBounds,
    Scenario,
    ValidationError,
    exact_expected_terms,
    monte_carlo_estimate,
    sample_outcomes,
)
from .scenario_io import BUNDLED, ScenarioParseError, bundled_path, load_scenario

EXIT_OK, EXIT_CHECK_FAILED, EXIT_PARSE, EXIT_VALIDATION, EXIT_COLLAPSE, EXIT_UNBOUNDED = 0, 1, 2, 3, 4, 5
COMMANDS = ("design", "design-2x2", "sweep-q", "sweep-T", "sweep-kappa", "voi", "oracle-check", "montecarlo")
DEFAULT_SEED = 42

log = logging.getLogger("raas")


@dataclass
class RunConfig:
    command: str
    scenario_path: str
    output_path: Optional[str] = None
    cap: bool = False
    nonnegative: bool = True
    feas_tol: float = 1e-7
    opt_tol: float = 1e-7
    grid: Optional[str] = None
    step: float = 50.0
    price_lo: Optional[float] = None
    price_hi: Optional[float] = None
    action: Optional[int] = None
    samples: int = 100_000
    trials: int = 30
    seed: int = DEFAULT_SEED
    kilodollars: bool = False
    all_conventions: bool = False
    voi: bool = False
    warn_negative: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def bounds(self) -> PriceBounds:
        return PriceBounds(cap=self.cap, nonnegative=self.nonnegative)

    @property
    def tols(self) -> dict:
        return {"feas_tol": self.feas_tol, "opt_tol": self.opt_tol}


class _Fmt:
    def __init__(self, kilo: bool):
        self.kilo = kilo

    def money(self, v: float) -> str:
        v = 0.0 if abs(v) < 5e-3 else v  # no "-$0.00"
        sign = "-" if v < 0 else ""
        return f"{sign}${abs(v) / 1000:,.3f}K" if self.kilo else f"{sign}${abs(v):,.2f}"


def parse_grid(spec: str) -> list[float]:
    """``start:stop:step`` inclusive of ``stop`` (within rounding), or a comma list."""
    if ":" not in spec:
        return [float(v) for v in spec.split(",") if v.strip()]
    parts = [float(v) for v in spec.split(":")]
    if len(parts) != 3 or parts[2] <= 0:
        raise ValueError(f"bad grid {spec!r}; expected start:stop:step")
    start, stop, step = parts
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(n)]


def resolve_scenario(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    stem = p.name[:-4] if p.name.endswith(".scn") else p.name
    if stem in BUNDLED:
        return bundled_path(stem)
    raise FileNotFoundError(f"scenario {name!r} not found (bundled: {', '.join(BUNDLED)})")


def _g(v) -> str:
    return f"{v:.6g}" if isinstance(v, float) else str(v)


def _csv(header: Sequence[str], rows: list[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_g(v) for v in r])
    return buf.getvalue()


# -- commands -------------------------------------------------------------------

def _design_text(scn: Scenario, cfg: RunConfig, bounds: PriceBounds, fmt: _Fmt) -> str:
    rep = designer.implementable_actions(scn, bounds, **cfg.tols)
    res = designer.two_step_design(scn, bounds, **cfg.tols)
    levels = scn.actions.levels
    out = [f"convention: {bounds.label}",
           "implementable actions: " + ", ".join(
               f"{a} (Pg={levels[a]:g}: {'yes' if e.implementable else 'no'})" for a, e in enumerate(rep.entries))]
    for a in range(scn.n_actions):
        d = res.per_action[a]
        if d.feasible:
            out.append(f"  action {a}: B={fmt.money(d.revenue)}  C={fmt.money(d.cost)}  B-C={fmt.money(d.margin)}")
    if res.collapsed:
        out.append("market collapse: no implementable action")
        return "\n".join(out)
    a = res.implemented_action
    rr = metrics.average_resilience(scn, res.contract, a)
    out.append(f"implemented action: {a} (Pg={levels[a]:g} MWh)")
    out.append(f"SP payoff: {fmt.money(res.sp_payoff)}")
    out.append(f"{'x [MWh]':>10} {'H(x)':>16} {'m(x) $/MWh':>12} {'R(H(x),x)':>16} {'f(x)':>6}")
    f = scn.priced_probabilities(a)
    for x, h, p in zip(res.contract.outcomes, res.contract.prices, f):
        out.append(f"{x:>10g} {fmt.money(h):>16} {rr.unit_prices[x]:>12.2f} {fmt.money(rr.gains[x]):>16} {p:>6.3g}")
        if cfg.warn_negative and h < 0:
            out.append(f"  warning: negative price at x={x:g}")
    out.append(f"mean resilience gain (probability weighted): {fmt.money(rr.weighted_average)}")
    out.append(f"mean resilience gain (unweighted over reachable outcomes): {fmt.money(rr.unweighted_mean_of_gains)}")
    out.append(f"IR slack: {fmt.money(res.ir_slack)}")
    out.append("IC slacks: " + ", ".join(f"vs {b}: {fmt.money(s)}" for b, s in res.ic_slacks.items()))
    if cfg.voi:
        out.append(f"value of information: {fmt.money(designer.value_of_information(scn, bounds, **cfg.tols))}")
    return "\n".join(out)


def cmd_design(scn: Scenario, cfg: RunConfig) -> tuple[int, str]:
    fmt = _Fmt(cfg.kilodollars)
    conventions = repro.CONVENTIONS if cfg.all_conventions else (cfg.bounds,)
    blocks = [_design_text(scn, cfg, b, fmt) for b in conventions]
    text = "\n\n".join(blocks)
    if cfg.extra.get("published") == "case2":
        text += "\n\n" + repro.case2_report(scn, cfg.bounds)
    collapsed = designer.two_step_design(scn, cfg.bounds, **cfg.tols).collapsed
    return (EXIT_COLLAPSE if collapsed else EXIT_OK), text


def cmd_design_2x2(scn: Scenario, cfg: RunConfig) -> tuple[int, str]:
    fmt = _Fmt(cfg.kilodollars)
    inst = two_by_two.from_scenario(scn)
    r = two_by_two.select_contract(inst)
    out = [f"k={inst.k:g} q={inst.q:g}"]
    for label, prices, pay, printed in (("high-level contract", r.contract_a, r.payoff_a, r.printed_payoff_a),
                                        ("low-level contract", r.contract_b, r.payoff_b, r.printed_payoff_b)):
        out.append(f"{label}: H(x_H)={fmt.money(prices[0])} H(x_L)={fmt.money(prices[1])} "
                   f"SP payoff={fmt.money(pay)} (simplified form {fmt.money(printed)})")
        if cfg.warn_negative and min(prices) < 0:
            out.append(f"  warning: {label} has a negative price")
    out.append(f"selected: {r.selected}; published threshold statistic {fmt.money(r.threshold_value)} "
               f"({'agrees' if r.threshold_agrees else 'DISAGREES'} with direct comparison)")
    high = r.selected == two_by_two.HIGH
    contract = two_by_two.contract_of(inst, r.selected_prices)
    rr = metrics.average_resilience(scn, contract, 1 if high else 0)
    out.append(f"R(H(x_L),x_L)={fmt.money(rr.gains[inst.x_low])}  R(H(x_H),x_H)={fmt.money(rr.gains[inst.x_high])}")
    out.append(f"mean resilience gain (probability weighted): {fmt.money(rr.weighted_average)}")
    out.append(f"mean resilience gain (unweighted): {fmt.money(rr.unweighted_mean_of_gains)}")
    return EXIT_OK, "\n".join(out)


def cmd_sweep_q(scn: Scenario, cfg: RunConfig) -> tuple[int, str]:
    inst = two_by_two.from_scenario(scn)
    grid = parse_grid(cfg.grid or "0.2:0.8:0.05")
    rows = [(r.q, r.contract_a[0], r.contract_a[1], r.selected, r.payoff_a, r.payoff_b)
            for r in two_by_two.sweep_q(inst, grid)]
    return EXIT_OK, _csv(("q", "H_xH", "H_xL", "selected", "payoff_a", "payoff_b"), rows)


def _sweep(scn: Scenario, cfg: RunConfig, key: str, column: str, default_grid: str) -> tuple[int, str]:
    xs = scn.priced_outcomes
    header = [column, "implemented_action", "implementable"] + [f"H_{x:g}" for x in xs] \
        + [f"m_{x:g}" for x in xs] + ["sp_payoff"]
    rows = []
    for v in parse_grid(cfg.grid or default_grid):
        s = scn.replace_costs(**{key: v})
        impl = designer.implementable_actions(s, cfg.bounds, **cfg.tols).implementable
        r = designer.two_step_design(s, cfg.bounds, **cfg.tols)
        tag = " ".join(str(a) for a in impl)
        if r.collapsed:
            rows.append([v, "none", tag] + [""] * (2 * len(xs)) + [""])
            continue
        m = metrics.unit_prices(r.contract)
        rows.append([v, r.implemented_action, tag, *r.contract.prices, *(m[x] for x in xs), r.sp_payoff])
    return EXIT_OK, _csv(header, rows)


def cmd_voi(scn: Scenario, cfg: RunConfig) -> tuple[int, str]:
    fmt = _Fmt(cfg.kilodollars)
    hidden = designer.two_step_design(scn, cfg.bounds, **cfg.tols)
    full = designer.full_information_design(scn, cfg.bounds, **cfg.tols)
    if hidden.collapsed or full.collapsed:
        return EXIT_COLLAPSE, "market collapse: no implementable action"
    out = [f"convention: {cfg.bounds.label}",
           f"hidden action:    action {hidden.implemented_action}, SP payoff {fmt.money(hidden.sp_payoff)}",
           f"full information: action {full.implemented_action}, SP payoff {fmt.money(full.sp_payoff)}",
           f"value of information: {fmt.money(full.sp_payoff - hidden.sp_payoff)}"]
    return EXIT_OK, "\n".join(out)


def cmd_oracle(scn: Scenario, cfg: RunConfig) -> tuple[int, str]:
    fmt = _Fmt(cfg.kilodollars)
    actions = [cfg.action] if cfg.action is not None else range(scn.n_actions)
    out = [f"convention: {cfg.bounds.label}; grid step {fmt.money(cfg.step)}"]
    status = EXIT_OK
    for a in actions:
        d = designer.design_for_action(scn, a, cfg.bounds, **cfg.tols)
        try:
            rep = oracle.grid_search(scn, a, cfg.price_lo, cfg.price_hi, cfg.step, cfg.bounds,
                                     solver_objective=d.revenue)
        except oracle.GridTooLargeError as exc:
            out.append(f"action {a}: skipped, {exc} (raise --step or narrow --price-lo/--price-hi)")
            status = EXIT_CHECK_FAILED
            continue
        if not d.feasible:
            out.append(f"action {a}: LP infeasible; oracle feasible grid points {rep.feasible_count}")
            continue
        verdict = "agree" if rep.agrees else "DISAGREE"
        out.append(f"action {a}: LP {fmt.money(d.revenue)}  oracle {fmt.money(rep.best_objective)}  "
                   f"gap {fmt.money(rep.gap)}  bound {fmt.money(rep.bound)}  [{verdict}]  "
                   f"feasible {rep.feasible_count}/{rep.grid_points}")
        if rep.best_contract is not None:
            out.append("  oracle contract: " + ", ".join(f"H({x:g})={h:g}" for x, h in rep.best_contract.as_dict().items()))
        if not rep.agrees:
            status = EXIT_CHECK_FAILED
    return status, "\n".join(out)


def cmd_montecarlo(scn: Scenario, cfg: RunConfig) -> tuple[int, str]:
    res = designer.two_step_design(scn, cfg.bounds, **cfg.tols)
    if res.collapsed:
        return EXIT_COLLAPSE, "market collapse: no contract to evaluate"
    a = res.implemented_action if cfg.action is None else cfg.action
    exact_served, exact_storage = exact_expected_terms(scn, res.contract, a)
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for t in range(cfg.trials):
        est = monte_carlo_estimate(sample_outcomes(scn, a, cfg.samples, rng), res.contract, scn.costs)
        z1 = (est.served_utility - exact_served) / est.served_stderr if est.served_stderr else 0.0
        z2 = (est.storage - exact_storage) / est.storage_stderr if est.storage_stderr else 0.0
        rows.append([t, est.served_utility, exact_served, z1, est.storage, exact_storage, z2,
                     int(abs(z1) <= 3 and abs(z2) <= 3)])
    return EXIT_OK, _csv(("trial", "served_est", "served_exact", "served_z", "storage_est",
                          "storage_exact", "storage_z", "within_3se"), rows)


HANDLERS = {
    "design": cmd_design,
    "design-2x2": cmd_design_2x2,
    "sweep-q": cmd_sweep_q,
    "sweep-T": lambda s, c: _sweep(s, c, "premium", "T", "0:6000:1000"),
    "sweep-kappa": lambda s, c: _sweep(s, c, "kappa", "kappa", "100:250:25"),
    "voi": cmd_voi,
    "oracle-check": cmd_oracle,
    "montecarlo": cmd_montecarlo,
}


def run(cfg: RunConfig, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        scn = load_scenario(resolve_scenario(cfg.scenario_path))
    except ScenarioParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    try:
        code, text = HANDLERS[cfg.command](scn, cfg)
    except designer.UnboundedDesignError as exc:
        print(f"unbounded: {exc}", file=sys.stderr)
        return EXIT_UNBOUNDED
    except designer.MarketCollapseError as exc:
        print(f"market collapse: {exc}", file=sys.stderr)
        return EXIT_COLLAPSE
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if cfg.output_path:
        Path(cfg.output_path).write_text(text if text.endswith("\n") else text + "\n")
    else:
        stdout.write(text if text.endswith("\n") else text + "\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="raas", description="Resilience-as-a-service contract design")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("scenario", help="scenario file, or a bundled name: " + ", ".join(BUNDLED))
    p.add_argument("-o", "--output", help="write the report or CSV here instead of stdout")
    p.add_argument("--cap", action=argparse.BooleanOptionalAction, default=False,
                   help="bound each price by the requester's benefit (default off)")
    p.add_argument("--nonnegative", action=argparse.BooleanOptionalAction, default=True,
                   help="require non-negative prices (default on)")
    p.add_argument("--feas-tol", type=float, default=1e-7)
    p.add_argument("--opt-tol", type=float, default=1e-7)
    p.add_argument("--grid", help="sweep values as start:stop:step or a comma list")
    p.add_argument("--step", type=float, default=50.0, help="oracle price grid step in dollars")
    p.add_argument("--price-lo", type=float)
    p.add_argument("--price-hi", type=float)
    p.add_argument("--action", type=int)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--kilodollars", action="store_true", help="print money in $K")
    p.add_argument("--all-conventions", action="store_true", help="design under every price-bound convention")
    p.add_argument("--voi", action="store_true", help="also report the value of information")
    p.add_argument("--published", choices=("case2",), help="print published figures alongside")
    p.add_argument("--warn-negative", action="store_true", help="flag negative prices")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    if args.command not in ("sweep-q", "sweep-T", "sweep-kappa") and args.grid:
        log.warning("--grid is ignored by %s", args.command)
    cfg = RunConfig(
        command=args.command, scenario_path=args.scenario, output_path=args.output,
        cap=args.cap, nonnegative=args.nonnegative, feas_tol=args.feas_tol, opt_tol=args.opt_tol,
        grid=args.grid, step=args.step, price_lo=args.price_lo, price_hi=args.price_hi,
        action=args.action, samples=args.samples, trials=args.trials, seed=args.seed,
        kilodollars=args.kilodollars, all_conventions=args.all_conventions, voi=args.voi,
        warn_negative=args.warn_negative, extra={"published": args.published},
    )
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
