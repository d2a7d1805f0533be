"""Reading and writing the line-oriented scenario file format.

Example::

    # comments run to end of line
    [costs]
    alpha = 1e-3
    beta = 30
    ...
    premium = 3000

    [actions]
    levels = 200 300 400
    load = 400
    max_generation = 600

    [outcomes]
    -150 -100 100 140 200

    [distribution]
    0    0.1  0.2   0.3   0.4     # one row per action, one column per outcome
    0.1  0.2  0.35  0.35  0
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Union

from .scenario import (
    ROW_SUM_TOL,
    ActionSet,
    CostParams,
    OutcomeDistribution,
    OutcomeSet,
    Scenario,
    ValidationError,
)

COST_KEYS = ("alpha", "beta", "gamma", "tau", "zeta", "kappa", "rho", "premium")
ACTION_KEYS = ("levels", "load", "max_generation")
SECTIONS = ("costs", "actions", "outcomes", "distribution")

BUNDLED = ("case1", "case2", "case2_kappa250", "case2_T6000")


class ScenarioParseError(ValueError):
    def __init__(self, message: str, line: int, column: int = 1, source: str = "<scenario>"):
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.line = line
        self.column = column


class ScenarioValidationError(ValidationError):
    def __init__(self, message: str, invariant: str, line: int | None = None, source: str = "<scenario>"):
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(f"{where}{message} [{invariant}]", invariant)
        self.line = line


@dataclass
class _Parsed:
    keys: dict[str, dict[str, tuple[str, int, int]]] = field(default_factory=dict)
    outcomes: list[tuple[str, int, int]] = field(default_factory=list)
    rows: list[tuple[list[tuple[str, int]], int]] = field(default_factory=list)
    section_lines: dict[str, int] = field(default_factory=dict)


def _number(token: str, line: int, col: int, source: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ScenarioParseError(f"expected a number, got {token!r}", line, col, source) from None


def _tokens(text: str, offset: int) -> list[tuple[str, int]]:
    return [(m.group(), offset + m.start() + 1) for m in re.finditer(r"\S+", text)]


def _parse(text: str, source: str) -> _Parsed:
    out = _Parsed()
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        stripped = body.strip()
        if stripped.startswith("["):
            m = re.fullmatch(r"\[\s*([A-Za-z_]+)\s*\]", stripped)
            if not m or m.group(1) not in SECTIONS:
                raise ScenarioParseError(f"unknown section header {stripped!r}", lineno, body.index("[") + 1, source)
            section = m.group(1)
            if section in out.section_lines:
                raise ScenarioParseError(f"duplicate section [{section}]", lineno, 1, source)
            out.section_lines[section] = lineno
            continue
        if section is None:
            raise ScenarioParseError("content before the first section header", lineno, 1, source)
        if section in ("costs", "actions"):
            if "=" not in body:
                raise ScenarioParseError("expected 'key = value'", lineno, len(body) - len(body.lstrip()) + 1, source)
            key, value = body.split("=", 1)
            key = key.strip()
            allowed = COST_KEYS if section == "costs" else ACTION_KEYS
            if key not in allowed:
                raise ScenarioParseError(f"unknown key {key!r} in [{section}]", lineno, body.index(key) + 1, source)
            entries = out.keys.setdefault(section, {})
            if key in entries:
                raise ScenarioParseError(f"duplicate key {key!r}", lineno, body.index(key) + 1, source)
            entries[key] = (value.strip(), lineno, len(body.split("=", 1)[0]) + 2)
        elif section == "outcomes":
            out.outcomes.extend((tok, lineno, col) for tok, col in _tokens(body, 0))
        else:
            out.rows.append((_tokens(body, 0), lineno))
    return out


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    p = _parse(text, source)
    for name in SECTIONS:
        if name not in p.section_lines:
            raise ScenarioParseError(f"missing section [{name}]", len(text.splitlines()) or 1, 1, source)

    def keyed(section: str, required: tuple[str, ...]) -> dict[str, tuple[str, int, int]]:
        entries = p.keys.get(section, {})
        for key in required:
            if key not in entries:
                raise ScenarioParseError(f"missing key {key!r} in [{section}]", p.section_lines[section], 1, source)
        return entries

    cost_entries = keyed("costs", COST_KEYS[:-1])
    cost_values = {k: _number(v, ln, col, source) for k, (v, ln, col) in cost_entries.items()}
    action_entries = keyed("actions", ACTION_KEYS)
    lv, lv_line, lv_col = action_entries["levels"]
    levels = [_number(tok, lv_line, lv_col + c - 1, source) for tok, c in _tokens(lv, 0)]
    load = _number(*action_entries["load"], source)
    max_gen = _number(*action_entries["max_generation"], source)
    outcomes = [_number(tok, ln, col, source) for tok, ln, col in p.outcomes]
    table = []
    for toks, ln in p.rows:
        table.append([_number(tok, ln, col, source) for tok, col in toks])

    def wrap(build, line):
        try:
            return build()
        except ValidationError as exc:
            raise ScenarioValidationError(str(exc), exc.invariant, line, source) from None

    costs = wrap(lambda: CostParams(**cost_values), p.section_lines["costs"])
    actions = wrap(lambda: ActionSet(tuple(levels), load, max_gen), lv_line)
    outcome_set = wrap(lambda: OutcomeSet(tuple(outcomes)), p.section_lines["outcomes"])
    if len(table) != len(levels):
        raise ScenarioValidationError(
            f"{len(table)} distribution rows for {len(levels)} actions",
            "scenario.dimensions", p.section_lines["distribution"], source,
        )
    for j, (row, (_, ln)) in enumerate(zip(table, p.rows)):
        if len(row) != len(outcomes):
            raise ScenarioValidationError(
                f"row for action {j} (level {levels[j]:g}) has {len(row)} entries for {len(outcomes)} outcomes",
                "scenario.dimensions", ln, source,
            )
        if abs(sum(row) - 1.0) > ROW_SUM_TOL:
            raise ScenarioValidationError(
                f"row for action {j} (level {levels[j]:g}) sums to {sum(row):.12g}, not 1",
                "distribution.row_sum", ln, source,
            )
        if any(not 0.0 <= v <= 1.0 for v in row):
            raise ScenarioValidationError(
                f"row for action {j} (level {levels[j]:g}) has an entry outside [0, 1]",
                "distribution.probability_range", ln, source,
            )
    dist = OutcomeDistribution(tuple(tuple(r) for r in table))
    return wrap(lambda: Scenario(costs, actions, outcome_set, dist), p.section_lines["distribution"])


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(), source=str(path))


def bundled_path(name: str) -> Path:
    name = name[:-4] if name.endswith(".scn") else name
    if name not in BUNDLED:
        raise KeyError(f"no bundled scenario {name!r}; choose from {BUNDLED}")
    return Path(str(resources.files("raas") / "data" / f"{name}.scn"))


def load_bundled(name: str) -> Scenario:
    return load_scenario(bundled_path(name))


def dump_scenario(scenario: Scenario) -> str:
    """Serialise so that ``parse_scenario(dump_scenario(s)) == s``."""
    c = scenario.costs
    lines = ["[costs]"]
    lines += [f"{k} = {getattr(c, k)!r}" for k in COST_KEYS]
    a = scenario.actions
    lines += ["", "[actions]", "levels = " + " ".join(repr(v) for v in a.levels),
              f"load = {a.load!r}", f"max_generation = {a.max_generation!r}"]
    lines += ["", "[outcomes]", " ".join(repr(v) for v in scenario.outcomes.values)]
    lines += ["", "[distribution]"]
    lines += [" ".join(repr(p) for p in row) for row in scenario.distribution.table]
    return "\n".join(lines) + "\n"
