"""Single-bus unit-commitment instances and their MILP formulation.

A unit has four variables per period: power output ``p`` and the binary
commitment trio ``u`` (on), ``su`` (startup event), ``sd`` (shutdown event).
Canonical ordering is generators outer, then the kind chain p -> u -> su -> sd,
periods innermost, which fixes serialization and graph node ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .milp import BINARY, CONTINUOUS, Constraint, MilpProblem, ValidationError, Variable

VAR_KINDS = ("p", "u", "su", "sd")


@dataclass(frozen=True)
class GeneratorSpec:
    id: int
    p_min: float
    p_max: float
    fuel_cost: float
    no_load_cost: float = 0.0
    startup_cost: float = 0.0
    shutdown_cost: float = 0.0
    min_up: int = 1
    min_down: int = 1
    ramp_limit: float | None = None
    init_on: bool = False
    init_periods_in_state: int = 0
    init_power: float = 0.0
    emission_rate: float | None = None

    def __post_init__(self):
        if not 0 <= self.p_min <= self.p_max:
            raise ValidationError(
                f"unit {self.id}: need 0 <= p_min <= p_max, "
                f"got [{self.p_min}, {self.p_max}]"
            )
        for label in ("fuel_cost", "no_load_cost", "startup_cost", "shutdown_cost"):
            if getattr(self, label) < 0:
                raise ValidationError(f"unit {self.id}: {label} must be >= 0")
        if self.min_up < 1 or self.min_down < 1:
            raise ValidationError(f"unit {self.id}: min_up and min_down must be >= 1")
        if self.ramp_limit is not None and self.ramp_limit < 0:
            raise ValidationError(f"unit {self.id}: ramp_limit must be >= 0")
        if self.init_periods_in_state < 0:
            raise ValidationError(f"unit {self.id}: init_periods_in_state must be >= 0")
        if self.init_on and not (self.p_min <= self.init_power <= self.p_max):
            raise ValidationError(
                f"unit {self.id}: initial power {self.init_power} outside "
                f"[{self.p_min}, {self.p_max}] while initially on"
            )
        if not self.init_on and self.init_power > 0:
            raise ValidationError(
                f"unit {self.id}: initially off but init_power > 0"
            )


@dataclass(frozen=True)
class UcInstance:
    generators: tuple[GeneratorSpec, ...]
    demand: tuple[float, ...]
    emission_cap: float | None = None

    def __post_init__(self):
        if len(self.demand) < 1:
            raise ValidationError("horizon must be at least one period")
        if any(d < 0 for d in self.demand):
            raise ValidationError("demand must be non-negative")
        if not self.generators:
            raise ValidationError("instance needs at least one generator")
        if self.emission_cap is not None:
            missing = [g.id for g in self.generators if g.emission_rate is None]
            if missing:
                raise ValidationError(
                    f"emission cap set but units {missing} have no emission_rate"
                )

    @property
    def horizon(self) -> int:
        return len(self.demand)


def var_name(kind: str, g: int, t: int) -> str:
    return f"{kind}_{g}_{t}"


def canonical_names(n_units: int, horizon: int) -> list[str]:
    """Variable names in canonical order (the order build_milp emits)."""
    return [
        var_name(kind, g, t)
        for g in range(n_units)
        for kind in VAR_KINDS
        for t in range(horizon)
    ]


def build_milp(inst: UcInstance) -> MilpProblem:
    """Assemble the commitment MILP for one instance.

    Rows, in order: per-period power balance, per-unit output limits
    (pmin/pmax), the on/off vs start/stop logic chain, minimum up and down
    time windows, initial-state lock-ins for units inside an unexpired
    window, then optional ramp and emission rows.
    """
    T = inst.horizon
    variables: list[Variable] = []
    objective: dict[str, float] = {}
    for g, gen in enumerate(inst.generators):
        for t in range(T):
            variables.append(Variable(var_name("p", g, t), CONTINUOUS, 0.0, gen.p_max))
        for kind in ("u", "su", "sd"):
            for t in range(T):
                variables.append(Variable(var_name(kind, g, t), BINARY, 0.0, 1.0))
        for t in range(T):
            _add(objective, var_name("p", g, t), gen.fuel_cost)
            _add(objective, var_name("u", g, t), gen.no_load_cost)
            _add(objective, var_name("su", g, t), gen.startup_cost)
            _add(objective, var_name("sd", g, t), gen.shutdown_cost)

    rows: list[Constraint] = []
    for t in range(T):
        terms = {var_name("p", g, t): 1.0 for g in range(len(inst.generators))}
        rows.append(Constraint(f"bal_{t}", terms, "=", float(inst.demand[t])))

    for g, gen in enumerate(inst.generators):
        for t in range(T):
            terms = {var_name("p", g, t): 1.0}
            _add(terms, var_name("u", g, t), -gen.p_min)
            rows.append(Constraint(f"pmin_{g}_{t}", terms, ">=", 0.0))
    for g, gen in enumerate(inst.generators):
        for t in range(T):
            terms = {var_name("p", g, t): 1.0}
            _add(terms, var_name("u", g, t), -gen.p_max)
            rows.append(Constraint(f"pmax_{g}_{t}", terms, "<=", 0.0))

    # u_t - u_{t-1} = su_t - sd_t; the t=0 predecessor is the initial state.
    for g, gen in enumerate(inst.generators):
        for t in range(T):
            terms = {
                var_name("u", g, t): 1.0,
                var_name("su", g, t): -1.0,
                var_name("sd", g, t): 1.0,
            }
            if t == 0:
                rhs = 1.0 if gen.init_on else 0.0
            else:
                terms[var_name("u", g, t - 1)] = -1.0
                rhs = 0.0
            rows.append(Constraint(f"logic_{g}_{t}", terms, "=", rhs))

    for g, gen in enumerate(inst.generators):
        for t in range(T):
            terms: dict[str, float] = {}
            for tau in range(max(0, t - gen.min_up + 1), t + 1):
                terms[var_name("su", g, tau)] = 1.0
            terms[var_name("u", g, t)] = -1.0
            rows.append(Constraint(f"minup_{g}_{t}", terms, "<=", 0.0))
    for g, gen in enumerate(inst.generators):
        for t in range(T):
            terms = {}
            for tau in range(max(0, t - gen.min_down + 1), t + 1):
                terms[var_name("sd", g, tau)] = 1.0
            terms[var_name("u", g, t)] = 1.0
            rows.append(Constraint(f"mindown_{g}_{t}", terms, "<=", 1.0))

    for g, gen in enumerate(inst.generators):
        window = gen.min_up if gen.init_on else gen.min_down
        remaining = window - gen.init_periods_in_state
        value = 1.0 if gen.init_on else 0.0
        for t in range(min(max(remaining, 0), T)):
            rows.append(
                Constraint(f"lock_{g}_{t}", {var_name("u", g, t): 1.0}, "=", value)
            )

    for g, gen in enumerate(inst.generators):
        if gen.ramp_limit is None:
            continue
        for t in range(T):
            up = {var_name("p", g, t): 1.0, var_name("su", g, t): -gen.p_max}
            dn = {var_name("p", g, t): -1.0, var_name("sd", g, t): -gen.p_max}
            if t == 0:
                prev = gen.init_power if gen.init_on else 0.0
                up_rhs = gen.ramp_limit + prev
                dn_rhs = gen.ramp_limit - prev
            else:
                up[var_name("p", g, t - 1)] = -1.0
                dn[var_name("p", g, t - 1)] = 1.0
                up_rhs = dn_rhs = gen.ramp_limit
            rows.append(Constraint(f"rampup_{g}_{t}", up, "<=", up_rhs))
            rows.append(Constraint(f"rampdn_{g}_{t}", dn, "<=", dn_rhs))

    if inst.emission_cap is not None:
        terms = {}
        for g, gen in enumerate(inst.generators):
            for t in range(T):
                _add(terms, var_name("p", g, t), float(gen.emission_rate))
        rows.append(Constraint("emis", terms, "<=", float(inst.emission_cap)))

    return MilpProblem(
        variables=tuple(variables),
        objective=objective,
        offset=0.0,
        constraints=tuple(rows),
    )


def _add(terms: dict[str, float], var: str, coef: float) -> None:
    # Sparse maps carry only nonzero coefficients.
    if coef != 0.0:
        terms[var] = terms.get(var, 0.0) + coef


def write_uc(inst: UcInstance) -> str:
    """Flat key-value text form of an instance, one field per line."""
    lines = [f"horizon {inst.horizon}"]
    lines.append("demand " + " ".join(repr(float(d)) for d in inst.demand))
    if inst.emission_cap is not None:
        lines.append(f"emission_cap {float(inst.emission_cap)!r}")
    lines.append(f"units {len(inst.generators)}")
    for i, g in enumerate(inst.generators):
        lines.append(f"unit_{i}_id {g.id}")
        for label in ("p_min", "p_max", "fuel_cost", "no_load_cost",
                      "startup_cost", "shutdown_cost"):
            lines.append(f"unit_{i}_{label} {float(getattr(g, label))!r}")
        lines.append(f"unit_{i}_min_up {g.min_up}")
        lines.append(f"unit_{i}_min_down {g.min_down}")
        if g.ramp_limit is not None:
            lines.append(f"unit_{i}_ramp_limit {float(g.ramp_limit)!r}")
        lines.append(f"unit_{i}_init_on {int(g.init_on)}")
        lines.append(f"unit_{i}_init_periods_in_state {g.init_periods_in_state}")
        lines.append(f"unit_{i}_init_power {float(g.init_power)!r}")
        if g.emission_rate is not None:
            lines.append(f"unit_{i}_emission_rate {float(g.emission_rate)!r}")
    return "\n".join(lines) + "\n"


def parse_uc(text: str) -> UcInstance:
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition(" ")
        if not value:
            raise ValidationError(f"line {lineno}: expected 'key value'")
        if key in fields:
            raise ValidationError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = value.strip()

    def take(key: str, default: str | None = None) -> str:
        if key in fields:
            return fields.pop(key)
        if default is not None:
            return default
        raise ValidationError(f"missing key {key!r}")

    horizon = int(take("horizon"))
    demand = tuple(float(tok) for tok in take("demand").split())
    if len(demand) != horizon:
        raise ValidationError(
            f"demand has {len(demand)} entries but horizon is {horizon}"
        )
    emission_cap = fields.pop("emission_cap", None)
    units = int(take("units"))
    gens = []
    for i in range(units):
        def u(label: str, default: str | None = None) -> str:
            return take(f"unit_{i}_{label}", default)

        ramp = fields.pop(f"unit_{i}_ramp_limit", None)
        rate = fields.pop(f"unit_{i}_emission_rate", None)
        gens.append(
            GeneratorSpec(
                id=int(u("id")),
                p_min=float(u("p_min")),
                p_max=float(u("p_max")),
                fuel_cost=float(u("fuel_cost")),
                no_load_cost=float(u("no_load_cost", "0")),
                startup_cost=float(u("startup_cost", "0")),
                shutdown_cost=float(u("shutdown_cost", "0")),
                min_up=int(u("min_up", "1")),
                min_down=int(u("min_down", "1")),
                ramp_limit=None if ramp is None else float(ramp),
                init_on=bool(int(u("init_on", "0"))),
                init_periods_in_state=int(u("init_periods_in_state", "0")),
                init_power=float(u("init_power", "0")),
                emission_rate=None if rate is None else float(rate),
            )
        )
    if fields:
        raise ValidationError(f"unrecognized keys: {sorted(fields)}")
    return UcInstance(
        generators=tuple(gens),
        demand=demand,
        emission_cap=None if emission_cap is None else float(emission_cap),
    )
