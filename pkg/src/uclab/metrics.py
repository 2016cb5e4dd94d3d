"""Success-rate, consistency, and robustness metrics over recorded trials.

A trial table stores human-judged outcomes of nine trials (three prompt
levels x three repeats) for one model. Each trial carries five subtask
outcomes: three model-side (objective correct, constraints correct,
constraints complete) and two code-side (error-free execution, decision
verified). Every metric is computed in integer arithmetic and divided at
the end, so results are exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .milp import ValidationError

MODEL = "model"
CODE = "code"
PROMPT_TYPES = (1, 2, 3)  # simple / intermediate / sophisticated
TRIALS = (1, 2, 3)
MAX_ITERATIONS = 3


@dataclass(frozen=True)
class SubtaskOutcome:
    success: bool
    iterations: int  # manual-correction prompts needed; failures carry 3

    def __post_init__(self):
        if not 0 <= self.iterations <= MAX_ITERATIONS:
            raise ValidationError(
                f"iterations must lie in [0, {MAX_ITERATIONS}], got {self.iterations}"
            )
        if not self.success and self.iterations != MAX_ITERATIONS:
            raise ValidationError("failed subtasks must record 3 iterations")


@dataclass(frozen=True)
class TrialRecord:
    prompt_type: int
    trial: int
    obj_cor: SubtaskOutcome
    con_cor: SubtaskOutcome
    con_com: SubtaskOutcome
    error_free: SubtaskOutcome
    decision_verified: SubtaskOutcome

    def __post_init__(self):
        if self.prompt_type not in PROMPT_TYPES or self.trial not in TRIALS:
            raise ValidationError(
                f"prompt_type/trial out of range: ({self.prompt_type}, {self.trial})"
            )

    def subtasks(self, task: str) -> tuple[SubtaskOutcome, ...]:
        if task == MODEL:
            return (self.obj_cor, self.con_cor, self.con_com)
        if task == CODE:
            return (self.error_free, self.decision_verified)
        raise ValidationError(f"task must be {MODEL!r} or {CODE!r}, got {task!r}")

    def succeeded(self, task: str) -> bool:
        return all(s.success for s in self.subtasks(task))


@dataclass(frozen=True)
class TrialTable:
    llm_name: str
    records: tuple[TrialRecord, ...]

    def __post_init__(self):
        keys = {(r.prompt_type, r.trial) for r in self.records}
        expected = {(i, j) for i in PROMPT_TYPES for j in TRIALS}
        if len(self.records) != 9 or keys != expected:
            raise ValidationError(
                f"table for {self.llm_name!r} must cover the 3x3 grid exactly once"
            )

    def record(self, prompt_type: int, trial: int) -> TrialRecord:
        for r in self.records:
            if (r.prompt_type, r.trial) == (prompt_type, trial):
                return r
        raise ValidationError(f"no record for ({prompt_type}, {trial})")


@dataclass(frozen=True)
class MetricsReport:
    sr_model: Fraction
    sr_code: Fraction
    co_model: Fraction
    co_code: Fraction
    ro_model: int
    ro_code: int


def delta(cond: bool) -> int:
    """Indicator: 1 when the condition holds, else 0."""
    return 1 if cond else 0


def zeta(k: int) -> int:
    """Agreement score of k successes out of 3: unanimous counts 3, else 2."""
    if k not in (0, 1, 2, 3):
        raise ValidationError(f"zeta defined on 0..3, got {k}")
    return 3 if k in (0, 3) else 2


def success_rate(table: TrialTable, task: str) -> Fraction:
    total = sum(
        delta(table.record(i, j).succeeded(task)) for i in PROMPT_TYPES for j in TRIALS
    )
    return Fraction(total, 3)


def consistency(table: TrialTable, task: str) -> Fraction:
    total = 0
    for i in PROMPT_TYPES:
        successes = sum(delta(table.record(i, j).succeeded(task)) for j in TRIALS)
        total += zeta(successes)
    return Fraction(total, 3)


def robustness(table: TrialTable, task: str) -> int:
    return sum(delta(table.record(1, j).succeeded(task)) for j in TRIALS)


def iteration_curve(table: TrialTable, task: str, prompt_type: int) -> tuple[Fraction, ...]:
    """Fraction of trials fully solved within k corrections, for k = 0..3.

    A trial counts at threshold k only when every subtask of the task both
    succeeded and needed at most k corrections, so the curve is
    non-decreasing and its final value matches the prompt's success count.
    """
    if prompt_type not in PROMPT_TYPES:
        raise ValidationError(f"prompt_type must be in {PROMPT_TYPES}")
    curve = []
    for k in range(MAX_ITERATIONS + 1):
        hits = 0
        for j in TRIALS:
            rec = table.record(prompt_type, j)
            subs = rec.subtasks(task)
            if all(s.success and s.iterations <= k for s in subs):
                hits += 1
        curve.append(Fraction(hits, 3))
    return tuple(curve)


def compute_report(table: TrialTable) -> MetricsReport:
    return MetricsReport(
        sr_model=success_rate(table, MODEL),
        sr_code=success_rate(table, CODE),
        co_model=consistency(table, MODEL),
        co_code=consistency(table, CODE),
        ro_model=robustness(table, MODEL),
        ro_code=robustness(table, CODE),
    )


CSV_HEADER = "llm,prompt_type,trial,obj_cor,con_cor,con_com,error_free,decision_verified"
_CELL_KEYS = ("obj_cor", "con_cor", "con_com", "error_free", "decision_verified")


def _parse_cell(text: str, lineno: int) -> SubtaskOutcome:
    text = text.strip()
    if len(text) < 3 or text[1] != ":" or text[0] not in "SF":
        raise ValidationError(f"line {lineno}: cell must read 'S:n' or 'F:3', got {text!r}")
    try:
        iterations = int(text[2:])
    except ValueError:
        raise ValidationError(f"line {lineno}: bad iteration count in {text!r}") from None
    try:
        return SubtaskOutcome(text[0] == "S", iterations)
    except ValidationError as exc:
        raise ValidationError(f"line {lineno}: {exc}") from None


def _format_cell(outcome: SubtaskOutcome) -> str:
    return f"{'S' if outcome.success else 'F'}:{outcome.iterations}"


def parse_trial_table(text: str) -> TrialTable:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValidationError(f"trial table must start with header {CSV_HEADER!r}")
    llm_name = None
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split(",")
        if len(fields) != 8:
            raise ValidationError(f"line {lineno}: expected 8 fields, got {len(fields)}")
        name = fields[0]
        if llm_name is None:
            llm_name = name
        elif name != llm_name:
            raise ValidationError(f"line {lineno}: one table holds one llm, got {name!r}")
        cells = [_parse_cell(f, lineno) for f in fields[3:]]
        records.append(
            TrialRecord(int(fields[1]), int(fields[2]), *cells)
        )
    if llm_name is None:
        raise ValidationError("trial table has no records")
    return TrialTable(llm_name, tuple(records))


def write_trial_table(table: TrialTable) -> str:
    lines = [CSV_HEADER]
    for i in PROMPT_TYPES:
        for j in TRIALS:
            rec = table.record(i, j)
            cells = ",".join(
                _format_cell(getattr(rec, key)) for key in _CELL_KEYS
            )
            lines.append(f"{table.llm_name},{i},{j},{cells}")
    return "\n".join(lines) + "\n"


FIXTURE_NAMES = ("chatgpt_3_5", "chatgpt_4_0", "claude", "google_bard")


def load_fixture(name: str) -> TrialTable:
    """Load one of the shipped recorded trial tables by short name."""
    from importlib.resources import files

    if name not in FIXTURE_NAMES:
        raise ValidationError(f"unknown fixture {name!r}; have {FIXTURE_NAMES}")
    text = files("uclab.fixtures").joinpath(f"{name}.csv").read_text()
    return parse_trial_table(text)


def load_all_fixtures() -> list[TrialTable]:
    return [load_fixture(name) for name in FIXTURE_NAMES]


def export_report(reports: list[tuple[str, MetricsReport]]) -> str:
    """One CSV row per model with the six metrics as exact rationals."""
    lines = [
        "llm,model_success_rate,code_success_rate,model_consistency,"
        "code_consistency,model_robustness,code_robustness"
    ]
    for name, rep in reports:
        lines.append(
            f"{name},{rep.sr_model},{rep.sr_code},{rep.co_model},"
            f"{rep.co_code},{rep.ro_model},{rep.ro_code}"
        )
    return "\n".join(lines) + "\n"
