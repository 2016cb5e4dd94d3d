"""Unit-commitment optimization lab.

Builds single-bus unit-commitment MILPs, solves them exactly with a
hand-rolled simplex and branch-and-bound, accelerates them by predicting
commitments with a bipartite-graph convolutional network and solving the
remaining LP, and scores recorded model-evaluation trials with exact
rational metrics.
"""

from .baseline import MlpParams, baseline_evaluate, baseline_train
from .dive import (
    DiveOutcome,
    EvalStats,
    dive,
    evaluate_dive,
    r_squared,
    rel_error,
)
from .gcnn import (
    GcnnParams,
    LabeledGraph,
    TrainConfig,
    bce_loss,
    forward,
    gradient,
    init_params,
    train,
)
from .graph import BipartiteGraph, encode, parse_graph, relabel, write_graph
from .lpformat import LpParseError, parse_lp, write_lp
from .metrics import (
    MetricsReport,
    SubtaskOutcome,
    TrialRecord,
    TrialTable,
    compute_report,
    consistency,
    delta,
    iteration_curve,
    robustness,
    success_rate,
    zeta,
)
from .milp import (
    Assignment,
    Constraint,
    FeasibilityReport,
    MilpProblem,
    ValidationError,
    Variable,
    check_feasible,
    evaluate_objective,
)
from .pipeline import DiveConfig, PipelineConfig, draw_instance, stage_generate
from .simplex import SolverFailure
from .solver import (
    BnbResult,
    LpSolution,
    SolverConfig,
    brute_force_milp,
    solve_fixed,
    solve_lp,
    solve_milp,
)
from .ucmodel import GeneratorSpec, UcInstance, build_milp, parse_uc, write_uc

__version__ = "0.1.0"
