"""Bipartite variable/constraint graph encoding of a MILP.

One node per variable and per constraint, one edge per nonzero coefficient.
Feature layout (all finite):
  variable (4): [objective coef / max(1, max |obj coef|), is_binary,
                 lower bound / max(1, max finite |bound|) if finite else 0,
                 upper bound scaled likewise]
  constraint (4): [rhs / max(1, row inf-norm), sense as -1/0/+1 for <=/=/>=,
                   row degree / variable count, row degree / variable count]
  edge (1): coefficient / row inf-norm
Node order follows the problem's canonical order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .milp import BINARY, MilpProblem, ValidationError


@dataclass(frozen=True)
class BipartiteGraph:
    var_names: tuple[str, ...]
    var_features: np.ndarray  # (n_vars, 4)
    con_names: tuple[str, ...]
    con_features: np.ndarray  # (n_cons, 4)
    edge_var: np.ndarray  # (n_edges,) variable indices
    edge_con: np.ndarray  # (n_edges,) constraint indices
    edge_features: np.ndarray  # (n_edges,)
    binary_mask: np.ndarray  # indices of binary variable nodes

    def __post_init__(self):
        n_var, n_con = len(self.var_names), len(self.con_names)
        if self.edge_var.size and (
            self.edge_var.min() < 0
            or self.edge_var.max() >= n_var
            or self.edge_con.min() < 0
            or self.edge_con.max() >= n_con
        ):
            raise ValidationError("edge index out of range")
        pairs = set(zip(self.edge_var.tolist(), self.edge_con.tolist()))
        if len(pairs) != self.edge_var.size:
            raise ValidationError("duplicate (variable, constraint) edge")
        for arr in (self.var_features, self.con_features, self.edge_features):
            if arr.size and not np.all(np.isfinite(arr)):
                raise ValidationError("non-finite feature value")

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    @property
    def n_cons(self) -> int:
        return len(self.con_names)

    @property
    def n_edges(self) -> int:
        return int(self.edge_var.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BipartiteGraph):
            return NotImplemented
        return (
            self.var_names == other.var_names
            and self.con_names == other.con_names
            and np.array_equal(self.var_features, other.var_features)
            and np.array_equal(self.con_features, other.con_features)
            and np.array_equal(self.edge_var, other.edge_var)
            and np.array_equal(self.edge_con, other.edge_con)
            and np.array_equal(self.edge_features, other.edge_features)
            and np.array_equal(self.binary_mask, other.binary_mask)
        )


def encode(problem: MilpProblem) -> BipartiteGraph:
    n = len(problem.variables)
    index = problem.variable_index()

    obj_scale = max(1.0, max((abs(v) for v in problem.objective.values()), default=0.0))
    finite_bounds = [
        abs(x)
        for v in problem.variables
        for x in (v.lower, v.upper)
        if math.isfinite(x)
    ]
    bound_scale = max(1.0, max(finite_bounds, default=0.0))

    var_features = np.zeros((n, 4))
    for j, v in enumerate(problem.variables):
        var_features[j, 0] = problem.objective.get(v.name, 0.0) / obj_scale
        var_features[j, 1] = 1.0 if v.kind == BINARY else 0.0
        var_features[j, 2] = v.lower / bound_scale if math.isfinite(v.lower) else 0.0
        var_features[j, 3] = v.upper / bound_scale if math.isfinite(v.upper) else 0.0

    sense_value = {"<=": -1.0, "=": 0.0, ">=": 1.0}
    con_features = np.zeros((len(problem.constraints), 4))
    edge_var: list[int] = []
    edge_con: list[int] = []
    edge_feat: list[float] = []
    for i, con in enumerate(problem.constraints):
        norm = max((abs(coef) for coef in con.terms.values()), default=0.0)
        degree = len(con.terms)
        con_features[i, 0] = con.rhs / max(1.0, norm)
        con_features[i, 1] = sense_value[con.sense]
        con_features[i, 2] = degree / n if n else 0.0
        con_features[i, 3] = con_features[i, 2]
        for var, coef in con.terms.items():
            edge_var.append(index[var])
            edge_con.append(i)
            edge_feat.append(coef / norm)

    binary_mask = np.array(
        [j for j, v in enumerate(problem.variables) if v.kind == BINARY], dtype=np.int64
    )
    return BipartiteGraph(
        var_names=tuple(problem.variable_names),
        var_features=var_features,
        con_names=tuple(c.name for c in problem.constraints),
        con_features=con_features,
        edge_var=np.array(edge_var, dtype=np.int64),
        edge_con=np.array(edge_con, dtype=np.int64),
        edge_features=np.array(edge_feat, dtype=float),
        binary_mask=binary_mask,
    )


def relabel(graph: BipartiteGraph, perm: list[int] | np.ndarray) -> BipartiteGraph:
    """Permute variable nodes: node j of the result is node perm[j] of the input."""
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (graph.n_vars,) or sorted(perm.tolist()) != list(range(graph.n_vars)):
        raise ValidationError("perm must be a bijection over variable nodes")
    inverse = np.empty_like(perm)
    inverse[perm] = np.arange(graph.n_vars)
    new_mask = np.sort(inverse[graph.binary_mask])
    return BipartiteGraph(
        var_names=tuple(graph.var_names[p] for p in perm),
        var_features=graph.var_features[perm],
        con_names=graph.con_names,
        con_features=graph.con_features,
        edge_var=inverse[graph.edge_var],
        edge_con=graph.edge_con.copy(),
        edge_features=graph.edge_features.copy(),
        binary_mask=new_mask,
    )


def write_graph(graph: BipartiteGraph) -> str:
    """Text form: VARS / CONS / EDGES sections, one CSV record per line."""
    lines = ["VARS"]
    binary = set(graph.binary_mask.tolist())
    for j, name in enumerate(graph.var_names):
        feats = ",".join(repr(float(x)) for x in graph.var_features[j])
        lines.append(f"{name},{feats}")
    lines.append("CONS")
    for i, name in enumerate(graph.con_names):
        feats = ",".join(repr(float(x)) for x in graph.con_features[i])
        lines.append(f"{name},{feats}")
    lines.append("EDGES")
    for e in range(graph.n_edges):
        lines.append(
            f"{graph.edge_var[e]},{graph.edge_con[e]},{float(graph.edge_features[e])!r}"
        )
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> BipartiteGraph:
    section = None
    var_names: list[str] = []
    var_rows: list[list[float]] = []
    con_names: list[str] = []
    con_rows: list[list[float]] = []
    edges: list[tuple[int, int, float]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line in ("VARS", "CONS", "EDGES"):
            section = line
            continue
        fields = line.split(",")
        if section == "VARS":
            if len(fields) != 5:
                raise ValidationError(f"line {lineno}: VARS record needs 5 fields")
            var_names.append(fields[0])
            var_rows.append([float(x) for x in fields[1:]])
        elif section == "CONS":
            if len(fields) != 5:
                raise ValidationError(f"line {lineno}: CONS record needs 5 fields")
            con_names.append(fields[0])
            con_rows.append([float(x) for x in fields[1:]])
        elif section == "EDGES":
            if len(fields) != 3:
                raise ValidationError(f"line {lineno}: EDGES record needs 3 fields")
            edges.append((int(fields[0]), int(fields[1]), float(fields[2])))
        else:
            raise ValidationError(f"line {lineno}: expected a section header")
    var_features = np.array(var_rows, dtype=float).reshape(len(var_names), 4)
    con_features = np.array(con_rows, dtype=float).reshape(len(con_names), 4)
    mask = np.flatnonzero(var_features[:, 1] == 1.0)
    return BipartiteGraph(
        var_names=tuple(var_names),
        var_features=var_features,
        con_names=tuple(con_names),
        con_features=con_features,
        edge_var=np.array([e[0] for e in edges], dtype=np.int64),
        edge_con=np.array([e[1] for e in edges], dtype=np.int64),
        edge_features=np.array([e[2] for e in edges], dtype=float),
        binary_mask=mask,
    )
