"""Score the recorded evaluation trials with the exact rational metrics.

Loads the four shipped trial tables, computes success rate, consistency,
and robustness for the modeling and coding tasks, and prints the
iteration-correctness curves. Run with:  python3 demos/05_trial_metrics.py
"""

from uclab.metrics import (
    CODE,
    MODEL,
    compute_report,
    iteration_curve,
    load_all_fixtures,
)

tables = load_all_fixtures()

header = f"{'model':12s} {'SR_m':>5s} {'SR_c':>5s} {'CO_m':>5s} {'CO_c':>5s} {'RO_m':>4s} {'RO_c':>4s}"
print(header)
print("-" * len(header))
for table in tables:
    rep = compute_report(table)
    print(
        f"{table.llm_name:12s} {str(rep.sr_model):>5s} {str(rep.sr_code):>5s} "
        f"{str(rep.co_model):>5s} {str(rep.co_code):>5s} "
        f"{rep.ro_model:4d} {rep.ro_code:4d}"
    )

print("\ncorrectness after k manual corrections (modeling, sophisticated prompt):")
for table in tables:
    curve = iteration_curve(table, MODEL, 3)
    pretty = "  ".join(f"k={k}: {str(v):>4s}" for k, v in enumerate(curve))
    print(f"  {table.llm_name:12s} {pretty}")

print("\nsame, coding task under the simple prompt:")
for table in tables:
    curve = iteration_curve(table, CODE, 1)
    pretty = "  ".join(f"k={k}: {str(v):>4s}" for k, v in enumerate(curve))
    print(f"  {table.llm_name:12s} {pretty}")
