"""Command line: lmi-ub --model PATH --basis PATH --grid N --out PATH.

The model file uses the JSON interchange schema (expression-string
matrices).  The basis file lists storage terms, e.g.

    {"terms": [{"powers": [0]}, {"powers": [1]}, {"powers": [-1]}]}

declares P(rho) = P_0 + rho P_1 + (1/rho) P_2.  --grid takes one count or
a comma-separated count per parameter.  The output JSON
{gamma_ub, solver_status, grid_points} is consumed by the lower-bound
toolkit as its --gamma-ub input.
"""

from __future__ import annotations

import argparse
import json
import sys

from .model import load_model
from .sdp import default_grid, load_basis, upper_bound


def main(argv=None) -> int:
    p = argparse.ArgumentParser(
        prog="lmi-ub",
        description="LMI upper bound on the induced L2 gain of a gridded LPV model",
    )
    p.add_argument("--model", required=True, help="model JSON file")
    p.add_argument("--basis", required=True, help="storage basis JSON file")
    p.add_argument("--grid", default="30",
                   help="grid points per parameter (N or N1,N2,...)")
    p.add_argument("--out", required=True, help="output JSON path")
    p.add_argument("--solver", default=None, help="cvxpy solver name")
    args = p.parse_args(argv)

    try:
        model = load_model(args.model)
        basis = load_basis(args.basis, model.m)
        counts = [int(s) for s in args.grid.split(",")]
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as ex:
        print(f"config error: {ex}", file=sys.stderr)
        return 2

    try:
        res = upper_bound(model, basis, default_grid(model, counts),
                          solver=args.solver)
    except RuntimeError as ex:
        print(f"solver failure: {ex}", file=sys.stderr)
        return 3

    with open(args.out, "w") as f:
        json.dump({"gamma_ub": res.gamma_ub,
                   "solver_status": res.solver_status,
                   "grid_points": res.grid_points}, f, indent=2)
        f.write("\n")
    print(f"gamma_ub = {res.gamma_ub:.6g} ({res.solver_status}, "
          f"{res.grid_points} grid points) -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
