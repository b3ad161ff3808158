#!/usr/bin/env python3
"""Run the full analysis pipeline on one built-in example.

Usage: python3 scripts/run_example.py harald [--gamma-ub 2.964] [--out out/harald]

Without --gamma-ub the published LMI value stored in the registry is used.
"""

import argparse
import sys

from lpvgain import cli, registry


def main():
    p = argparse.ArgumentParser()
    p.add_argument("example", choices=registry.names())
    p.add_argument("--mu-bar", type=float, default=None,
                   help="rate bound for the scaled-lti example")
    p.add_argument("--gamma-ub", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--threads", type=int, default=1)
    args = p.parse_args()

    kwargs = {}
    if args.example == "scaled-lti" and args.mu_bar is not None:
        kwargs["mu_bar"] = args.mu_bar
    ex = registry.get(args.example, **kwargs)
    gamma_ub = args.gamma_ub if args.gamma_ub is not None else str(ex.gamma_ub)
    out = args.out or f"out/{args.example}"

    argv = ["full", "--example", args.example, "--gamma-ub", gamma_ub,
            "--out", out, "--threads", str(args.threads)]
    if kwargs:
        import json, tempfile
        cfg = {"model": args.example, "mu_bar": kwargs["mu_bar"]}
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
            json.dump(cfg, f)
            argv = ["full", "--config", f.name, "--gamma-ub", gamma_ub,
                    "--out", out, "--threads", str(args.threads)]
    return cli.main(argv)


if __name__ == "__main__":
    sys.exit(main())
