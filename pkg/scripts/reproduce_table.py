#!/usr/bin/env python3
"""Reproduce the scaled-LTI rate-bound sweep (lower bound vs published)."""

import time

from lpvgain import lbopt, registry

MU_BARS = [0.4, 1.0, 1.6]

if __name__ == "__main__":
    print(f"{'mu_bar':>7} {'gamma_lb':>9} {'published':>9} {'h*':>7} {'secs':>6}")
    for mu in MU_BARS:
        ex = registry.get("scaled-lti", mu_bar=mu)
        t0 = time.perf_counter()
        res = lbopt.algorithm_two(ex.model, ex.schedule, ex.gamma_ub)
        dt = time.perf_counter() - t0
        print(f"{mu:7.2f} {res.gamma_lb:9.4f} {ex.gamma_lb:9.4f} "
              f"{res.h_star:7.3f} {dt:6.1f}")
