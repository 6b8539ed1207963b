"""Enumeration budgets and shared numeric tolerances.

The environment variable AVCSTEIN_BUDGET, when set to a positive integer,
overrides every enumeration budget below. An explicit ``budget=`` argument at
a call site takes precedence over the environment.
"""

import os

# extended alphabets (block_extend / adaptive_extend_2) capped at this many symbols
ALPHABET_BUDGET = 4096

# types detector: |Sbar|^n * |S|^n * N^2 enumeration cap
DETECTOR_BUDGET = 10**8

# codebook verification: |X|^n * (|S|^n + |Sbar|^n) cap
VERIFY_BUDGET = 10**6

# exact_errors: |Y|^n * strategy-support cap
EXACT_BUDGET = 10**7

# default tolerance for boolean structural verdicts (hulls_intersect, ...)
GAP_TOL = 1e-6

# strict-inequality margin inside the types detector; ties fail the condition
DETECTOR_MARGIN = 1e-12

# floor used inside logs by iterative solvers (never in exact re-evaluation)
SOLVER_FLOOR = 1e-12


def resolve_budget(explicit, default):
    """Budget precedence: explicit argument > AVCSTEIN_BUDGET env > default."""
    if explicit is not None:
        return int(explicit)
    env = os.environ.get("AVCSTEIN_BUDGET")
    if env:
        try:
            val = int(env)
        except ValueError as exc:
            raise ValueError(f"AVCSTEIN_BUDGET must be an integer, got {env!r}") from exc
        if val > 0:
            return val
    return default
