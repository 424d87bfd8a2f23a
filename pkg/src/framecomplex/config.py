"""Run configuration: budgets, seeds, prime screens.

Every randomized search in the toolkit draws from the one seeded RNG carried
here, and every report embeds the config so re-runs are reproducible.
"""

from __future__ import annotations

import os
import random
import time
from dataclasses import dataclass, field, asdict

DEFAULT_ELEMENT_BUDGET = 2_000_000
DEFAULT_SNF_BUDGET = 4_000_000       # max sparse-entry work units per reduction
DEFAULT_SEARCH_BUDGET = 5_000_000    # max candidates in exhaustive searches
DEFAULT_COSET_BUDGET = 200_000       # Todd-Coxeter coset table rows
DEFAULT_PRIMES = (2, 3, 5)

BUDGET_ENV_VAR = "FRAMECOMPLEX_BUDGET_MS"


@dataclass
class RunConfig:
    ring_modulus: int | None = None
    family: str | None = None
    n: int | None = None
    k: int | None = None
    max_degree: int = 2
    element_budget: int = DEFAULT_ELEMENT_BUDGET
    snf_budget: int = DEFAULT_SNF_BUDGET
    search_budget: int = DEFAULT_SEARCH_BUDGET
    coset_budget: int = DEFAULT_COSET_BUDGET
    primes: tuple = DEFAULT_PRIMES
    seed: int = 0
    workers: int = 1
    out: str | None = None
    format: str = "json"
    timings: bool = False

    def __post_init__(self):
        for name in ("element_budget", "snf_budget", "search_budget", "coset_budget"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        self.primes = tuple(sorted(set(self.primes)))

    def rng(self) -> random.Random:
        return random.Random(self.seed)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["primes"] = list(self.primes)
        return d


class Deadline:
    """Wall-clock cap per verdict, driven by FRAMECOMPLEX_BUDGET_MS.

    Unset or unparsable env means no cap. Checks are explicit (no signals) so
    callers poll at loop boundaries.
    """

    def __init__(self, millis: float | None = None):
        if millis is None:
            raw = os.environ.get(BUDGET_ENV_VAR)
            if raw:
                try:
                    millis = float(raw)
                except ValueError:
                    millis = None
        self.expires_at = time.monotonic() + millis / 1000.0 if millis else None

    def expired(self) -> bool:
        return self.expires_at is not None and time.monotonic() > self.expires_at
