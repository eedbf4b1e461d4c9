"""Cost guards for exhaustive sums."""

from __future__ import annotations

import os

DEFAULT_BUDGET = 10 ** 8


class BudgetExceeded(RuntimeError):
    """Raised when an exhaustive enumeration would exceed the configured budget."""


def chain_budget(override: int | None = None) -> int:
    """Maximum number of terms an exhaustive sum may visit.

    Resolution order: explicit ``override``, then the ``NCQ_BUDGET``
    environment variable, then :data:`DEFAULT_BUDGET`.
    """
    if override is not None:
        return int(override)
    env = os.environ.get("NCQ_BUDGET")
    if env:
        return int(float(env))
    return DEFAULT_BUDGET


def guard(count: int, what: str, budget: int | None = None) -> None:
    limit = chain_budget(budget)
    if count > limit:
        raise BudgetExceeded(f"{what} needs {count} terms, budget is {limit}")
