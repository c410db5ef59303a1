"""Approximate membership query structures in the random-oracle model.

Bloom, Counting Bloom, quotient and blocked filters built over a shared
hash/state decomposition, exact closed-form false-positive probabilities,
an exhaustive enumeration oracle and a seeded Monte-Carlo harness.
"""

from amqcheck.errors import (
    AmqError,
    CapacityExceeded,
    CounterSaturation,
    EnumerationTooLarge,
    FeasibilityError,
    UnderflowRemoval,
)

__version__ = "0.1.0"

__all__ = [
    "AmqError",
    "CapacityExceeded",
    "CounterSaturation",
    "EnumerationTooLarge",
    "FeasibilityError",
    "UnderflowRemoval",
    "__version__",
]
