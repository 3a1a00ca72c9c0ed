"""Deletion schedules k*(n), index-selection policies and their negligibility class.

Index sets are 0-based: deleting "the first k items" selects ``{0, ..., k-1}``.
"""
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np

from lab.exceptions import DeletionTooLarge, InvalidParameter
from lab.streams import derive_stream

logger = logging.getLogger(__name__)


class NegligibilityClass(str, enum.Enum):
    LLN_AND_CLT = "LLN_and_CLT"
    LLN_ONLY = "LLN_only"
    VIOLATING = "Violating"


class DeletionPolicy(str, enum.Enum):
    PREFIX = "prefix"
    UNIFORM_RANDOM = "uniform_random"
    EXTREMAL_ABS = "extremal_abs"


class DeletionSchedule:
    kind = None

    def __post_init__(self):
        self.clean()

    def clean(self):
        pass

    def raw_k(self, n):
        raise NotImplementedError

    def to_json(self):
        return {"kind": self.kind}

    def __str__(self):
        params = ", ".join(f"{k}={v}" for k, v in self.to_json().items() if k != "kind")
        return f"{self.kind}({params})"


@dataclass(frozen=True)
class Zero(DeletionSchedule):
    kind = "zero"

    def raw_k(self, n):
        return 0


@dataclass(frozen=True)
class FixedK(DeletionSchedule):
    k: int

    kind = "fixed"

    def clean(self):
        if self.k < 0:
            raise InvalidParameter(f"fixed k must be non-negative, got {self.k}")

    def raw_k(self, n):
        return self.k

    def to_json(self):
        return {"kind": self.kind, "k": self.k}


@dataclass(frozen=True)
class PowerLaw(DeletionSchedule):
    """k(n) = floor(n**r), 0 < r < 1."""

    r: float

    kind = "power"

    def clean(self):
        if not 0 < self.r < 1:
            raise InvalidParameter(f"power-law exponent must lie in (0, 1), got {self.r}")

    def raw_k(self, n):
        # n**r is exact only up to rounding, and integer powers must floor to themselves
        return math.floor(n**self.r + 1e-9)

    def to_json(self):
        return {"kind": self.kind, "r": self.r}


@dataclass(frozen=True)
class LinearFraction(DeletionSchedule):
    """k(n) = floor(c*n), 0 < c < 1; violates every negligibility condition."""

    c: float

    kind = "linear"

    def clean(self):
        if not 0 < self.c < 1:
            raise InvalidParameter(f"linear fraction must lie in (0, 1), got {self.c}")

    def raw_k(self, n):
        return math.floor(self.c * n + 1e-9)

    def to_json(self):
        return {"kind": self.kind, "c": self.c}


@dataclass(frozen=True)
class DeletionPlan:
    schedule: DeletionSchedule
    policy: DeletionPolicy = DeletionPolicy.PREFIX

    def __post_init__(self):
        if not isinstance(self.schedule, DeletionSchedule):
            raise InvalidParameter("deletion plan needs a schedule")
        object.__setattr__(self, "policy", DeletionPolicy(self.policy))

    def k_of_n(self, n):
        return k_of_n(self.schedule, n)

    def select(self, values, seed=0):
        return select_indices(self.policy, self.k_of_n(len(values)), values, seed)

    def deleted_mask(self, values, seed=0):
        mask = np.zeros(len(values), dtype=bool)
        mask[self.select(values, seed)] = True
        return mask

    def to_json(self):
        return {"schedule": self.schedule.to_json(), "policy": self.policy.value}

    def __str__(self):
        return f"{self.schedule}/{self.policy.value}"


def k_of_n(schedule, n):
    """k*(n) clamped into [0, n-1]."""
    if n < 1:
        raise InvalidParameter(f"n must be at least 1, got {n}")
    return max(0, min(schedule.raw_k(n), n - 1))


def negligibility_class(schedule):
    if isinstance(schedule, (Zero, FixedK)):
        return NegligibilityClass.LLN_AND_CLT
    if isinstance(schedule, PowerLaw):
        if schedule.r < 0.5:
            return NegligibilityClass.LLN_AND_CLT
        return NegligibilityClass.LLN_ONLY
    return NegligibilityClass.VIOLATING


def clt_condition_holds(schedule, mean):
    """With a zero mean the deleted items carry no drift and k/n -> 0 suffices."""
    category = negligibility_class(schedule)
    if category is NegligibilityClass.LLN_AND_CLT:
        return True
    return category is NegligibilityClass.LLN_ONLY and mean == 0


def select_indices(policy, k, values, seed=0):
    """Sorted 0-based indices of the k items to delete."""
    values = np.asarray(values, dtype=float)
    n = len(values)
    if k < 0:
        raise InvalidParameter(f"k must be non-negative, got {k}")
    if k >= n:
        raise DeletionTooLarge(f"deletion must leave at least one item (k={k}, n={n})")
    policy = DeletionPolicy(policy)
    if k == 0:
        return np.empty(0, dtype=np.int64)
    if policy is DeletionPolicy.PREFIX:
        return np.arange(k, dtype=np.int64)
    if policy is DeletionPolicy.UNIFORM_RANDOM:
        rng = derive_stream(seed, "select")
        return np.sort(rng.choice(n, size=k, replace=False)).astype(np.int64)
    # stable sort keeps the lowest index first among equal magnitudes
    order = np.argsort(-np.abs(values), kind="stable")
    return np.sort(order[:k]).astype(np.int64)
