"""Exact expectations by enumerating every outcome of a small discrete law.

The oracle only knows index-blind deletion: ``prefix`` deletes the first k
items and ``uniform_random`` averages over all C(n, k) index sets.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from lab.deletion import DeletionPolicy
from lab.estimators import ESTIMATOR_FIELDS, EstimatorReport, estimator_batch
from lab.exceptions import (
    EnumerationMismatch,
    InvalidParameter,
    StateSpaceOverflow,
    UnsupportedPolicy,
)
from lab.harness import replicate

logger = logging.getLogger(__name__)

MAX_ATOMS = 6
MAX_N = 10
MAX_OUTCOMES = 10**7
OUTCOME_CHUNK = 2**16


@dataclass(frozen=True)
class DiscreteLaw:
    atoms: tuple

    def __post_init__(self):
        atoms = tuple((float(v), float(p)) for v, p in self.atoms)
        if not 1 <= len(atoms) <= MAX_ATOMS:
            raise InvalidParameter(f"a discrete law needs 1 to {MAX_ATOMS} atoms, got {len(atoms)}")
        if any(not p > 0 for _, p in atoms):
            raise InvalidParameter("atom probabilities must be positive")
        total = math.fsum(p for _, p in atoms)
        if abs(total - 1) > 1e-12:
            raise InvalidParameter(f"atom probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "atoms", atoms)

    @classmethod
    def from_distribution(cls, dist):
        atoms = dist.atoms()
        if atoms is None:
            raise InvalidParameter(f"{dist} is not a finite discrete law")
        return cls(tuple((v, p) for v, p in atoms if p > 0))

    @property
    def values(self):
        return np.array([v for v, _ in self.atoms])

    @property
    def probs(self):
        return np.array([p for _, p in self.atoms])

    @property
    def mean(self):
        return math.fsum(v * p for v, p in self.atoms)

    @property
    def variance(self):
        mu = self.mean
        return math.fsum(p * (v - mu) ** 2 for v, p in self.atoms)

    def to_json(self):
        return {"atoms": [[v, p] for v, p in self.atoms]}


def _outcomes(law, n, start, stop):
    shape = (len(law.atoms),) * n
    index = np.stack(np.unravel_index(np.arange(start, stop), shape), axis=1)
    return law.values[index], np.prod(law.probs[index], axis=1)


def _expectation_chunk(law, n, mask, start, stop):
    values, probs = _outcomes(law, n, start, stop)
    stats = estimator_batch(values, np.broadcast_to(mask, values.shape))
    return np.array([[math.fsum(probs * column) for column in stats.T]])


def _tail_chunk(law, n, mask, start, stop, eps):
    values, probs = _outcomes(law, n, start, stop)
    xtilde = np.where(mask, 0.0, values).sum(axis=1) / n
    return np.array([math.fsum(probs[np.abs(xtilde - law.mean) >= eps])])


def _check_instance(law, n, plan):
    if not isinstance(law, DiscreteLaw):
        law = DiscreteLaw.from_distribution(law)
    if not 1 <= n <= MAX_N:
        raise InvalidParameter(f"enumeration needs 1 <= n <= {MAX_N}, got {n}")
    if plan.policy is DeletionPolicy.EXTREMAL_ABS:
        raise UnsupportedPolicy(
            "the oracle enumerates index-blind deletion only; "
            f"use one of {DeletionPolicy.PREFIX.value}, {DeletionPolicy.UNIFORM_RANDOM.value}"
        )
    k = plan.k_of_n(n)
    size = len(law.atoms) ** n
    subsets = 1 if plan.policy is DeletionPolicy.PREFIX else math.comb(n, k)
    work = size * subsets
    if work > MAX_OUTCOMES:
        raise StateSpaceOverflow(
            f"{len(law.atoms)} atoms and n={n} give {size} outcomes over {subsets} index sets, "
            f"{work} in all, above {MAX_OUTCOMES}"
        )
    return law, size, k


def _masks(n, k, policy):
    if policy is DeletionPolicy.PREFIX:
        subsets = [range(k)]
    else:
        subsets = itertools.combinations(range(n), k)
    for subset in subsets:
        mask = np.zeros(n, dtype=bool)
        mask[list(subset)] = True
        yield mask


def _enumerate(task_fn, law, n, size, mask, workers):
    task = partial(task_fn, law, n, mask)
    return replicate(task, size, workers=workers, chunk_size=OUTCOME_CHUNK)


def enumerate_expectations(law, n, plan, workers=1):
    """EX-bar, ES^2, EX~, ES1~^2, ES2~^2 and ES3~^2 as an EstimatorReport of exact values."""
    law, size, k = _check_instance(law, n, plan)
    per_subset = []
    for mask in _masks(n, k, plan.policy):
        partials = _enumerate(_expectation_chunk, law, n, size, mask, workers)
        per_subset.append([math.fsum(column) for column in partials.T])
    reference = per_subset[0]
    for expectations in per_subset[1:]:
        agree = all(
            math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-12)
            for a, b in zip(expectations, reference)
        )
        if not agree:
            raise EnumerationMismatch(f"index sets disagree: {expectations} vs {reference}")
    averaged = [math.fsum(column) / len(per_subset) for column in zip(*per_subset)]
    logger.info(f"enumerated {size} outcomes over {len(per_subset)} index sets, n={n} k={k}")
    return EstimatorReport(n=n, k=k, **dict(zip(ESTIMATOR_FIELDS, averaged)))


def exact_tail_prob(law, n, plan, eps, workers=1):
    """P(|X~ - mean| >= eps) by enumeration."""
    if eps < 0:
        raise InvalidParameter(f"eps must be non-negative, got {eps}")
    law, size, k = _check_instance(law, n, plan)
    probabilities = [
        math.fsum(_enumerate(partial(_tail_chunk, eps=eps), law, n, size, mask, workers))
        for mask in _masks(n, k, plan.policy)
    ]
    return math.fsum(probabilities) / len(probabilities)
