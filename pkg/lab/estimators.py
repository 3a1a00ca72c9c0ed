"""Deleting-items sums, the six sample statistics and their exact expectations.

All divisors are n, also for the statistics built on the retained items only,
so the deleting statistics are biased and their bias is known in closed form.
"""
import enum
import logging
import math
from collections import namedtuple
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from lab.exceptions import InvalidParameter

logger = logging.getLogger(__name__)

ESTIMATOR_FIELDS = ("xbar", "s2", "xtilde", "s1t", "s2t", "s3t")

IdentityResiduals = namedtuple("IdentityResiduals", ["s1t", "s2t", "s3t"])


class S3Ordering(str, enum.Enum):
    BELOW_OR_EQUAL = "BelowOrEqual"
    ABOVE = "Above"
    MU_ZERO_BELOW = "MuZeroBelow"


@dataclass(frozen=True, eq=False)
class SampleFrame:
    values: np.ndarray
    deleted_mask: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        mask = np.asarray(self.deleted_mask, dtype=bool)
        if values.ndim != 1 or len(values) < 1:
            raise InvalidParameter("a sample frame needs a non-empty vector of values")
        if mask.shape != values.shape:
            raise InvalidParameter(
                f"deleted mask has length {len(mask)}, values have length {len(values)}"
            )
        if mask.all():
            raise InvalidParameter("deletion must leave at least one item")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "deleted_mask", mask)

    @classmethod
    def from_indices(cls, values, deleted):
        mask = np.zeros(len(values), dtype=bool)
        mask[np.asarray(deleted, dtype=np.int64)] = True
        return cls(values, mask)

    @classmethod
    def from_plan(cls, values, plan, seed=0):
        return cls(values, plan.deleted_mask(np.asarray(values, dtype=float), seed))

    @property
    def n(self):
        return len(self.values)

    @property
    def k(self):
        return int(self.deleted_mask.sum())

    @property
    def retained(self):
        return self.values[~self.deleted_mask]

    @property
    def deleted(self):
        return self.values[self.deleted_mask]


@dataclass(frozen=True)
class EstimatorReport:
    xbar: float
    s2: float
    xtilde: float
    s1t: float
    s2t: float
    s3t: float
    n: int
    k: int

    def to_json(self):
        return asdict(self)


@dataclass(frozen=True)
class BiasReport:
    n: int
    k: int
    mu: float
    sigma2: float
    e_xtilde: float
    e_s1t: float
    e_s2t: float
    e_s3t: float
    e_s2: float
    s3_class: S3Ordering
    threshold: float = None
    linear_k_e_s3t: float = None

    def to_json(self):
        data = asdict(self)
        data["s3_class"] = self.s3_class.value
        return data


def deleted_sum(frame):
    """S over the retained items, J minus J_k*."""
    return math.fsum(frame.retained)


def estimator_report(frame):
    n = frame.n
    values = frame.values
    retained = frame.retained
    xbar = math.fsum(values) / n
    xtilde = deleted_sum(frame) / n
    return EstimatorReport(
        xbar=xbar,
        s2=math.fsum((values - xbar) ** 2) / n,
        xtilde=xtilde,
        s1t=math.fsum((values - xtilde) ** 2) / n,
        s2t=math.fsum((retained - xbar) ** 2) / n,
        s3t=math.fsum((retained - xtilde) ** 2) / n,
        n=n,
        k=frame.k,
    )


def expansion_identities(frame):
    """Residuals between the defining sums and their expanded forms."""
    report = estimator_report(frame)
    n, k = report.n, report.k
    squares = math.fsum(frame.values**2) / n
    retained_squares = math.fsum(frame.retained**2) / n
    xbar, xtilde = report.xbar, report.xtilde
    expanded_s1t = squares - 2 * xtilde * xbar + xtilde**2
    expanded_s2t = retained_squares - 2 * xtilde * xbar + (1 - k / n) * xbar**2
    expanded_s3t = retained_squares - (1 + k / n) * xtilde**2
    return IdentityResiduals(
        s1t=report.s1t - expanded_s1t,
        s2t=report.s2t - expanded_s2t,
        s3t=report.s3t - expanded_s3t,
    )


def partition_residual(frame):
    """X-bar minus (X-tilde + deleted sum / n); zero up to rounding."""
    report = estimator_report(frame)
    return report.xbar - (report.xtilde + math.fsum(frame.deleted) / frame.n)


def estimator_batch(values, deleted_mask):
    """The six statistics for every row of a (reps, n) batch, columns in ESTIMATOR_FIELDS order."""
    values = np.asarray(values, dtype=float)
    keep = ~np.asarray(deleted_mask, dtype=bool)
    n = values.shape[1]
    xbar = values.sum(axis=1) / n
    xtilde = np.where(keep, values, 0.0).sum(axis=1) / n
    around_xbar = (values - xbar[:, None]) ** 2
    around_xtilde = (values - xtilde[:, None]) ** 2
    return np.column_stack(
        [
            xbar,
            around_xbar.sum(axis=1) / n,
            xtilde,
            around_xtilde.sum(axis=1) / n,
            np.where(keep, around_xbar, 0.0).sum(axis=1) / n,
            np.where(keep, around_xtilde, 0.0).sum(axis=1) / n,
        ]
    )


def s3_ordering(n, k, mu, sigma2):
    """Where E S3~^2 falls against E S^2.

    E S3~^2 - E S^2 = (k/n^3) [k(n-k) mu^2 - sigma^2 (n^2 - k)], so the sign
    is decided exactly in rational arithmetic; equality counts as below.
    """
    if mu == 0:
        return S3Ordering.MU_ZERO_BELOW
    lhs = k * (n - k) * Fraction(mu) ** 2
    rhs = Fraction(sigma2) * (n * n - k)
    if lhs <= rhs:
        return S3Ordering.BELOW_OR_EQUAL
    return S3Ordering.ABOVE


def k1_threshold(n, mu, sigma2):
    """n - (n^2 - 1) sigma^2 / mu^2; agrees with ``s3_ordering`` for k = 1."""
    if mu == 0:
        return None
    return n - (n * n - 1) * sigma2 / mu**2


def expected_values(n, k, mu, sigma2):
    if n < 2:
        raise InvalidParameter(f"n must be at least 2, got {n}")
    if not 0 <= k < n:
        raise InvalidParameter(f"k must satisfy 0 <= k < n, got k={k}, n={n}")
    if sigma2 < 0:
        raise InvalidParameter(f"sigma2 must be non-negative, got {sigma2}")
    f = k / n
    mu2 = mu * mu
    return BiasReport(
        n=n,
        k=k,
        mu=mu,
        sigma2=sigma2,
        e_xtilde=(1 - f) * mu,
        e_s1t=(1 - 1 / n + k / n**2) * sigma2 + f * f * mu2,
        e_s2t=(1 - 1 / n - f + k / n**2) * sigma2,
        e_s3t=(1 - 1 / n - f + k * k / n**3) * sigma2 + (1 - f) * (k * k / n**2) * mu2,
        e_s2=(1 - 1 / n) * sigma2,
        s3_class=s3_ordering(n, k, mu, sigma2),
        threshold=k1_threshold(n, mu, sigma2),
        linear_k_e_s3t=(1 - 1 / n - f + k / n**3) * sigma2 + (1 - f) * (k / n**2) * mu2,
    )


def expected_by_estimator(report):
    """Map an expectation report onto ESTIMATOR_FIELDS names."""
    return {
        "xbar": report.mu,
        "s2": report.e_s2,
        "xtilde": report.e_xtilde,
        "s1t": report.e_s1t,
        "s2t": report.e_s2t,
        "s3t": report.e_s3t,
    }
