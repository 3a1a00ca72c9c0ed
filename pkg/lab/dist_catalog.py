"""Catalog of sampling laws with exact moment formulas.

Every law samples by inverse-CDF from one open-interval uniform per variate,
so a stream of uniforms maps to values one to one. Moments are closed form
where the family has one and fall back to adaptive quadrature otherwise.
"""
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from lab.exceptions import (
    DivergentMoment,
    InvalidParameter,
    MeanRequired,
    VarianceRequired,
)
from lab.streams import derive_stream, open_unit

logger = logging.getLogger(__name__)

QUAD_TOL = 1e-10


class SupportKind(str, enum.Enum):
    DISCRETE_FINITE = "discrete-finite"
    CONTINUOUS = "continuous"


class DistributionSpec:
    family = None
    support_kind = SupportKind.CONTINUOUS

    def __post_init__(self):
        self.clean()

    def clean(self):
        pass

    @property
    def mean(self):
        raise NotImplementedError

    @property
    def variance(self):
        raise NotImplementedError

    @property
    def has_finite_mean(self):
        return math.isfinite(self.mean)

    @property
    def has_finite_variance(self):
        return math.isfinite(self.variance)

    def from_uniform(self, u):
        raise NotImplementedError

    def atoms(self):
        return None

    def support(self):
        return (-math.inf, math.inf)

    def density(self, x):
        raise NotImplementedError

    def moment_finite(self, order):
        return True

    def truncated_closed_form(self, t):
        return None

    def abs_moment_closed_form(self, order):
        return None

    def to_json(self):
        raise NotImplementedError

    def __str__(self):
        params = ", ".join(
            f"{key}={value}" for key, value in self.to_json().items() if key != "family"
        )
        return f"{self.family}({params})"


@dataclass(frozen=True)
class Bernoulli(DistributionSpec):
    p: float

    family = "bernoulli"
    support_kind = SupportKind.DISCRETE_FINITE

    def clean(self):
        if not 0 < self.p < 1:
            raise InvalidParameter(f"bernoulli p must lie in (0, 1), got {self.p}")

    @property
    def mean(self):
        return self.p

    @property
    def variance(self):
        return self.p * (1 - self.p)

    def from_uniform(self, u):
        return (np.asarray(u) < self.p).astype(float)

    def atoms(self):
        return [(0.0, 1 - self.p), (1.0, self.p)]

    def to_json(self):
        return {"family": self.family, "p": self.p}


@dataclass(frozen=True)
class Rademacher(DistributionSpec):
    family = "rademacher"
    support_kind = SupportKind.DISCRETE_FINITE

    @property
    def mean(self):
        return 0.0

    @property
    def variance(self):
        return 1.0

    def from_uniform(self, u):
        return np.where(np.asarray(u) < 0.5, -1.0, 1.0)

    def atoms(self):
        return [(-1.0, 0.5), (1.0, 0.5)]

    def to_json(self):
        return {"family": self.family}


@dataclass(frozen=True)
class Uniform(DistributionSpec):
    a: float
    b: float

    family = "uniform"

    def clean(self):
        if not self.a < self.b:
            raise InvalidParameter(f"uniform needs a < b, got a={self.a}, b={self.b}")

    @property
    def half_width(self):
        return (self.b - self.a) / 2

    @property
    def mean(self):
        return (self.a + self.b) / 2

    @property
    def variance(self):
        return (self.b - self.a) ** 2 / 12

    def from_uniform(self, u):
        return self.a + (self.b - self.a) * np.asarray(u)

    def support(self):
        return (self.a, self.b)

    def density(self, x):
        return 1 / (self.b - self.a)

    def truncated_closed_form(self, t):
        h = self.half_width
        if t >= h:
            return 0.0
        return (h**3 - t**3) / (3 * h)

    def abs_moment_closed_form(self, order):
        return self.half_width**order / (order + 1)

    def to_json(self):
        return {"family": self.family, "a": self.a, "b": self.b}


@dataclass(frozen=True)
class Normal(DistributionSpec):
    mu: float
    sigma2: float

    family = "normal"

    def clean(self):
        if not self.sigma2 > 0:
            raise InvalidParameter(f"normal sigma2 must be positive, got {self.sigma2}")

    @property
    def sigma(self):
        return math.sqrt(self.sigma2)

    @property
    def mean(self):
        return self.mu

    @property
    def variance(self):
        return self.sigma2

    def from_uniform(self, u):
        return self.mu + self.sigma * special.ndtri(np.asarray(u))

    def density(self, x):
        z = (x - self.mu) / self.sigma
        return math.exp(-0.5 * z * z) / (self.sigma * math.sqrt(2 * math.pi))

    def truncated_closed_form(self, t):
        # E[Z^2 1{|Z|>z}] = 2 (z phi(z) + 1 - Phi(z))
        z = t / self.sigma
        phi = math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
        return self.sigma2 * 2 * (z * phi + float(special.ndtr(-z)))

    def abs_moment_closed_form(self, order):
        return (
            self.sigma**order
            * 2 ** (order / 2)
            * float(special.gamma((order + 1) / 2))
            / math.sqrt(math.pi)
        )

    def to_json(self):
        return {"family": self.family, "mu": self.mu, "sigma2": self.sigma2}


@dataclass(frozen=True)
class Exponential(DistributionSpec):
    lam: float

    family = "exponential"

    def clean(self):
        if not self.lam > 0:
            raise InvalidParameter(f"exponential lam must be positive, got {self.lam}")

    @property
    def mean(self):
        return 1 / self.lam

    @property
    def variance(self):
        return 1 / self.lam**2

    def from_uniform(self, u):
        return -np.log(np.asarray(u)) / self.lam

    def support(self):
        return (0.0, math.inf)

    def density(self, x):
        return self.lam * math.exp(-self.lam * x)

    def to_json(self):
        return {"family": self.family, "lam": self.lam}


@dataclass(frozen=True)
class Pareto(DistributionSpec):
    """Pareto law with scale 1; a negative control for the CLT when alpha <= 2."""

    alpha: float

    family = "pareto"

    def clean(self):
        if not self.alpha > 0:
            raise InvalidParameter(f"pareto alpha must be positive, got {self.alpha}")

    @property
    def mean(self):
        if self.alpha <= 1:
            return math.inf
        return self.alpha / (self.alpha - 1)

    @property
    def variance(self):
        if self.alpha <= 2:
            return math.inf
        return self.alpha / ((self.alpha - 1) ** 2 * (self.alpha - 2))

    def from_uniform(self, u):
        return np.asarray(u) ** (-1 / self.alpha)

    def support(self):
        return (1.0, math.inf)

    def density(self, x):
        return self.alpha * x ** (-self.alpha - 1)

    def moment_finite(self, order):
        return order < self.alpha

    def to_json(self):
        return {"family": self.family, "alpha": self.alpha}


@dataclass(frozen=True)
class Shifted(DistributionSpec):
    """``offset + scale * base``; ``scale=0`` gives a point mass at ``offset``."""

    base: DistributionSpec
    offset: float = 0.0
    scale: float = 1.0

    family = "shifted"

    def clean(self):
        if not isinstance(self.base, DistributionSpec):
            raise InvalidParameter("shifted law needs a base distribution")
        if not math.isfinite(self.offset) or not math.isfinite(self.scale):
            raise InvalidParameter("shifted offset and scale must be finite")

    @property
    def support_kind(self):
        if self.scale == 0:
            return SupportKind.DISCRETE_FINITE
        return self.base.support_kind

    @property
    def mean(self):
        if self.scale == 0:
            return self.offset
        return self.offset + self.scale * self.base.mean

    @property
    def variance(self):
        if self.scale == 0:
            return 0.0
        return self.scale**2 * self.base.variance

    def from_uniform(self, u):
        if self.scale == 0:
            return np.full(np.shape(u), float(self.offset))
        return self.offset + self.scale * self.base.from_uniform(u)

    def atoms(self):
        if self.scale == 0:
            return [(float(self.offset), 1.0)]
        base_atoms = self.base.atoms()
        if base_atoms is None:
            return None
        return [(self.offset + self.scale * value, prob) for value, prob in base_atoms]

    def support(self):
        low, high = self.base.support()
        ends = sorted([self.offset + self.scale * low, self.offset + self.scale * high])
        return (ends[0], ends[1])

    def density(self, x):
        return self.base.density((x - self.offset) / self.scale) / abs(self.scale)

    def moment_finite(self, order):
        return self.scale == 0 or self.base.moment_finite(order)

    def truncated_closed_form(self, t):
        if self.scale == 0:
            return 0.0
        return self.scale**2 * truncated_second_moment(self.base, t / abs(self.scale))

    def abs_moment_closed_form(self, order):
        if self.scale == 0:
            return 0.0
        return abs(self.scale) ** order * abs_central_moment(self.base, order)

    def to_json(self):
        return {
            "family": self.family,
            "base": self.base.to_json(),
            "offset": self.offset,
            "scale": self.scale,
        }


def point_mass(value):
    return Shifted(Rademacher(), offset=value, scale=0.0)


def sample(dist, n, seed, require_mean=False):
    """Draw ``n`` i.i.d. values; bit-identical for a fixed ``(dist, n, seed)``."""
    if n < 1:
        raise InvalidParameter(f"sample size must be at least 1, got {n}")
    if require_mean and not dist.has_finite_mean:
        raise MeanRequired(f"{dist} has no finite mean")
    rng = derive_stream(seed, "sample")
    return dist.from_uniform(open_unit(rng, n))


def _quad(func, low, high):
    value, _ = integrate.quad(func, low, high, epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=200)
    return value


def quadrature_truncated_moment(dist, t):
    mu = dist.mean
    low, high = dist.support()
    weight = lambda x: (x - mu) ** 2 * dist.density(x)
    total = 0.0
    if mu - t > low:
        total += _quad(weight, low, mu - t)
    if mu + t < high:
        total += _quad(weight, mu + t, high)
    return total


def quadrature_abs_moment(dist, order):
    mu = dist.mean
    low, high = dist.support()
    weight = lambda x: abs(x - mu) ** order * dist.density(x)
    return _quad(weight, low, mu) + _quad(weight, mu, high)


def truncated_second_moment(dist, t):
    """E[(xi - mu)^2 1{|xi - mu| > t}] with a strict inequality at atoms."""
    if t < 0:
        raise InvalidParameter(f"truncation level must be non-negative, got {t}")
    if not dist.has_finite_variance:
        raise VarianceRequired(f"variance required: {dist} has infinite variance")
    atoms = dist.atoms()
    if atoms is not None:
        mu = dist.mean
        return math.fsum(p * (v - mu) ** 2 for v, p in atoms if abs(v - mu) > t)
    closed = dist.truncated_closed_form(t)
    if closed is not None:
        return closed
    return quadrature_truncated_moment(dist, t)


def abs_central_moment(dist, order):
    """E|xi - mu|^order for order > 2."""
    if not order > 2:
        raise InvalidParameter(f"moment order must exceed 2, got {order}")
    if not dist.has_finite_mean or not dist.moment_finite(order):
        raise DivergentMoment(f"E|xi - mu|^{order} diverges for the {dist.family} law {dist}")
    atoms = dist.atoms()
    if atoms is not None:
        mu = dist.mean
        return math.fsum(p * abs(v - mu) ** order for v, p in atoms)
    closed = dist.abs_moment_closed_form(order)
    if closed is not None:
        return closed
    return quadrature_abs_moment(dist, order)


class TriangularArraySpec:
    """Independent, possibly non-identical rows ``i = 1..n``."""

    kind = None

    def __post_init__(self):
        self.clean()

    def clean(self):
        pass

    @property
    def description(self):
        raise NotImplementedError

    def row_law(self, i):
        raise NotImplementedError

    def means(self, n):
        return np.array([self.row_law(i).mean for i in range(1, n + 1)])

    def variances(self, n):
        return np.array([self.row_law(i).variance for i in range(1, n + 1)])

    def row_groups(self, n):
        return [(self.row_law(i), 1) for i in range(1, n + 1)]

    def from_uniform(self, u):
        raise NotImplementedError

    def total_mean(self, n):
        return math.fsum(self.means(n))

    def b_n2(self, n):
        if n < 1:
            raise InvalidParameter(f"n must be at least 1, got {n}")
        total = math.fsum(self.variances(n))
        if not math.isfinite(total):
            raise VarianceRequired(
                f"variance required: rows of {self.description} are not square-integrable"
            )
        if not total > 0:
            raise InvalidParameter(f"B_n^2 must be positive for {self.description}")
        return total

    def to_json(self):
        raise NotImplementedError

    def __str__(self):
        return self.description


def _check_square_integrable(law):
    if not isinstance(law, DistributionSpec):
        raise InvalidParameter("array rows must be distributions")
    if not law.has_finite_variance:
        raise VarianceRequired(f"variance required: array row {law} has infinite variance")
    if not law.variance > 0:
        raise InvalidParameter(f"array row {law} must have positive variance")


@dataclass(frozen=True)
class IIDArray(TriangularArraySpec):
    law: DistributionSpec

    kind = "iid"

    def clean(self):
        if not isinstance(self.law, DistributionSpec):
            raise InvalidParameter("iid array needs a distribution")

    @property
    def description(self):
        return f"iid {self.law}"

    def row_law(self, i):
        return self.law

    def means(self, n):
        return np.full(n, float(self.law.mean))

    def variances(self, n):
        return np.full(n, float(self.law.variance))

    def row_groups(self, n):
        return [(self.law, n)]

    def total_mean(self, n):
        return n * self.law.mean

    def b_n2(self, n):
        if n < 1:
            raise InvalidParameter(f"n must be at least 1, got {n}")
        if not self.law.has_finite_variance:
            raise VarianceRequired(f"variance required: {self.law} has infinite variance")
        if not self.law.variance > 0:
            raise InvalidParameter(f"B_n^2 must be positive for {self.description}")
        return n * self.law.variance

    def from_uniform(self, u):
        return self.law.from_uniform(u)

    def to_json(self):
        return {"kind": self.kind, "law": self.law.to_json()}


@dataclass(frozen=True)
class ScaledArray(TriangularArraySpec):
    """Row ``i`` is ``i**(gamma/2) * base`` so that sigma_i^2 = i**gamma * sigma^2."""

    base: DistributionSpec
    gamma: float = 1.0

    kind = "scaled"

    def clean(self):
        _check_square_integrable(self.base)
        if not math.isfinite(self.gamma):
            raise InvalidParameter("scaled array gamma must be finite")

    @property
    def description(self):
        return f"scaled {self.base} with gamma={self.gamma}"

    def scales(self, n):
        return np.arange(1, n + 1, dtype=float) ** (self.gamma / 2)

    def row_law(self, i):
        return Shifted(self.base, offset=0.0, scale=float(i) ** (self.gamma / 2))

    def means(self, n):
        return self.scales(n) * self.base.mean

    def variances(self, n):
        return self.scales(n) ** 2 * self.base.variance

    def from_uniform(self, u):
        return self.scales(len(u)) * self.base.from_uniform(u)

    def to_json(self):
        return {"kind": self.kind, "base": self.base.to_json(), "gamma": self.gamma}


@dataclass(frozen=True)
class CycleArray(TriangularArraySpec):
    """Rows cycle through ``laws``: row i follows ``laws[(i - 1) % len(laws)]``."""

    laws: tuple

    kind = "cycle"

    def clean(self):
        if not self.laws:
            raise InvalidParameter("cycle array needs at least one law")
        for law in self.laws:
            _check_square_integrable(law)

    @property
    def description(self):
        return "cycle of " + ", ".join(str(law) for law in self.laws)

    def row_law(self, i):
        return self.laws[(i - 1) % len(self.laws)]

    def means(self, n):
        pattern = np.array([law.mean for law in self.laws], dtype=float)
        return np.resize(pattern, n)

    def variances(self, n):
        pattern = np.array([law.variance for law in self.laws], dtype=float)
        return np.resize(pattern, n)

    def row_groups(self, n):
        period = len(self.laws)
        groups = []
        for offset, law in enumerate(self.laws):
            count = len(range(offset, n, period))
            if count:
                groups.append((law, count))
        return groups

    def from_uniform(self, u):
        u = np.asarray(u)
        values = np.empty(len(u))
        period = len(self.laws)
        for offset, law in enumerate(self.laws):
            values[offset::period] = law.from_uniform(u[offset::period])
        return values

    def to_json(self):
        return {"kind": self.kind, "laws": [law.to_json() for law in self.laws]}


def as_array(source):
    if isinstance(source, TriangularArraySpec):
        return source
    if isinstance(source, DistributionSpec):
        return IIDArray(source)
    raise InvalidParameter(f"expected a distribution or an array, got {type(source).__name__}")
