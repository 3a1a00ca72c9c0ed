"""Seeded Monte Carlo experiments for the deleting-items limit theorems.

Replication ``r`` of an experiment at sample size ``n`` draws its values from
the stream ``(seed, "draws:<n>", r)``; path experiments use one stream per
path. Experiments that share a seed therefore share their draws, which makes
a deleting run and its ``Zero`` control a paired comparison.
"""
import enum
import logging
import math
from dataclasses import asdict, dataclass, field
from functools import partial

import numpy as np
from scipy import special

from lab.deletion import DeletionPolicy, k_of_n, select_indices
from lab.dist_catalog import DistributionSpec, as_array
from lab.estimators import (
    ESTIMATOR_FIELDS,
    estimator_batch,
    expected_by_estimator,
    expected_values,
)
from lab.exceptions import InvalidParameter, MeanRequired, NonzeroMean, VarianceRequired
from lab.harness import DEFAULT_CHUNK_SIZE, replicate
from lab.streams import derive_stream, open_unit

logger = logging.getLogger(__name__)

SLLN_NOTE = "finite-horizon proxy for almost-sure convergence"
SLLN_SELECTION_NOTE = (
    "the supremum is taken over geometric checkpoints, 20 per decade, "
    "because the deleted set is re-selected at each one"
)

CURVE_CSV_HEADER = ["n", "estimate", "std_error"]


class Diagnostic(str, enum.Enum):
    TAIL_PROB = "TailProb"
    BOUNDED_FUNCTIONAL = "BoundedFunctional"
    PATH_PROXY = "PathProxy"
    KS_DISTANCE = "KSDistance"
    LOG_SCALED = "LogScaled"
    STAT_MEAN = "StatMean"


@dataclass(frozen=True)
class ConvergenceCurve:
    n_grid: list
    estimate: list
    std_error: list
    diagnostic: Diagnostic
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not len(self.n_grid) == len(self.estimate) == len(self.std_error):
            raise InvalidParameter("curve vectors must share their length")
        if any(se < 0 for se in self.std_error):
            raise InvalidParameter("standard errors must be non-negative")

    def is_non_increasing(self, tolerance_se=2.0):
        """Each step may rise by at most ``tolerance_se`` combined standard errors."""
        pairs = zip(
            zip(self.estimate, self.std_error), zip(self.estimate[1:], self.std_error[1:])
        )
        return all(
            later <= earlier + tolerance_se * math.hypot(se_earlier, se_later)
            for (earlier, se_earlier), (later, se_later) in pairs
        )

    def rows(self):
        return [list(row) for row in zip(self.n_grid, self.estimate, self.std_error)]

    def to_json(self):
        data = asdict(self)
        data["diagnostic"] = self.diagnostic.value
        return data


@dataclass(frozen=True)
class CLTResult:
    n: int
    k: int
    reps: int
    ks: float
    stat_mean: float
    stat_var: float
    predicted_drift: float = None

    def to_json(self):
        return asdict(self)


def standard_normal_cdf(x):
    """Phi(x) through the Cephes ``ndtr`` erf/erfc rational approximations."""
    result = special.ndtr(x)
    if np.ndim(result) == 0:
        return float(result)
    return result


def ks_statistic(samples, cdf):
    x = np.sort(np.asarray(samples, dtype=float))
    size = len(x)
    if size == 0:
        raise InvalidParameter("KS distance needs at least one sample")
    try:
        expected = np.asarray(cdf(x), dtype=float)
    except (TypeError, ValueError):
        expected = None
    if expected is None or expected.shape != x.shape:
        expected = np.vectorize(cdf, otypes=[float])(x)
    ranks = np.arange(1, size + 1)
    return float(
        max(
            np.max(np.abs(ranks / size - expected)),
            np.max(np.abs((ranks - 1) / size - expected)),
        )
    )


def _retained(values, policy, k, rng):
    if k == 0:
        return values
    if policy is DeletionPolicy.PREFIX:
        return values[k:]
    selection_seed = int(rng.integers(0, 2**63))
    keep = np.ones(len(values), dtype=bool)
    keep[select_indices(policy, k, values, selection_seed)] = False
    return values[keep]


def _retained_sums(array, plan, n, seed, label, start, stop):
    k = plan.k_of_n(n)
    sums = np.empty(stop - start)
    for offset, rep in enumerate(range(start, stop)):
        rng = derive_stream(seed, label, rep)
        values = array.from_uniform(open_unit(rng, n))
        sums[offset] = _retained(values, plan.policy, k, rng).sum()
    return sums


def _estimator_rows(array, plan, n, seed, label, start, stop):
    k = plan.k_of_n(n)
    values = np.empty((stop - start, n))
    masks = np.zeros((stop - start, n), dtype=bool)
    for offset, rep in enumerate(range(start, stop)):
        rng = derive_stream(seed, label, rep)
        values[offset] = array.from_uniform(open_unit(rng, n))
        if k:
            selection_seed = int(rng.integers(0, 2**63))
            masks[offset, select_indices(plan.policy, k, values[offset], selection_seed)] = True
    return estimator_batch(values, masks)


def _path_windows(dist, plan, checkpoints, ks, grid_positions, eps, seed, start, stop):
    """For every path: is sup over [n, n_max] of |X~_m - mu| below eps, per grid point."""
    n_max = int(checkpoints[-1])
    prefix = plan.policy is DeletionPolicy.PREFIX
    hits = np.empty((stop - start, len(grid_positions)), dtype=bool)
    for offset, path in enumerate(range(start, stop)):
        rng = derive_stream(seed, "path", path)
        values = dist.from_uniform(open_unit(rng, n_max))
        if prefix:
            partial_sums = np.concatenate([[0.0], np.cumsum(values)])
            kept = partial_sums[checkpoints] - partial_sums[ks]
        else:
            kept = np.array(
                [_retained(values[:m], plan.policy, k, rng).sum() for m, k in zip(checkpoints, ks)]
            )
        deviation = np.abs(kept / checkpoints - dist.mean)
        suffix_sup = np.maximum.accumulate(deviation[::-1])[::-1]
        hits[offset] = suffix_sup[grid_positions] < eps
    return hits


def _log_scaled_paths(dist, plan, n_grid, ks, exponent, seed, start, stop):
    n_grid = np.asarray(n_grid)
    scale = np.sqrt(n_grid) * np.log(n_grid) ** (0.5 + exponent)
    rows = np.empty((stop - start, len(n_grid)))
    for offset, path in enumerate(range(start, stop)):
        rng = derive_stream(seed, "path", path)
        values = dist.from_uniform(open_unit(rng, int(n_grid[-1])))
        kept = [_retained(values[:n], plan.policy, k, rng).sum() for n, k in zip(n_grid, ks)]
        rows[offset] = np.abs(kept) / scale
    return rows


def _checked_source(source, need_variance=False):
    if isinstance(source, DistributionSpec):
        if not source.has_finite_mean:
            raise MeanRequired(f"{source} has no finite mean")
        if need_variance and not source.has_finite_variance:
            raise VarianceRequired(
                f"variance required: {source} has infinite variance; "
                "run it only as a negative control outside the CLT experiments"
            )
    return as_array(source)


def _target_mean(source, array, n):
    if isinstance(source, DistributionSpec):
        return source.mean
    return array.total_mean(n) / n


def _check_grid(n_grid, minimum=1):
    n_grid = [int(n) for n in n_grid]
    if not n_grid or min(n_grid) < minimum:
        raise InvalidParameter(f"n-grid must be non-empty with every n >= {minimum}")
    return n_grid


def _metadata(experiment, source, plan, seed, **extra):
    data = {
        "experiment": experiment,
        "source": source.to_json(),
        "plan": plan.to_json(),
        "master_seed": seed,
    }
    data.update(extra)
    return data


def _sums_for(array, plan, n, reps, seed, workers, chunk_size):
    task = partial(_retained_sums, array, plan, n, seed, f"draws:{n}")
    return replicate(task, reps, workers=workers, chunk_size=chunk_size)


def wlln_experiment(
    source, plan, eps, n_grid, reps, seed, workers=1, chunk_size=DEFAULT_CHUNK_SIZE
):
    """P(|X~ - target| >= eps) along the n-grid."""
    if not eps > 0:
        raise InvalidParameter(f"eps must be positive, got {eps}")
    if reps < 100:
        raise InvalidParameter(f"tail probabilities need at least 100 replications, got {reps}")
    array = _checked_source(source)
    n_grid = _check_grid(n_grid)
    estimates, errors = [], []
    for n in n_grid:
        sums = _sums_for(array, plan, n, reps, seed, workers, chunk_size)
        target = _target_mean(source, array, n)
        p = np.count_nonzero(np.abs(sums / n - target) >= eps) / reps
        estimates.append(p)
        errors.append(math.sqrt(p * (1 - p) / reps))
        logger.info(f"wlln n={n} k={plan.k_of_n(n)} tail={p:.6g}")
    return ConvergenceCurve(
        n_grid,
        estimates,
        errors,
        Diagnostic.TAIL_PROB,
        _metadata("wlln", source, plan, seed, eps=eps, reps=reps),
    )


def bounded_functional(
    source, plan, n_grid, reps, seed, workers=1, chunk_size=DEFAULT_CHUNK_SIZE
):
    """Monte Carlo mean of D^2 / (1 + D^2), D = X~ - (1/n) sum E xi_i."""
    if reps < 2:
        raise InvalidParameter(f"need at least 2 replications, got {reps}")
    array = _checked_source(source)
    n_grid = _check_grid(n_grid)
    estimates, errors = [], []
    for n in n_grid:
        sums = _sums_for(array, plan, n, reps, seed, workers, chunk_size)
        gap = sums / n - _target_mean(source, array, n)
        functional = gap**2 / (1 + gap**2)
        estimates.append(float(functional.mean()))
        errors.append(float(functional.std(ddof=1) / math.sqrt(reps)))
        logger.info(f"bounded functional n={n} value={estimates[-1]:.6g}")
    return ConvergenceCurve(
        n_grid,
        estimates,
        errors,
        Diagnostic.BOUNDED_FUNCTIONAL,
        _metadata("bounded_functional", source, plan, seed, reps=reps),
    )


def default_path_grid(n_start, n_max):
    grid = [n_start]
    decade = 10 ** math.ceil(math.log10(n_start))
    while decade <= n_max:
        if decade > n_start:
            grid.append(decade)
        decade *= 10
    if grid[-1] != n_max:
        grid.append(n_max)
    return grid


def _checkpoints(plan, n_start, n_max, n_grid):
    if plan.policy is DeletionPolicy.PREFIX:
        points = np.arange(n_start, n_max + 1)
    else:
        # selection is re-run at every checkpoint, so thin the window geometrically
        count = int(20 * math.log10(n_max / n_start)) + 2
        points = np.unique(np.geomspace(n_start, n_max, count).round().astype(np.int64))
        points = np.union1d(points, n_grid)
    return points.astype(np.int64)


def slln_proxy(
    dist,
    plan,
    eps,
    n_start,
    n_max,
    paths,
    seed,
    n_grid=None,
    workers=1,
    chunk_size=DEFAULT_CHUNK_SIZE,
):
    """Fraction of paths whose deleting mean stays within eps of mu on [n, n_max]."""
    if not isinstance(dist, DistributionSpec):
        raise InvalidParameter("the path proxy runs on an i.i.d. law")
    if not n_start < n_max:
        raise InvalidParameter(f"n_start must be below n_max, got {n_start} and {n_max}")
    if not eps > 0:
        raise InvalidParameter(f"eps must be positive, got {eps}")
    _checked_source(dist)
    n_grid = _check_grid(n_grid or default_path_grid(n_start, n_max))
    if min(n_grid) < n_start or max(n_grid) > n_max:
        raise InvalidParameter("path grid must lie inside [n_start, n_max]")
    checkpoints = _checkpoints(plan, n_start, n_max, n_grid)
    extra = {} if plan.policy is DeletionPolicy.PREFIX else {"checkpoints": SLLN_SELECTION_NOTE}
    ks = np.array([k_of_n(plan.schedule, int(m)) for m in checkpoints], dtype=np.int64)
    grid_positions = np.searchsorted(checkpoints, n_grid)
    task = partial(_path_windows, dist, plan, checkpoints, ks, grid_positions, eps, seed)
    hits = replicate(task, paths, workers=workers, chunk_size=chunk_size)
    estimates = [float(p) for p in hits.mean(axis=0)]
    errors = [math.sqrt(p * (1 - p) / paths) for p in estimates]
    logger.info(f"slln proxy fractions {estimates}")
    return ConvergenceCurve(
        n_grid,
        estimates,
        errors,
        Diagnostic.PATH_PROXY,
        _metadata(
            "slln",
            dist,
            plan,
            seed,
            eps=eps,
            n_start=n_start,
            n_max=n_max,
            paths=paths,
            note=SLLN_NOTE,
            checkpoint_count=len(checkpoints),
            **extra,
        ),
    )


def log_scaling_experiment(
    dist, plan, eps_exponent, n_grid, paths, seed, workers=1, chunk_size=DEFAULT_CHUNK_SIZE
):
    """Mean of |S_{J minus J_k*}| / (sqrt(n) (log n)^(1/2 + eps)) over paths."""
    if not isinstance(dist, DistributionSpec):
        raise InvalidParameter("the log-scaling experiment runs on an i.i.d. law")
    _checked_source(dist, need_variance=True)
    if dist.mean != 0:
        raise NonzeroMean(f"zero-mean law required, {dist} has mean {dist.mean}")
    if not eps_exponent > 0:
        raise InvalidParameter(f"exponent must be positive, got {eps_exponent}")
    if paths < 2:
        raise InvalidParameter(f"need at least 2 paths, got {paths}")
    n_grid = sorted(_check_grid(n_grid, minimum=2))
    ks = [k_of_n(plan.schedule, n) for n in n_grid]
    task = partial(_log_scaled_paths, dist, plan, n_grid, ks, eps_exponent, seed)
    rows = replicate(task, paths, workers=workers, chunk_size=chunk_size)
    estimates = [float(v) for v in rows.mean(axis=0)]
    errors = [float(v) for v in rows.std(axis=0, ddof=1) / math.sqrt(paths)]
    logger.info(f"log scaling means {estimates}")
    return ConvergenceCurve(
        n_grid,
        estimates,
        errors,
        Diagnostic.LOG_SCALED,
        _metadata("log_scaling", dist, plan, seed, eps_exponent=eps_exponent, paths=paths),
    )


def _predicted_drift(array, plan, n, b_n):
    k = plan.k_of_n(n)
    if k == 0:
        return 0.0
    if plan.policy is DeletionPolicy.PREFIX:
        return -math.fsum(array.means(n)[:k]) / b_n
    if plan.policy is DeletionPolicy.UNIFORM_RANDOM:
        return -(k / n) * array.total_mean(n) / b_n
    return None


def clt_experiment(
    source, plan, n, reps, seed, workers=1, chunk_size=DEFAULT_CHUNK_SIZE
):
    """KS distance of (S_{J minus J_k*} - sum mu_i) / B_n to N(0, 1), with its mean and variance."""
    if reps < 1000:
        raise InvalidParameter(f"KS distances need at least 1000 replications, got {reps}")
    array = _checked_source(source, need_variance=True)
    b_n = math.sqrt(array.b_n2(n))
    sums = _sums_for(array, plan, n, reps, seed, workers, chunk_size)
    stats = (sums - array.total_mean(n)) / b_n
    result = CLTResult(
        n=n,
        k=plan.k_of_n(n),
        reps=reps,
        ks=ks_statistic(stats, standard_normal_cdf),
        stat_mean=float(stats.mean()),
        stat_var=float(stats.var(ddof=1)),
        predicted_drift=_predicted_drift(array, plan, n, b_n),
    )
    logger.info(f"clt n={n} k={result.k} ks={result.ks:.4f} mean={result.stat_mean:.4f}")
    return result


# sd of the Kolmogorov distribution; scales KS noise as 0.26 / sqrt(reps)
KOLMOGOROV_SD = 0.2603


def clt_curve(source, plan, n_grid, reps, seed, workers=1, chunk_size=DEFAULT_CHUNK_SIZE):
    results = [
        clt_experiment(source, plan, n, reps, seed, workers=workers, chunk_size=chunk_size)
        for n in _check_grid(n_grid)
    ]
    n_grid = [r.n for r in results]
    metadata = _metadata("clt", source, plan, seed, reps=reps)
    ks_curve = ConvergenceCurve(
        n_grid,
        [r.ks for r in results],
        [KOLMOGOROV_SD / math.sqrt(reps)] * len(results),
        Diagnostic.KS_DISTANCE,
        metadata,
    )
    mean_curve = ConvergenceCurve(
        n_grid,
        [r.stat_mean for r in results],
        [math.sqrt(r.stat_var / reps) for r in results],
        Diagnostic.STAT_MEAN,
        metadata,
    )
    return results, ks_curve, mean_curve


def interval_probability(
    source, plan, n, a, b, reps, seed, workers=1, chunk_size=DEFAULT_CHUNK_SIZE
):
    """P(a <= (S_{J minus J_k*} - sum mu_i) / B_n <= b) next to Phi(b) - Phi(a)."""
    if not a < b:
        raise InvalidParameter(f"interval needs a < b, got [{a}, {b}]")
    array = _checked_source(source, need_variance=True)
    b_n = math.sqrt(array.b_n2(n))
    sums = _sums_for(array, plan, n, reps, seed, workers, chunk_size)
    stats = (sums - array.total_mean(n)) / b_n
    p = np.count_nonzero((stats >= a) & (stats <= b)) / reps
    limit = standard_normal_cdf(b) - standard_normal_cdf(a)
    return p, math.sqrt(p * (1 - p) / reps), limit


@dataclass(frozen=True)
class EstimatorCheck:
    estimator: str
    expected: float
    mc_mean: float
    mc_std_error: float

    def within(self, standard_errors):
        return abs(self.mc_mean - self.expected) <= standard_errors * self.mc_std_error


def bias_experiment(
    dist, plan, n, reps, seed, workers=1, chunk_size=DEFAULT_CHUNK_SIZE
):
    """Monte Carlo means of the six statistics beside their exact expectations."""
    if not isinstance(dist, DistributionSpec):
        raise InvalidParameter("the bias experiment runs on an i.i.d. law")
    _checked_source(dist, need_variance=True)
    if reps < 2:
        raise InvalidParameter(f"need at least 2 replications, got {reps}")
    k = plan.k_of_n(n)
    report = expected_values(n, k, dist.mean, dist.variance)
    expected = expected_by_estimator(report)
    task = partial(_estimator_rows, as_array(dist), plan, n, seed, f"frames:{n}")
    rows = replicate(task, reps, workers=workers, chunk_size=chunk_size)
    means = rows.mean(axis=0)
    errors = rows.std(axis=0, ddof=1) / math.sqrt(reps)
    checks = [
        EstimatorCheck(name, expected[name], float(means[i]), float(errors[i]))
        for i, name in enumerate(ESTIMATOR_FIELDS)
    ]
    return report, checks
