"""Numerical Lindeberg, Lyapunov and Feller quantities of a triangular array.

Asymptotic order hypotheses such as max sigma_i^2 / B_n^2 = O(1/n) are
reported as normalized sequences over an n-grid; the only verdict given is
boundedness over the evaluated grid, labelled as finite-grid evidence.
"""
import logging
import math
from collections import namedtuple
from dataclasses import asdict, dataclass

import numpy as np

from lab.dist_catalog import abs_central_moment, as_array, truncated_second_moment
from lab.exceptions import DivergentMoment, InvalidParameter

logger = logging.getLogger(__name__)

CSV_HEADER = ["n", "lindeberg", "lyapunov", "feller_max", "rate_sigma", "rate_mu", "b_n2"]

FINITE_GRID_LABEL = "finite-grid evidence"

GridVerdict = namedtuple("GridVerdict", ["label", "bounded", "sup"])


@dataclass(frozen=True)
class ConditionReport:
    n: int
    lindeberg: float
    lyapunov: float
    feller_max: float
    rate_sigma: float
    rate_mu: float
    b_n2: float
    lindeberg_grid: tuple = ()

    def to_json(self):
        data = asdict(self)
        data["lindeberg_grid"] = [list(pair) for pair in self.lindeberg_grid]
        return data

    def as_row(self):
        return [getattr(self, column) for column in CSV_HEADER] + [
            value for _, value in self.lindeberg_grid
        ]


def csv_header(eps_grid=()):
    """The fixed columns, then one Lindeberg column per grid eps."""
    return CSV_HEADER + [f"lindeberg@{eps:g}" for eps in eps_grid]


def lindeberg_sum(array, n, eps):
    if not eps > 0:
        raise InvalidParameter(f"eps must be positive, got {eps}")
    array = as_array(array)
    b_n2 = array.b_n2(n)
    t = eps * math.sqrt(b_n2)
    total = math.fsum(
        count * truncated_second_moment(law, t) for law, count in array.row_groups(n)
    )
    return total / b_n2


def lyapunov_sum(array, n, delta):
    if not delta > 0:
        raise InvalidParameter(f"delta must be positive, got {delta}")
    array = as_array(array)
    b_n2 = array.b_n2(n)
    order = 2 + delta
    total = math.fsum(
        count * abs_central_moment(law, order) for law, count in array.row_groups(n)
    )
    return total / b_n2 ** (order / 2)


def feller_and_rates(array, n, eps=0.1, delta=1.0, eps_grid=()):
    array = as_array(array)
    b_n2 = array.b_n2(n)
    feller_max = float(np.max(array.variances(n))) / b_n2
    try:
        lyapunov = lyapunov_sum(array, n, delta)
    except DivergentMoment:
        logger.info(f"Lyapunov moment of order {2 + delta} diverges for {array}")
        lyapunov = None
    return ConditionReport(
        n=n,
        lindeberg=lindeberg_sum(array, n, eps),
        lyapunov=lyapunov,
        feller_max=feller_max,
        rate_sigma=n * feller_max,
        rate_mu=math.sqrt(n) * float(np.max(np.abs(array.means(n)))) / math.sqrt(b_n2),
        b_n2=b_n2,
        lindeberg_grid=tuple((e, lindeberg_sum(array, n, e)) for e in eps_grid),
    )


def condition_table(array, n_grid, eps=0.1, delta=1.0, eps_grid=()):
    reports = []
    for n in n_grid:
        report = feller_and_rates(array, n, eps=eps, delta=delta, eps_grid=eps_grid)
        logger.info(
            f"n={n} lindeberg={report.lindeberg:.6g} feller_max={report.feller_max:.6g}"
        )
        reports.append(report)
    return reports


def bounded_on_grid(values, growth=2.0):
    """Bounded when the second half of ``values`` stays within ``growth`` times the first half."""
    values = [v for v in values if v is not None]
    if not values:
        return GridVerdict(FINITE_GRID_LABEL, False, None)
    half = max(1, len(values) // 2)
    head, tail = max(values[:half]), max(values[half:] or values[:half])
    return GridVerdict(FINITE_GRID_LABEL, tail <= growth * head, max(values))
