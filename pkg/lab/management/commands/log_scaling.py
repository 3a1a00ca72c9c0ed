from lab.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Mean of |S| / (sqrt(n) (log n)^(1/2 + eps)) over paths for a zero-mean law"
    experiment = "log_scaling"
    overrides = ("exponent", "n_grid", "paths")
