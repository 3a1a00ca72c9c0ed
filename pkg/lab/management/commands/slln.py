from lab.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Finite-horizon path proxy for almost-sure convergence of the deleting-items mean"
    experiment = "slln"
    overrides = ("eps", "n_start", "n_max", "paths", "n_grid")
