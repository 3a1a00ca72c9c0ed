from lab.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = "KS distance of the standardized deleting-items sum to N(0, 1) along an n-grid"
    experiment = "clt"
    overrides = ("n_grid", "reps")
