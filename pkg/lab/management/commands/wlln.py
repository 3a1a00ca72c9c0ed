from lab.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Tail probability P(|X~ - mu| >= eps) of the deleting-items mean along an n-grid"
    experiment = "wlln"
    overrides = ("eps", "n_grid", "reps", "diagnostic")
