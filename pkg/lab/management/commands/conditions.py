from lab.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Lindeberg, Lyapunov and Feller quantities of a triangular array over an n-grid"
    experiment = "conditions"
    overrides = ("n_grid", "eps", "eps_grid", "delta")
