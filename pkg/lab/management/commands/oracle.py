from lab.management.base import ExperimentCommand


class Command(ExperimentCommand):
    help = "Exact expectations of a small discrete law by enumerating every outcome"
    experiment = "oracle"
    overrides = ("n", "eps")
    plan_flags = True

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument("--law", help='Discrete law JSON, {"atoms": [[value, prob], ...]}')

    def build_config(self, options):
        config = super().build_config(options)
        if options["law"]:
            config["law"] = self.read_config(options["law"])
        return config

    def report(self, result):
        exact = result.results["exact"]
        closed = result.results["closed_form"]
        for name, value in closed.items():
            self.stdout.write(f"{name}: exact={exact[name]:.15g} closed_form={value:.15g}")
