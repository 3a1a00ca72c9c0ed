from lab.management.base import ExperimentCommand

PRINTED = (
    ("E[X~]", "e_xtilde"),
    ("E[S1~^2]", "e_s1t"),
    ("E[S2~^2]", "e_s2t"),
    ("E[S3~^2]", "e_s3t"),
    ("E[S^2]", "e_s2"),
)


class Command(ExperimentCommand):
    help = "Exact expectations of the deleting-items estimators, optionally checked by Monte Carlo"
    experiment = "bias"
    overrides = ("n", "mu", "sigma2", "reps")
    plan_flags = True

    def report(self, result):
        expectations = result.results["expectations"]
        for label, key in PRINTED:
            self.stdout.write(f"{label} = {expectations[key]:.10g}")
        if expectations["linear_k_e_s3t"] != expectations["e_s3t"]:
            self.stdout.write(f"E[S3~^2] (linear-k form) = {expectations['linear_k_e_s3t']:.10g}")
        self.stdout.write(f"S3~^2 vs S^2: {expectations['s3_class']}")
