"""Experiment config schema.

Serializers validate the JSON form of every domain object and hand back the
object itself, so ``validated_data`` of a config holds ready-built laws,
arrays and plans.
"""
from rest_framework import serializers
from rest_framework.exceptions import APIException

from lab.deletion import DeletionPlan, DeletionPolicy, FixedK, LinearFraction, PowerLaw, Zero
from lab.dist_catalog import (
    Bernoulli,
    CycleArray,
    Exponential,
    IIDArray,
    Normal,
    Pareto,
    Rademacher,
    ScaledArray,
    Shifted,
    Uniform,
)
from lab.exact_oracle import DiscreteLaw
from lab.exceptions import exit_status

SCHEMA_VERSION = 1

EXPERIMENTS = ("wlln", "slln", "clt", "log_scaling", "bias", "oracle", "conditions")

STOCHASTIC = ("wlln", "slln", "clt", "log_scaling")

FAMILIES = {
    "bernoulli": (Bernoulli, ("p",)),
    "rademacher": (Rademacher, ()),
    "uniform": (Uniform, ("a", "b")),
    "normal": (Normal, ("mu", "sigma2")),
    "exponential": (Exponential, ("lam",)),
    "pareto": (Pareto, ("alpha",)),
    "shifted": (Shifted, ("base",)),
}

ARRAY_KINDS = {
    "iid": ("law",),
    "scaled": ("base",),
    "cycle": ("laws",),
}

SCHEDULES = {
    "zero": (Zero, ()),
    "fixed": (FixedK, ("k",)),
    "power": (PowerLaw, ("r",)),
    "linear": (LinearFraction, ("c",)),
}

# experiment -> (objects, params) that must be present once defaults are merged
REQUIREMENTS = {
    "wlln": (("source", "plan"), ("eps", "n_grid", "reps")),
    "slln": (("distribution", "plan"), ("eps", "n_start", "n_max", "paths")),
    "clt": (("source", "plan"), ("n_grid", "reps")),
    "log_scaling": (("distribution", "plan"), ("exponent", "n_grid", "paths")),
    "bias": (("plan",), ("n",)),
    "oracle": (("plan",), ("n",)),
    "conditions": (("source",), ("n_grid", "eps", "delta")),
}


def choice_field(choices, **kwargs):
    listed = ", ".join(choices)
    return serializers.ChoiceField(
        choices=list(choices),
        error_messages={
            "invalid_choice": f'"{{input}}" is not a valid choice; valid choices are: {listed}.'
        },
        **kwargs,
    )


def build(cls, **kwargs):
    """Construct a domain object; bad parameters become field errors, missing moments do not."""
    try:
        return cls(**kwargs)
    except APIException as exc:
        if exit_status(exc) == 3:
            raise
        raise serializers.ValidationError(exc.detail)


def nested(serializer_class, data, field):
    serializer = serializer_class(data=data)
    if not serializer.is_valid():
        raise serializers.ValidationError({field: serializer.errors})
    return serializer.validated_data


def missing(attrs, names):
    return {name: "This field is required." for name in names if attrs.get(name) is None}


class DistributionSerializer(serializers.Serializer):
    family = choice_field(FAMILIES)
    p = serializers.FloatField(required=False)
    a = serializers.FloatField(required=False)
    b = serializers.FloatField(required=False)
    mu = serializers.FloatField(required=False)
    sigma2 = serializers.FloatField(required=False)
    lam = serializers.FloatField(required=False)
    alpha = serializers.FloatField(required=False)
    base = serializers.DictField(required=False)
    offset = serializers.FloatField(required=False, default=0.0)
    scale = serializers.FloatField(required=False, default=1.0)

    def validate(self, attrs):
        cls, params = FAMILIES[attrs["family"]]
        errors = missing(attrs, params)
        if errors:
            raise serializers.ValidationError(errors)
        kwargs = {name: attrs[name] for name in params}
        if cls is Shifted:
            kwargs["base"] = nested(DistributionSerializer, attrs["base"], "base")
            kwargs.update(offset=attrs["offset"], scale=attrs["scale"])
        return build(cls, **kwargs)


class ArraySerializer(serializers.Serializer):
    kind = choice_field(ARRAY_KINDS)
    law = serializers.DictField(required=False)
    base = serializers.DictField(required=False)
    gamma = serializers.FloatField(required=False, default=1.0)
    laws = serializers.ListField(child=serializers.DictField(), required=False, min_length=1)

    def validate(self, attrs):
        kind = attrs["kind"]
        errors = missing(attrs, ARRAY_KINDS[kind])
        if errors:
            raise serializers.ValidationError(errors)
        if kind == "iid":
            return build(IIDArray, law=nested(DistributionSerializer, attrs["law"], "law"))
        if kind == "scaled":
            base = nested(DistributionSerializer, attrs["base"], "base")
            return build(ScaledArray, base=base, gamma=attrs["gamma"])
        laws = tuple(nested(DistributionSerializer, law, "laws") for law in attrs["laws"])
        return build(CycleArray, laws=laws)


class ScheduleSerializer(serializers.Serializer):
    kind = choice_field(SCHEDULES)
    k = serializers.IntegerField(required=False, min_value=0)
    r = serializers.FloatField(required=False)
    c = serializers.FloatField(required=False)

    def validate(self, attrs):
        cls, params = SCHEDULES[attrs["kind"]]
        errors = missing(attrs, params)
        if errors:
            raise serializers.ValidationError(errors)
        return build(cls, **{name: attrs[name] for name in params})


class PlanSerializer(serializers.Serializer):
    schedule = ScheduleSerializer()
    policy = choice_field([policy.value for policy in DeletionPolicy], default="prefix")

    def validate(self, attrs):
        return build(DeletionPlan, schedule=attrs["schedule"], policy=attrs["policy"])


class DiscreteLawSerializer(serializers.Serializer):
    atoms = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(), min_length=2, max_length=2),
        min_length=1,
    )

    def validate(self, attrs):
        return build(DiscreteLaw, atoms=attrs["atoms"])


class ParamsSerializer(serializers.Serializer):
    eps = serializers.FloatField(required=False, min_value=0)
    eps_grid = serializers.ListField(
        child=serializers.FloatField(), required=False, min_length=1
    )
    n_grid = serializers.ListField(
        child=serializers.IntegerField(min_value=1), required=False, min_length=1
    )
    reps = serializers.IntegerField(required=False, min_value=1)
    n = serializers.IntegerField(required=False, min_value=1)
    delta = serializers.FloatField(required=False)
    exponent = serializers.FloatField(required=False)
    paths = serializers.IntegerField(required=False, min_value=2)
    n_start = serializers.IntegerField(required=False, min_value=1)
    n_max = serializers.IntegerField(required=False, min_value=2)
    mu = serializers.FloatField(required=False)
    sigma2 = serializers.FloatField(required=False, min_value=0)
    a = serializers.FloatField(required=False)
    b = serializers.FloatField(required=False)
    diagnostic = choice_field(("tail_prob", "bounded_functional"), required=False)

    def validate_eps_grid(self, value):
        if any(not eps > 0 for eps in value):
            raise serializers.ValidationError("every eps must be positive.")
        return value

    def validate(self, attrs):
        if "a" in attrs and "b" in attrs and not attrs["a"] < attrs["b"]:
            raise serializers.ValidationError({"b": "b must exceed a."})
        if "n_start" in attrs and "n_max" in attrs and not attrs["n_start"] < attrs["n_max"]:
            raise serializers.ValidationError({"n_max": "n_max must exceed n_start."})
        return attrs


class ExperimentConfigSerializer(serializers.Serializer):
    schema = serializers.IntegerField()
    experiment = choice_field(EXPERIMENTS)
    master_seed = serializers.IntegerField(required=False, min_value=0, max_value=2**64 - 1)
    distribution = DistributionSerializer(required=False)
    array = ArraySerializer(required=False)
    plan = PlanSerializer(required=False)
    law = DiscreteLawSerializer(required=False)
    params = ParamsSerializer(required=False, default=dict)

    def validate_schema(self, value):
        if value != SCHEMA_VERSION:
            raise serializers.ValidationError(
                f"unsupported schema {value}; expected {SCHEMA_VERSION}."
            )
        return value

    def validate(self, attrs):
        experiment = attrs["experiment"]
        if "distribution" in attrs and "array" in attrs:
            raise serializers.ValidationError(
                {"array": "give either a distribution or an array, not both."}
            )
        attrs["source"] = attrs.get("distribution") or attrs.get("array")
        objects, params = REQUIREMENTS[experiment]
        errors = missing(attrs, objects)
        if errors.pop("source", None):
            errors["distribution"] = "a distribution or an array is required."
        param_errors = missing(attrs["params"], params)
        if param_errors:
            errors["params"] = param_errors
        if experiment == "bias":
            errors.update(self.bias_errors(attrs))
        if experiment == "oracle" and "law" not in attrs:
            if "distribution" not in attrs or attrs["distribution"].atoms() is None:
                errors["law"] = "oracle runs need a discrete law."
        if experiment in STOCHASTIC and "master_seed" not in attrs:
            errors["master_seed"] = f"a seed is required for {experiment} runs."
        if errors:
            raise serializers.ValidationError(errors)
        return attrs

    def bias_errors(self, attrs):
        params = attrs["params"]
        if params.get("reps") is not None:
            errors = missing(attrs, ("distribution", "master_seed"))
            for name in errors:
                errors[name] = f"{name} is required for a Monte Carlo bias run."
            return errors
        has_moments = params.get("mu") is not None and params.get("sigma2") is not None
        if not has_moments and "distribution" not in attrs:
            return {"params": {"mu": "give mu and sigma2 or a distribution."}}
        return {}
