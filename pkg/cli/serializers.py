"""
Experiment configs: INI text parsed with configparser, one DRF serializer per
section.

Unknown sections and keys are rejected. Every error is raised as ConfigError
with the line number of the offending key (or section header).
"""
import configparser
import logging
from dataclasses import dataclass, field

import numpy as np
from rest_framework import serializers

from geometry.spacetime import KGParams, Spacetime, build_family, ultrastatic
from kg_workbench.conf import workbench_setting
from kg_workbench.exceptions import ConfigError, WorkbenchError

logger = logging.getLogger(__name__)


class SectionSerializer(serializers.Serializer):
    """Serializer that refuses keys it does not declare."""

    def to_internal_value(self, data):
        unknown = sorted(set(data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError({key: ["unknown key"] for key in unknown})
        return super().to_internal_value(data)


FAMILY_CHOICES = ("flat", "bump", "cosmological", "ultrastatic")


class SpacetimeSerializer(SectionSerializer):
    family = serializers.ChoiceField(choices=FAMILY_CHOICES, default="flat")
    n_x = serializers.IntegerField(min_value=4, required=False)
    n_t = serializers.IntegerField(min_value=12, required=False)
    dx = serializers.FloatField(min_value=0.0, required=False)
    dt = serializers.FloatField(min_value=0.0, required=False)
    # bump: lapse bump height; ultrastatic: a(x) = 1 + amplitude cos(2 pi x / L)
    amplitude = serializers.FloatField(required=False)
    field = serializers.ChoiceField(choices=("beta", "a"), default="beta")
    expansion = serializers.FloatField(default=0.5)
    start = serializers.IntegerField(min_value=0, required=False)
    stop = serializers.IntegerField(min_value=1, required=False)

    def validate(self, attrs):
        if attrs["family"] != "bump" and "field" in self.initial_data:
            raise serializers.ValidationError({"field": ["only used by the bump family"]})
        if attrs["family"] != "cosmological":
            for key in ("start", "stop"):
                if key in self.initial_data:
                    raise serializers.ValidationError({key: ["only used by the cosmological family"]})
        return attrs


class FieldSerializer(SectionSerializer):
    m_sq = serializers.FloatField(min_value=0.0, default=1.0)
    xi = serializers.FloatField(default=0.0)


class RunSerializer(SectionSerializer):
    seed = serializers.IntegerField(min_value=0, required=False)
    samples = serializers.IntegerField(min_value=1, required=False)
    refine = serializers.IntegerField(min_value=2, max_value=6, default=3)
    tol_scale = serializers.FloatField(min_value=0.0, default=1.0)
    surface = serializers.IntegerField(min_value=0, required=False)


class PerturbationSerializer(SectionSerializer):
    center_t = serializers.FloatField(required=False)
    center_x = serializers.FloatField(required=False)
    width_t = serializers.FloatField(min_value=1.0, required=False)
    width_x = serializers.FloatField(min_value=1.0, required=False)
    amp_beta = serializers.FloatField(default=0.1)
    amp_a = serializers.FloatField(default=0.0)


class RegionSerializer(SectionSerializer):
    center_t = serializers.IntegerField(required=False)
    center_x = serializers.IntegerField(required=False)
    radius = serializers.IntegerField(min_value=0, default=2)


class WorldlineSerializer(SectionSerializer):
    x = serializers.IntegerField(min_value=0, required=False)
    t0 = serializers.IntegerField(min_value=0, required=False)
    t1 = serializers.IntegerField(min_value=1, required=False)

    def validate(self, attrs):
        if "t0" in attrs and "t1" in attrs and attrs["t1"] <= attrs["t0"]:
            raise serializers.ValidationError({"t1": ["must exceed t0"]})
        return attrs


class SamplingSerializer(SectionSerializer):
    width = serializers.FloatField(min_value=0.0, default=0.4)


class StatesSerializer(SectionSerializer):
    count = serializers.IntegerField(min_value=1, default=200)
    n_modes = serializers.IntegerField(min_value=1, default=4)
    strength = serializers.FloatField(min_value=0.0, default=0.8)


class DeformSerializer(SectionSerializer):
    band_start = serializers.IntegerField(min_value=0, required=False)
    band_stop = serializers.IntegerField(min_value=1, required=False)
    amplitude = serializers.FloatField(default=0.3)
    pairs = serializers.IntegerField(min_value=1, default=20)

    def validate(self, attrs):
        if "band_start" in attrs and "band_stop" in attrs and attrs["band_stop"] <= attrs["band_start"]:
            raise serializers.ValidationError({"band_stop": ["must exceed band_start"]})
        return attrs


class DynlocSerializer(SectionSerializer):
    margin = serializers.IntegerField(min_value=0, default=2)


SECTION_SERIALIZERS = {
    "spacetime": SpacetimeSerializer,
    "field": FieldSerializer,
    "run": RunSerializer,
    "perturbation": PerturbationSerializer,
    "region": RegionSerializer,
    "worldline": WorldlineSerializer,
    "sampling": SamplingSerializer,
    "states": StatesSerializer,
    "deform": DeformSerializer,
    "dynloc": DynlocSerializer,
}


# ============================
# PARSING
# ============================

def _line_index(text: str) -> dict:
    """(section, key) -> line number; (section, None) for headers."""
    index = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            index.setdefault((section, None), lineno)
        elif section is not None and "=" in line:
            key = line.split("=", 1)[0].strip().lower()
            index.setdefault((section, key), lineno)
    return index


def _parser_error(e: configparser.Error) -> ConfigError:
    if isinstance(e, configparser.ParsingError) and getattr(e, "errors", None):
        lineno, line = e.errors[0]
        return ConfigError(f"cannot parse {line.strip()!r}", lineno=lineno)
    lineno = getattr(e, "lineno", None)
    message = getattr(e, "message", str(e)).splitlines()[0]
    return ConfigError(message, lineno=lineno)


def _first_error(errors):
    key, messages = next(iter(errors.items()))
    if isinstance(messages, dict):
        return _first_error(messages)
    if isinstance(messages, (list, tuple)) and messages and isinstance(messages[0], dict):
        return _first_error(messages[0])
    message = messages[0] if isinstance(messages, (list, tuple)) else messages
    return key, str(message)


@dataclass
class ExperimentConfig:
    """Validated sections; sections absent from the file carry their defaults."""
    sections: dict = field(default_factory=dict)
    given: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        return self.sections[name]

    def __getitem__(self, name):
        return self.sections[name]

    @property
    def seed(self) -> int:
        seed = self.sections["run"].get("seed")
        return workbench_setting("DEFAULT_SEED") if seed is None else seed

    def with_overrides(self, **run_values) -> "ExperimentConfig":
        """Copy with [run] values replaced (CLI flags win over the file)."""
        given = {name: dict(values) for name, values in self.given.items()}
        run = given.setdefault("run", {})
        for key, value in run_values.items():
            if value is not None:
                run[key] = str(value)
        return load_config(to_text(given))

    def echo(self) -> str:
        return to_text(self.given)

    # ============================
    # BUILDERS
    # ============================

    def kg(self) -> KGParams:
        return KGParams(m_sq=self["field"]["m_sq"], xi=self["field"]["xi"])

    def spacetime(self, **overrides) -> Spacetime:
        values = dict(self["spacetime"])
        values.update(overrides)
        family = values.pop("family")
        kwargs = {"n_x": values.get("n_x"), "n_t": values.get("n_t"), "dx": values.get("dx"), "dt": values.get("dt"), "kg": self.kg()}
        try:
            if family == "ultrastatic":
                n_x = kwargs["n_x"] or workbench_setting("DEFAULT_GRID")[0]
                amplitude = 0.2 if values.get("amplitude") is None else values["amplitude"]
                a_x = 1.0 + amplitude * np.cos(2 * np.pi * np.arange(n_x) / n_x)
                return ultrastatic(a_x, n_t=kwargs["n_t"], dx=kwargs["dx"], dt=kwargs["dt"], kg=kwargs["kg"])
            if family == "bump":
                if values.get("amplitude") is not None:
                    kwargs["amplitude"] = values["amplitude"]
                kwargs["field_name"] = values["field"]
            if family == "cosmological":
                kwargs.update(expansion=values["expansion"], start=values.get("start"), stop=values.get("stop"))
            return build_family(family, **kwargs)
        except WorkbenchError as e:
            raise ConfigError(f"[spacetime] {e}")


def load_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as e:
        raise _parser_error(e)
    index = _line_index(text)
    config = ExperimentConfig()
    for name in parser.sections():
        if name not in SECTION_SERIALIZERS:
            raise ConfigError(f"unknown section [{name}]", lineno=index.get((name.lower(), None)))
    for name, serializer_class in SECTION_SERIALIZERS.items():
        raw = dict(parser[name]) if parser.has_section(name) else {}
        serializer = serializer_class(data=raw)
        if not serializer.is_valid():
            key, message = _first_error(serializer.errors)
            lineno = index.get((name, key), index.get((name, None)))
            label = f"[{name}]" if key == "non_field_errors" else f"[{name}] {key}"
            raise ConfigError(f"{label}: {message}", lineno=lineno)
        config.sections[name] = dict(serializer.validated_data)
        if raw:
            config.given[name] = raw
    logger.debug(f"[Config] Loaded sections {sorted(config.given)}")
    return config


def read_config(path) -> ExperimentConfig:
    if path is None:
        return load_config("")
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror}")
    return load_config(text)


def to_text(given: dict) -> str:
    """Canonical INI text: sections in registry order, keys sorted."""
    blocks = []
    for name in SECTION_SERIALIZERS:
        values = given.get(name)
        if not values:
            continue
        lines = [f"[{name}]"] + [f"{key} = {values[key]}" for key in sorted(values)]
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")
