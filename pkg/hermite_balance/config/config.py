# Copyright (c) 2025, Hermite Balance Developers
# See license.txt

"""Experiment configuration: one UTF-8 JSON document per run.

Every field is checked against ``hooks.experiment_kinds`` before anything
runs. Errors point at the line of the offending key in the source text.
"""

import json
import logging
import re
from dataclasses import dataclass, field, replace

from hermite_balance import hooks
from hermite_balance.exceptions import ConfigError, ResourceCapExceeded

logger = logging.getLogger(__name__)

FIELDS = ("kind", "seed", "output_dir", "workers", "caps", "params")


def _key_line(text, key, after=None):
    """1-based line of the first ``"key":`` in ``text``, searching past the ``after`` key."""
    start = 0
    if after is not None:
        section = re.search(rf'"{re.escape(after)}"\s*:', text)
        start = section.end() if section else 0
    match = re.compile(rf'"{re.escape(key)}"\s*:').search(text, start)
    if match is None:
        return None
    return text.count("\n", 0, match.start()) + 1


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value):
    return _is_int(value) or isinstance(value, float)


def _coerce(value, type_name):
    """``value`` converted to ``type_name``, or None when it does not fit."""
    if type_name == "int":
        return value if _is_int(value) else None
    if type_name == "int?":
        return value if value is None or _is_int(value) else None
    if type_name == "float":
        return float(value) if _is_number(value) else None
    if type_name == "str":
        return value if isinstance(value, str) else None
    if type_name == "bool":
        return value if isinstance(value, bool) else None
    if type_name.startswith("list[") and type_name.endswith("]"):
        if not isinstance(value, list):
            return None
        inner = type_name[5:-1]
        items = [_coerce(item, inner) for item in value]
        return None if any(item is None for item in items) else items
    raise ValueError(f"unknown parameter type {type_name!r}")


@dataclass
class ExperimentConfig:
    kind: str
    seed: int = 0
    output_dir: str = ""
    workers: int = 1
    caps: dict = field(default_factory=lambda: dict(hooks.default_caps))
    params: dict = field(default_factory=dict)
    source: str = "<string>"

    def __post_init__(self):
        if not self.output_dir:
            self.output_dir = f"results/{self.kind}"

    @property
    def runner(self):
        return hooks.experiment_kinds[self.kind]["runner"]

    def with_overrides(self, output_dir=None, workers=None, seed=None):
        changes = {}
        if output_dir is not None:
            changes["output_dir"] = output_dir
        if workers is not None:
            if workers < 1:
                raise ConfigError(f"workers must be at least 1, got {workers}")
            changes["workers"] = workers
        if seed is not None:
            if seed < 0:
                raise ConfigError(f"seed must be non-negative, got {seed}")
            changes["seed"] = seed
        return replace(self, **changes)

    def check_caps(self):
        for name, cap in hooks.cap_params.items():
            if name not in self.params:
                continue
            value, limit = self.params[name], self.caps[cap]
            if value > limit:
                raise ResourceCapExceeded(f"{self.kind}: {name} = {value} exceeds {cap} = {limit}")
        return self

    def as_dict(self):
        return {
            "kind": self.kind,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "workers": self.workers,
            "caps": dict(self.caps),
            "params": dict(self.params),
        }


def load_config(path):
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    return parse_config(text, source=str(path))


def parse_config(text, source="<string>"):
    """Validated ExperimentConfig with defaults filled in from the kind's schema."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}: {exc.msg}", exc.lineno) from exc
    if not isinstance(document, dict):
        raise ConfigError(f"{source}: the document must be a JSON object", 1)

    for key in document:
        if key not in FIELDS:
            raise ConfigError(f"unknown field {key!r}", _key_line(text, key))
    if "kind" not in document:
        raise ConfigError("missing field 'kind'", 1)
    kind = document["kind"]
    if kind not in hooks.experiment_kinds:
        known = ", ".join(sorted(hooks.experiment_kinds))
        raise ConfigError(f"unknown kind {kind!r} (known: {known})", _key_line(text, "kind"))

    seed = document.get("seed", 0)
    if not _is_int(seed) or seed < 0:
        raise ConfigError("seed must be a non-negative integer", _key_line(text, "seed"))
    workers = document.get("workers", 1)
    if not _is_int(workers) or workers < 1:
        raise ConfigError("workers must be a positive integer", _key_line(text, "workers"))
    output_dir = document.get("output_dir", "")
    if not isinstance(output_dir, str):
        raise ConfigError("output_dir must be a string", _key_line(text, "output_dir"))

    caps = dict(hooks.default_caps)
    raw_caps = document.get("caps", {})
    if not isinstance(raw_caps, dict):
        raise ConfigError("caps must be an object", _key_line(text, "caps"))
    for key, value in raw_caps.items():
        if key not in caps:
            raise ConfigError(f"unknown cap {key!r}", _key_line(text, key, after="caps"))
        if not _is_int(value) or value < 1:
            raise ConfigError(f"cap {key!r} must be a positive integer", _key_line(text, key, after="caps"))
        caps[key] = value

    schema = hooks.experiment_kinds[kind]["params"]
    raw_params = document.get("params", {})
    if not isinstance(raw_params, dict):
        raise ConfigError("params must be an object", _key_line(text, "params"))
    params = {name: default for name, (_, default) in schema.items()}
    for key, value in raw_params.items():
        if key not in schema:
            raise ConfigError(f"unknown parameter {key!r} for {kind}", _key_line(text, key, after="params"))
        type_name = schema[key][0]
        coerced = _coerce(value, type_name)
        if coerced is None and not (type_name == "int?" and value is None):
            raise ConfigError(f"parameter {key!r} must be {type_name}, got {json.dumps(value)}", _key_line(text, key, after="params"))
        params[key] = coerced

    config = ExperimentConfig(kind, seed, output_dir, workers, caps, params, source)
    logger.debug("loaded %s config from %s", kind, source)
    return config.check_caps()
