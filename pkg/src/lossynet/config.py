"""JSON scenario configuration: schema validation, parsing, serialisation.

Numeric fields keep the form they were written in (a number or an
expression string like ``"3*pi/4"``) so that parse -> serialise -> parse
is lossless. Expressions are evaluated only when a network is built.
"""

from __future__ import annotations

import ast
import dataclasses
import json
import math
import operator
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Any, Union

import jsonschema

from .errors import ConfigError

SCHEMA_VERSION = 1

Number = Union[int, float, str]

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi, "e": math.e, "tau": math.tau}
_FUNCS = {"sqrt": math.sqrt, "cos": math.cos, "sin": math.sin}


def evaluate(value: Number) -> float:
    """Evaluate a number or a small arithmetic expression (``"pi/2"``)."""
    if isinstance(value, bool):
        raise ConfigError(f"expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    try:
        tree = ast.parse(str(value).strip(), mode="eval")
        return float(_eval_node(tree.body))
    except ConfigError:
        raise
    except (SyntaxError, ValueError, ZeroDivisionError, OverflowError, TypeError) as exc:
        raise ConfigError(f"cannot evaluate {value!r}: {exc}") from None


def _eval_node(node: ast.AST) -> float:
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) \
            and not isinstance(node.value, bool):
        return node.value
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_eval_node(node.operand))
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
        return _FUNCS[node.func.id](_eval_node(node.args[0]))
    raise ConfigError(f"unsupported expression element {ast.dump(node)}")


@dataclass(frozen=True)
class ElementSpec:
    kind: str  # "bs" | "phase"
    label: str
    params: dict[str, Any]
    ports: tuple[str, ...]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "label": self.label,
                "params": dict(self.params), "ports": list(self.ports)}


@dataclass(frozen=True)
class InputConfig:
    kind: str
    modes: tuple[str, ...]
    phase: Number = 0
    photons: int = 1
    amplitudes: tuple = ()

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind, "modes": list(self.modes),
                               "phase": self.phase, "photons": self.photons}
        if self.amplitudes:
            out["amplitudes"] = [list(a) if isinstance(a, (list, tuple)) else a
                                 for a in self.amplitudes]
        return out


@dataclass(frozen=True)
class SweepConfig:
    parameter: Union[str, tuple[str, ...]]
    start: Number
    stop: Number
    steps: int
    endpoint: bool = False

    @property
    def parameters(self) -> tuple[str, ...]:
        return (self.parameter,) if isinstance(self.parameter, str) else tuple(self.parameter)

    @property
    def name(self) -> str:
        return "=".join(self.parameters)

    def values(self) -> list[float]:
        start, stop = evaluate(self.start), evaluate(self.stop)
        if self.steps == 1:
            return [start]
        div = self.steps - 1 if self.endpoint else self.steps
        step = (stop - start) / div
        return [start + k * step for k in range(self.steps)]

    def to_dict(self) -> dict:
        param = self.parameter if isinstance(self.parameter, str) else list(self.parameter)
        out = {"parameter": param, "start": self.start, "stop": self.stop, "steps": self.steps}
        if self.endpoint:
            out["endpoint"] = True
        return out


@dataclass(frozen=True)
class ScenarioConfig:
    modes: tuple[str, ...]
    network: tuple[ElementSpec, ...]
    input: InputConfig
    sweep: SweepConfig | None = None
    output: str | None = None
    name: str | None = None
    schema_version: int = SCHEMA_VERSION

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"schema_version": self.schema_version}
        if self.name is not None:
            out["name"] = self.name
        out["modes"] = list(self.modes)
        out["network"] = [e.to_dict() for e in self.network]
        out["input"] = self.input.to_dict()
        if self.sweep is not None:
            out["sweep"] = self.sweep.to_dict()
        if self.output is not None:
            out["output"] = self.output
        return out

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


@lru_cache(maxsize=1)
def schema() -> dict:
    text = resources.files("lossynet").joinpath("schema/scenario.schema.json").read_text()
    return json.loads(text)


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else "/"


def validate_dict(data: Any) -> None:
    """Raise :class:`ConfigError` with a JSON pointer for the first schema violation."""
    validator = jsonschema.Draft202012Validator(schema())
    err = jsonschema.exceptions.best_match(validator.iter_errors(data))
    if err is not None:
        ptr = _pointer(err.absolute_path)
        raise ConfigError(f"schema error at {ptr}: {err.message}", path=ptr)


def from_dict(data: Any) -> ScenarioConfig:
    validate_dict(data)
    network = tuple(
        ElementSpec(e["kind"], e["label"], dict(e["params"]), tuple(e["ports"]))
        for e in data["network"]
    )
    inp = data["input"]
    amplitudes = tuple(tuple(a) if isinstance(a, list) else a for a in inp.get("amplitudes", ()))
    input_cfg = InputConfig(inp["kind"], tuple(inp["modes"]), inp.get("phase", 0),
                            inp.get("photons", 1), amplitudes)
    sweep = None
    if "sweep" in data:
        s = data["sweep"]
        param = s["parameter"] if isinstance(s["parameter"], str) else tuple(s["parameter"])
        sweep = SweepConfig(param, s["start"], s["stop"], s["steps"], s.get("endpoint", False))
    cfg = ScenarioConfig(tuple(data["modes"]), network, input_cfg, sweep,
                         data.get("output"), data.get("name"), data["schema_version"])
    _check_references(cfg)
    return cfg


def _check_references(cfg: ScenarioConfig) -> None:
    modes = set(cfg.modes)
    labels: set[str] = set()
    for k, e in enumerate(cfg.network):
        if e.label in labels:
            raise ConfigError(f"duplicate element label {e.label!r}",
                              element=e.label, path=f"/network/{k}/label")
        if e.label == "phi":
            raise ConfigError("element label 'phi' is reserved for the input phase",
                              element=e.label, path=f"/network/{k}/label")
        labels.add(e.label)
        for j, p in enumerate(e.ports):
            if p not in modes:
                raise ConfigError(f"element {e.label!r} binds unknown mode {p!r}",
                                  element=e.label, path=f"/network/{k}/ports/{j}")
    for j, m in enumerate(cfg.input.modes):
        if m not in modes:
            raise ConfigError(f"input uses unknown mode {m!r}", path=f"/input/modes/{j}")
    if cfg.sweep is not None:
        phase_labels = {e.label for e in cfg.network if e.kind == "phase"}
        for p in cfg.sweep.parameters:
            if p != "phi" and p not in phase_labels:
                raise ConfigError(
                    f"sweep parameter {p!r} is neither 'phi' nor a phase-shifter label",
                    path="/sweep/parameter")


def parse_config(text: str) -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                          path=f"line {exc.lineno}") from None
    return from_dict(data)


def serialize_config(cfg: ScenarioConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2) + "\n"


def load_config(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
