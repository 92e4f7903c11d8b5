"""Canned scenarios, sweeps, phase search for perfect absorption, CSV output."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

from .analysis import (
    absorption_probability,
    any_absorption_probability,
    detection_probability,
    joint_distribution,
    OutcomeDistribution,
)
from .config import (
    ElementSpec,
    InputConfig,
    ScenarioConfig,
    SweepConfig,
    evaluate,
)
from .elements import LossyBeamSplitter, PhaseShifter
from .errors import ConfigError, LossyNetError
from .fock import FockState, ModeRegistry
from .network import DEFAULT_CAP, NOON, SINGLE, InputSpec, Network, build_network, evolve, make_input

DEFAULT_TOLERANCE = 1e-11
HALF = "sqrt(1/2)"


def scenario_single_bs(t: float | str = 0.5, r: float | str = 0.5, l: float | str = HALF,
                       phi: float | str = 0) -> ScenarioConfig:
    """One lossy beam splitter on modes (1, 2) fed by (|1> + e^{i phi}|2>)/sqrt(2)."""
    cfg = ScenarioConfig(
        modes=("1", "2"),
        network=(ElementSpec("bs", "bs", {"t": t, "r": r, "l": l}, ("1", "2")),),
        input=InputConfig(SINGLE, ("1", "2"), phi, 1),
        sweep=SweepConfig("phi", 0, "2*pi", 100),
        name="single-bs",
    )
    build(cfg)  # validates the element
    return cfg


def scenario_interferometer(coeffs: dict[str, tuple] | None = None,
                            theta3: float | str = 0, theta4: float | str = 0,
                            phi: float | str = 0, photons: int = 1) -> ScenarioConfig:
    """Four-element interferometer: a, b feed phase stages and then c, d.

    Port order: mode 1 enters port 1 of a, mode 3 enters port 2 of b,
    mode 2 enters port 1 of c and mode 4 enters port 1 of d. ``coeffs`` maps element
    labels to ``(t, r, l)``; the default is t = -r = 1/2, l = 1/sqrt(2).
    ``photons >= 2`` switches the input to a NOON state on modes 1 and 3.
    """
    default = (0.5, -0.5, HALF)
    coeffs = {k: coeffs.get(k, default) for k in "abcd"} if coeffs else {k: default for k in "abcd"}

    def bs(label, ports):
        t, r, l = coeffs[label]
        return ElementSpec("bs", label, {"t": t, "r": r, "l": l}, ports)

    network = (
        bs("a", ("1", "2")),
        bs("b", ("4", "3")),
        ElementSpec("phase", "theta3", {"theta": theta3}, ("3",)),
        ElementSpec("phase", "theta4", {"theta": theta4}, ("4",)),
        bs("c", ("2", "3")),
        bs("d", ("4", "1")),
    )
    kind = SINGLE if photons == 1 else NOON
    cfg = ScenarioConfig(
        modes=("1", "2", "3", "4"),
        network=network,
        input=InputConfig(kind, ("1", "3"), phi, photons),
        sweep=SweepConfig("phi", 0, "2*pi", 100),
        name="interferometer",
    )
    build(cfg)
    return cfg


def parameters(cfg: ScenarioConfig) -> dict[str, float]:
    """Current values of the tunable phases: ``phi`` plus every phase stage."""
    out = {"phi": evaluate(cfg.input.phase)}
    for e in cfg.network:
        if e.kind == "phase":
            out[e.label] = evaluate(e.params["theta"])
    return out


def build(cfg: ScenarioConfig, overrides: dict[str, float] | None = None,
          cap: int = DEFAULT_CAP) -> tuple[Network, FockState]:
    """Assemble the network and input state, with phases optionally overridden."""
    overrides = overrides or {}
    registry = ModeRegistry(cfg.modes)
    stages = []
    for k, e in enumerate(cfg.network):
        try:
            if e.kind == "bs":
                t, r, l = (evaluate(e.params[name]) for name in ("t", "r", "l"))
                element = LossyBeamSplitter(t, r, l, e.label)
            else:
                theta = overrides.get(e.label, None)
                if theta is None:
                    theta = evaluate(e.params["theta"])
                element = PhaseShifter(None, theta, e.label)
        except LossyNetError as exc:
            raise type(exc)(f"element {e.label!r}: {exc}", element=e.label,
                            path=f"/network/{k}") from None
        stages.append((element, e.ports))
    try:
        net = build_network(stages, registry, cap=cap)
    except LossyNetError as exc:
        if exc.element is None:
            raise
        raise type(exc)(f"element {exc.element!r}: {exc}", element=exc.element) from None
    inp = cfg.input
    phase = overrides.get("phi")
    if phase is None:
        phase = evaluate(inp.phase)
    amplitudes = tuple(
        complex(evaluate(a[0]), evaluate(a[1])) if isinstance(a, (list, tuple)) else evaluate(a)
        for a in inp.amplitudes
    )
    state = make_input(InputSpec(inp.kind, inp.modes, phase, inp.photons, amplitudes), registry)
    return net, state


def distribution_at(cfg: ScenarioConfig, overrides: dict[str, float] | None = None,
                    cap: int = DEFAULT_CAP) -> tuple[Network, OutcomeDistribution]:
    net, state = build(cfg, overrides, cap)
    return net, joint_distribution(evolve(net, state), net)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


@dataclass
class ResultTable:
    header: list[str]
    rows: list[list] = field(default_factory=list)
    residuals: list[float] = field(default_factory=list)
    long_format: bool = False

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    def column(self, name: str) -> list:
        k = self.header.index(name)
        return [row[k] for row in self.rows]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()


def emit_csv(table: ResultTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(table.to_csv())


def run(cfg: ScenarioConfig, cap: int = DEFAULT_CAP) -> ResultTable:
    """Evaluate ``cfg`` at each sweep point (or once at its fixed phases).

    One-photon inputs give one wide row per point; multi-photon inputs give
    one ``param,pattern,probability`` row per outcome pattern.
    """
    if cfg.sweep is None:
        names: tuple[str, ...] = ("phi",)
        points = [parameters(cfg)["phi"]]
        fixed = True
    else:
        names = cfg.sweep.parameters
        points = cfg.sweep.values()
        fixed = False

    single = cfg.input.kind != NOON or cfg.input.photons == 1
    table: ResultTable | None = None
    for x in points:
        overrides = {} if fixed else {n: x for n in names}
        net, dist = distribution_at(cfg, overrides, cap)
        if table is None:
            if single:
                header = (["param"] + [f"P_{m.label}" for m in net.detector_modes]
                          + [f"A_{e}" for e in net.elements] + ["residual"])
            else:
                header = ["param", "pattern", "probability"]
            table = ResultTable(header, long_format=not single)
        table.residuals.append(dist.residual)
        if single:
            row = [x]
            row += [detection_probability(dist, m) for m in net.detector_modes]
            row += [absorption_probability(dist, e) for e in net.elements]
            row.append(dist.residual)
            table.rows.append(row)
        else:
            for outcome, p in dist.entries.items():
                table.rows.append([x, dist.pattern_name(outcome), p])
    return table


TOTAL_ABSORPTION = "total-absorption"
TOTAL_TRANSPARENCY = "total-transparency"

_GOLDEN = (math.sqrt(5) - 1) / 2


class CPAResult(NamedTuple):
    phase: float
    value: float
    parameter: str = "phi"


def golden_section(f: Callable[[float], float], a: float, b: float,
                   tol: float = 1e-6) -> float:
    """Minimiser of a unimodal ``f`` on [a, b], located to within ``tol``."""
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    return (a + b) / 2


def total_absorption(cfg: ScenarioConfig, overrides: dict[str, float],
                     cap: int = DEFAULT_CAP) -> float:
    _, dist = distribution_at(cfg, overrides, cap)
    return any_absorption_probability(dist)


def cpa_find(cfg: ScenarioConfig, objective: str = TOTAL_ABSORPTION,
             grid: int = 256, tol: float = 1e-6, cap: int = DEFAULT_CAP) -> CPAResult:
    """Phase that maximises (absorption) or minimises (transparency) total absorption.

    The free parameter and its range come from the config's sweep block.
    A coarse grid picks the best cell, golden-section search refines it.
    """
    if objective not in (TOTAL_ABSORPTION, TOTAL_TRANSPARENCY):
        raise ConfigError(f"unknown objective {objective!r}")
    if cfg.sweep is None:
        raise ConfigError("cpa-find needs one free phase parameter (a sweep block)")
    names = cfg.sweep.parameters
    start, stop = evaluate(cfg.sweep.start), evaluate(cfg.sweep.stop)
    if stop == start:
        raise ConfigError("sweep range is empty")
    sign = -1.0 if objective == TOTAL_ABSORPTION else 1.0

    def loss(x: float) -> float:
        return sign * total_absorption(cfg, {n: x for n in names}, cap)

    h = (stop - start) / grid
    xs = [start + k * h for k in range(grid)]
    values = [loss(x) for x in xs]
    best = min(range(grid), key=values.__getitem__)
    x_star = golden_section(loss, xs[best] - h, xs[best] + h, tol)
    if loss(x_star) > values[best]:
        x_star = xs[best]
    return CPAResult(x_star, sign * loss(x_star), cfg.sweep.name)
