"""Ordered networks of dilated elements and their input states."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .elements import DilationIsometry, LossyBeamSplitter, PhaseShifter, dilate, phase_map
from .errors import (
    ConfigError,
    InvariantViolation,
    ModeError,
    NormalizationError,
    PhotonCapError,
    RegistryMismatchError,
    WriteOnceError,
)
from .fock import (
    ENVIRONMENT,
    OPTICAL,
    FockState,
    ModeId,
    ModeMap,
    ModeRegistry,
    PRUNE_THRESHOLD,
    _substitute,
    apply_creation,
    vacuum,
)

DEFAULT_CAP = 4

SINGLE = "single-photon-superposition"
NOON = "noon"
CUSTOM = "custom"


@dataclass(frozen=True)
class Stage:
    label: str
    element: LossyBeamSplitter | PhaseShifter
    modes: tuple[ModeId, ...]
    mode_map: ModeMap
    env: tuple[ModeId, ...] = ()
    dilation: DilationIsometry | None = None

    @property
    def absorbing(self) -> bool:
        return isinstance(self.element, LossyBeamSplitter)


@dataclass(frozen=True)
class Network:
    registry: ModeRegistry
    stages: tuple[Stage, ...]
    detector_modes: tuple[ModeId, ...]
    env_modes_by_element: Mapping[str, tuple[ModeId, ...]]
    cap: int = DEFAULT_CAP

    @property
    def elements(self) -> tuple[str, ...]:
        """Labels of the absorbing elements, in stage order."""
        return tuple(self.env_modes_by_element)

    @property
    def optical_modes(self) -> tuple[ModeId, ...]:
        return self.registry.optical_modes

    @cached_property
    def outcome_positions(self) -> tuple[dict[int, int], dict[int, int]]:
        """Mode index -> slot in the detector and absorber count vectors."""
        optical = {m.index: k for k, m in enumerate(self.registry.optical_modes)}
        env = {m.index: k for k, label in enumerate(self.elements)
               for m in self.env_modes_by_element[label]}
        return optical, env

    def stage(self, label: str) -> Stage:
        for s in self.stages:
            if s.label == label:
                return s
        raise KeyError(label)

    def single_photon_matrix(self) -> np.ndarray:
        """Composite single-photon transfer matrix over all registered modes.

        Columns are input modes, rows output modes; environment columns are
        never fed so they carry the identity.
        """
        n = len(self.registry)
        total = np.eye(n, dtype=complex)
        for s in self.stages:
            step = np.eye(n, dtype=complex)
            for inp, outs in s.mode_map.columns.items():
                step[:, inp.index] = 0
                for out, c in outs.items():
                    step[out.index, inp.index] = c
            total = step @ total
        return total


def build_network(stages: Iterable, registry: ModeRegistry,
                  detector_modes: Sequence | None = None,
                  cap: int = DEFAULT_CAP) -> Network:
    """Validate and dilate ``stages`` in order.

    Each stage is ``(element, modes)``: a :class:`LossyBeamSplitter` with
    ``(port1, port2)``, or a :class:`PhaseShifter` (its own ``mode``, or a
    ``theta`` float paired with a one-mode binding). Modes may be given as
    :class:`ModeId` objects or labels.
    """
    if cap < 1:
        raise PhotonCapError("photon cap must be at least 1")
    built: list[Stage] = []
    env_by_element: dict[str, tuple[ModeId, ...]] = {}
    seen_labels: set[str] = set()
    for k, spec in enumerate(stages):
        element, modes = spec
        modes = tuple(registry[m] for m in modes)
        for m in modes:
            if m.kind == ENVIRONMENT:
                raise WriteOnceError(
                    f"stage {k} binds environment mode {m}; environment modes are write-once",
                    element=getattr(element, "label", None))
        if isinstance(element, LossyBeamSplitter):
            label = element.label or f"bs{k}"
            if label in seen_labels:
                raise WriteOnceError(f"duplicate element label {label!r}", element=label)
            if label != element.label:
                element = LossyBeamSplitter(element.t, element.r, element.l, label)
            if len(modes) != 2:
                raise ModeError(f"beam splitter {label!r} needs two ports", element=label)
            dil = dilate(element, modes, registry)
            built.append(Stage(label, element, modes, dil.mode_map, dil.env, dil))
            env_by_element[label] = dil.env
        elif isinstance(element, PhaseShifter):
            label = element.label or f"phase{k}"
            if label in seen_labels:
                raise WriteOnceError(f"duplicate element label {label!r}", element=label)
            if modes:
                if len(modes) != 1:
                    raise ModeError(f"phase shifter {label!r} needs one mode", element=label)
                element = PhaseShifter(modes[0], element.theta, label)
            else:
                element = PhaseShifter(registry[element.mode], element.theta, label)
            built.append(Stage(label, element, (element.mode,), phase_map(element)))
        else:
            raise ConfigError(f"stage {k}: unsupported element {element!r}")
        seen_labels.add(label)

    if detector_modes is None:
        detectors = registry.optical_modes
    else:
        detectors = tuple(registry[m] for m in detector_modes)
        for m in detectors:
            if m.kind != OPTICAL:
                raise ModeError(f"detector mode {m} is not optical")

    net = Network(registry, tuple(built), detectors, MappingProxyType(env_by_element), cap)
    _check_single_photon_isometry(net)
    return net


def _check_single_photon_isometry(net: Network, atol: float = 1e-11) -> None:
    optical = [m.index for m in net.registry.optical_modes]
    m = net.single_photon_matrix()[:, optical]
    gram = m.conj().T @ m
    err = float(np.max(np.abs(gram - np.eye(len(optical))))) if optical else 0.0
    if err > atol:
        raise InvariantViolation(f"network is not isometric on one photon (error {err:.3g})")


def evolve(net: Network, state: FockState, upto: int | str | None = None) -> FockState:
    """Push ``state`` through the stages of ``net``.

    ``upto`` stops early: an int counts stages, a string names the last
    stage to apply.
    """
    if state.registry is not None and state.registry is not net.registry:
        raise RegistryMismatchError("input state is bound to a different registry")
    too_many = [n for n in state.photon_numbers() if n > net.cap]
    if too_many:
        raise PhotonCapError(f"input has {max(too_many)} photons, cap is {net.cap}")
    n_modes = len(net.registry)
    for i in state.occupied_modes():
        if i >= n_modes:
            raise ModeError(f"input occupies unregistered mode index {i}")
        if net.registry[i].kind != OPTICAL:
            raise ModeError(f"input occupies environment mode {net.registry[i]}")

    stages = net.stages
    if isinstance(upto, str):
        names = [s.label for s in stages]
        if upto not in names:
            raise KeyError(upto)
        stages = stages[: names.index(upto) + 1]
    elif upto is not None:
        stages = stages[:upto]

    # Stage maps were checked against the registry when the network was built.
    terms = dict(state.items())
    for s in stages:
        terms = _substitute(terms, s.mode_map)
        terms = {k: v for k, v in terms.items() if abs(v) >= PRUNE_THRESHOLD}
    return FockState._raw(terms, net.registry)


@dataclass(frozen=True)
class InputSpec:
    kind: str = SINGLE
    modes: tuple = ()
    phase: float = 0.0
    photons: int = 1
    amplitudes: tuple = field(default=())


def make_input(spec: InputSpec, registry: ModeRegistry) -> FockState:
    """Normalised input state described by ``spec``.

    * single-photon-superposition: (|1 at m0> + e^{i phase}|1 at m1>)/sqrt(2)
      (a single mode gives |1 at m0>);
    * noon: (|N,0> + e^{i phase}|0,N>)/sqrt(2) on two modes;
    * custom: one photon with the given amplitudes over ``modes``.
    """
    modes = [registry[m] for m in spec.modes]
    for m in modes:
        if m.kind != OPTICAL:
            raise ModeError(f"input mode {m} is not optical")
    vac = vacuum(registry)
    if spec.kind == SINGLE:
        if len(modes) == 1:
            return apply_creation(vac, modes[0])
        if len(modes) != 2:
            raise ConfigError("single-photon superposition needs one or two modes")
        return (apply_creation(vac, modes[0])
                + cmath.exp(1j * spec.phase) * apply_creation(vac, modes[1])) / math.sqrt(2)
    if spec.kind == NOON:
        if len(modes) != 2 or modes[0] == modes[1]:
            raise ConfigError("NOON input needs exactly two distinct modes")
        n = int(spec.photons)
        if n < 1:
            raise ConfigError("NOON photon number must be positive")
        arms = []
        for m in modes:
            s = vac
            for _ in range(n):
                s = apply_creation(s, m)
            arms.append(s / math.sqrt(math.factorial(n)))
        return (arms[0] + cmath.exp(1j * spec.phase) * arms[1]) / math.sqrt(2)
    if spec.kind == CUSTOM:
        amps = [complex(a) for a in spec.amplitudes]
        if len(amps) != len(modes) or not modes:
            raise ConfigError("custom input needs one amplitude per mode")
        if len(set(modes)) != len(modes):
            raise ConfigError("custom input lists a mode twice")
        total = sum(abs(a) ** 2 for a in amps)
        if abs(total - 1.0) > 1e-12:
            raise NormalizationError(f"custom amplitudes have squared norm {total:.15g}")
        return FockState({((m.index, 1),): a for m, a in zip(modes, amps)}, registry)
    raise ConfigError(f"unknown input kind {spec.kind!r}")
