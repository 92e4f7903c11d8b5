"""Lossy beam splitters, phase shifters and their isometric dilations.

A lossy beam splitter with real amplitudes (t, r, l) sends a photon at
port 1 to ``t|out1> + r|out2> + l|f1>`` and a photon at port 2 to
``r|out1> + t|out2> + l|f2>``. The absorber states are not orthogonal:
``<f1|f2> = -2tr/l**2``. The dilation realises them on orthonormal
environment modes with ``f1 = e1`` and ``f2 = g e1 + sqrt(1-g**2) e2``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import ModeError, NoAbsorberError, NormalizationError, UnphysicalAbsorberError
from .fock import (
    ENVIRONMENT,
    OPTICAL,
    FockState,
    ModeId,
    ModeMap,
    ModeRegistry,
    apply_mode_map,
    single_photon,
)

TOL = 1e-12


@dataclass(frozen=True)
class LossyBeamSplitter:
    t: float
    r: float
    l: float
    label: str = ""

    def __post_init__(self):
        for name in ("t", "r", "l"):
            value = getattr(self, name)
            if isinstance(value, complex) or not math.isfinite(value):
                raise NormalizationError(
                    f"{name}={value!r} must be a finite real number", element=self.label)
            object.__setattr__(self, name, float(value))
        t, r, l = self.t, self.r, self.l
        total = t * t + r * r + l * l
        if abs(total - 1.0) > TOL:
            raise NormalizationError(
                f"t^2 + r^2 + l^2 = {total:.15g}, expected 1", element=self.label)
        if self.lossless:
            if abs(t * r) > TOL:
                raise UnphysicalAbsorberError(
                    f"l = 0 requires t*r = 0 (got t*r = {t * r:.6g})", element=self.label)
        elif abs(2 * t * r) > l * l + TOL:
            raise UnphysicalAbsorberError(
                f"|2tr| = {abs(2 * t * r):.6g} exceeds l^2 = {l * l:.6g}; "
                "absorber Gram matrix is not positive semidefinite",
                element=self.label)

    @property
    def lossless(self) -> bool:
        return abs(self.l) <= TOL


def new_lossy_bs(t: float, r: float, l: float, label: str = "") -> LossyBeamSplitter:
    return LossyBeamSplitter(t, r, l, label)


def gram_overlap(bs: LossyBeamSplitter) -> float:
    """Overlap <f1|f2> of the two absorber states, clipped to [-1, 1]."""
    if bs.lossless:
        raise NoAbsorberError(f"element {bs.label!r} has no loss channel", element=bs.label)
    g = -2.0 * bs.t * bs.r / (bs.l * bs.l)
    # Validation admits |2tr| up to l^2 + TOL, so |g| may exceed 1 by rounding.
    return max(-1.0, min(1.0, g))


@dataclass(frozen=True)
class PhaseShifter:
    mode: ModeId
    theta: float
    label: str = ""


def phase_map(ps: PhaseShifter) -> ModeMap:
    return ModeMap({ps.mode: {ps.mode: cmath.exp(1j * ps.theta)}})


@dataclass(frozen=True)
class DilationIsometry:
    label: str
    ports: tuple[ModeId, ModeId]
    outputs: tuple[ModeId, ModeId]
    env: tuple[ModeId, ...]
    mode_map: ModeMap
    element: LossyBeamSplitter

    def matrix(self) -> np.ndarray:
        """Rows (out1, out2, env...) by columns (port1, port2)."""
        return self.mode_map.matrix(list(self.outputs) + list(self.env), list(self.ports))

    def absorber_state(self, port: int) -> FockState:
        """Absorber state |f_port> on the environment modes (unit norm)."""
        if not self.env:
            raise NoAbsorberError(f"element {self.label!r} has no loss channel",
                                  element=self.label)
        out = apply_mode_map(single_photon(self.ports[port - 1]), self.mode_map)
        env_idx = {m.index for m in self.env}
        kept = {occ: a for occ, a in out.items() if all(i in env_idx for i, _ in occ)}
        return FockState(kept) / self.element.l


def dilate(bs: LossyBeamSplitter, ports: tuple[ModeId, ModeId],
           registry: ModeRegistry) -> DilationIsometry:
    """Build the isometry for ``bs`` acting in place on ``ports``.

    Fresh environment modes ``env:<label>:1`` (and ``:2`` when the absorber
    states are not collinear) are allocated in ``registry``.
    """
    p1, p2 = (registry[p] for p in ports)
    if p1 == p2:
        raise ModeError(f"element {bs.label!r}: ports must be distinct", element=bs.label)
    for p in (p1, p2):
        if p.kind != OPTICAL:
            raise ModeError(
                f"element {bs.label!r}: port {p} collides with an environment mode",
                element=bs.label)

    t, r, l = bs.t, bs.r, bs.l
    col1 = {p1: t, p2: r}
    col2 = {p1: r, p2: t}
    env: list[ModeId] = []
    if not bs.lossless:
        g = gram_overlap(bs)
        e1 = registry.add(f"env:{bs.label}:1", ENVIRONMENT)
        env.append(e1)
        col1[e1] = l
        if abs(abs(g) - 1.0) <= TOL:
            # Collinear absorbers: snap so the port-2 column stays unit norm.
            col2[e1] = l * math.copysign(1.0, g)
        else:
            col2[e1] = l * g
            e2 = registry.add(f"env:{bs.label}:2", ENVIRONMENT)
            env.append(e2)
            col2[e2] = l * math.sqrt(1.0 - g * g)
    mmap = ModeMap({p1: col1, p2: col2})
    return DilationIsometry(bs.label, (p1, p2), (p1, p2), tuple(env), mmap, bs)
