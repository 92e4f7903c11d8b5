"""Outcome statistics of evolved states: detection, absorption, completeness."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

from .errors import ModeError, RegistryMismatchError
from .fock import FockState, ModeId
from .network import Network, evolve


class Outcome(NamedTuple):
    detected: tuple[int, ...]  # photons per optical mode, registry order
    absorbed: tuple[int, ...]  # excitations per absorbing element, stage order


@dataclass(frozen=True)
class OutcomeDistribution:
    optical: tuple[str, ...]
    elements: tuple[str, ...]
    detectors: tuple[str, ...]
    entries: dict[Outcome, float]
    residual: float

    def total(self) -> float:
        return float(sum(self.entries.values()))

    def pattern_name(self, outcome: Outcome) -> str:
        """Human-readable label such as ``D1=1;Ac=1`` (``none`` for vacuum)."""
        parts = [f"D{m}={n}" for m, n in zip(self.optical, outcome.detected) if n]
        parts += [f"A{e}={n}" for e, n in zip(self.elements, outcome.absorbed) if n]
        return ";".join(parts) or "none"


def joint_distribution(state: FockState, net: Network) -> OutcomeDistribution:
    """Bin squared amplitudes by detector counts and per-element absorptions.

    Counts in the environment modes of one element are summed: the
    element, not its internal modes, is the absorber.
    """
    if state.registry is not None and state.registry is not net.registry:
        raise RegistryMismatchError("state does not belong to this network")
    reg = net.registry
    optical_pos, env_pos = net.outcome_positions
    n_opt, n_el = len(optical_pos), len(net.elements)

    entries: dict[Outcome, float] = defaultdict(float)
    for occ, amp in state.items():
        det = [0] * n_opt
        absd = [0] * n_el
        for i, n in occ:
            if i in optical_pos:
                det[optical_pos[i]] += n
            elif i in env_pos:
                absd[env_pos[i]] += n
            else:
                raise ModeError(f"state occupies mode index {i} outside the network")
        entries[Outcome(tuple(det), tuple(absd))] += abs(amp) ** 2
    entries = dict(sorted(entries.items()))
    total = sum(entries.values())
    return OutcomeDistribution(
        optical=tuple(m.label for m in reg.optical_modes),
        elements=net.elements,
        detectors=tuple(m.label for m in net.detector_modes),
        entries=entries,
        residual=abs(1.0 - total),
    )


def _label(mode: ModeId | str) -> str:
    return mode.label if isinstance(mode, ModeId) else str(mode)


def detection_probability(dist: OutcomeDistribution, mode: ModeId | str) -> float:
    """Probability of the exclusive event: one photon at ``mode``, nothing else.

    For one-photon inputs this is P_j; for more photons use the full
    pattern table from :func:`joint_distribution`.
    """
    label = _label(mode)
    if label not in dist.detectors:
        raise ModeError(f"{label!r} is not a detector mode")
    k = dist.optical.index(label)
    target = Outcome(tuple(int(i == k) for i in range(len(dist.optical))),
                     (0,) * len(dist.elements))
    return dist.entries.get(target, 0.0)


def absorption_probability(dist: OutcomeDistribution, element: str) -> float:
    """Probability that ``element`` absorbed at least one photon."""
    if element not in dist.elements:
        raise KeyError(f"unknown absorbing element {element!r}")
    k = dist.elements.index(element)
    return float(sum(p for o, p in dist.entries.items() if o.absorbed[k] > 0))


def any_absorption_probability(dist: OutcomeDistribution,
                               elements: Iterable[str] | None = None) -> float:
    """Probability that at least one of ``elements`` (default: all) absorbed."""
    labels = dist.elements if elements is None else tuple(elements)
    for e in labels:
        if e not in dist.elements:
            raise KeyError(f"unknown absorbing element {e!r}")
    ks = [dist.elements.index(e) for e in labels]
    return float(sum(p for o, p in dist.entries.items() if any(o.absorbed[k] for k in ks)))


def conservation_residual(dist: OutcomeDistribution) -> float:
    return abs(1.0 - dist.total())


class ScanResult(NamedTuple):
    max: float
    min: float
    spread: float


def pair_absorption_scan(builder: Callable[..., tuple[Network, FockState]],
                         pair: tuple[str, str],
                         grid: Iterable) -> ScanResult:
    """Extremes of P(absorption at either element of ``pair``) over ``grid``.

    ``builder(*point)`` (or ``builder(**point)`` for dict points) returns
    the network and its input state for one grid point.
    """
    values = []
    for point in grid:
        if isinstance(point, dict):
            net, state = builder(**point)
        elif isinstance(point, tuple):
            net, state = builder(*point)
        else:
            net, state = builder(point)
        dist = joint_distribution(evolve(net, state), net)
        values.append(any_absorption_probability(dist, pair))
    if not values:
        raise ValueError("empty grid")
    hi, lo = max(values), min(values)
    return ScanResult(hi, lo, hi - lo)

