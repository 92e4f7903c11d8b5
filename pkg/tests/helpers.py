"""Random generators shared by property and acceptance tests."""

import math

import numpy as np

from lossynet import LossyBeamSplitter, ModeRegistry, PhaseShifter, build_network
from lossynet.fock import FockState, apply_creation, vacuum


def random_bs(rng, label="x", kind=None):
    """Random physical (t, r, l) with signs.

    ``kind`` forces one of "general", "boundary" (|2tr| = l^2) or
    "lossless"; by default mostly general elements are drawn.
    """
    if kind is None:
        kind = rng.choice(["general"] * 8 + ["boundary", "lossless"])
    sign = lambda: rng.choice([-1.0, 1.0])  # noqa: E731
    if kind == "lossless":
        if rng.random() < 0.5:
            return LossyBeamSplitter(sign(), 0.0, 0.0, label)
        return LossyBeamSplitter(0.0, sign(), 0.0, label)
    if kind == "boundary":
        # |t| + |r| = 1 and l^2 = 2|t r| gives t^2 + r^2 + l^2 = 1.
        a = rng.uniform(0.05, 0.95)
        t, r = a, 1.0 - a
        l = math.sqrt(max(0.0, 1.0 - t * t - r * r))
        return LossyBeamSplitter(sign() * t, sign() * r, sign() * l, label)
    while True:
        l2 = rng.uniform(0.02, 0.98)
        s = math.sqrt(1.0 - l2)
        alpha = rng.uniform(0, 2 * math.pi)
        t, r = s * math.cos(alpha), s * math.sin(alpha)
        if abs(2 * t * r) <= l2:
            return LossyBeamSplitter(t, r, math.sqrt(l2) * sign(), label)


def random_network(rng, n_elements=None, n_modes=None):
    n_modes = n_modes or int(rng.integers(2, 5))
    n_elements = n_elements or int(rng.integers(2, 5))
    registry = ModeRegistry([f"m{k}" for k in range(n_modes)])
    stages = []
    for k in range(n_elements):
        if rng.random() < 0.75:
            i, j = rng.choice(n_modes, size=2, replace=False)
            stages.append((random_bs(rng, f"e{k}"), (f"m{i}", f"m{j}")))
        else:
            m = int(rng.integers(n_modes))
            stages.append((PhaseShifter(None, rng.uniform(0, 2 * math.pi), f"p{k}"), (f"m{m}",)))
    return build_network(stages, registry)


def random_state(rng, registry, photons, n_terms=None):
    """Normalised random state with exactly ``photons`` photons on optical modes."""
    optical = registry.optical_modes
    n_terms = n_terms or int(rng.integers(1, 5))
    state = FockState({}, registry)
    for _ in range(n_terms):
        ket = vacuum(registry)
        for m in rng.choice(len(optical), size=photons):
            ket = apply_creation(ket, optical[int(m)])
        ket = ket / ket.norm()
        amp = complex(rng.normal(), rng.normal())
        state = state + amp * ket
    return state / state.norm()


def random_superposition(rng):
    """Random (alpha, beta) with |alpha|^2 + |beta|^2 = 1."""
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return complex(v[0]), complex(v[1])
