"""Dense reference evolution, independent of the sparse substitution engine.

Every stage is lifted to the full N-photon occupation basis over all
registered modes. Matrix elements come from the permanent formula

    <m| U |n> = perm(S[rows(m), cols(n)]) / sqrt(prod m! prod n!)

where ``S`` is the stage's single-photon substitution matrix and
``rows(m)`` repeats mode ``k`` ``m_k`` times.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, defaultdict

import numpy as np

from .errors import BasisTooLargeError, PhotonCapError
from .fock import FockState
from .network import Network, Stage

DEFAULT_BASIS_LIMIT = 4000


def occupation_basis(n_modes: int, photons: int) -> list[tuple[int, ...]]:
    """All ways to place ``photons`` bosons in ``n_modes`` modes, as sorted mode lists."""
    return list(itertools.combinations_with_replacement(range(n_modes), photons))


def _stage_matrix(stage: Stage, n_modes: int) -> np.ndarray:
    s = np.eye(n_modes, dtype=complex)
    for inp, outs in stage.mode_map.columns.items():
        s[:, inp.index] = 0
        for out, c in outs.items():
            s[out.index, inp.index] = c
    return s


def _permanents(blocks: np.ndarray) -> np.ndarray:
    """Permanent of each trailing N x N block, by summing over permutations."""
    n = blocks.shape[-1]
    if n == 0:
        return np.ones(blocks.shape[:-2], dtype=complex)
    rows = np.arange(n)
    total = np.zeros(blocks.shape[:-2], dtype=complex)
    for perm in itertools.permutations(range(n)):
        total += np.prod(blocks[..., rows, list(perm)], axis=-1)
    return total


def lifted_matrix(single: np.ndarray, basis: list[tuple[int, ...]]) -> np.ndarray:
    seqs = np.array(basis, dtype=int).reshape(len(basis), -1)
    weights = np.array([
        math.sqrt(math.prod(math.factorial(c) for c in Counter(b).values())) for b in basis
    ])
    dim, n = seqs.shape
    out = np.empty((dim, dim), dtype=complex)
    chunk = max(1, 2_000_000 // max(1, dim * max(n, 1) ** 2))
    for start in range(0, dim, chunk):
        rows = seqs[start:start + chunk]
        blocks = single[rows[:, None, :, None], seqs[None, :, None, :]]
        out[start:start + chunk] = _permanents(blocks)
    return out / np.outer(weights, weights)


def oracle_evolve_dense(net: Network, state: FockState,
                        limit: int = DEFAULT_BASIS_LIMIT) -> FockState:
    n_modes = len(net.registry)
    sectors: dict[int, dict] = defaultdict(dict)
    for occ, amp in state.items():
        sectors[sum(n for _, n in occ)][occ] = amp

    result: dict = defaultdict(complex)
    singles = [_stage_matrix(s, n_modes) for s in net.stages]
    for photons, terms in sectors.items():
        if photons > net.cap:
            raise PhotonCapError(f"input has {photons} photons, cap is {net.cap}")
        basis = occupation_basis(n_modes, photons)
        if len(basis) > limit:
            raise BasisTooLargeError(
                f"{photons}-photon basis over {n_modes} modes has {len(basis)} states "
                f"(limit {limit})")
        index = {tuple(sorted(Counter(b).items())): k for k, b in enumerate(basis)}
        vec = np.zeros(len(basis), dtype=complex)
        for occ, amp in terms.items():
            vec[index[occ]] = amp
        for single in singles:
            vec = lifted_matrix(single, basis) @ vec
        keys = list(index)
        for k, amp in enumerate(vec):
            if amp != 0:
                result[keys[k]] += amp
    return FockState(result, net.registry)
