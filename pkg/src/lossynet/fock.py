"""Sparse multi-mode Fock states.

A state is a map from canonical occupation vectors to complex amplitudes.
Occupation vectors are stored as tuples of ``(mode index, count)`` pairs
sorted by index with zero counts omitted, so equal physical states hash
and compare equal regardless of how they were assembled.

Linear optical elements act on states by substituting each consumed
creation operator with a linear combination of output creation operators
(see :class:`ModeMap` and :func:`apply_mode_map`).
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .errors import ModeError, RegistryMismatchError, WriteOnceError

OPTICAL = "optical"
ENVIRONMENT = "environment"

PRUNE_THRESHOLD = 1e-14

Occupation = tuple  # tuple[tuple[int, int], ...]


@dataclass(frozen=True, order=True)
class ModeId:
    index: int
    kind: str = field(default=OPTICAL, compare=False)
    label: str = field(default="", compare=False)

    def __str__(self) -> str:
        return self.label or f"#{self.index}"


class ModeRegistry:
    """Allocates mode indices and remembers their kind and label."""

    def __init__(self, optical: Iterable[str] = ()):
        self._modes: list[ModeId] = []
        self._by_label: dict[str, ModeId] = {}
        for label in optical:
            self.add(label)

    def add(self, label: str, kind: str = OPTICAL) -> ModeId:
        if kind not in (OPTICAL, ENVIRONMENT):
            raise ModeError(f"unknown mode kind {kind!r}")
        label = str(label)
        if label in self._by_label:
            existing = self._by_label[label]
            if existing.kind == ENVIRONMENT or kind == ENVIRONMENT:
                raise WriteOnceError(f"environment mode {label!r} already allocated")
            raise ModeError(f"mode label {label!r} already registered")
        mode = ModeId(len(self._modes), kind, label)
        self._modes.append(mode)
        self._by_label[label] = mode
        return mode

    def __getitem__(self, key: str | int | ModeId) -> ModeId:
        if isinstance(key, ModeId):
            if key not in self:
                raise ModeError(f"mode {key} is not registered")
            return self._modes[key.index]
        if isinstance(key, (int, np.integer)):
            if not 0 <= key < len(self._modes):
                raise ModeError(f"no mode with index {key}")
            return self._modes[key]
        try:
            return self._by_label[str(key)]
        except KeyError:
            raise ModeError(f"mode {key!r} is not registered") from None

    def resolve(self, key: str | int | ModeId) -> ModeId:
        return self[key]

    def __contains__(self, mode: object) -> bool:
        if isinstance(mode, ModeId):
            return (
                0 <= mode.index < len(self._modes)
                and self._modes[mode.index].label == mode.label
                and self._modes[mode.index].kind == mode.kind
            )
        return str(mode) in self._by_label

    def __len__(self) -> int:
        return len(self._modes)

    def __iter__(self) -> Iterator[ModeId]:
        return iter(self._modes)

    @property
    def modes(self) -> tuple[ModeId, ...]:
        return tuple(self._modes)

    @property
    def optical_modes(self) -> tuple[ModeId, ...]:
        return tuple(m for m in self._modes if m.kind == OPTICAL)

    @property
    def environment_modes(self) -> tuple[ModeId, ...]:
        return tuple(m for m in self._modes if m.kind == ENVIRONMENT)

    def __repr__(self) -> str:
        return f"ModeRegistry({[m.label for m in self._modes]})"


def _canonical(occupation) -> Occupation:
    """Normalise a ``{mode: count}`` mapping or pair sequence into a key."""
    items = occupation.items() if isinstance(occupation, Mapping) else occupation
    merged: dict[int, int] = defaultdict(int)
    for mode, count in items:
        index = mode.index if isinstance(mode, ModeId) else int(mode)
        if count < 0:
            raise ValueError("occupation counts must be non-negative")
        merged[index] += int(count)
    return tuple(sorted((i, n) for i, n in merged.items() if n))


class FockState:
    """Immutable sparse state: canonical occupation vector -> amplitude.

    ``registry`` is optional. States built without one are compatible with
    any registry; two bound states must share the same registry object.
    """

    __slots__ = ("_terms", "registry")

    def __init__(self, terms=None, registry: ModeRegistry | None = None,
                 threshold: float = PRUNE_THRESHOLD):
        acc: dict[Occupation, complex] = defaultdict(complex)
        if terms:
            items = terms.items() if isinstance(terms, Mapping) else terms
            for occ, amp in items:
                acc[_canonical(occ)] += complex(amp)
        self._terms = {k: v for k, v in acc.items() if abs(v) >= threshold and v != 0}
        self.registry = registry

    @classmethod
    def _raw(cls, terms: dict, registry, threshold: float = PRUNE_THRESHOLD) -> "FockState":
        # Trusted fast path: keys already canonical.
        obj = cls.__new__(cls)
        obj._terms = {k: v for k, v in terms.items() if abs(v) >= threshold and v != 0}
        obj.registry = registry
        return obj

    @property
    def terms(self) -> Mapping[Occupation, complex]:
        return MappingProxyType(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def amplitude(self, occupation) -> complex:
        return self._terms.get(_canonical(occupation), 0j)

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self._terms.values()))

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def photon_numbers(self) -> set[int]:
        return {sum(n for _, n in occ) for occ in self._terms}

    def occupied_modes(self) -> set[int]:
        return {i for occ in self._terms for i, _ in occ}

    def _registry_with(self, other: "FockState") -> ModeRegistry | None:
        if self.registry is not None and other.registry is not None \
                and self.registry is not other.registry:
            raise RegistryMismatchError("states belong to different mode registries")
        return self.registry if self.registry is not None else other.registry

    def __add__(self, other: "FockState") -> "FockState":
        if not isinstance(other, FockState):
            return NotImplemented
        registry = self._registry_with(other)
        acc = dict(self._terms)
        for occ, amp in other._terms.items():
            acc[occ] = acc.get(occ, 0j) + amp
        return FockState._raw(acc, registry)

    def __neg__(self) -> "FockState":
        return FockState._raw({k: -v for k, v in self._terms.items()}, self.registry)

    def __sub__(self, other: "FockState") -> "FockState":
        return self + (-other)

    def __mul__(self, scalar) -> "FockState":
        if not isinstance(scalar, (int, float, complex, np.number)):
            return NotImplemented
        s = complex(scalar)
        return FockState._raw({k: v * s for k, v in self._terms.items()}, self.registry)

    __rmul__ = __mul__

    def __truediv__(self, scalar) -> "FockState":
        return self * (1 / complex(scalar))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FockState):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def allclose(self, other: "FockState", atol: float = 1e-12) -> bool:
        return max_abs_difference(self, other) <= atol

    def labelled(self) -> dict[tuple[tuple[str, int], ...], complex]:
        """Terms keyed by mode labels, for display and debugging."""
        if self.registry is None:
            return {tuple((f"#{i}", n) for i, n in occ): a for occ, a in self._terms.items()}
        reg = self.registry
        return {tuple((reg[i].label, n) for i, n in occ): a for occ, a in self._terms.items()}

    def __repr__(self) -> str:
        parts = []
        for occ, amp in sorted(self.labelled().items()):
            ket = ",".join(f"{lab}:{n}" for lab, n in occ) or "vac"
            parts.append(f"({amp:.6g})|{ket}>")
        return "FockState(" + " + ".join(parts) + ")" if parts else "FockState(0)"


def max_abs_difference(a: FockState, b: FockState) -> float:
    keys = set(a._terms) | set(b._terms)
    if not keys:
        return 0.0
    return max(abs(a._terms.get(k, 0j) - b._terms.get(k, 0j)) for k in keys)


def vacuum(registry: ModeRegistry | None = None) -> FockState:
    return FockState._raw({(): 1 + 0j}, registry)


def _check_mode(registry: ModeRegistry | None, mode: ModeId) -> None:
    if not isinstance(mode, ModeId):
        raise ModeError(f"expected a ModeId, got {mode!r}")
    if registry is not None and mode not in registry:
        raise ModeError(f"mode {mode} is not registered")


def apply_creation(state: FockState, mode: ModeId) -> FockState:
    """Apply a creation operator on ``mode``; the result is not renormalised."""
    _check_mode(state.registry, mode)
    k = mode.index
    out: dict[Occupation, complex] = {}
    for occ, amp in state._terms.items():
        counts = dict(occ)
        n = counts.get(k, 0)
        counts[k] = n + 1
        out[tuple(sorted(counts.items()))] = amp * math.sqrt(n + 1)
    return FockState._raw(out, state.registry)


def single_photon(mode: ModeId, registry: ModeRegistry | None = None) -> FockState:
    return apply_creation(vacuum(registry), mode)


def fock(occupation: Mapping[ModeId, int], registry: ModeRegistry | None = None) -> FockState:
    """Normalised basis state with the given counts."""
    for mode in occupation:
        _check_mode(registry, mode)
    return FockState._raw({_canonical(occupation): 1 + 0j}, registry)


def inner_product(a: FockState, b: FockState) -> complex:
    """<a|b>, conjugate-linear in ``a``."""
    a._registry_with(b)
    small, large = (a, b) if len(a) <= len(b) else (b, a)
    total = 0j
    for occ, amp in small._terms.items():
        other = large._terms.get(occ)
        if other is not None:
            total += amp.conjugate() * other if small is a else other.conjugate() * amp
    return total


class ModeMap:
    """Linear substitution of creation operators.

    ``columns`` maps each consumed input mode to ``{output mode: coeff}``:
    the creation operator of the input mode is replaced by
    ``sum(coeff * a_out^dagger)``. Modes not in ``input_modes`` are left
    untouched.
    """

    def __init__(self, columns: Mapping[ModeId, Mapping[ModeId, complex]]):
        cols: dict[ModeId, dict[ModeId, complex]] = {}
        for inp, outs in columns.items():
            cols[inp] = {o: complex(c) for o, c in outs.items() if c != 0}
        self._columns = MappingProxyType(cols)
        self._outputs = frozenset(o for outs in cols.values() for o in outs)
        self._subs = {
            inp.index: tuple((o.index, c) for o, c in sorted(outs.items()))
            for inp, outs in cols.items()
        }
        self._targets = frozenset(o for form in self._subs.values() for o, _ in form)
        # Expansion memo keyed by the consumed part of a ket; the map is immutable.
        self._memo: dict = {}

    @classmethod
    def from_rows(cls, rows: Mapping[ModeId, Mapping[ModeId, complex]]) -> "ModeMap":
        cols: dict[ModeId, dict[ModeId, complex]] = defaultdict(dict)
        for out, ins in rows.items():
            for inp, c in ins.items():
                cols[inp][out] = c
        return cls(cols)

    @classmethod
    def identity(cls, modes: Iterable[ModeId] = ()) -> "ModeMap":
        return cls({m: {m: 1.0} for m in modes})

    @property
    def columns(self) -> Mapping[ModeId, Mapping[ModeId, complex]]:
        return self._columns

    @property
    def rows(self) -> dict[ModeId, dict[ModeId, complex]]:
        rows: dict[ModeId, dict[ModeId, complex]] = defaultdict(dict)
        for inp, outs in self._columns.items():
            for out, c in outs.items():
                rows[out][inp] = c
        return dict(rows)

    @property
    def input_modes(self) -> frozenset[ModeId]:
        return frozenset(self._columns)

    @property
    def output_modes(self) -> frozenset[ModeId]:
        return self._outputs

    def matrix(self, outputs: Sequence[ModeId] | None = None,
               inputs: Sequence[ModeId] | None = None) -> np.ndarray:
        inputs = sorted(self._columns) if inputs is None else list(inputs)
        outputs = sorted(self.output_modes) if outputs is None else list(outputs)
        pos = {m: i for i, m in enumerate(outputs)}
        mat = np.zeros((len(outputs), len(inputs)), dtype=complex)
        for j, inp in enumerate(inputs):
            for out, c in self._columns.get(inp, {}).items():
                mat[pos[out], j] = c
        return mat

    def is_isometry(self, atol: float = 1e-12) -> bool:
        m = self.matrix()
        return bool(np.allclose(m.conj().T @ m, np.eye(m.shape[1]), rtol=0, atol=atol))

    def __repr__(self) -> str:
        body = {str(i): {str(o): c for o, c in outs.items()} for i, outs in self._columns.items()}
        return f"ModeMap({body})"


def _times_linear(poly: dict, form: tuple) -> dict:
    out: dict = defaultdict(complex)
    for mono, c in poly.items():
        for o, k in form:
            counts = dict(mono)
            counts[o] = counts.get(o, 0) + 1
            out[tuple(sorted(counts.items()))] += c * k
    return out


def _expand(moved: Occupation, subs: dict) -> dict:
    """Monomial coefficients of prod_p (sum_o M[o,p] x_o)^{n_p}."""
    poly: dict = {(): 1 + 0j}
    for i, n in moved:
        for _ in range(n):
            poly = _times_linear(poly, subs[i])
    return poly


def _factorial_weight(occ: Occupation) -> float:
    return math.prod(math.factorial(n) for _, n in occ)


def _ket_expansion(moved: Occupation, subs: dict) -> tuple:
    """Normalised-ket coefficients for the moved part of one basis ket.

    Valid as-is whenever the untouched modes of the ket do not overlap the
    map's outputs; the bosonic weights of those modes then cancel.
    """
    base = math.sqrt(_factorial_weight(moved))
    return tuple(
        (mono, c * math.sqrt(_factorial_weight(mono)) / base)
        for mono, c in _expand(moved, subs).items()
    )


def apply_mode_map(state: FockState, mmap: ModeMap,
                   threshold: float = PRUNE_THRESHOLD) -> FockState:
    """Evolve ``state`` by substituting creation operators per ``mmap``.

    Each basis ket prod_p (a_p^dag)^{n_p} / sqrt(n_p!) |vac> is rewritten
    in monomial form, the substitution is expanded, and monomials are
    converted back to normalised kets with sqrt(m!) weights.
    """
    reg = state.registry
    for inp in mmap.input_modes:
        _check_mode(reg, inp)
        if inp.kind == ENVIRONMENT:
            raise WriteOnceError(f"map consumes environment mode {inp}, which is write-once")
    for out_mode in mmap.output_modes:
        _check_mode(reg, out_mode)
    return FockState._raw(_substitute(state._terms, mmap), reg, threshold)


def _substitute(terms: Mapping[Occupation, complex], mmap: ModeMap) -> dict:
    """Unchecked core of :func:`apply_mode_map`; returns unpruned terms."""
    subs = mmap._subs
    targets = mmap._targets
    memo = mmap._memo
    out: dict[Occupation, complex] = defaultdict(complex)
    for occ, amp in terms.items():
        moved = tuple((i, n) for i, n in occ if i in subs)
        if not moved:
            out[occ] += amp
            continue
        expansion = memo.get(moved)
        if expansion is None:
            expansion = memo[moved] = _ket_expansion(moved, subs)
        if len(moved) == len(occ):
            for mono, c in expansion:
                out[mono] += amp * c
            continue
        fixed = tuple((i, n) for i, n in occ if i not in subs)
        if not any(i in targets for i, _ in fixed):
            for mono, c in expansion:
                out[tuple(sorted(fixed + mono))] += amp * c
            continue
        # Outputs land on occupied untouched modes: redo the bosonic weights.
        scale = amp * math.sqrt(_factorial_weight(moved) / _factorial_weight(occ))
        for mono, c in expansion:
            counts = dict(fixed)
            for o, m in mono:
                counts[o] = counts.get(o, 0) + m
            key = tuple(sorted(counts.items()))
            out[key] += scale * c * math.sqrt(
                _factorial_weight(key) / _factorial_weight(mono))
    return out


def marginal_counts(state: FockState, modes: Sequence[ModeId]) -> dict[tuple[int, ...], float]:
    """Probability of each count pattern on ``modes`` (in the given order)."""
    modes = list(modes)
    for m in modes:
        _check_mode(state.registry, m)
    indices = [m.index for m in modes]
    dist: dict[tuple[int, ...], float] = defaultdict(float)
    for occ, amp in state._terms.items():
        counts = dict(occ)
        dist[tuple(counts.get(i, 0) for i in indices)] += abs(amp) ** 2
    return dict(dist)


def prune(state: FockState, threshold: float = PRUNE_THRESHOLD) -> FockState:
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    return FockState._raw(dict(state._terms), state.registry, threshold)
