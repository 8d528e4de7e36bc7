"""Observables as projection-valued measures over a finite spectrum."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import CommutationError, InvalidDimensionError, OwnershipError
from .linalg import (
    DEFAULT_TOL,
    Operator,
    Tolerance,
    as_operator,
    commutator,
    eig_hermitian,
    op_norm,
)


class Observable:
    """A Hermitian operator together with its spectral decomposition.

    ``spectrum`` is the ascending tuple of distinct eigenvalues and
    ``projectors[k]`` projects onto the eigenspace of ``spectrum[k]``.
    Instances are compared by identity: an :class:`OutcomeSet` belongs to
    exactly one observable object.
    """

    def __init__(self, op, tol: Tolerance = DEFAULT_TOL, name: str | None = None):
        op = as_operator(op).copy()
        pairs = eig_hermitian(op, tol)
        self.op = op
        self.op.setflags(write=False)
        self.spectrum = tuple(v for v, _ in pairs)
        self.projectors = tuple(p for _, p in pairs)
        for p in self.projectors:
            p.setflags(write=False)
        self.tol = tol
        self.name = name

    @classmethod
    def from_spectral(cls, values: Iterable[float], projectors: Iterable[Operator],
                      tol: Tolerance = DEFAULT_TOL, name: str | None = None) -> "Observable":
        """Build ``sum(v * P)``; the decomposition is recomputed, so equal values merge."""
        op = sum(v * np.asarray(p, dtype=complex) for v, p in zip(values, projectors))
        return cls(op, tol, name)

    @property
    def dim(self) -> int:
        return self.op.shape[0]

    def __repr__(self) -> str:
        label = f"{self.name!r}, " if self.name else ""
        vals = ", ".join(f"{v:.6g}" for v in self.spectrum)
        return f"Observable({label}dim={self.dim}, spectrum=[{vals}])"

    # -- outcome sets ------------------------------------------------------

    def index_of(self, value: float) -> int:
        """Spectrum index of the eigenvalue closest to ``value`` (within the cluster tolerance)."""
        diffs = [abs(v - value) for v in self.spectrum]
        k = int(np.argmin(diffs))
        if diffs[k] > max(self.tol.eig_cluster_tol, 1e-9 * max(1.0, abs(value))):
            raise ValueError(f"{value!r} is not an eigenvalue of {self!r}")
        return k

    def outcomes(self, values: Iterable[float] = ()) -> "OutcomeSet":
        return OutcomeSet(self, frozenset(self.index_of(v) for v in values))

    def indices(self, idx: Iterable[int]) -> "OutcomeSet":
        return OutcomeSet(self, frozenset(idx))

    def singleton(self, k: int) -> "OutcomeSet":
        return OutcomeSet(self, frozenset([k]))

    def full(self) -> "OutcomeSet":
        return OutcomeSet(self, frozenset(range(len(self.spectrum))))

    def empty(self) -> "OutcomeSet":
        return OutcomeSet(self, frozenset())

    def singletons(self) -> list["OutcomeSet"]:
        return [self.singleton(k) for k in range(len(self.spectrum))]

    def all_outcome_sets(self) -> Iterator["OutcomeSet"]:
        """Every subset of the spectrum, the finite stand-in for all Borel sets."""
        n = len(self.spectrum)
        for r in range(n + 1):
            for combo in itertools.combinations(range(n), r):
                yield OutcomeSet(self, frozenset(combo))

    def function_of(self, f: Mapping[int, float] | None = None) -> Operator:
        """``f(A) = sum f(k) P_k`` with ``f`` keyed by spectrum index."""
        if f is None:
            return self.op.copy()
        return sum(f[k] * p for k, p in enumerate(self.projectors))


@dataclass(frozen=True, eq=False)
class OutcomeSet:
    """A subset of an observable's spectrum, stored as spectrum indices."""

    observable: Observable
    members: frozenset

    def __post_init__(self):
        n = len(self.observable.spectrum)
        bad = [k for k in self.members if not (0 <= k < n)]
        if bad:
            raise ValueError(f"outcome indices {bad} out of range for {self.observable!r}")

    def __eq__(self, other):
        return (isinstance(other, OutcomeSet) and other.observable is self.observable
                and other.members == self.members)

    def __hash__(self):
        return hash((id(self.observable), self.members))

    def __iter__(self):
        return iter(sorted(self.members))

    def __len__(self):
        return len(self.members)

    @property
    def values(self) -> tuple[float, ...]:
        return tuple(self.observable.spectrum[k] for k in sorted(self.members))

    def _same(self, other: "OutcomeSet") -> None:
        if other.observable is not self.observable:
            raise OwnershipError("outcome sets belong to different observables")

    def union(self, other: "OutcomeSet") -> "OutcomeSet":
        self._same(other)
        return OutcomeSet(self.observable, self.members | other.members)

    def intersection(self, other: "OutcomeSet") -> "OutcomeSet":
        self._same(other)
        return OutcomeSet(self.observable, self.members & other.members)

    def complement(self) -> "OutcomeSet":
        return OutcomeSet(self.observable,
                          frozenset(range(len(self.observable.spectrum))) - self.members)

    def is_full(self) -> bool:
        return len(self.members) == len(self.observable.spectrum)

    def __repr__(self) -> str:
        return f"OutcomeSet({list(self.values)})"


def _check_owner(a: Observable, s: OutcomeSet) -> None:
    if s.observable is not a:
        raise OwnershipError(f"{s!r} does not belong to {a!r}")


def _check_state_dim(a: Observable, rho: Operator) -> None:
    rho = np.asarray(rho)
    if rho.shape != (a.dim, a.dim):
        raise InvalidDimensionError(
            f"state of shape {rho.shape} does not act on dimension {a.dim}"
        )


def spectral_projector(a: Observable, s: OutcomeSet) -> Operator:
    _check_owner(a, s)
    out = np.zeros((a.dim, a.dim), dtype=complex)
    for k in s.members:
        out = out + a.projectors[k]
    return out


def born_probability(a: Observable, s: OutcomeSet, rho: Operator) -> float:
    """Tr[E^A(s) rho], clamped to [0, 1]."""
    _check_state_dim(a, rho)
    p = np.trace(spectral_projector(a, s) @ rho).real
    return float(min(1.0, max(0.0, p)))


def commutator_norm(a: Observable, b: Observable) -> float:
    if a.dim != b.dim:
        raise InvalidDimensionError(f"observables act on dimensions {a.dim} and {b.dim}")
    return op_norm(commutator(a.op, b.op))


def projectors_commute(a: Observable, b: Observable, tol: Tolerance = DEFAULT_TOL) -> bool:
    """Projector-level commutation: every pair of spectral projectors commutes."""
    if a.dim != b.dim:
        raise InvalidDimensionError(f"observables act on dimensions {a.dim} and {b.dim}")
    return all(op_norm(commutator(p, q)) <= tol.eq_tol
               for p in a.projectors for q in b.projectors)


def commutes(a: Observable, b: Observable, tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff the spectral norm of [A, B] is at most ``tol.eq_tol``.

    This is the authoritative test; :func:`projectors_commute` agrees with it
    away from borderline cases (projector commutators scale like
    ||[A, B]|| / spectral gap).
    """
    return commutator_norm(a, b) <= tol.eq_tol


def joint_probability_commuting(a: Observable, s: OutcomeSet, b: Observable,
                                s2: OutcomeSet, rho: Operator,
                                tol: Tolerance = DEFAULT_TOL) -> float:
    """Tr[E^A(s) E^B(s2) rho] for commuting ``a`` and ``b``."""
    if not commutes(a, b, tol):
        raise CommutationError(f"{a!r} and {b!r} do not commute")
    _check_state_dim(a, rho)
    p = np.trace(spectral_projector(a, s) @ spectral_projector(b, s2) @ rho).real
    return float(min(1.0, max(0.0, p)))


@dataclass(frozen=True)
class JointRefinement:
    """A common refinement ``c`` with ``a = f(c)`` and ``b = g(c)``.

    ``f`` and ``g`` are keyed by spectrum index of ``c`` and give the
    eigenvalue of ``a`` (resp. ``b``) assigned to that outcome.
    """

    c: Observable
    f: Mapping[int, float]
    g: Mapping[int, float]

    def f_of_c(self) -> Operator:
        return self.c.function_of(self.f)

    def g_of_c(self) -> Operator:
        return self.c.function_of(self.g)

    def joint_probability(self, a: Observable, s: OutcomeSet, b: Observable,
                          s2: OutcomeSet, rho: Operator) -> float:
        """Probability that post-processing a ``c`` outcome lands in ``s`` and ``s2``."""
        _check_owner(a, s)
        _check_owner(b, s2)
        va, vb = set(s.values), set(s2.values)
        hits = [k for k in range(len(self.c.spectrum)) if self.f[k] in va and self.g[k] in vb]
        return sum(born_probability(self.c, self.c.singleton(k), rho) for k in hits)


def joint_refinement(a: Observable, b: Observable,
                     tol: Tolerance = DEFAULT_TOL) -> JointRefinement:
    """Common refinement from the nonzero products of spectral projectors.

    Outcome ``k`` of ``c`` labels the k-th nonzero product ``P^A_i P^B_j`` in
    (i, j) order; its eigenvalue is ``k`` itself.
    """
    if not commutes(a, b, tol):
        raise CommutationError(f"{a!r} and {b!r} do not commute")
    projs, f, g = [], {}, {}
    for i, p in enumerate(a.projectors):
        for j, q in enumerate(b.projectors):
            pq = p @ q
            if op_norm(pq) <= tol.eq_tol:
                continue
            k = len(projs)
            projs.append((pq + pq.conj().T) / 2)
            f[k] = a.spectrum[i]
            g[k] = b.spectrum[j]
    c = Observable.from_spectral(range(len(projs)), projs, tol)
    # eigenvalues 0..k-1 are a unit apart, so the clustering keeps them distinct
    assert len(c.spectrum) == len(projs)
    return JointRefinement(c, f, g)
