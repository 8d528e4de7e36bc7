"""Indirect measurement models: an ancilla in state sigma, a coupling unitary U
and a meter observable read out on the ancilla after the interaction.

Object and ancilla are ordered object (x) ancilla throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .errors import (
    InvalidDimensionError,
    InvalidOperatorError,
    LocalityError,
    NotAMeasurementError,
    OwnershipError,
    PreconditionError,
)
from .instruments import CPMap, Instrument, kraus_from_choi
from .linalg import (
    DEFAULT_TOL,
    Operator,
    Tolerance,
    as_density,
    as_operator,
    dag,
    expm_hermitian,
    is_unitary,
    matrix_units,
    op_norm,
    partial_trace_second,
    random_density,
    spanning_states,
    tensor,
)
from .observables import (
    Observable,
    OutcomeSet,
    commutator_norm,
    spectral_projector,
)


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    sigma: Operator
    u: Operator
    meter: Observable
    measured: Observable
    name: str = ""

    def __post_init__(self):
        d, m = self.measured.dim, self.meter.dim
        object.__setattr__(self, "sigma", as_density(self.sigma, m))
        u = as_operator(self.u, d * m)
        if not is_unitary(u):
            raise InvalidOperatorError(f"coupling of model {self.name!r} is not unitary")
        object.__setattr__(self, "u", u)

    @property
    def obj_dim(self) -> int:
        return self.measured.dim

    @property
    def anc_dim(self) -> int:
        return self.meter.dim

    def __repr__(self) -> str:
        label = f"{self.name!r}, " if self.name else ""
        return f"MeasurementModel({label}obj_dim={self.obj_dim}, anc_dim={self.anc_dim})"

    def meter_projector(self, meter_indices) -> Operator:
        """I (x) E^M(indices) on the composite space."""
        e = np.zeros((self.anc_dim, self.anc_dim), dtype=complex)
        for k in meter_indices:
            e = e + self.meter.projectors[k]
        return tensor(np.eye(self.obj_dim), e)

    def evolve(self, rho: Operator) -> Operator:
        """U (rho (x) sigma) U^dag."""
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (self.obj_dim, self.obj_dim):
            raise InvalidDimensionError(
                f"operator of shape {rho.shape} does not act on the object space of {self!r}"
            )
        return self.u @ tensor(rho, self.sigma) @ dag(self.u)


@dataclass(frozen=True)
class OutcomeCorrespondence:
    """Injective map from spectrum indices of the measured observable to
    spectrum indices of the meter: measured outcome ``a`` is registered as
    meter outcome ``pairs[a]``.
    """

    pairs: tuple

    def __post_init__(self):
        targets = [m for _, m in self.pairs]
        if len(set(targets)) != len(targets):
            raise ValueError("outcome correspondence must be injective")

    @classmethod
    def from_values(cls, measured: Observable, meter: Observable,
                    mapping: Mapping[float, float] | None = None) -> "OutcomeCorrespondence":
        """Build from eigenvalues; by default each measured value maps to the equal meter value."""
        if mapping is None:
            mapping = {v: v for v in measured.spectrum}
        pairs = tuple(sorted((measured.index_of(a), meter.index_of(m)) for a, m in mapping.items()))
        return cls.checked(pairs, measured, meter)

    @classmethod
    def checked(cls, pairs, measured: Observable, meter: Observable) -> "OutcomeCorrespondence":
        corr = cls(tuple(sorted(pairs)))
        corr.validate(measured, meter)
        return corr

    def validate(self, measured: Observable, meter: Observable) -> None:
        sources = [a for a, _ in self.pairs]
        if sorted(sources) != list(range(len(measured.spectrum))):
            raise ValueError("every measured eigenvalue must be mapped exactly once")
        if any(not (0 <= m < len(meter.spectrum)) for _, m in self.pairs):
            raise ValueError("meter index out of range")

    def meter_index(self, a: int) -> int:
        return dict(self.pairs)[a]

    def meter_indices(self, s: OutcomeSet) -> list[int]:
        table = dict(self.pairs)
        return [table[a] for a in sorted(s.members)]

    def unmatched(self, meter: Observable) -> list[int]:
        used = {m for _, m in self.pairs}
        return [k for k in range(len(meter.spectrum)) if k not in used]


@dataclass(frozen=True)
class Bipartition:
    """Object space H1 (x) H2; ``local_to`` (1 or 2) names the factor the
    measuring interaction is allowed to touch.
    """

    dim1: int
    dim2: int
    local_to: int = 1

    def __post_init__(self):
        if self.dim1 < 1 or self.dim2 < 1 or self.local_to not in (1, 2):
            raise InvalidDimensionError(f"invalid bipartition {self}")


# ---------------------------------------------------------------------------
# state changes
# ---------------------------------------------------------------------------

def nonselective_change(m: MeasurementModel, rho: Operator) -> Operator:
    """Tr_A[U (rho (x) sigma) U^dag]."""
    return partial_trace_second(m.evolve(rho), m.obj_dim, m.anc_dim)


def heisenberg_image(m: MeasurementModel, x: Operator) -> Operator:
    """Tr_A[U^dag (x (x) I) U (I (x) sigma)], the dual of :func:`nonselective_change`."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (m.obj_dim, m.obj_dim):
        raise InvalidDimensionError(f"operator of shape {x.shape} on object of dim {m.obj_dim}")
    big = dag(m.u) @ tensor(x, np.eye(m.anc_dim)) @ m.u @ tensor(np.eye(m.obj_dim), m.sigma)
    return partial_trace_second(big, m.obj_dim, m.anc_dim)


def meter_branch(m: MeasurementModel, meter_indices, rho: Operator) -> Operator:
    """Tr_A[(I (x) E^M) U (rho (x) sigma) U^dag (I (x) E^M)] for a set of meter outcomes."""
    p = m.meter_projector(meter_indices)
    return partial_trace_second(p @ m.evolve(rho) @ p, m.obj_dim, m.anc_dim)


def meter_probability(m: MeasurementModel, meter_indices, rho: Operator) -> float:
    return float(np.trace(m.meter_projector(meter_indices) @ m.evolve(rho)).real)


def _test_states(dim: int, trials: int, seed) -> list[Operator]:
    ss = np.random.SeedSequence(seed)
    return spanning_states(dim) + [random_density(dim, k) for k in ss.spawn(trials)]


def measurement_residual(m: MeasurementModel, corr: OutcomeCorrespondence, trials: int = 5,
                         seed: int = 0) -> float:
    """Largest statistics mismatch between meter readout and the measured observable.

    Unmatched meter outcomes contribute their (should-be-zero) probability.
    """
    corr.validate(m.measured, m.meter)
    worst = 0.0
    unmatched = corr.unmatched(m.meter)
    for rho in _test_states(m.obj_dim, trials, seed):
        for a, k in corr.pairs:
            born = np.trace(m.measured.projectors[a] @ rho).real
            worst = max(worst, abs(meter_probability(m, [k], rho) - born))
        if unmatched:
            worst = max(worst, abs(meter_probability(m, unmatched, rho)))
    return float(worst)


def measures_observable_check(m: MeasurementModel, corr: OutcomeCorrespondence,
                              trials: int = 5, seed: int = 0,
                              tol: Tolerance = DEFAULT_TOL) -> bool:
    """Does reading the meter reproduce the Born statistics of ``m.measured``?

    Decided on a spanning set of states (exact by linearity) plus ``trials``
    random states.
    """
    return measurement_residual(m, corr, trials, seed) <= tol.eq_tol


def branch_choi(m: MeasurementModel, meter_indices) -> Operator:
    d = m.obj_dim
    blocks = np.zeros((d, d, d, d), dtype=complex)
    p = m.meter_projector(meter_indices)
    big_sigma = m.sigma
    for idx, e in enumerate(matrix_units(d)):
        i, j = divmod(idx, d)
        out = p @ m.u @ tensor(e, big_sigma) @ dag(m.u) @ p
        blocks[i, :, j, :] = partial_trace_second(out, d, m.anc_dim)
    return blocks.reshape(d * d, d * d)


def induced_instrument(m: MeasurementModel, corr: OutcomeCorrespondence,
                       tol: Tolerance = DEFAULT_TOL, cutoff: float = 1e-12) -> Instrument:
    """The instrument realized by ``m``, branches in canonical Kraus form."""
    if not measures_observable_check(m, corr, tol=tol):
        raise NotAMeasurementError(f"{m!r} does not measure {m.measured!r} under {corr}")
    branches = []
    for a in range(len(m.measured.spectrum)):
        choi = branch_choi(m, [corr.meter_index(a)])
        branches.append(CPMap(kraus_from_choi(choi, m.obj_dim, cutoff)))
    return Instrument(m.measured, tuple(branches))


# ---------------------------------------------------------------------------
# disturbance
# ---------------------------------------------------------------------------

def nondisturbance_residual(m: MeasurementModel, b: Observable) -> float:
    """max over outcome sets s of ||E^B(s) - heisenberg_image(E^B(s))||."""
    if b.dim != m.obj_dim:
        raise InvalidDimensionError(f"{b!r} does not act on the object of {m!r}")
    worst = 0.0
    for s in b.all_outcome_sets():
        e = spectral_projector(b, s)
        worst = max(worst, op_norm(e - heisenberg_image(m, e)))
    return worst


def nondisturbance_check(m: MeasurementModel, b: Observable,
                         tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff the nonselective state change leaves the distribution of ``b`` unchanged."""
    return nondisturbance_residual(m, b) <= tol.eq_tol


def nondisturbance_with_evolution(m: MeasurementModel, b: Observable, h: Observable, dt: float,
                                  tol: Tolerance = DEFAULT_TOL) -> bool:
    """Compare the distribution of ``b`` after free evolution exp(-i h dt) (hbar = 1)
    with its distribution after the nonselective measurement change.
    """
    if b.dim != m.obj_dim or h.dim != m.obj_dim:
        raise InvalidDimensionError("observables must act on the model's object space")
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    v = expm_hermitian(h.op, dt)
    worst = 0.0
    for rho in spanning_states(m.obj_dim):
        free = v @ rho @ dag(v)
        measured = nonselective_change(m, rho)
        for s in b.all_outcome_sets():
            e = spectral_projector(b, s)
            worst = max(worst, abs(np.trace(e @ free) - np.trace(e @ measured)))
    return worst <= tol.eq_tol


def joint_prob_consecutive(m: MeasurementModel, corr: OutcomeCorrespondence, s: OutcomeSet,
                           b: Observable, s2: OutcomeSet, rho: Operator) -> float:
    """Pr{outcome of ``m`` in s, then ``b`` in s2 right after}."""
    if s.observable is not m.measured:
        raise OwnershipError(f"{s!r} does not belong to the measured observable of {m!r}")
    if s2.observable is not b:
        raise OwnershipError(f"{s2!r} does not belong to {b!r}")
    branch = meter_branch(m, corr.meter_indices(s), rho)
    return float(np.trace(spectral_projector(b, s2) @ branch).real)


@dataclass
class Theorem1Report:
    nondisturbing: bool
    nondisturbance_residual: float
    joint_residual: float
    commutator_norm: float
    tol: float
    worst_instance: tuple = ()

    @property
    def consistent(self) -> bool:
        """The equivalence and the commutation clause hold for this model/observable pair."""
        if self.nondisturbing:
            return self.joint_residual <= self.tol and self.commutator_norm <= self.tol
        return self.joint_residual > self.tol

    def residuals(self) -> dict[str, float]:
        return {
            "nondisturbance": self.nondisturbance_residual,
            "joint": self.joint_residual,
            "commutator": self.commutator_norm,
        }


def joint_formula_residual(m: MeasurementModel, corr: OutcomeCorrespondence, b: Observable,
                           states) -> tuple[float, tuple]:
    """max |Pr_consecutive(s, s2) - Tr[E^A(s) E^B(s2) rho]| over states and outcome-set pairs."""
    a = m.measured
    a_sets = list(a.all_outcome_sets())
    b_sets = list(b.all_outcome_sets())
    b_projs = [spectral_projector(b, s2) for s2 in b_sets]
    worst, where = 0.0, ()
    for n, rho in enumerate(states):
        for s in a_sets:
            ea = spectral_projector(a, s)
            branch = meter_branch(m, corr.meter_indices(s), rho)
            for s2, eb in zip(b_sets, b_projs):
                consecutive = np.trace(eb @ branch).real
                formula = np.trace(ea @ eb @ rho)
                r = abs(consecutive - formula)
                if r > worst:
                    worst, where = float(r), (n, s.values, s2.values)
    return worst, where


def theorem1_verify(m: MeasurementModel, corr: OutcomeCorrespondence, b: Observable,
                    trials: int = 5, seed: int = 0,
                    tol: Tolerance = DEFAULT_TOL) -> Theorem1Report:
    """Nondisturbance of ``b`` versus the product-projector joint formula.

    Raises NotAMeasurementError if ``m`` does not measure its declared observable.
    """
    if not measures_observable_check(m, corr, trials, seed, tol):
        raise NotAMeasurementError(f"{m!r} does not measure {m.measured!r}")
    nd_res = nondisturbance_residual(m, b)
    joint, where = joint_formula_residual(m, corr, b, _test_states(m.obj_dim, trials, seed))
    return Theorem1Report(
        nondisturbing=nd_res <= tol.eq_tol,
        nondisturbance_residual=nd_res,
        joint_residual=joint,
        commutator_norm=commutator_norm(m.measured, b),
        tol=tol.eq_tol,
        worst_instance=where,
    )


def pure_ancilla_vector(m: MeasurementModel, tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    vals, vecs = np.linalg.eigh(m.sigma)
    if abs(vals[-1] - 1.0) > tol.eq_tol:
        raise PreconditionError(f"ancilla state of {m!r} is not pure")
    return vecs[:, -1]


def pure_ancilla_condition(m: MeasurementModel, b: Observable, psi,
                           tol: Tolerance = DEFAULT_TOL) -> float:
    """max over outcome sets s of ||[U, E^B(s) (x) I] (psi (x) xi)|| with sigma = |xi><xi|."""
    xi = pure_ancilla_vector(m, tol)
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (m.obj_dim,):
        raise InvalidDimensionError("psi does not live on the object space")
    vec = np.kron(psi, xi)
    worst = 0.0
    eye_a = np.eye(m.anc_dim)
    for s in b.all_outcome_sets():
        big = tensor(spectral_projector(b, s), eye_a)
        worst = max(worst, float(np.linalg.norm(m.u @ (big @ vec) - big @ (m.u @ vec))))
    return worst


def pure_ancilla_residual(m: MeasurementModel, b: Observable,
                          tol: Tolerance = DEFAULT_TOL) -> float:
    """:func:`pure_ancilla_condition` maximized over the computational basis of the object."""
    eye = np.eye(m.obj_dim, dtype=complex)
    return max(pure_ancilla_condition(m, b, eye[i], tol) for i in range(m.obj_dim))


# ---------------------------------------------------------------------------
# locality
# ---------------------------------------------------------------------------

def locality_residual(m: MeasurementModel, split: Bipartition) -> float:
    if split.dim1 * split.dim2 != m.obj_dim:
        raise InvalidDimensionError(f"{split} does not factor object dimension {m.obj_dim}")
    eye_a = np.eye(m.anc_dim)
    worst = 0.0
    if split.local_to == 1:
        lifts = [tensor(tensor(np.eye(split.dim1), x), eye_a) for x in matrix_units(split.dim2)]
    else:
        lifts = [tensor(tensor(x, np.eye(split.dim2)), eye_a) for x in matrix_units(split.dim1)]
    for big in lifts:
        worst = max(worst, op_norm(m.u @ big - big @ m.u))
    return worst


def locality_check(m: MeasurementModel, split: Bipartition,
                   tol: Tolerance = DEFAULT_TOL) -> bool:
    """True iff U commutes with every operator on the untouched factor."""
    return locality_residual(m, split) <= tol.eq_tol


def _consecutive_pair(first: MeasurementModel, corr1: OutcomeCorrespondence, s1: OutcomeSet,
                      second: MeasurementModel, corr2: OutcomeCorrespondence, s2: OutcomeSet,
                      rho: Operator) -> float:
    branch = meter_branch(first, corr1.meter_indices(s1), rho)
    return meter_probability(second, corr2.meter_indices(s2), branch)


def joint_prob_local_pair(m1: MeasurementModel, corr1: OutcomeCorrespondence,
                          m2: MeasurementModel, corr2: OutcomeCorrespondence,
                          s: OutcomeSet, s2: OutcomeSet, rho: Operator,
                          split: Bipartition, order: str = "first-then-second",
                          tol: Tolerance = DEFAULT_TOL) -> float:
    """Probability of ``s`` (for m1, local to H1) and ``s2`` (for m2, local to H2)
    when the two instantaneous measurements are performed consecutively.
    """
    if s.observable is not m1.measured or s2.observable is not m2.measured:
        raise OwnershipError("outcome sets must belong to the models' measured observables")
    split1 = Bipartition(split.dim1, split.dim2, 1)
    split2 = Bipartition(split.dim1, split.dim2, 2)
    if not locality_check(m1, split1, tol):
        raise LocalityError(f"{m1!r} acts on the second factor")
    if not locality_check(m2, split2, tol):
        raise LocalityError(f"{m2!r} acts on the first factor")
    for m, c in ((m1, corr1), (m2, corr2)):
        if not measures_observable_check(m, c, tol=tol):
            raise NotAMeasurementError(f"{m!r} does not measure {m.measured!r}")
    if order == "first-then-second":
        return _consecutive_pair(m1, corr1, s, m2, corr2, s2, rho)
    if order == "second-then-first":
        return _consecutive_pair(m2, corr2, s2, m1, corr1, s, rho)
    raise ValueError(f"unknown order {order!r}")
