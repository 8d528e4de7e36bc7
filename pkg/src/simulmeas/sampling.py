"""Monte Carlo sampling of consecutive measurements and the EPR demonstration.

Seeds: ``sample_consecutive`` draws from ``Philox(seed)``.  ``epr_demo``
gives angle number ``i`` the stream ``SeedSequence([seed, i])``, so adding
angles never changes the samples of earlier ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .catalog import cnot_model, embed_local_model, rotated_cnot_model, singlet
from .linalg import Operator, make_rng
from .models import (
    Bipartition,
    MeasurementModel,
    OutcomeCorrespondence,
    joint_prob_local_pair,
    meter_branch,
    meter_probability,
)
from .observables import Observable, spectral_projector

UNDERFLOW = 1e-15


@dataclass
class EmpiricalJoint:
    """Counts of (first outcome, second outcome) pairs against exact expectations."""

    counts: dict
    total: int
    expected: dict
    z_scores: dict
    renormalized: int = 0

    def max_abs_z(self) -> float:
        return max((abs(z) for z in self.z_scores.values()), default=0.0)

    def within(self, bound: float = 4.0) -> bool:
        """All z-scores finite and at most ``bound`` in absolute value."""
        return all(math.isfinite(z) and abs(z) <= bound for z in self.z_scores.values())

    def frequencies(self) -> dict:
        return {k: c / self.total for k, c in self.counts.items()}


def z_score(count: int, n: int, expected: float) -> float:
    """(count/n - p) / sqrt(p(1-p)/n); for p in {0, 1}, 0 if the count is
    exactly what p forces and +inf otherwise.
    """
    if expected <= UNDERFLOW or expected >= 1.0 - UNDERFLOW:
        forced = n if expected >= 0.5 else 0
        return 0.0 if count == forced else math.inf
    return (count / n - expected) / math.sqrt(expected * (1.0 - expected) / n)


def _sanitize(p: np.ndarray) -> tuple[np.ndarray, bool]:
    """Clip rounding noise and renormalize; the flag reports whether anything was dropped."""
    q = np.where(p > UNDERFLOW, p, 0.0)
    changed = bool(np.any((p > 0) & (q == 0)))
    return q / q.sum(), changed


def two_stage_sample(first_probs: Sequence[float], posteriors: Sequence[Operator | None],
                     second_probs: Callable[[Operator], np.ndarray], n: int,
                     rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Draw n (first, second) outcome pairs; returns a count matrix and the number
    of renormalization events.
    """
    p1, dropped = _sanitize(np.asarray(first_probs, dtype=float))
    events = int(dropped)
    firsts = rng.choice(len(p1), size=n, p=p1)
    table = None
    for a in range(len(p1)):
        m = int(np.count_nonzero(firsts == a))
        if m == 0:
            continue
        p2, dropped = _sanitize(np.asarray(second_probs(posteriors[a]), dtype=float))
        events += int(dropped)
        if table is None:
            table = np.zeros((len(p1), len(p2)), dtype=np.int64)
        table[a] = np.bincount(rng.choice(len(p2), size=m, p=p2), minlength=len(p2))
    return table, events


def _branches(m: MeasurementModel, corr: OutcomeCorrespondence, rho: Operator):
    probs, posts = [], []
    for a in range(len(m.measured.spectrum)):
        br = meter_branch(m, [corr.meter_index(a)], rho)
        p = float(np.trace(br).real)
        probs.append(p)
        posts.append(br / p if p > UNDERFLOW else None)
    return probs, posts


def sample_consecutive(m: MeasurementModel, corr: OutcomeCorrespondence, b: Observable,
                       rho: Operator, n: int, seed) -> EmpiricalJoint:
    """Measure with ``m``, then measure ``b`` by the Born rule on the posterior, ``n`` times."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = make_rng(seed)
    probs, posts = _branches(m, corr, rho)

    def born(post):
        return np.array([np.trace(p @ post).real for p in b.projectors])

    table, events = two_stage_sample(probs, posts, born, n, rng)
    a_vals, b_vals = m.measured.spectrum, b.spectrum
    counts, expected, zs = {}, {}, {}
    for i, av in enumerate(a_vals):
        branch = meter_branch(m, [corr.meter_index(i)], rho)
        for j, bv in enumerate(b_vals):
            key = (av, bv)
            counts[key] = int(table[i, j])
            expected[key] = float(np.trace(b.projectors[j] @ branch).real)
            zs[key] = z_score(counts[key], n, expected[key])
    return EmpiricalJoint(counts, n, expected, zs, events)


# ---------------------------------------------------------------------------
# EPR
# ---------------------------------------------------------------------------

@dataclass
class EPRRow:
    theta: float
    exact: dict
    correlation: float
    cos_residual: float
    order_residual: float
    formula_residual: float
    sampled_correlation: float
    standard_error: float
    n: int
    counts: dict = field(default_factory=dict)

    @property
    def sampled_ok(self) -> bool:
        # the floor absorbs rounding in the exact value when the standard error is 0
        dev = abs(self.sampled_correlation - self.correlation)
        return dev <= 4.0 * self.standard_error + 1e-12


@dataclass
class EPRReport:
    rows: list

    @property
    def passed(self) -> bool:
        return all(r.cos_residual <= 1e-9 and r.order_residual <= 1e-10
                   and r.formula_residual <= 1e-10 and r.sampled_ok for r in self.rows)


def local_spin_pair(theta: float):
    """Local CNOT-type models on a two-qubit object: spin along z on qubit 1
    and along ``theta`` (x-z plane) on qubit 2.
    """
    m1 = embed_local_model(cnot_model(), 2, position=1)
    m2 = embed_local_model(rotated_cnot_model(theta), 2, position=2)
    c1 = OutcomeCorrespondence.from_values(m1.measured, m1.meter)
    c2 = OutcomeCorrespondence.from_values(m2.measured, m2.meter)
    return m1, c1, m2, c2


def epr_demo(theta_list: Sequence[float], n: int, seed: int) -> EPRReport:
    rho = singlet()
    split = Bipartition(2, 2)
    rows = []
    for idx, theta in enumerate(theta_list):
        m1, c1, m2, c2 = local_spin_pair(theta)
        a, b = m1.measured, m2.measured
        exact, order_res, formula_res = {}, 0.0, 0.0
        for s in a.singletons():
            for s2 in b.singletons():
                p12 = joint_prob_local_pair(m1, c1, m2, c2, s, s2, rho, split, "first-then-second")
                p21 = joint_prob_local_pair(m1, c1, m2, c2, s, s2, rho, split, "second-then-first")
                formula = np.trace(spectral_projector(a, s) @ spectral_projector(b, s2) @ rho).real
                exact[(s.values[0], s2.values[0])] = p12
                order_res = max(order_res, abs(p12 - p21))
                formula_res = max(formula_res, abs(p12 - formula), abs(p21 - formula))
        corr = sum(x * y * p for (x, y), p in exact.items())

        rng = make_rng(np.random.SeedSequence([seed, idx]))
        probs, posts = _branches(m1, c1, rho)

        def second(post, m2=m2, c2=c2):
            return np.array([meter_probability(m2, [c2.meter_index(k)], post)
                             for k in range(len(m2.measured.spectrum))])

        table, _ = two_stage_sample(probs, posts, second, n, rng)
        av = np.array(a.spectrum)[:, None]
        bv = np.array(b.spectrum)[None, :]
        products = av * bv
        mean = float((table * products).sum() / n)
        second_moment = float((table * products**2).sum() / n)
        var = max(0.0, second_moment - mean**2) * n / max(1, n - 1)
        counts = {(a.spectrum[i], b.spectrum[j]): int(table[i, j])
                  for i in range(table.shape[0]) for j in range(table.shape[1])}
        rows.append(EPRRow(
            theta=float(theta),
            exact=exact,
            correlation=float(corr),
            cos_residual=abs(corr + math.cos(theta)),
            order_residual=order_res,
            formula_residual=formula_res,
            sampled_correlation=mean,
            standard_error=math.sqrt(var / n),
            n=n,
            counts=counts,
        ))
    return EPRReport(rows)
