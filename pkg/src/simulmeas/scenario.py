"""Scenario files: JSON documents describing observables, states, models and
the checks to run on them.

Complex numbers are ``[re, im]`` pairs (a bare real is accepted too) and
matrices are row-major nested lists.  A check that cannot run because a
precondition fails is reported as ``skipped``, never raised.

Each check request ``i`` draws its randomness from
``SeedSequence([scenario.seed, i])``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
import numpy as np

from .errors import (
    CommutationError,
    LocalityError,
    MeasurementError,
    NotAMeasurementError,
    PreconditionError,
)
from .instruments import (
    Instrument,
    choi_matrix,
    choi_min_eigenvalue,
    dl_axioms_check,
    luders_instrument,
    measure_and_reset_instrument,
    theorem2_check,
)
from .linalg import Tolerance, density_violations, is_hermitian, is_unitary, op_norm, projector
from .models import (
    Bipartition,
    MeasurementModel,
    OutcomeCorrespondence,
    induced_instrument,
    joint_prob_consecutive,
    joint_prob_local_pair,
    locality_residual,
    measurement_residual,
    nondisturbance_residual,
    nondisturbance_with_evolution,
    pure_ancilla_residual,
    theorem1_verify,
)
from .observables import Observable, spectral_projector
from .sampling import sample_consecutive


class ScenarioError(MeasurementError):
    """The scenario file cannot be parsed or violates an invariant (exit code 2)."""


FIXTURES = ("cnot_luders", "swap_counter", "epr_singlet", "theorem2_random")


@dataclass
class Scenario:
    name: str
    object_dim: int
    observables: dict
    states: dict
    models: dict
    correspondences: dict
    checks: list
    samples: list
    seed: int = 0
    tol: Tolerance = field(default_factory=Tolerance)


@dataclass
class CheckResult:
    check_id: str
    kind: str
    verdict: str
    residuals: dict
    tolerance: float
    details: str = ""
    data: dict = field(default_factory=dict)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values(), default=0.0)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _complex(x, where: str) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise ScenarioError(f"{where}: expected a complex number as [re, im], got {x!r}")


def parse_matrix(data, where: str) -> np.ndarray:
    if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
        raise ScenarioError(f"{where}: expected a matrix as a list of rows")
    n = len(data)
    if any(len(r) != n for r in data):
        raise ScenarioError(f"{where}: matrix is not square")
    return np.array([[_complex(v, where) for v in row] for row in data], dtype=complex)


def parse_vector(data, where: str) -> np.ndarray:
    if not isinstance(data, list) or not data:
        raise ScenarioError(f"{where}: expected a vector")
    return np.array([_complex(v, where) for v in data], dtype=complex)


def _parse_state(spec, where: str, tol: Tolerance) -> np.ndarray:
    if isinstance(spec, dict) and "vector" in spec:
        v = parse_vector(spec["vector"], where)
        if abs(np.linalg.norm(v) - 1.0) > tol.eq_tol:
            raise ScenarioError(f"{where}: state vector is not normalized")
        return projector(v)
    if isinstance(spec, dict) and "density" in spec:
        rho = parse_matrix(spec["density"], where)
    else:
        rho = parse_matrix(spec, where)
    problems = density_violations(rho, tol)
    if problems:
        raise ScenarioError(f"{where}: invalid density operator ({', '.join(problems)})")
    return rho


def _ref(table: dict, key, kind: str, where: str):
    if key not in table:
        raise ScenarioError(f"{where}: unknown {kind} {key!r}")
    return table[key]


CHECK_KINDS = (
    "measures_observable", "dl_axioms", "theorem2", "cp", "instrument_equal",
    "nondisturbance", "nondisturbance_evolution", "theorem1", "pure_ancilla",
    "locality", "joint_probability", "local_pair",
)


def _validate_refs(req: dict, where: str, observables, states, models) -> None:
    if req["kind"] not in CHECK_KINDS + ("sample",):
        raise ScenarioError(f"{where}: unknown check kind {req['kind']!r}")
    for key in ("model", "model1", "model2"):
        if key in req:
            _ref(models, req[key], "model", where)
    for key in ("observable", "hamiltonian"):
        if key in req:
            _ref(observables, req[key], "observable", where)
    if "state" in req:
        _ref(states, req["state"], "state", where)
    for key in ("instrument", "other"):
        if key in req:
            spec = req[key]
            if not isinstance(spec, dict) or len(spec) != 1:
                raise ScenarioError(f"{where}: malformed instrument reference")
            (how, ref), = spec.items()
            table = models if how == "induced" else observables
            _ref(table, ref, "model" if how == "induced" else "observable", where)


def parse_scenario(doc: dict, tol_override: float | None = None) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be a JSON object")
    name = str(doc.get("name", "scenario"))
    try:
        tol = Tolerance(**doc.get("tolerance", {}))
        if tol_override is not None:
            tol = Tolerance(tol_override, tol.eig_cluster_tol)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"tolerance: {exc}") from None
    obj_dim = doc.get("object_dim")
    if not isinstance(obj_dim, int) or obj_dim < 1:
        raise ScenarioError("object_dim must be a positive integer")

    observables = {}
    for key, mat in doc.get("observables", {}).items():
        op = parse_matrix(mat, f"observable {key!r}")
        if not is_hermitian(op, tol):
            raise ScenarioError(f"observable {key!r} is not Hermitian")
        observables[key] = Observable(op, tol, name=key)

    states = {}
    for key, spec in doc.get("states", {}).items():
        rho = _parse_state(spec, f"state {key!r}", tol)
        if rho.shape[0] != obj_dim:
            raise ScenarioError(f"state {key!r} has dimension {rho.shape[0]}, expected {obj_dim}")
        states[key] = rho

    models, corrs = {}, {}
    for key, spec in doc.get("models", {}).items():
        where = f"model {key!r}"
        meter = _ref(observables, spec.get("meter"), "observable", where)
        measured = _ref(observables, spec.get("measured"), "observable", where)
        anc_dim = spec.get("anc_dim", meter.dim)
        if measured.dim != obj_dim or meter.dim != anc_dim:
            raise ScenarioError(f"{where}: observable dimensions do not match object/ancilla")
        sigma = _parse_state(spec.get("sigma"), f"{where} sigma", tol)
        u = parse_matrix(spec.get("u"), f"{where} u")
        if u.shape[0] != obj_dim * anc_dim:
            raise ScenarioError(f"{where}: u has dimension {u.shape[0]}, expected {obj_dim * anc_dim}")
        if not is_unitary(u, tol):
            raise ScenarioError(f"{where}: u is not unitary")
        if sigma.shape[0] != anc_dim:
            raise ScenarioError(f"{where}: sigma has the wrong dimension")
        # distinct Observable objects per model keep outcome-set ownership local
        meter = Observable(meter.op, tol, name=meter.name)
        measured = Observable(measured.op, tol, name=measured.name)
        models[key] = MeasurementModel(sigma, u, meter, measured, name=key)
        try:
            mapping = spec.get("correspondence")
            if mapping is None:
                corrs[key] = OutcomeCorrespondence.from_values(measured, meter)
            else:
                corrs[key] = OutcomeCorrespondence.from_values(
                    measured, meter, {float(a): float(m) for a, m in mapping})
        except (ValueError, TypeError) as exc:
            raise ScenarioError(f"{where}: bad correspondence ({exc})") from None

    checks = doc.get("checks", [])
    samples = doc.get("samples", [])
    if not isinstance(checks, list) or not isinstance(samples, list):
        raise ScenarioError("checks and samples must be lists")
    for i, c in enumerate(checks):
        if not isinstance(c, dict) or "kind" not in c:
            raise ScenarioError(f"check #{i} needs a 'kind'")
    if not all(isinstance(c, dict) for c in samples):
        raise ScenarioError("sample requests must be objects")
    for i, c in enumerate(checks):
        _validate_refs(c, f"check {c.get('id', i)!r}", observables, states, models)
    for i, c in enumerate(samples):
        _validate_refs(dict(c, kind="sample"), f"sample {c.get('id', i)!r}",
                       observables, states, models)
    seed = doc.get("seed", 0)
    if not isinstance(seed, int):
        raise ScenarioError("seed must be an integer")
    return Scenario(name, obj_dim, observables, states, models, corrs, checks, samples, seed, tol)


def fixture_path(name: str) -> Path:
    return Path(str(resources.files("simulmeas") / "fixtures" / f"{name}.json"))


def load_scenario(path, tol_override: float | None = None) -> Scenario:
    """Read and validate a scenario; a bare fixture name loads the shipped fixture."""
    p = Path(path)
    if not p.exists() and str(path) in FIXTURES:
        p = fixture_path(str(path))
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc})") from None
    try:
        return parse_scenario(doc, tol_override)
    except ScenarioError:
        raise
    except MeasurementError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

def derived_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def _instrument(sc: Scenario, spec, where: str) -> Instrument:
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ScenarioError(f"{where}: instrument must be one of luders/induced/measure_and_reset")
    (how, ref), = spec.items()
    if how == "luders":
        return luders_instrument(_ref(sc.observables, ref, "observable", where))
    if how == "measure_and_reset":
        return measure_and_reset_instrument(_ref(sc.observables, ref, "observable", where))
    if how == "induced":
        m = _ref(sc.models, ref, "model", where)
        return induced_instrument(m, sc.correspondences[ref], sc.tol)
    raise ScenarioError(f"{where}: unknown instrument construction {how!r}")


def _expect(verdict: bool, expect) -> str:
    if expect is None:
        return "pass" if verdict else "fail"
    return "pass" if verdict == bool(expect) else "fail"


def _run_one(sc: Scenario, req: dict, index: int) -> CheckResult:
    kind = req.get("kind")
    cid = str(req.get("id", f"{index}:{kind}"))
    tol = sc.tol
    seed = derived_seed(sc.seed, index)
    where = f"check {cid!r}"

    def model(key="model"):
        ref = req.get(key)
        return _ref(sc.models, ref, "model", where), sc.correspondences.get(ref)

    def obs(key="observable"):
        return _ref(sc.observables, req.get(key), "observable", where)

    def result(verdict, residuals, details="", data=None):
        return CheckResult(cid, kind, verdict, {k: float(v) for k, v in residuals.items()},
                           tol.eq_tol, details, data or {})

    if kind == "measures_observable":
        m, corr = model()
        r = measurement_residual(m, corr, req.get("trials", 5), seed)
        ok = r <= tol.eq_tol
        return result(_expect(ok, req.get("expect", True)), {"statistics": r},
                      f"measures={ok}")

    if kind == "dl_axioms":
        t = _instrument(sc, req.get("instrument"), where)
        rep = dl_axioms_check(t, tol, req.get("trials", 20), seed)
        return result(_expect(rep.passed, req.get("expect", True)), rep.residuals(),
                      f"additivity={rep.additivity_ok} probability={rep.probability_ok} "
                      f"positivity={rep.positivity_ok}")

    if kind == "theorem2":
        t = _instrument(sc, req.get("instrument"), where)
        rep = theorem2_check(t, tol, req.get("trials", 50), seed)
        if rep.skipped:
            return result("skipped", {}, rep.reason)
        return result("pass" if rep.passed else "fail", rep.residuals(),
                      f"operators={rep.operators_tested}")

    if kind == "cp":
        t = _instrument(sc, req.get("instrument"), where)
        worst = min(choi_min_eigenvalue(b) for b in t.branches)
        return result("pass" if worst >= -tol.eq_tol else "fail",
                      {"choi_negativity": max(0.0, -worst)}, f"min_choi_eigenvalue={worst:.17g}")

    if kind == "instrument_equal":
        t1 = _instrument(sc, req.get("instrument"), where)
        t2 = _instrument(sc, req.get("other"), where)
        if len(t1.branches) != len(t2.branches):
            return result("fail", {"choi_distance": math.inf}, "different outcome counts")
        dist = max(op_norm(choi_matrix(a).matrix - choi_matrix(b).matrix)
                   for a, b in zip(t1.branches, t2.branches))
        return result("pass" if dist <= tol.eq_tol else "fail", {"choi_distance": dist})

    if kind == "nondisturbance":
        m, _ = model()
        r = nondisturbance_residual(m, obs())
        ok = r <= tol.eq_tol
        return result(_expect(ok, req.get("expect")), {"heisenberg": r}, f"nondisturbing={ok}")

    if kind == "nondisturbance_evolution":
        m, _ = model()
        ok = nondisturbance_with_evolution(m, obs(), obs("hamiltonian"), float(req.get("dt", 0.0)), tol)
        return result(_expect(ok, req.get("expect")), {}, f"nondisturbing={ok}")

    if kind == "theorem1":
        m, corr = model()
        rep = theorem1_verify(m, corr, obs(), req.get("trials", 5), seed, tol)
        verdict = "pass" if rep.consistent else "fail"
        expect = req.get("expect_nondisturbing")
        if expect is not None and rep.nondisturbing != bool(expect):
            verdict = "fail"
        return result(verdict, rep.residuals(),
                      f"nondisturbing={rep.nondisturbing} worst={rep.worst_instance}")

    if kind == "pure_ancilla":
        m, _ = model()
        b = obs()
        pa = pure_ancilla_residual(m, b, tol)
        nd = nondisturbance_residual(m, b)
        agree = (pa <= tol.eq_tol) == (nd <= tol.eq_tol)
        return result("pass" if agree else "fail", {"pure_ancilla": pa, "heisenberg": nd},
                      f"agree={agree}")

    if kind == "locality":
        m, _ = model()
        split = Bipartition(req["dim1"], req["dim2"], req.get("local_to", 1))
        r = locality_residual(m, split)
        ok = r <= tol.eq_tol
        return result(_expect(ok, req.get("expect", True)), {"commutator": r}, f"local={ok}")

    if kind == "joint_probability":
        m, corr = model()
        b = obs()
        rho = _ref(sc.states, req.get("state"), "state", where)
        s = m.measured.outcomes(req["outcomes"])
        s2 = b.outcomes(req["b_outcomes"])
        p = joint_prob_consecutive(m, corr, s, b, s2, rho)
        r = abs(p - float(req["expected"]))
        return result("pass" if r <= tol.eq_tol else "fail", {"probability": r}, f"p={p:.17g}")

    if kind == "local_pair":
        m1, c1 = model("model1")
        m2, c2 = model("model2")
        rho = _ref(sc.states, req.get("state"), "state", where)
        split = Bipartition(req["dim1"], req["dim2"])
        worst, cells = 0.0, {}
        for s in m1.measured.singletons():
            for s2 in m2.measured.singletons():
                formula = np.trace(spectral_projector(m1.measured, s)
                                   @ spectral_projector(m2.measured, s2) @ rho).real
                for order in ("first-then-second", "second-then-first"):
                    p = joint_prob_local_pair(m1, c1, m2, c2, s, s2, rho, split, order, tol)
                    worst = max(worst, abs(p - formula))
                cells[f"{s.values[0]:.17g},{s2.values[0]:.17g}"] = float(formula)
        return result("pass" if worst <= tol.eq_tol else "fail", {"joint": worst}, "",
                      {"joint": cells})

    raise ScenarioError(f"{where}: unknown check kind {kind!r}")


def run_checks(sc: Scenario) -> list[CheckResult]:
    out = []
    for i, req in enumerate(sc.checks):
        try:
            out.append(_run_one(sc, req, i))
        except (PreconditionError, NotAMeasurementError, LocalityError, CommutationError) as exc:
            kind = req.get("kind")
            out.append(CheckResult(str(req.get("id", f"{i}:{kind}")), str(kind), "skipped",
                                   {}, sc.tol.eq_tol, f"precondition: {exc}"))
    return out


def run_samples(sc: Scenario, n: int, bound: float = 4.0) -> list[CheckResult]:
    """Execute the scenario's sampling requests with ``n`` draws each."""
    out = []
    for i, req in enumerate(sc.samples):
        cid = str(req.get("id", f"sample{i}"))
        where = f"sample {cid!r}"
        ref = req.get("model")
        m = _ref(sc.models, ref, "model", where)
        b = _ref(sc.observables, req.get("observable"), "observable", where)
        rho = _ref(sc.states, req.get("state"), "state", where)
        emp = sample_consecutive(m, sc.correspondences[ref], b, rho, n,
                                 derived_seed(sc.seed, 10_000 + i))
        cells = [
            {"a": k[0], "b": k[1], "count": emp.counts[k], "expected": emp.expected[k],
             "z": emp.z_scores[k]}
            for k in sorted(emp.counts)
        ]
        out.append(CheckResult(cid, "sample", "pass" if emp.within(bound) else "fail",
                               {"max_abs_z": emp.max_abs_z()}, bound,
                               f"n={n} renormalized={emp.renormalized}", {"cells": cells}))
    return out
