#!/usr/bin/env python
"""Regenerate the shipped scenario fixtures in src/simulmeas/fixtures/.

    python scripts/make_fixtures.py
"""

import json
import math
from pathlib import Path

import numpy as np

from simulmeas.catalog import (
    cnot_model,
    embed_local_model,
    plus_state,
    random_commuting_pair,
    random_measurement_model,
    rotated_cnot_model,
    singlet,
    spin_observable,
    swap_model,
)
from simulmeas.linalg import I2, SX, SZ, tensor

OUT = Path(__file__).resolve().parents[1] / "src" / "simulmeas" / "fixtures"


def mat(a):
    a = np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def model_entry(m, meter, measured, correspondence=None):
    entry = {"anc_dim": m.anc_dim, "sigma": {"density": mat(m.sigma)}, "u": mat(m.u),
             "meter": meter, "measured": measured}
    if correspondence is not None:
        entry["correspondence"] = correspondence
    return entry


def cnot_luders():
    m = cnot_model()
    return {
        "name": "cnot_luders",
        "object_dim": 2,
        "seed": 20240601,
        "observables": {"Z": mat(SZ), "X": mat(SX), "Zanc": mat(SZ), "twoI": mat(2 * I2)},
        "states": {
            "zero": {"vector": [[1, 0], [0, 0]]},
            "plus": {"density": mat(plus_state())},
            "mixed": {"density": mat(I2 / 2)},
        },
        "models": {
            "cnot": model_entry(m, "Zanc", "Z"),
            "cnot_swapped": model_entry(m, "Zanc", "Z", [[1, -1], [-1, 1]]),
        },
        "checks": [
            {"id": "measures", "kind": "measures_observable", "model": "cnot"},
            {"id": "measures_swapped", "kind": "measures_observable", "model": "cnot_swapped",
             "expect": False},
            {"id": "dl_luders", "kind": "dl_axioms", "instrument": {"luders": "Z"}},
            {"id": "dl_induced", "kind": "dl_axioms", "instrument": {"induced": "cnot"}},
            {"id": "roundtrip", "kind": "instrument_equal", "instrument": {"induced": "cnot"},
             "other": {"luders": "Z"}},
            {"id": "theorem2", "kind": "theorem2", "instrument": {"induced": "cnot"}},
            {"id": "cp", "kind": "cp", "instrument": {"induced": "cnot"}},
            {"id": "theorem1_Z", "kind": "theorem1", "model": "cnot", "observable": "Z",
             "expect_nondisturbing": True},
            {"id": "theorem1_X", "kind": "theorem1", "model": "cnot", "observable": "X",
             "expect_nondisturbing": False},
            {"id": "nondisturb_identity", "kind": "nondisturbance", "model": "cnot",
             "observable": "twoI", "expect": True},
            {"id": "evolution_Z", "kind": "nondisturbance_evolution", "model": "cnot",
             "observable": "Z", "hamiltonian": "Z", "dt": 0.7, "expect": True},
            {"id": "evolution_X", "kind": "nondisturbance_evolution", "model": "cnot",
             "observable": "Z", "hamiltonian": "X", "dt": math.pi / 4, "expect": False},
            {"id": "pure_ancilla_Z", "kind": "pure_ancilla", "model": "cnot", "observable": "Z"},
            {"id": "pure_ancilla_X", "kind": "pure_ancilla", "model": "cnot", "observable": "X"},
            {"id": "joint_ZZ", "kind": "joint_probability", "model": "cnot", "observable": "Z",
             "state": "plus", "outcomes": [1], "b_outcomes": [1], "expected": 0.5},
            {"id": "joint_ZX", "kind": "joint_probability", "model": "cnot", "observable": "X",
             "state": "plus", "outcomes": [1], "b_outcomes": [1], "expected": 0.25},
        ],
        "samples": [
            {"id": "ZX_plus", "model": "cnot", "observable": "X", "state": "plus"},
            {"id": "ZZ_zero", "model": "cnot", "observable": "Z", "state": "zero"},
        ],
    }


def swap_counter():
    from simulmeas.catalog import sigma_z

    m = swap_model(sigma_z())
    return {
        "name": "swap_counter",
        "object_dim": 2,
        "seed": 7,
        "observables": {"Z": mat(SZ), "X": mat(SX), "Zanc": mat(SZ)},
        "states": {"plus": {"density": mat(plus_state())}, "mixed": {"density": mat(I2 / 2)}},
        "models": {"swap": model_entry(m, "Zanc", "Z")},
        "checks": [
            {"id": "measures", "kind": "measures_observable", "model": "swap"},
            {"id": "dl_induced", "kind": "dl_axioms", "instrument": {"induced": "swap"}},
            {"id": "is_measure_and_reset", "kind": "instrument_equal",
             "instrument": {"induced": "swap"}, "other": {"measure_and_reset": "Z"}},
            {"id": "theorem2", "kind": "theorem2", "instrument": {"induced": "swap"}},
            {"id": "cp", "kind": "cp", "instrument": {"induced": "swap"}},
            {"id": "theorem1_Z", "kind": "theorem1", "model": "swap", "observable": "Z",
             "expect_nondisturbing": False},
            {"id": "theorem1_X", "kind": "theorem1", "model": "swap", "observable": "X",
             "expect_nondisturbing": False},
            {"id": "pure_ancilla_Z", "kind": "pure_ancilla", "model": "swap", "observable": "Z"},
        ],
        "samples": [
            {"id": "ZZ_plus", "model": "swap", "observable": "Z", "state": "plus"},
        ],
    }


def epr_singlet():
    a = embed_local_model(cnot_model(), 2, position=1)
    b = embed_local_model(cnot_model(), 2, position=2)
    b60 = embed_local_model(rotated_cnot_model(math.pi / 3), 2, position=2)
    return {
        "name": "epr_singlet",
        "object_dim": 4,
        "seed": 1935,
        "observables": {
            "ZI": mat(tensor(SZ, I2)),
            "IZ": mat(tensor(I2, SZ)),
            "IS60": mat(tensor(I2, spin_observable(math.pi / 3).op)),
            "Zanc": mat(SZ),
        },
        "states": {"singlet": {"density": mat(singlet())},
                   "product": {"vector": [[1, 0], [0, 0], [0, 0], [0, 0]]}},
        "models": {
            "alice": model_entry(a, "Zanc", "ZI"),
            "bob": model_entry(b, "Zanc", "IZ"),
            "bob60": model_entry(b60, "Zanc", "IS60"),
        },
        "checks": [
            {"id": "alice_local", "kind": "locality", "model": "alice", "dim1": 2, "dim2": 2,
             "local_to": 1},
            {"id": "bob_local", "kind": "locality", "model": "bob", "dim1": 2, "dim2": 2,
             "local_to": 2},
            {"id": "bob_not_on_1", "kind": "locality", "model": "bob", "dim1": 2, "dim2": 2,
             "local_to": 1, "expect": False},
            {"id": "pair_ZZ", "kind": "local_pair", "model1": "alice", "model2": "bob",
             "state": "singlet", "dim1": 2, "dim2": 2},
            {"id": "pair_Z60", "kind": "local_pair", "model1": "alice", "model2": "bob60",
             "state": "singlet", "dim1": 2, "dim2": 2},
            {"id": "alice_spares_bob", "kind": "theorem1", "model": "alice", "observable": "IZ",
             "expect_nondisturbing": True},
            {"id": "anticorrelation", "kind": "joint_probability", "model": "alice",
             "observable": "IZ", "state": "singlet", "outcomes": [1], "b_outcomes": [1],
             "expected": 0.0},
        ],
        "samples": [
            {"id": "singlet_ZZ", "model": "alice", "observable": "IZ", "state": "singlet"},
            {"id": "singlet_Z60", "model": "alice", "observable": "IS60", "state": "singlet"},
        ],
    }


def theorem2_random():
    a, b = random_commuting_pair(3, 11)
    variants = {
        "generic": random_measurement_model(a, 101),
        "preserving": random_measurement_model(a, 102, preserve=b),
        "mixed_env": random_measurement_model(a, 103, preserve=b, env_dim=2, kraus_rank=2),
        "padded_luders": random_measurement_model(a, 104, luders=True, pad=1),
    }
    obs = {"A": mat(a.op), "B": mat(b.op)}
    models, checks = {}, []
    for key, m in variants.items():
        obs[f"meter_{key}"] = mat(m.meter.op)
        models[key] = model_entry(m, f"meter_{key}", "A")
        checks += [
            {"id": f"{key}_measures", "kind": "measures_observable", "model": key},
            {"id": f"{key}_dl", "kind": "dl_axioms", "instrument": {"induced": key}},
            {"id": f"{key}_theorem2", "kind": "theorem2", "instrument": {"induced": key}},
            {"id": f"{key}_cp", "kind": "cp", "instrument": {"induced": key}},
            {"id": f"{key}_theorem1", "kind": "theorem1", "model": key, "observable": "B",
             "expect_nondisturbing": key != "generic"},
        ]
        if key != "mixed_env":
            checks.append({"id": f"{key}_pure_ancilla", "kind": "pure_ancilla", "model": key,
                           "observable": "B"})
    checks.append({"id": "mixed_env_pure_ancilla", "kind": "pure_ancilla", "model": "mixed_env",
                   "observable": "B"})
    return {
        "name": "theorem2_random",
        "object_dim": 3,
        "seed": 1997,
        "observables": obs,
        "states": {"e0": {"vector": [[1, 0], [0, 0], [0, 0]]}},
        "models": models,
        "checks": checks,
        "samples": [{"id": "generic_AB", "model": "generic", "observable": "B", "state": "e0"}],
    }


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for build in (cnot_luders, swap_counter, epr_singlet, theorem2_random):
        doc = build()
        path = OUT / f"{doc['name']}.json"
        path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
