"""Random measurement models against commuting and generic observables.

For each model the script reports the nondisturbance residual, the residual
of the product-projector joint formula for consecutive outcomes, the
commutator norm and the pure-ancilla residual, then tallies how often the
criteria agree.

    python3 scripts/nondisturbance_sweep.py --models 40 --seed 1
"""

import argparse
from dataclasses import dataclass

from simulmeas.catalog import (
    default_correspondence,
    random_commuting_pair,
    random_measurement_model,
    random_observable,
)
from simulmeas.models import pure_ancilla_residual, theorem1_verify


@dataclass
class SweepConfig:
    models: int = 40
    seed: int = 0
    max_dim: int = 4
    tol: float = 1e-9


def run(cfg: SweepConfig):
    rows = []
    for i in range(cfg.models):
        s = cfg.seed * 100_000 + i
        dim = 2 + i % (cfg.max_dim - 1)
        a, b = random_commuting_pair(dim, s)
        m = random_measurement_model(a, s, preserve=b if i % 2 else None)
        corr = default_correspondence(m)
        for label, obs in (("commuting", b), ("generic", random_observable(dim, s + 1))):
            rep = theorem1_verify(m, corr, obs, trials=2, seed=s)
            rows.append((i, dim, label, rep, pure_ancilla_residual(m, obs)))
    return rows


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--models", type=int, default=SweepConfig.models)
    p.add_argument("--seed", type=int, default=SweepConfig.seed)
    p.add_argument("--max-dim", type=int, default=SweepConfig.max_dim)
    cfg = SweepConfig(**{k.replace("-", "_"): v for k, v in vars(p.parse_args()).items()})

    rows = run(cfg)
    print(f"{'model':>5} {'dim':>3} {'B':>10} {'nondist':>10} {'joint':>10} "
          f"{'[A,B]':>10} {'pure':>10}")
    agree = 0
    for i, dim, label, rep, pure in rows:
        r = rep.residuals()
        print(f"{i:5d} {dim:3d} {label:>10} {r['nondisturbance']:10.2e} {r['joint']:10.2e} "
              f"{r['commutator']:10.2e} {pure:10.2e}")
        agree += rep.consistent and (pure <= cfg.tol) == rep.nondisturbing
    print(f"{agree}/{len(rows)} pairs consistent")
    return 0 if agree == len(rows) else 1


if __name__ == "__main__":
    raise SystemExit(main())
