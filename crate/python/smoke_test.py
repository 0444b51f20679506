#!/usr/bin/env python3
"""Smoke test for the magopt extension module.

Builds the module if needed, imports it from the cargo target directory, and
exercises the main types end to end: states and magic measures, closed-form
envelopes, instance generation, circuit optimization, and an annealing sweep.

Usage: python3 python/smoke_test.py
"""

import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    candidates = [
        ROOT / "target" / profile / "libmagopt.so" for profile in ("release", "debug")
    ]
    built = [p for p in candidates if p.is_file()]
    if not built:
        subprocess.run(
            ["cargo", "build", "-p", "magopt-py"], cwd=ROOT, check=True
        )
        built = [p for p in candidates if p.is_file()]
    lib = max(built, key=lambda p: p.stat().st_mtime)
    stage = Path(tempfile.mkdtemp(prefix="magopt-py-"))
    shutil.copy2(lib, stage / "magopt.so")
    sys.path.insert(0, str(stage))
    import magopt

    return magopt


def approx(x, y, tol=1e-12):
    assert abs(x - y) <= tol, f"{x} != {y} (tol {tol})"


def main():
    m = load_module()
    checked = 0

    # stabilizer states carry no magic
    plus = m.State.plus(2, 2)
    approx(plus.sre2(), 0.0)
    approx(plus.pauli_norm_sum(), 4.0)
    approx(m.State.basis(3, 1, 2).mana(), 0.0)
    checked += 1

    # single-qubit superposition matches its closed form for any phase
    for f, theta in [(0.5, math.pi / 4), (0.73, 1.1), (0.9, 2.8)]:
        s = m.two_level_state(2, 1, 0, 1, f, theta)
        approx(s.sre2(), m.sre2_two_state_qubit(f, theta))
        lo = m.sre2_two_state_qubit_min(f)
        hi = m.sre2_two_state_qubit_max(f)
        assert lo - 1e-12 <= s.sre2() <= hi + 1e-12
    checked += 1

    # the magic-maximizing phase pi/4 at balanced weight
    t_state = m.two_level_state(2, 1, 0, 1, 0.5, math.pi / 4)
    approx(t_state.sre2(), m.sre2_two_state_qubit_max(0.5))
    checked += 1

    # additivity under tensor products
    approx(t_state.tensor(t_state).sre2(), 2 * t_state.sre2(), 1e-10)
    checked += 1

    # qutrit two-state and three-state forms, embedded at several sites
    s = m.two_level_state(3, 1, 0, 1, 0.7)
    approx(s.sre2(), m.sre2_two_state_qutrit(0.7, 0, 1))
    s = m.two_level_state(3, 2, 3, 7, 0.4)  # digits (1,0) and (2,1)
    approx(s.sre2(), m.sre2_two_state_qutrit(0.4, 1, 2))
    s = m.three_level_state(2, 2, [0, 1, 2], 0.5, 0.3, 0.9, 0.2)
    approx(s.sre2(), m.sre2_three_state_qubit(0.5, 0.3, 0.9, 0.2))
    checked += 1

    # the strange state maximizes single-qutrit mana at log2(5/3)
    r = 1 / math.sqrt(2)
    strange = m.State(3, 1, [0, r, -r])
    approx(strange.mana(), math.log2(5 / 3), 1e-12)
    assert strange.sre2() > 0
    checked += 1

    # haar reference sits above a generic bell-pair value
    assert m.haar_sre2_reference(2, 6) > 1.9
    checked += 1

    # instance generation is deterministic and traceless
    inst = m.Instance.generate(2, 4, seed=11)
    again = m.Instance.generate(2, 4, seed=11)
    assert inst.couplings == again.couplings
    assert len(inst.couplings) == 6
    assert inst.gap() > 0
    diag = inst.cost_diagonal()
    approx(sum(diag) / len(diag), 0.0, 1e-9)
    approx(inst.energy(m.State.plus(2, 4)), 0.0, 1e-9)
    checked += 1

    # a short ramp lowers the energy below the symmetric start
    gammas, betas = m.tqa_init(3, 0.5)
    ramped = m.run_circuit(inst, gammas, betas)
    assert inst.energy(ramped) < -0.1
    checked += 1

    # optimization beats the raw ramp and reports a sane profile
    run = m.optimize(inst, 3, restarts=4, tolerance=1e-3, max_evals=300)
    assert run.energy <= inst.energy(ramped) + 1e-9
    assert run.ground_energy <= run.energy
    assert 0.0 < run.approx_ratio <= 1.0 + 1e-12
    layers = run.layers()
    assert len(layers) == 4 and len(run.gammas) == 3
    approx(layers[0]["sre2"], 0.0, 1e-10)  # starts at the stabilizer product
    assert layers[0]["mana"] is None
    checked += 1

    # qutrit optimization tracks mana alongside sre2
    q_inst = m.Instance.generate(3, 2, seed=5)
    q_run = m.optimize(q_inst, 2, restarts=3, tolerance=1e-3, max_evals=200, measure_mana=True)
    q_layers = q_run.layers()
    assert all(l["mana"] is not None for l in q_layers)
    approx(q_layers[0]["mana"], 0.0, 1e-10)
    checked += 1

    # annealing endpoints are stabilizer ground states of the two extremes
    rows = m.anneal_sweep(inst, 21)
    assert len(rows) == 21
    approx(rows[0]["lambda"], 0.0)
    approx(rows[0]["energy"], -1.0 * inst.sites, 1e-8)  # qubit mixer ground
    approx(rows[0]["sre2_density"], 0.0, 1e-8)
    approx(rows[-1]["energy"], inst.ground_energy(), 1e-8)
    approx(rows[-1]["sre2_density"], 0.0, 1e-8)
    assert max(r["sre2_density"] for r in rows) > 0.05
    checked += 1

    print(f"all {checked} smoke checks passed")


if __name__ == "__main__":
    main()
