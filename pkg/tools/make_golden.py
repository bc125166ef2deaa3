#!/usr/bin/env python3
"""Regenerate the locked reference values in golden/v1/s1.json.

Run from the repository root after any intentional change to the
numerics; tests compare against these values inside stated envelopes.
Reference quantities that certify stability under refinement are
computed at twice the S1 resolution.
"""

import json
from pathlib import Path

import numpy as np

import fraclab as fl

ROOT = Path(__file__).resolve().parent.parent
OUT = ROOT / "golden" / "v1" / "s1.json"

EPSILONS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8)


def s1_objects(n_super=4096, n_levels=64):
    geom, spec = fl.build_geometry(omega=(-1.0, 1.0), w=(2.0, 3.0), s=0.5,
                                   box_halfwidth=32.0, n_super=n_super,
                                   omega_prime=(-0.75, 0.75))
    op = fl.assemble_dense(geom, spec)
    f = fl.sample_profile(geom, spec, fl.bump_profile(2.5, 0.4), "w",
                          mode="average")
    q0 = fl.make_potential(
        geom, fl.make_grid_function(geom, spec, np.zeros(spec.n_super),
                                    "omega_prime"))
    sol = fl.solve_forward(geom, spec, op, q0, f)
    field = fl.extend(sol.u, geom.s, fl.default_y_grid(geom.s,
                                                       n_levels=n_levels))
    return geom, spec, op, f, q0, sol, field


def main():
    golden = {}

    geom, spec, op, f, q0, sol, field = s1_objects()

    # refined-reference diagnostics (stability envelopes)
    geom2, spec2, op2, f2, q02, sol2, field2 = s1_objects(n_super=8192,
                                                          n_levels=128)
    chk = fl.caccioppoli_check(geom2, field2, 0.0, 0.0, 0.2)
    golden["caccioppoli_implied_refined"] = chk.implied_constant
    tb = fl.three_balls_exponent(field2, (0.0, 0.5), 0.2)
    golden["three_balls_alpha_refined"] = tb.implied_constant
    bb = fl.boundary_bulk_check(geom2, field2, sol2.u, 0.0, 0.2)
    golden["boundary_bulk_implied_refined"] = bb.implied_constant

    # boundary doubling on S1
    rep = fl.doubling_scan_boundary(geom, sol.u, 0.0,
                                    np.geomspace(0.02, 0.24, 8))
    golden["boundary_beta_s1"] = rep.beta_hat
    golden["boundary_c_s1"] = rep.c_hat

    # bulk doubling envelope on S1
    repb = fl.doubling_scan_bulk(geom, field, 0.0,
                                 np.geomspace(0.02, 0.099, 8))
    golden["bulk_ratio_max_s1"] = float(np.max(repb.ratios))
    golden["bulk_ratio_min_s1"] = float(np.min(repb.ratios))

    # doubling uniformity across random potential families (two seeds)
    spreads = []
    for seed in (101, 202, 303):
        rng = np.random.default_rng(seed)
        stats = []
        for _ in range(10):
            gf = fl.sample_profile(
                geom, spec,
                fl.bump_profile(rng.uniform(-0.2, 0.2),
                                rng.uniform(0.3, 0.5),
                                rng.uniform(-0.5, 0.5)),
                "omega_prime", mode="average")
            q = fl.make_potential(geom, gf, holder_bound=2.0, sup_bound=0.5)
            solq = fl.solve_forward(geom, spec, op, q, f)
            repq = fl.doubling_scan_boundary(geom, solq.u, 0.0,
                                             np.geomspace(0.02, 0.24, 8))
            stats.append(float(np.max(repq.ratios)))
        spreads.append(max(stats) / min(stats))
    golden["doubling_uniformity_spreads"] = spreads
    golden["doubling_uniformity_factor"] = max(spreads) * 1.5

    # exact-data recovery error (fixed tiny regularization)
    qb = fl.make_potential(
        geom, fl.sample_profile(geom, spec, fl.bump_profile(0.0, 0.5, 0.5),
                                "omega_prime", mode="average"))
    solq = fl.solve_forward(geom, spec, op, qb, f)
    lamq = fl.dtn_map(geom, spec, op, solq)
    rec = fl.recover_u(geom, spec, op, f, lamq, strategy=("fixed", 1e-14),
                       u_true=solq.u)
    golden["recover_u_exact_rel_error"] = rec.u_error_l2

    # zero-potential reconstruction floor: |q_rec|_inf after exact round trip
    res0 = fl.recover_q(
        geom, spec, op,
        fl.recover_u(geom, spec, op, f,
                     fl.dtn_map(geom, spec, op, sol),
                     strategy=("fixed", 1e-14), u_true=sol.u),
        1e-6, 1.0)
    golden["q_zero_floor"] = float(np.max(np.abs(res0.q_rec.values)))

    # noise-sweep benchmark scenario (gentler window, s = 1/4)
    cfg = fl.parse_config_text(SWEEP_CONFIG)
    sc = fl.build_scenario(cfg)
    curve = fl.noise_sweep(sc.geom, sc.spec, sc.op, sc.q1, sc.q2, sc.f,
                           EPSILONS, threshold=1e-3, seed=1234)
    golden["sweep_errors"] = [float(v) for v in curve.errors]
    golden["sweep_gamma_hat"] = curve.gamma_hat
    golden["sweep_fit_residual"] = curve.fit_residual
    golden["sweep_power_exponent"] = fl.fit_power_law_exponent(
        curve.t_values, curve.errors)

    # end-to-end certificate on S1 with a perturbed second potential
    cfg2 = fl.parse_config_text(E2E_CONFIG)
    sc2 = fl.build_scenario(cfg2)
    rep_e2e = fl.end_to_end(sc2, epsilons=EPSILONS, seed=1234)
    golden["e2e_actual"] = rep_e2e.actual_sup_gap
    golden["e2e_bound"] = rep_e2e.certificate.bound
    golden["e2e_fudge"] = rep_e2e.fudge
    golden["e2e_data_gap"] = rep_e2e.data_gap

    OUT.parent.mkdir(parents=True, exist_ok=True)
    with open(OUT, "w", encoding="utf-8") as fh:
        json.dump(golden, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {OUT}")
    for k, v in sorted(golden.items()):
        print(f"  {k} = {v}")


SWEEP_CONFIG = """
geometry.omega = -1, 1
geometry.w = 1.5, 2.5
geometry.omega_prime = -0.75, 0.75
geometry.s = 0.25
grid.L = 32
grid.n_super = 4096
f.center = 2.0
f.width = 0.4
f.amplitude = 1
q2.center = -0.1
q2.width = 0.5
q2.amplitude = 0.5
"""

E2E_CONFIG = """
geometry.omega = -1, 1
geometry.w = 2, 3
geometry.omega_prime = -0.75, 0.75
geometry.s = 0.5
grid.L = 32
grid.n_super = 4096
f.center = 2.5
f.width = 0.4
f.amplitude = 1
q1.center = -0.1
q1.width = 0.5
q1.amplitude = 0.4
q2.center = -0.1
q2.width = 0.5
q2.amplitude = 0.5
scan.x0 = 0.0
"""


if __name__ == "__main__":
    main()
