"""Acceptance gate: one test per release criterion, each at its stated
tolerance and runtime budget, printing a pass line with the measured margin.

Full-scale headline numbers are out of reach on a desk machine; these run the
same pipeline at small dimensions and check properties, oracles and trend
orderings instead.
"""

import time

import numpy as np
import pytest

from pimin.bccd import BccdConfig, bccd_solve, relative_change
from pimin.bench import Method, SweepSpec, run_sweep, run_trial
from pimin.linalg import hermitian_evd, kron_identity_apply
from pimin.metrics import adc_snr, power_noise, power_quadratic
from pimin.rcg import (PrecomputedForms, RcgConfig, euclid_grad, objective,
                       precompute_forms, random_state, rcg_solve, riem_grad)
from pimin.scenario import (ScenarioConfig, desk_bench_scenario,
                            desk_scenario, dbm_to_watt, generate_channels)
from pimin.sdp import SdpProblem, solve_sdp
from pimin.sysmodel import build_pi_channel

from helpers import (cplx, pauli_coords, random_forms, random_psd,
                     random_unit_modulus, sample_feasible_points,
                     sdp2_grid_oracle)

# Deep solver settings for the statistical trend criteria: the interference
# floor of the joint design sits orders of magnitude below the default
# gradient tolerance.
DEEP_RCG = RcgConfig(max_iters=800, grad_tol=1e-10)
DEEP_CFG = BccdConfig(n_iter=8, rcg=DEEP_RCG)


def report(criterion: str, detail: str, elapsed: float, budget: float) -> None:
    print(f"PASS {criterion}: {detail} [{elapsed:.1f}s / budget {budget:.0f}s]")
    assert elapsed < budget


def random_small_scenario(gen: np.random.Generator) -> ScenarioConfig:
    return desk_scenario(
        M_t=int(gen.integers(1, 5)), M=int(gen.integers(1, 5)),
        M_r=int(gen.integers(1, 3)), L=int(gen.integers(1, 4)),
        N_x=int(gen.integers(1, 4)), N_y=int(gen.integers(1, 3)),
        seed=int(gen.integers(0, 2**31)),
    )


def test_criterion_1_reduced_objective_equivalence():
    start = time.perf_counter()
    worst = 0.0
    gen = np.random.default_rng(101)
    for _ in range(100):
        scen = random_small_scenario(gen)
        if scen.N > 6:
            scen = desk_scenario(M_t=scen.M_t, M=scen.M, M_r=scen.M_r,
                                 L=scen.L, N_x=2, N_y=2, seed=scen.seed)
        ch = generate_channels(scen, np.random.default_rng(scen.seed))
        r = random_psd(gen, scen.L * scen.M_t, trace=scen.P_B)
        forms = precompute_forms(hermitian_evd(r), ch, scen.L)
        x = random_state(scen.L * scen.M, scen.N, gen)
        reduced = objective(x, forms)
        direct = power_quadratic(build_pi_channel(ch, x.phi), x.w, r)
        worst = max(worst, abs(reduced - direct) / max(direct, 1e-300))
    assert worst <= 1e-10
    report("criterion 1 (reduced-objective equivalence)",
           f"100 instances, worst relative error {worst:.2e}",
           time.perf_counter() - start, 10.0)


def test_criterion_2_kron_structure_oracle():
    start = time.perf_counter()
    worst = 0.0
    gen = np.random.default_rng(202)
    for _ in range(100):
        a, b, blocks = (int(v) for v in gen.integers(1, 7, size=3))
        h = cplx(gen, a, b)
        v = cplx(gen, blocks * b)
        dense = np.kron(np.eye(blocks), h) @ v
        worst = max(worst, float(np.max(np.abs(
            kron_identity_apply(h, v, blocks) - dense))))
    assert worst <= 1e-12
    report("criterion 2 (identity-Kronecker product oracle)",
           f"100 instances, worst entry error {worst:.2e}",
           time.perf_counter() - start, 5.0)


def test_criterion_3_gradient_correctness():
    start = time.perf_counter()
    worst = 0.0
    gen = np.random.default_rng(303)
    checked = 0
    while checked < 50:
        lm, n = int(gen.integers(1, 7)), int(gen.integers(1, 7))
        forms = random_forms(gen, int(gen.integers(1, 7)), lm, n)
        x = random_state(lm, n, gen)
        delta = cplx(gen, lm + n)
        g = euclid_grad(x, forms)
        h = 1e-6
        from pimin.rcg import BeamformerState
        f_p = objective(BeamformerState(x=x.x + h * delta, num_bf=lm), forms)
        f_m = objective(BeamformerState(x=x.x - h * delta, num_bf=lm), forms)
        fd = (f_p - f_m) / (2.0 * h)
        analytic = float(np.real(np.vdot(g, delta)))
        if abs(fd) < 1e-3:      # keep the relative comparison well posed
            continue
        worst = max(worst, abs(fd - analytic) / abs(fd))
        checked += 1
    assert worst <= 1e-6
    report("criterion 3 (gradient vs finite differences)",
           f"50 instances, worst relative error {worst:.2e}",
           time.perf_counter() - start, 30.0)


def test_criterion_4_manifold_invariants():
    start = time.perf_counter()
    worst_mod, worst_tan, worst_rise = 0.0, 0.0, -np.inf
    gen = np.random.default_rng(404)
    for run in range(10):
        if run % 2 == 0:
            forms = random_forms(gen, int(gen.integers(2, 6)),
                                 int(gen.integers(2, 5)), int(gen.integers(2, 5)))
            lm, n = forms.num_bf, forms.num_phases
        else:
            scen = desk_scenario(seed=run)
            ch = generate_channels(scen, np.random.default_rng(run))
            r = random_psd(gen, scen.L * scen.M_t, trace=scen.P_B)
            forms = precompute_forms(hermitian_evd(r), ch, scen.L)
            lm, n = scen.L * scen.M, scen.N
        x0 = random_state(lm, n, gen)
        stats = []

        def watch(x, g, d):
            stats.append((
                x.max_modulus_error(),
                float(np.max(np.abs(np.real(g * x.x.conj())))),
                float(np.max(np.abs(np.real(d * x.x.conj())))),
            ))

        out = rcg_solve(forms, x0, RcgConfig(max_iters=200), callback=watch)
        assert stats, "solver made no accepted steps"
        worst_mod = max(worst_mod, max(s[0] for s in stats))
        worst_tan = max(worst_tan, max(max(s[1], s[2]) for s in stats))
        worst_rise = max(worst_rise, float(np.max(np.diff(out.history))))
    assert worst_mod <= 1e-12
    assert worst_tan <= 1e-10
    assert worst_rise <= 1e-12
    report("criterion 4 (manifold invariants over full runs)",
           f"10 runs, modulus {worst_mod:.1e}, tangency {worst_tan:.1e}, "
           f"max rise {worst_rise:.1e}",
           time.perf_counter() - start, 30.0)


def test_criterion_5_rcg_vs_phase_grid():
    start = time.perf_counter()
    angles = np.linspace(0.0, 2.0 * np.pi, 360, endpoint=False)
    pw, pp = np.meshgrid(angles, angles, indexing="ij")
    worst = -np.inf
    for seed in range(20):
        gen = np.random.default_rng(500 + seed)
        b = complex(gen.standard_normal(), gen.standard_normal())
        c = complex(gen.standard_normal(), gen.standard_normal())
        forms = PrecomputedForms(b=np.array([[b]]), c=np.array([[[c]]]))
        x0 = random_state(1, 1, gen)
        out = rcg_solve(forms, x0, RcgConfig(max_iters=300, grad_tol=1e-14))
        grid = float(np.min(np.abs(
            np.exp(-1j * pw) * (b + c * np.exp(1j * pp))) ** 2))
        worst = max(worst, out.history[-1] - grid)
        assert abs(out.history[-1] - grid) <= 1e-3
    report("criterion 5 (scalar instance vs 360x360 phase grid)",
           f"20 seeds, worst solver-minus-grid {worst:.2e}",
           time.perf_counter() - start, 60.0)


def test_criterion_6_sdp_correctness():
    start = time.perf_counter()
    gen = np.random.default_rng(606)

    # analytic scalar case is exact
    p1 = SdpProblem(dim=1, obj=np.array([[3.0 + 0j]]),
                    comm_mat=np.array([[2.0 + 0j]]), comm_rhs=1.0,
                    sense_mat=np.array([[1.0 + 0j]]), sense_rhs=0.5,
                    trace_budget=4.0)
    sol1 = solve_sdp(p1)
    assert sol1.status == "optimal" and abs(sol1.objective_value - 12.0) <= 1e-9

    worst_rel, dominance_checked = 0.0, 0
    for k in range(20):
        h = cplx(gen, 2, 2)
        obj = h.conj().T @ h          # full rank keeps the optimum off zero
        c1 = cplx(gen, 2, 2)
        c1 = c1.conj().T @ c1 + 0.5 * np.eye(2)
        c2 = cplx(gen, 2, 2)
        c2 = 0.5 * (c2 + c2.conj().T)
        budget = float(gen.uniform(0.5, 3.0))
        witness = random_psd(gen, 2, trace=budget)
        prob = SdpProblem(
            dim=2, obj=obj, comm_mat=c1,
            comm_rhs=0.7 * float(np.trace(c1 @ witness).real),
            sense_mat=c2,
            sense_rhs=float(np.trace(c2 @ witness).real)
            - 0.3 * abs(float(np.trace(c2 @ witness).real)) - 0.1,
            trace_budget=budget)
        sol = solve_sdp(prob)
        assert sol.status == "optimal"
        r = sol.R_ss.matrix
        assert abs(np.trace(r).real - budget) <= 1e-6 * budget
        assert np.linalg.eigvalsh(r).min() >= -1e-8 * budget
        assert np.trace(prob.comm_mat @ r).real \
            >= prob.comm_rhs - 1e-6 * max(abs(prob.comm_rhs), 1.0)
        assert np.trace(prob.sense_mat @ r).real \
            >= prob.sense_rhs - 1e-6 * max(abs(prob.sense_rhs), 1.0)
        grid = sdp2_grid_oracle(prob, extra_centers=[pauli_coords(r, budget)])
        assert grid is not None
        rel = abs(sol.objective_value - grid) / abs(grid)
        assert rel <= 1e-4
        worst_rel = max(worst_rel, rel)
        if k < 3:   # dominance over 1000 random feasible points
            pts = sample_feasible_points(prob, gen, 1000)
            assert len(pts) == 1000
            vals = [float(np.trace(prob.obj @ q).real) for q in pts]
            assert sol.objective_value <= min(vals) + 1e-6 * abs(min(vals))
            dominance_checked += 1
    report("criterion 6 (covariance SDP vs grid oracle)",
           f"20 problems, worst relative gap {worst_rel:.2e}, "
           f"{dominance_checked}x1000-point dominance",
           time.perf_counter() - start, 300.0)


def test_criterion_7_bccd_end_to_end():
    start = time.perf_counter()
    scen = desk_scenario(M_t=2, M=4, N_x=2, N_y=2, L=2,
                         gamma_comm_dB=0.0, gamma_sense_dB=0.0, P_B_dB=0.0)
    floor = 1e-3 * scen.sigma_r2_W * scen.L * scen.M
    for seed in (1, 2, 3):
        cfg = BccdConfig(n_iter=20, seed=seed)
        ch = generate_channels(scen, np.random.default_rng(seed))
        out = bccd_solve(cfg, scen, ch)
        pis = [h.p_pi for h in out.history]
        assert len(pis) >= 4
        tail = [relative_change(pis[-k], pis[-k - 1], floor) for k in (1, 2, 3)]
        assert max(tail) < 1e-3
        final = out.history[-1]
        if final.sdp_status == "optimal":
            assert final.comm_snr_db >= scen.gamma_comm_dB - 0.01
            assert final.sndr_db >= scen.gamma_sense_dB - 0.01
    report("criterion 7 (alternating loop end to end)",
           "3 seeds: stall within 1e-3 and constraints within 0.01 dB",
           time.perf_counter() - start, 900.0)


def test_criterion_8_benchmark_ordering():
    start = time.perf_counter()
    scen = desk_bench_scenario(M_t=4, M=8, N_x=4, N_y=4, L=2, seed=808)
    spec = SweepSpec(base=scen, axis="M", values=(8,), trials_per_point=50,
                     methods=(Method.PROPOSED, Method.BENCH1_RANDOM_PHASE,
                              Method.BENCH2_EQUAL_PHASE),
                     solver=DEEP_CFG)
    records, _ = run_sweep(spec, parallelism=2)
    by_method = {}
    for rec in records:
        by_method.setdefault(rec.method, {})[rec.trial_id] = rec.P_PI_dB
    prop = by_method["proposed"]
    b1 = by_method["bench1_random_phase"]
    b2 = by_method["bench2_equal_phase"]
    wins = sum(1 for t in prop if prop[t] < b1[t] and prop[t] < b2[t])
    med_p = float(np.median(list(prop.values())))
    med_b1 = float(np.median(list(b1.values())))
    med_b2 = float(np.median(list(b2.values())))
    assert wins >= 0.9 * len(prop)
    assert med_b1 - med_p >= 10.0
    assert med_b2 - med_p >= 10.0
    report("criterion 8 (benchmark ordering)",
           f"wins {wins}/50, median gaps {med_b1 - med_p:.1f} / "
           f"{med_b2 - med_p:.1f} dB",
           time.perf_counter() - start, 1800.0)


def test_criterion_9_monotone_trends():
    # The trend instrument needs the nullability transition inside the sweep:
    # a single-row RIS keeps the phase block from nulling on its own, a high
    # sensing target keeps the covariance frozen at its seeded start for
    # every method, and the radar-side sweep then crosses from rank-limited
    # to null-capable as the array grows.
    start = time.perf_counter()
    trend_cfg = BccdConfig(n_iter=3,
                           rcg=RcgConfig(max_iters=3000, grad_tol=1e-11))
    m_base = desk_bench_scenario(M_t=4, L=2, N_x=2, N_y=1,
                                 gamma_sense_dB=30.0, seed=909)
    n_base = desk_bench_scenario(M_t=4, L=2, M=4, N_y=1, d_rR=5.0,
                                 gamma_sense_dB=30.0, seed=909)

    def sweep_means(base, axis, values):
        spec = SweepSpec(base=base, axis=axis, values=values,
                         trials_per_point=30, methods=(Method.PROPOSED,),
                         solver=trend_cfg)
        records, _ = run_sweep(spec, parallelism=2)
        means = []
        for v in values:
            vals = [r.P_PI_dB for r in records if getattr(r, axis) == v
                    and np.isfinite(r.P_PI_dB)]
            means.append(float(np.mean(vals)))
        return means

    def check(label, means):
        rises = [max(0.0, b - a) for a, b in zip(means, means[1:])]
        assert sum(1 for r in rises if r > 0) <= 1, (label, means)
        assert max(rises, default=0.0) <= 0.5, (label, means)

    m_means = sweep_means(m_base, "M", (1, 4, 8))
    check("M", m_means)
    n_means = sweep_means(n_base, "N_x", (1, 2, 4))
    check("N_x", n_means)
    report("criterion 9 (monotone interference trends)",
           f"M sweep {['%.1f' % v for v in m_means]} dB, "
           f"N_x sweep {['%.1f' % v for v in n_means]} dB",
           time.perf_counter() - start, 2700.0)


def test_criterion_10_closed_form_spot_checks():
    start = time.perf_counter()
    w = random_unit_modulus(np.random.default_rng(0), 20)
    assert power_noise(w, dbm_to_watt(-80.0)) == dbm_to_watt(-80.0) * 20
    assert abs(adc_snr(11) - 67.98) <= 1e-12
    cfg = BccdConfig(n_iter=2, seed=0)
    rec_a = run_trial(desk_scenario(N_x=2, N_y=2, seed=5),
                      Method.BENCH3_NO_RIS, cfg, seed=99)
    rec_b = run_trial(desk_scenario(N_x=4, N_y=4, seed=5),
                      Method.BENCH3_NO_RIS, cfg, seed=99)
    assert rec_a.P_PI_dB == rec_b.P_PI_dB
    report("criterion 10 (closed-form spot checks)",
           "noise power exact, ADC SNR exact, no-RIS invariant to array size",
           time.perf_counter() - start, 1.0)
