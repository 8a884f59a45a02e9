"""Acceptance gate: each test runs one release criterion at its stated
tolerance and prints a PASS/FAIL line (run with -s to see them inline)."""

import time

import numpy as np

from asfest.baselines import (
    _moment_basis,
    estimate_burg,
    estimate_l2_projection,
    estimate_spice,
    grid_moments,
)
from asfest.core import (
    AngularGrid,
    Cluster,
    GroupSparseASF,
    ToeplitzCovariance,
    asf_to_covariance,
    atom_matrix,
    steering_vector,
)
from asfest.covariance import (
    build_nnls_problem,
    sample_covariance,
    sample_snapshots,
    toeplitzify,
)
from asfest.estimators import (
    atomic_l1_norm,
    build_pulse_dictionary,
    estimate_gnnls,
    estimate_nnls,
    gnnls_sweep,
    prop1_crosscheck,
    select_residual_matched,
)
from asfest.harness import (
    ExperimentConfig,
    connected_components,
    random_asf,
    run_experiment,
    support_mask,
)
from asfest.nnls import solve_nnls

from helpers import nnls_bruteforce


def _report(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'} - {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


def test_atomic_norm_anchors():
    d2 = build_pulse_dictionary(4, 2)
    d3 = build_pulse_dictionary(5, 3)
    checks = [
        (atomic_l1_norm(np.array([2.0, 0.0, 2.0, 0.0]), d2)[0], 4.0),
        (atomic_l1_norm(np.array([1.0, 1.0, 1.0, 1.0]), d2)[0], 2.0 * np.sqrt(2.0)),
        (atomic_l1_norm(np.array([1.0, 1.0, 1.0, 1.0, 0.0]), d3)[0], 1.0 + np.sqrt(3.0)),
        (atomic_l1_norm(np.array([1.0, 1.0, 0.0, 1.0, 1.0]), d3)[0], 2.0 * np.sqrt(2.0)),
    ]
    worst = max(abs(got - want) for got, want in checks)
    _report("atomic-norm anchors (4, 2*sqrt2, 1+sqrt3, 2*sqrt2)", worst <= 1e-6,
            f"max deviation {worst:.2e}")


def test_objective_equivalence():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(50):
        m = int(rng.integers(2, 17))
        g = int(rng.integers(m, 3 * m))
        grid = AngularGrid(g)
        atoms = atom_matrix(grid, m)
        sigma = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        sigma[0] = abs(sigma[0].real) + m
        gamma = np.abs(rng.standard_normal(g))
        n0 = 0.3 * abs(rng.standard_normal())
        s_hat = ToeplitzCovariance(sigma).matrix()
        model = sum(
            gamma[j] * ToeplitzCovariance(atoms[:, j]).matrix() for j in range(g)
        )
        lhs = float(np.linalg.norm(s_hat - model - n0 * np.eye(m)) ** 2)
        prob = build_nnls_problem(sigma, atoms, n0)
        rhs = float(np.sum((prob.A @ gamma - prob.b) ** 2))
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), 1e-300))
    _report("matrix vs stacked objective equivalence (50 instances, M<=16)",
            worst <= 1e-9, f"max relative gap {worst:.2e}")


def test_nnls_oracle():
    rng = np.random.default_rng(77)
    worst_gap, worst_kkt, converged_all = 0.0, 0.0, True
    for _ in range(200):
        a = rng.standard_normal((6, 4))
        b = rng.standard_normal(6)
        sol = solve_nnls(a, b)
        _, best_obj = nnls_bruteforce(a, b)
        obj = float(np.sum((a @ sol.x - b) ** 2))
        worst_gap = max(worst_gap, abs(obj - best_obj))
        if sol.converged:
            worst_kkt = max(worst_kkt, sol.kkt_violation - sol.tol)
        else:
            converged_all = False
    _report("NNLS vs exhaustive support enumeration (200 x 6x4)",
            worst_gap <= 1e-8 and worst_kkt <= 0 and converged_all,
            f"max objective gap {worst_gap:.2e}")


def test_proposition1_certificate():
    rng = np.random.default_rng(13)
    checked, worst_rel = 0, 0.0
    for trial in range(6):
        m, g = 16, 48
        grid = AngularGrid(g)
        atoms = atom_matrix(grid, m)
        asf = random_asf(2, 0.3, rng, min_gap=2 * grid.cell_width)
        cov = asf_to_covariance(asf, m)
        noise = 0.01
        snaps = sample_snapshots(cov, 8 * m, noise, 500 + trial)
        sigma = toeplitzify(sample_covariance(snaps))
        problem = build_nnls_problem(sigma, atoms, noise)
        dictionary = build_pulse_dictionary(g, 3)
        scale = float(np.abs((problem.A @ dictionary.matrix).T @ problem.b).max())
        for vs in scale * np.logspace(-4, 0, 5):
            est = estimate_gnnls(problem, dictionary, float(vs))
            if not est.diagnostics.converged or est.alpha.sum() == 0:
                continue
            report = prop1_crosscheck(est.alpha, problem, dictionary, float(vs))
            worst_rel = max(worst_rel, report.max_violation / scale)
            checked += 1
    _report("Proposition-1 KKT certificate on converged GNNLS runs",
            checked >= 20 and worst_rel <= 1e-6,
            f"{checked} runs, max violation {worst_rel:.2e} * scale")


def test_forward_map_sanity():
    uniform = GroupSparseASF([Cluster(-1.0, 1.0, 1.0)])
    cov = asf_to_covariance(uniform, 8)
    identity_gap = float(np.abs(cov.matrix() - np.eye(8)).max())

    m, g_size, g_idx = 16, 8, 3
    grid = AngularGrid(g_size)
    atoms = atom_matrix(grid, m)
    lo, hi = grid.cell_bounds(g_idx)
    pulse_asf = GroupSparseASF([Cluster(lo, hi, 1.0)])  # unit mass pulse
    sigma = asf_to_covariance(pulse_asf, m).first_column
    problem = build_nnls_problem(sigma, atoms, 0.0)
    est = estimate_nnls(problem)
    expected = np.zeros(g_size)
    expected[g_idx] = g_size / 2.0  # unit mass over width 2/G
    l1_gap = float(np.abs(est.gamma - expected).sum())
    _report("forward map: uniform ASF -> identity; pulse ASF recovered",
            identity_gap <= 1e-10 and l1_gap <= 1e-6,
            f"identity gap {identity_gap:.2e}, pulse l1 gap {l1_gap:.2e}")


def test_group_sparsity_property():
    m, g, p0, k = 32, 128, 4, 2
    grid = AngularGrid(g)
    atoms = atom_matrix(grid, m)
    dictionary = build_pulse_dictionary(g, p0)
    noise = 10.0 ** (-20.0 / 10.0)  # 20 dB
    quality_hits, strict_hits, max_runtime = 0, 0, 0.0
    for seed in range(20):
        rng = np.random.default_rng([seed, 1])
        asf = random_asf(k, 0.3, rng, min_gap=2 * grid.cell_width)
        cov = asf_to_covariance(asf, m)
        snaps = sample_snapshots(cov, 8 * m, noise, seed * 1000)
        sigma = toeplitzify(sample_covariance(snaps))
        problem = build_nnls_problem(sigma, atoms, noise)
        t0 = time.perf_counter()
        plain = estimate_nnls(problem)
        sweep = gnnls_sweep(problem, dictionary)
        chosen = select_residual_matched(
            sweep, plain.data_residual, float(np.linalg.norm(problem.b))
        )
        max_runtime = max(max_runtime, time.perf_counter() - t0)
        from asfest.core import grid_sample_asf

        truth = grid_sample_asf(asf, grid)
        cc_nnls, _ = connected_components(plain.gamma)
        cc_gnnls, _ = connected_components(chosen.gamma)
        est_supp = support_mask(chosen.gamma)
        true_supp = truth > 0
        jac = np.count_nonzero(est_supp & true_supp) / max(
            np.count_nonzero(est_supp | true_supp), 1
        )
        if cc_gnnls <= k + 1 and jac >= 0.7:
            quality_hits += 1
        if cc_nnls > cc_gnnls:
            strict_hits += 1
    _report(
        "group sparsity at SNR 20 dB, T=8M (20 seeds)",
        quality_hits >= 16 and strict_hits >= 10 and max_runtime < 60.0,
        f"quality {quality_hits}/20, gnnls-more-grouped {strict_hits}/20, "
        f"max runtime {max_runtime:.1f}s",
    )


def test_baseline_sanity():
    # Burg moment matching at full order
    m = 8
    asf = GroupSparseASF([Cluster(-0.5, -0.2, 0.6), Cluster(0.3, 0.45, 0.4)])
    sigma = asf_to_covariance(asf, m).first_column
    grid = AngularGrid(2048)
    burg = estimate_burg(sigma, m - 1, grid)
    burg_gap = float(
        np.abs(grid_moments(burg.extras["density"], _moment_basis(grid, m), grid.cell_width) - sigma).max()
    )

    # l2 projection reaches its tolerance on a feasible instance
    m2 = 6
    grid2 = AngularGrid(16 * m2)
    broad = GroupSparseASF([Cluster(-0.7, -0.05, 0.45), Cluster(0.05, 0.8, 0.55)])
    sigma2 = asf_to_covariance(broad, m2).first_column
    tol2 = 1e-8
    proj = estimate_l2_projection(sigma2, grid2, max_iter=4000, tol=tol2)
    proj_gap = float(
        np.abs(grid_moments(proj.extras["density"], _moment_basis(grid2, m2), grid2.cell_width) - sigma2).max()
    )

    # SPICE localizes an on-grid point source
    m3, g3, node = 16, 64, 40
    grid3 = AngularGrid(g3)
    hits = 0
    for seed in range(20):
        a = steering_vector(grid3.points[node], m3)
        cov = ToeplitzCovariance(a * a[0].conj())
        snaps = sample_snapshots(cov, 8 * m3, 1e-3, seed)
        est = estimate_spice(sample_covariance(snaps), grid3, noise_power=1e-3)
        if int(np.argmax(est.gamma)) == node:
            hits += 1
    _report(
        "baseline sanity (Burg moments, l2proj moments, SPICE localization)",
        burg_gap <= 1e-4 and proj.diagnostics["converged"] and proj_gap <= tol2 and hits >= 19,
        f"burg {burg_gap:.2e}, l2proj {proj_gap:.2e}, spice {hits}/20",
    )


def test_determinism(tmp_path):
    kw = dict(
        m=12, g=48, t_over_m=(2, 4), seeds=(0, 1), k=(1, 2),
        methods=("nnls", "gnnls", "burg"),
    )
    run_experiment(ExperimentConfig(**kw, output_dir=str(tmp_path / "a")))
    run_experiment(ExperimentConfig(**kw, output_dir=str(tmp_path / "b")))
    a = (tmp_path / "a" / "metrics.csv").read_bytes()
    b = (tmp_path / "b" / "metrics.csv").read_bytes()
    _report("determinism: identical config -> byte-identical metrics CSV",
            a == b, f"{len(a)} bytes")
