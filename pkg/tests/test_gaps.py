import numpy as np
import pytest

import pgaplab as pg
from pgaplab.action import default_domain
from pgaplab.errors import FixedVectorPresent, ValidationError
from pgaplab.gaps import (
    GapOptions,
    ensure_no_fixed_vectors,
    lift_vector,
    make_gradient_objective,
)


def full_rep(handle, p=2.0):
    return pg.Representation(pg.full_ball(handle), p, "full")


@pytest.mark.parametrize("n", [3, 4, 5, 8, 12])
def test_exact_displacement_constant_cyclic(n):
    rep = full_rep(pg.cyclic_group(n))
    est_disp, est_r = pg.displacement_constant(rep, 2.0)
    assert est_disp.method == "exact-fourier"
    assert est_disp.value == pytest.approx(2.0 * np.sin(np.pi / n), abs=1e-12)
    assert est_r.value == pytest.approx(2.0 * np.sin(np.pi / n), abs=1e-12)


def test_exact_displacement_cyclic2():
    rep = full_rep(pg.cyclic_group(2))
    est_disp, _ = pg.displacement_constant(rep, 2.0)
    assert est_disp.value == pytest.approx(2.0, abs=1e-12)


def test_certificate_attains_reported_value():
    rep = full_rep(pg.cyclic_group(6))
    est_disp, est_r = pg.displacement_constant(rep, 2.0)
    act = pg.AffineAction.linear(rep)
    v = pg.LpVector(rep.ball, np.asarray(est_disp.certificate), 2.0)
    ratio = pg.displacement_energy(act, pg.EnergyParams(np.inf, 2.0), v) / v.norm()
    assert ratio == pytest.approx(est_disp.value, abs=1e-10)


@pytest.mark.parametrize("n", [4, 6])
def test_multistart_agrees_with_character_oracle(n):
    rep = full_rep(pg.cyclic_group(n))
    opts = GapOptions(starts=16, iters=4000, seed=3, exact="never")
    est_disp, est_r = pg.displacement_constant(rep, 2.0, opts)
    assert est_disp.method == "multistart"
    exact = 2.0 * np.sin(np.pi / n)
    assert abs(est_disp.value - exact) <= 1e-6
    assert abs(est_r.value - exact) <= 1e-6


def test_eigen_oracle_matches_characters():
    for n in (4, 5, 7):
        rep = full_rep(pg.cyclic_group(n))
        dom = default_domain(rep)
        assert pg.hilbert_gap_constant(rep, dom) == pytest.approx(
            2.0 * np.sin(np.pi / n), abs=1e-12
        )


def test_gradient_constant_cyclic4():
    rep = full_rep(pg.cyclic_group(4))
    opts = GapOptions(starts=8, iters=2000)
    est = pg.gradient_constant(rep, opts)
    exact = pg.hilbert_gap_constant(rep, default_domain(rep))
    assert est.value <= 2.0
    assert est.value >= exact - 1e-9  # pointwise values never undershoot
    assert est.value == pytest.approx(exact, abs=1e-6)


def test_laplacian_constant_is_half_gradient_constant():
    rep = full_rep(pg.cyclic_group(4))
    opts = GapOptions(starts=8, iters=2000)
    eg = pg.gradient_constant(rep, opts)
    el = pg.laplacian_constant(rep, opts)
    assert abs(el.value - eg.value / 2.0) <= 2e-3


def test_fixed_vector_present_on_full_domain():
    rep = full_rep(pg.cyclic_group(6))
    dom = default_domain(rep, "full")
    with pytest.raises(FixedVectorPresent):
        ensure_no_fixed_vectors(rep, dom)
    with pytest.raises(FixedVectorPresent):
        pg.displacement_constant(rep, 2.0, GapOptions(starts=2, iters=100), dom)


def test_mean_zero_domain_has_no_fixed_vectors():
    rep = full_rep(pg.symmetric_group(3))
    ensure_no_fixed_vectors(rep, default_domain(rep))


def test_dirichlet_domain_has_no_fixed_vectors():
    rep = pg.Representation(pg.ball(pg.integer_lattice(1), 8), 2.0, "dirichlet")
    ensure_no_fixed_vectors(rep, default_domain(rep))


def test_tent_vector_ratio():
    for R in (4, 8, 16):
        rep = pg.Representation(pg.ball(pg.integer_lattice(1), R), 2.0, "dirichlet")
        t = pg.tent_vector(rep)
        rep.check_admissible(t)
        assert pg.laplacian_ratio(rep, t) == pytest.approx(np.sqrt(3.0 / (4.0 * R)), rel=1e-12)


def test_tent_vector_needs_rank_one_lattice():
    rep = full_rep(pg.cyclic_group(4))
    with pytest.raises(ValidationError):
        pg.tent_vector(rep)


def test_kesten_bound_value():
    assert pg.kesten_displacement_bound(2) == pytest.approx(np.sqrt(2.0 - np.sqrt(3.0)), abs=1e-15)


def test_kesten_bound_holds_pointwise_on_truncation():
    rng = np.random.default_rng(0)
    rep = pg.Representation(pg.ball(pg.free_group(2), 4), 2.0, "dirichlet")
    act = pg.AffineAction.linear(rep)
    params = pg.EnergyParams(2.0, 2.0)
    bound = pg.kesten_displacement_bound(2)
    for _ in range(50):
        v = rep.random_admissible(rng)
        assert pg.displacement_energy(act, params, v) >= bound * v.norm() - 1e-12


def test_equivalence_report_cyclic8():
    rep = full_rep(pg.cyclic_group(8))
    opts = GapOptions(starts=8, iters=2000, seed=5)
    report = pg.equivalence_report(rep, 2.0, opts, battery=3)
    c = report.constants
    assert report.chain["C_r <= C_disp"]
    assert report.chain["m_min^(1/r) C_disp <= C_r"]
    assert report.chain["C_grad >= C_r"]
    assert report.chain["C_lap == C_grad/2 (2e-3)"]
    assert report.chain["battery min gradient >= C_grad"]
    assert c["C_disp"] == pytest.approx(2.0 * np.sin(np.pi / 8), abs=1e-9)
    for row in report.battery:
        assert row["terminalF"] <= 1e-6
        assert row["recoveryError"] <= 1e-4
        assert row["reason"] == "f_tol"


def test_equivalence_report_empty_battery():
    rep = full_rep(pg.cyclic_group(4))
    report = pg.equivalence_report(rep, 2.0, GapOptions(starts=4, iters=1000), battery=0)
    assert report.battery == []
    assert set(report.constants) == {"C_disp", "C_r", "C_grad", "C_lap"}


def test_equivalence_report_free2():
    rep = pg.Representation(pg.ball(pg.free_group(2), 3), 2.0, "dirichlet")
    opts = GapOptions(starts=6, iters=1500, seed=1)
    report = pg.equivalence_report(rep, 2.0, opts, battery=2)
    assert report.domain == "dirichlet"
    assert report.radius == 3
    assert report.constants["C_disp"] >= pg.kesten_displacement_bound(2) - 1e-3
    assert report.chain["C_r <= C_disp"]
    assert report.chain["C_grad >= C_r"]
    for row in report.battery:
        assert row["terminalF"] <= 1e-6


def test_gap_sweep_lattice_monotone():
    opts = GapOptions(starts=4, iters=800, seed=2)
    reports = pg.gap_sweep(pg.integer_lattice(1), 2.0, 2.0, [4, 8], opts)
    c4, c8 = (rep.constants["C_lap"] for rep in reports)
    assert c8 < c4
    assert c4 < np.sqrt(3.0 / 16.0)  # below the tent bound at R = 4
    assert c8 < np.sqrt(3.0 / 32.0)


def test_lift_vector_prefix():
    h = pg.free_group(2)
    small = pg.ball(h, 2)
    big = pg.ball(h, 3)
    rng = np.random.default_rng(4)
    vals = rng.standard_normal(small.size)
    lifted = lift_vector(vals, small.size, big.size)
    assert (lifted[: small.size] == vals).all()
    assert (lifted[small.size :] == 0.0).all()
    # same element order in the shared prefix, so energies agree exactly
    rep_s = pg.Representation(small, 2.0, "dirichlet")
    rep_b = pg.Representation(big, 2.0, "dirichlet")
    act_s = pg.AffineAction.linear(rep_s)
    act_b = pg.AffineAction.linear(rep_b)
    v_s = pg.LpVector(small, np.where(rep_s.admissible_mask, vals, 0.0), 2.0)
    v_b = pg.LpVector(big, lift_vector(v_s.values, small.size, big.size), 2.0)
    params = pg.EnergyParams(2.0, 2.0)
    assert pg.displacement_energy(act_s, params, v_s) == pytest.approx(
        pg.displacement_energy(act_b, params, v_b), abs=1e-14
    )


def test_gradient_objective_matches_abs_gradient():
    rep = full_rep(pg.symmetric_group(3), p=3.0)
    act = pg.AffineAction.linear(rep)
    obj = make_gradient_objective(act)
    rng = np.random.default_rng(5)
    for _ in range(10):
        v = rep.random_admissible(rng)
        val, grad = obj(v.values)
        assert val == pytest.approx(pg.abs_gradient(act, v).value, abs=1e-12)
        # finite-difference check of the euclidean gradient
        direction = rng.standard_normal(rep.ball.size)
        h = 1e-6
        up, _ = obj(v.values + h * direction)
        down, _ = obj(v.values - h * direction)
        fd = (up - down) / (2 * h)
        assert fd == pytest.approx(float(np.dot(grad, direction)), rel=5e-4, abs=1e-7)
