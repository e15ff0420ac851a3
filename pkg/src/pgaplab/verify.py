"""Runnable invariant suites over a configured instance.

Each suite returns a list of (name, passed, detail) rows; details carry a
counterexample when a check fails.  The CLI `verify` command maps any
failure to exit code 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .action import AffineAction, Cocycle, Representation, coboundary, mean_zero_project
from .energy import (
    EnergyParams,
    cocycle_norm,
    dirichlet_norm,
    displacement_energy,
    gradient_field,
    markov_operator,
    p_laplacian,
)
from .errors import PgapError
from .gradient import DescentOptions, abs_gradient, abs_gradient_sampled, descend
from .groups import check_ball_invariants, check_symmetry
from .lpspace import (
    LpVector,
    duality_map,
    norming_vector,
    pair,
    vector_from_bytes,
    vector_to_bytes,
)

SUITES = ("ball", "lp", "action", "energy", "gradient")


@dataclass
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: dict

    def to_dict(self):
        return {"suite": self.suite, "name": self.name, "passed": self.passed, "detail": self.detail}


def _rand_vec(rep, rng, *, mean_zero=False):
    v = rep.random_admissible(rng, mean_zero=mean_zero)
    n = v.norm()
    return v if n == 0 else (1.0 / n) * v


def suite_ball(rep: Representation, rng) -> list[CheckResult]:
    rows = []
    problems = check_ball_invariants(rep.ball)
    rows.append(CheckResult("ball", "ball_invariants", not problems, {"violations": problems}))
    sym = check_symmetry(rep.handle)
    rows.append(CheckResult("ball", "generator_symmetry", sym.ok, sym.to_dict()))
    return rows


def suite_lp(rep: Representation, rng, trials=50) -> list[CheckResult]:
    rows = []
    worst_holder = 0.0
    worst_support = 0.0
    worst_unit = 0.0
    worst_scale = 0.0
    worst_round = 0.0
    example = {}
    for _ in range(trials):
        f = _rand_vec(rep, rng)
        g = duality_map(_rand_vec(rep, rng))
        worst_holder = max(worst_holder, abs(pair(g, f)) - g.norm() * f.norm())
        j = duality_map(f)
        worst_support = max(worst_support, abs(pair(j, f) - f.norm()))
        worst_unit = max(worst_unit, abs(j.norm() - 1.0))
        t = float(rng.uniform(0.5, 3.0))
        worst_scale = max(worst_scale, float(np.abs(duality_map(t * f).values - j.values).max()))
        u = norming_vector(j)
        worst_round = max(worst_round, (u - (1.0 / f.norm()) * f).norm())
    rows.append(CheckResult("lp", "holder_inequality", worst_holder <= 1e-12, {"excess": worst_holder}))
    rows.append(CheckResult("lp", "support_functional_value", worst_support <= 1e-9, {"worst": worst_support}))
    rows.append(CheckResult("lp", "support_functional_unit_norm", worst_unit <= 1e-9, {"worst": worst_unit}))
    rows.append(CheckResult("lp", "duality_scale_invariance", worst_scale <= 1e-12, {"worst": worst_scale}))
    rows.append(CheckResult("lp", "duality_round_trip", worst_round <= 1e-10, {"worst": worst_round}))

    f = _rand_vec(rep, rng)
    back = vector_from_bytes(rep.ball, vector_to_bytes(f), rep.p)
    rows.append(
        CheckResult(
            "lp",
            "binary_round_trip",
            bool((back.values == f.values).all()),
            {},
        )
    )
    return rows


def suite_action(rep: Representation, rng, trials=25) -> list[CheckResult]:
    rows = []
    h = rep.handle
    worst_iso = 0.0
    worst_inv = 0.0
    worst_lin = 0.0
    worst_mz = 0.0
    for _ in range(trials):
        v = _rand_vec(rep, rng, mean_zero=(rep.mode == "full"))
        k = int(rng.integers(h.n_generators))
        ki = int(h.inverse_index[k])
        pv = rep.apply_generator(k, v)
        worst_iso = max(worst_iso, abs(pv.norm() - v.norm()))
        back = rep.apply_generator(ki, pv, check=False)
        worst_inv = max(worst_inv, (back - v).norm())
        u = _rand_vec(rep, rng, mean_zero=(rep.mode == "full"))
        lhs = coboundary(rep, 2.0 * u + 3.0 * v).values[k]
        rhs = 2.0 * coboundary(rep, u).values[k] + 3.0 * coboundary(rep, v).values[k]
        worst_lin = max(worst_lin, (lhs - rhs).norm())
        if rep.mode == "full":
            worst_mz = max(worst_mz, abs(float(pv.values.sum()) - float(v.values.sum())))
    rows.append(CheckResult("action", "isometry", worst_iso <= 1e-14 * 10, {"worst": worst_iso}))
    rows.append(CheckResult("action", "inverse_composition", worst_inv == 0.0, {"worst": worst_inv}))
    rows.append(CheckResult("action", "coboundary_linearity", worst_lin <= 1e-12, {"worst": worst_lin}))
    if rep.mode == "full":
        rows.append(CheckResult("action", "mean_zero_invariance", worst_mz <= 1e-12, {"worst": worst_mz}))

    v = _rand_vec(rep, rng, mean_zero=(rep.mode == "full"))
    c = coboundary(rep, v)
    worst_law = 0.0
    for k in range(h.n_generators):
        ki = int(h.inverse_index[k])
        resid = (c.values[ki] + rep.apply_generator(ki, c.values[k], check=False)).norm()
        worst_law = max(worst_law, resid)
    rows.append(CheckResult("action", "cocycle_inverse_law", worst_law <= 1e-12, {"worst": worst_law}))

    word = [int(rng.integers(h.n_generators))]
    word.append(int(h.inverse_index[word[0]]))
    ext = c.extend(word)
    rows.append(
        CheckResult("action", "extension_over_cancelling_word", ext.norm() <= 1e-12, {"norm": ext.norm()})
    )
    return rows


def suite_energy(rep: Representation, rng, trials=25) -> list[CheckResult]:
    rows = []
    p = rep.p
    act = AffineAction.linear(rep)
    params = EnergyParams(r=p, p=p)
    params_inf = EnergyParams(r=np.inf, p=p)
    m_min = rep.handle.min_weight()
    worst_conv = -np.inf
    worst_lip = -np.inf
    worst_sand = -np.inf
    worst_hom = 0.0
    worst_dbound = -np.inf
    for _ in range(trials):
        v = _rand_vec(rep, rng)
        u = _rand_vec(rep, rng)
        fv = displacement_energy(act, params, v)
        fu = displacement_energy(act, params, u)
        for t in (0.25, 0.5, 0.75):
            mid = displacement_energy(act, params, t * v + (1 - t) * u)
            worst_conv = max(worst_conv, mid - (t * fv + (1 - t) * fu))
        worst_lip = max(worst_lip, abs(fv - fu) - 2.0 * (v - u).norm())
        f_inf = displacement_energy(act, params_inf, v)
        worst_sand = max(worst_sand, fv - f_inf, m_min ** (1.0 / p) * f_inf - fv)
        t = float(rng.uniform(0.1, 2.5)) * (1 if rng.random() < 0.5 else -1)
        worst_hom = max(worst_hom, abs(displacement_energy(act, params, t * v) - abs(t) * fv))
        worst_dbound = max(worst_dbound, cocycle_norm(coboundary(rep, v), params) - 2.0 * v.norm())
    rows.append(CheckResult("energy", "convexity", worst_conv <= 1e-12, {"excess": worst_conv}))
    rows.append(CheckResult("energy", "two_lipschitz", worst_lip <= 1e-12, {"excess": worst_lip}))
    rows.append(CheckResult("energy", "r_inf_sandwich", worst_sand <= 1e-12, {"excess": worst_sand}))
    rows.append(CheckResult("energy", "homogeneity", worst_hom <= 1e-10, {"worst": worst_hom}))
    rows.append(CheckResult("energy", "coboundary_norm_bound", worst_dbound <= 1e-12, {"excess": worst_dbound}))

    # pointwise field matches the Laplacian of the shifted argument
    f0 = _rand_vec(rep, rng, mean_zero=(rep.mode == "full"))
    cob = AffineAction.from_potential(rep, f0)
    worst_field = 0.0
    for _ in range(5):
        f = _rand_vec(rep, rng, mean_zero=(rep.mode == "full"))
        lhs = gradient_field(cob, f)
        rhs = p_laplacian(rep, f + f0)
        worst_field = max(worst_field, float(np.abs(lhs.values - rhs.values).max()))
    rows.append(CheckResult("energy", "field_vs_shifted_laplacian", worst_field <= 1e-12, {"worst": worst_field}))

    if p == 2.0:
        worst_d2 = 0.0
        for _ in range(5):
            f = _rand_vec(rep, rng, mean_zero=(rep.mode == "full"))
            lhs = dirichlet_norm(rep, f) ** 2
            rhs = -2.0 * pair(p_laplacian(rep, f), f)
            worst_d2 = max(worst_d2, abs(lhs - rhs))
        rows.append(CheckResult("energy", "dirichlet_identity_p2", worst_d2 <= 1e-10, {"worst": worst_d2}))
    return rows


def suite_gradient(rep: Representation, rng, trials=15) -> list[CheckResult]:
    rows = []
    p = rep.p
    act = AffineAction.linear(rep)
    params = EnergyParams(r=p, p=p)
    worst_bound = -np.inf
    worst_scaling = -np.inf
    worst_forms = 0.0
    worst_gap = -np.inf
    worst_close = 0.0
    for i in range(trials):
        v = _rand_vec(rep, rng)
        f = displacement_energy(act, params, v)
        if f == 0.0:
            continue
        res = abs_gradient(act, v)
        worst_bound = max(worst_bound, res.value - 2.0)
        worst_scaling = max(worst_scaling, f / v.norm() - res.value)
        worst_forms = max(worst_forms, abs(res.value - res.value_dual_form))
        sampled = abs_gradient_sampled(act, params, v, budget=32, seed=1000 + i)
        worst_gap = max(worst_gap, sampled - res.value)
        if rep.mode == "full":
            # the equality check needs the sampler and the closed form to
            # range over the same (ambient) direction set
            worst_close = max(worst_close, abs(sampled - res.value))
    rows.append(CheckResult("gradient", "universal_bound", worst_bound <= 1e-12, {"excess": worst_bound}))
    rows.append(CheckResult("gradient", "scaling_lower_bound", worst_scaling <= 1e-9, {"excess": worst_scaling}))
    rows.append(CheckResult("gradient", "dual_form_agreement", worst_forms <= 1e-10, {"worst": worst_forms}))
    rows.append(CheckResult("gradient", "sampled_is_lower_bound", worst_gap <= 1e-9, {"excess": worst_gap}))
    if rep.mode == "full":
        rows.append(CheckResult("gradient", "sampled_meets_closed", worst_close <= 2e-3, {"worst": worst_close}))

    f0 = _rand_vec(rep, rng, mean_zero=(rep.mode == "full"))
    cob = AffineAction.from_potential(rep, f0)
    trace = descend(cob, rep.zero(), DescentOptions())
    grad_at_end = abs_gradient_sampled(cob, params, trace.terminal, budget=64, seed=7)
    ok = trace.final_energy <= 1e-6 and grad_at_end <= 1e-3
    rows.append(
        CheckResult(
            "gradient",
            "descent_reaches_fixed_point",
            ok,
            {"finalF": trace.final_energy, "terminalSampledGradient": grad_at_end, "reason": trace.reason},
        )
    )
    return rows


_SUITE_FUNCS = {
    "ball": suite_ball,
    "lp": suite_lp,
    "action": suite_action,
    "energy": suite_energy,
    "gradient": suite_gradient,
}


def run_suites(rep: Representation, suites=SUITES, seed: int = 0) -> list[CheckResult]:
    """Run the selected invariant suites on one instance."""
    rows = []
    for name in suites:
        if name not in _SUITE_FUNCS:
            raise PgapError(f"unknown suite {name!r}; choose from {sorted(_SUITE_FUNCS)}")
        rng = np.random.default_rng(np.random.SeedSequence([seed, SUITES.index(name)]))
        rows.extend(_SUITE_FUNCS[name](rep, rng))
    return rows
