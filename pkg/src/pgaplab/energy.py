"""Displacement energies, cocycle norms, the Dirichlet norm and p-Laplacian.

The displacement energy of an affine isometric action alpha at v is the
weighted r-mean over generators of |alpha(g) v - v|_p (max over K at
r = inf).  It vanishes exactly at fixed points, is convex, 2-Lipschitz,
and for linear actions positively homogeneous.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .action import AffineAction, Cocycle, Representation, coboundary
from .errors import ValidationError
from .lpspace import DualVector, LpVector, conjugate_exponent, power_norm, signed_power


@dataclass(frozen=True)
class EnergyParams:
    """Exponent pair: r for the mean over generators, p for the ambient norm."""

    r: float
    p: float

    def __post_init__(self):
        if not (1.0 <= self.r <= np.inf):
            raise ValidationError(f"generator exponent must lie in [1, inf]: {self.r}")
        if not (1.0 < self.p < np.inf):
            raise ValidationError(f"ambient exponent must lie in (1, inf): {self.p}")


def weighted_r_mean(values: np.ndarray, weights: np.ndarray, r: float) -> float:
    """(sum w_i x_i^r)^(1/r) for x >= 0; max at r = inf."""
    values = np.asarray(values, dtype=np.float64)
    if np.isinf(r):
        return float(values.max(initial=0.0))
    m = float(values.max(initial=0.0))
    if m == 0.0:
        return 0.0
    return m * float(np.sum(weights * (values / m) ** r) ** (1.0 / r))


def generator_displacements(action: AffineAction, v: LpVector, *, check=True) -> np.ndarray:
    """|alpha(g) v - v|_p per generator, as an array aligned with K."""
    arrays = action.displacements(v, check=check)
    return np.array([power_norm(a, action.rep.p) for a in arrays])


def displacement_energy(
    action: AffineAction, params: EnergyParams, v: LpVector, *, check=True
) -> float:
    """Weighted r-mean of the generator displacements of v."""
    if params.p != action.rep.p:
        raise ValidationError("energy exponent p differs from the representation's")
    disp = generator_displacements(action, v, check=check)
    return weighted_r_mean(disp, action.rep.weights, params.r)


def cocycle_norm(c: Cocycle, params: EnergyParams) -> float:
    """Weighted r-mean of |c(g)|_p over generators; the Z^1 norm."""
    disp = np.array([v.norm() for v in c.values])
    return weighted_r_mean(disp, c.rep.weights, params.r)


def dirichlet_norm(rep: Representation, f: LpVector, *, check=True) -> float:
    """(sum_g |df(g)|_p^p m(g))^(1/p); vanishes exactly on constants."""
    if check:
        rep.check_admissible(f)
    c = coboundary(rep, f)
    return cocycle_norm(c, EnergyParams(r=rep.p, p=rep.p))


def p_laplacian(rep: Representation, f: LpVector, *, check=True) -> DualVector:
    """Pointwise sum_g |df(g)(x)|^(p-2) df(g)(x) m(g), paired with l^q.

    The factor |t|^(p-2) t is evaluated as sign(t) |t|^(p-1), which is zero
    at t = 0 for every p > 1.
    """
    if check:
        rep.check_admissible(f)
    p = rep.p
    acc = np.zeros(rep.ball.size)
    for k in range(rep.handle.n_generators):
        d = rep.apply_generator(k, f, check=False).values - f.values
        acc += rep.weights[k] * signed_power(d, p - 1.0)
    return DualVector(rep.ball, acc, conjugate_exponent(p))


def gradient_field(action: AffineAction, f: LpVector, *, check=True) -> DualVector:
    """Pointwise sum_g |Dv(g)(x)|^(p-2) Dv(g)(x) m(g) with Dv(g) = alpha(g)v - v.

    Coincides with the p-Laplacian when the cocycle part vanishes.
    """
    rep = action.rep
    if check:
        rep.check_admissible(f)
    p = rep.p
    acc = np.zeros(rep.ball.size)
    for k, d in enumerate(action.displacements(f, check=False)):
        acc += rep.weights[k] * signed_power(d, p - 1.0)
    return DualVector(rep.ball, acc, conjugate_exponent(p))


def markov_operator(rep: Representation, f: LpVector) -> LpVector:
    """Weighted mean of the generator translates, sum_g m(g) pi(g) f."""
    acc = np.zeros(rep.ball.size)
    for k in range(rep.handle.n_generators):
        acc += rep.weights[k] * rep.apply_generator(k, f, check=False).values
    return LpVector(rep.ball, acc, rep.p)


def energy_csv_row(tag: str, params: EnergyParams, value: float) -> str:
    r = "inf" if np.isinf(params.r) else repr(params.r)
    return f"{tag},{r},{params.p!r},{value!r}"
