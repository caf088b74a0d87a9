"""Kirillov vector fields on coefficient space and the boundary variation.

The space of normalized univalent maps f(z) = z(1 + sum c_n z^n) carries a
family of first-order vector fields L_k, realized here in the affine
coordinates c_n.  Positive and zero indices have polynomial closed forms;
L_{-1} and L_{-2} have displayed closed forms; lower indices are produced
recursively from commutators, using the convention

    commutator(L_k, L_n) = (n - k) L_{k+n}.

`schaeffer_spencer` computes the same tangent vectors analytically, as a
contour integral over the boundary driven by the vector field -i z^k, and is
the numerical cross-check for the closed forms.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .observables import (
    QC,
    BracketWindow,
    PhasePoly,
    VectorFieldOnF0,
    WindowMismatch,
    WindowTooSmall,
    reciprocal_coefficient,
)
from .series import TruncatedSeries

__all__ = [
    "QuadratureDegenerate",
    "VectorFieldOnF0",
    "commutator",
    "kirillov_L",
    "schaeffer_spencer",
]


class QuadratureDegenerate(RuntimeError):
    """The contour quadrature hit a (near-)singular configuration."""


def _c(n, window):
    return PhasePoly.constant(1, window) if n == 0 else PhasePoly.c(n, window)


def kirillov_L(k: int, window: BracketWindow) -> VectorFieldOnF0:
    """The field L_k as a polynomial vector field on the window's c-space.

    Components with indices beyond the window are dropped, and component
    polynomials lose the terms whose c-index does not fit; for k <= -1 the
    component polynomials clip termwise, so only components n <= n_c + k of
    the result agree with the untruncated field.
    """
    w = window
    n_max = w.n_c
    if k >= 1:
        if n_max < k:
            raise WindowTooSmall(f"window holds no component of L_{k}")
        comps = {
            n: _c(n - k, w).scale(n - k + 1) for n in range(k, n_max + 1)
        }
        return VectorFieldOnF0(w, comps)
    if k == 0:
        comps = {n: PhasePoly.c(n, w).scale(n) for n in range(1, n_max + 1)}
        return VectorFieldOnF0(w, comps)
    if k == -1:
        if n_max < 2:
            raise WindowTooSmall("L_-1 needs c indices up to 2")
        comps = {}
        for n in range(1, n_max + 1):
            poly = PhasePoly.c(1, w) * _c(n, w) * PhasePoly.constant(-2, w)
            if n + 1 <= n_max:
                poly = poly + PhasePoly.c(n + 1, w).scale(n + 2)
            comps[n] = poly
        return VectorFieldOnF0(w, comps)
    if k == -2:
        if n_max < 3:
            raise WindowTooSmall("L_-2 needs c indices up to 3")
        c1, c2 = PhasePoly.c(1, w), PhasePoly.c(2, w)
        quad = c1 * c1 - c2.scale(4)
        comps = {}
        for n in range(1, n_max + 1):
            poly = quad * _c(n, w)
            if n + 2 <= n_max:
                poly = poly + PhasePoly.c(n + 2, w).scale(n + 3)
                poly = poly - reciprocal_coefficient(n + 2, w)
            comps[n] = poly
        return VectorFieldOnF0(w, comps)
    # k <= -3: L_k = commutator(L_{-1}, L_{k+1}) / (k + 2)
    if n_max < -k + 1:
        raise WindowTooSmall(f"L_{k} needs c indices up to {-k + 1}")
    field = kirillov_L(-2, w)
    lower = kirillov_L(-1, w)
    for j in range(-3, k - 1, -1):
        field = commutator(lower, field).scale(QC(Fraction(1, j + 2)))
    return field


def commutator(x: VectorFieldOnF0, y: VectorFieldOnF0) -> VectorFieldOnF0:
    """Bracket of two fields, normalized so kirillov_L indices add:

    commutator(L_k, L_n) = (n - k) L_{k+n}.
    """
    if x.window != y.window:
        raise WindowMismatch("fields declared over different windows")
    if x is y:
        return VectorFieldOnF0(x.window, {})
    comps = {}
    for n in set(x.components) | set(y.components):
        comps[n] = y.apply_to(x.component(n)) - x.apply_to(y.component(n))
    return VectorFieldOnF0(x.window, comps)


def _pairwise_min_distance(values: np.ndarray) -> float:
    best = np.inf
    block = 256
    for i in range(0, len(values), block):
        chunk = values[i : i + block]
        diff = np.abs(chunk[:, None] - values[None, :])
        j, k = np.indices(diff.shape)
        diff[i + j == k] = np.inf
        best = min(best, float(diff.min()))
    return best


def schaeffer_spencer(f: TruncatedSeries, k: int, Q: int = 2048) -> TruncatedSeries:
    """Variation of f by the boundary field -i z^k, as a Taylor series.

    Computes the contour integral

        L(z) = f(z)^2 * (1/2pi) \\oint (w f'(w)/f(w))^2 w^k / (f(w) - f(z)) dtheta

    by the trapezoid rule on Q uniform boundary points, evaluates it on the
    interior circle |z| = 1/2, and recovers Taylor coefficients by a discrete
    Fourier transform.  The coefficients are reliable where |L_j| 2^{-j} is
    above roundoff; for |z| <= 1/2 the re-evaluated series is spectrally
    accurate.
    """
    r = 0.5
    theta = 2 * np.pi * np.arange(Q) / Q
    w = np.exp(1j * theta)
    fw = np.asarray(f.evaluate(w))
    fpw = np.asarray(f.differentiate().evaluate(w))
    if _pairwise_min_distance(fw) < 1e-8:
        raise QuadratureDegenerate("boundary images are not pairwise distinct")

    order_out = f.order + max(k, 0)
    n_z = 128
    while n_z < 2 * (order_out + 1):
        n_z *= 2
    zs = r * np.exp(2j * np.pi * np.arange(n_z) / n_z)
    fz = np.asarray(f.evaluate(zs))

    weight = (w * fpw / fw) ** 2 * w**k
    denom = fw[None, :] - fz[:, None]
    if np.abs(denom).min() < 1e-8:
        raise QuadratureDegenerate("f(w) - f(z) vanishes on the grid")
    vals = fz**2 * (weight[None, :] / denom).mean(axis=1)

    lam = np.fft.fft(vals) / n_z
    coeffs = lam[: order_out + 1] / r ** np.arange(order_out + 1)
    return TruncatedSeries(coeffs)
