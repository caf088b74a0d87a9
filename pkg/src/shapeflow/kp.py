"""Generalized-time flows attached to a graph operator.

This module evaluates the integrable-hierarchy side of the pipeline: Schur
polynomials of a vector of times, the bilinear forms built from a shape's
coefficient matrix, the first wave coefficient and its exact partial
derivatives, the Baker-Akhiezer function of a graph, the tau determinant,
and a numerical residual for the KP equation.

Conventions
-----------
A time vector ``t = (t_1, ..., t_M)`` (``M >= 3``) defines the exponent
``xi(t, z) = sum_k t_k z^k`` and the Schur values ``a_q = S_q(t)`` with
``exp(xi) = sum_q a_q z^q``.  For a shape ``f(z) = z (1 + sum c_k z^k)``
the central scalar is the bilinear pairing

    D_s = sum_{m>=1} m conj(c_m) * sum_{j>=0} r_j a_{m+j-s},

where ``r`` is the reciprocal series of ``conj(f)'`` and ``a``-indices
below zero vanish.  Derivatives act by a pure index shift,
``d/dt_k D_s = D_{s+k}``, which is exact for the truncated sums because the
index set does not move.  Everything downstream (``omega_1 = D_1/(1-D_0)``,
its partials, the KP residual) is evaluated symbolically in the ``D_s``
slots and then filled with the tabulated values, so no finite differences
enter the computation.
"""

from __future__ import annotations

import dataclasses
import functools
import itertools
from fractions import Fraction
from typing import Sequence

import numpy as np
import sympy

from .grassmannian import GraphOperator
from .observables import WindowTooSmall
from .series import TruncatedLaurent, TruncatedSeries, exp_series


class NearSingularA(ArithmeticError):
    """The denominator 1 - D_0 is too close to zero to divide by."""


class SingularSystem(ArithmeticError):
    """The Baker-Akhiezer linear system is singular at this truncation."""


# Depth of the tabulated D_s values: a fourth derivative taken entirely in
# t_3 shifts the index by 12.
_TABLE_DEPTH = 12
# Depth used by the symbolic engine: third-order partials of omega_1 reach
# slot 1 + 3*3 = 10.
_ENGINE_DEPTH = 10

_NUMERIC = (int, float, complex, np.number)


@dataclasses.dataclass(frozen=True)
class GeneralizedTimes:
    """A finite vector of flow times ``(t_1, ..., t_M)``.

    Vectors shorter than three entries are zero-padded so the three KP
    directions always exist; entries beyond ``M`` are treated as zero by
    :meth:`get`.
    """

    values: tuple

    def __post_init__(self) -> None:
        vals = tuple(self.values)
        if len(vals) < 3:
            vals = vals + (0.0,) * (3 - len(vals))
        object.__setattr__(self, "values", vals)

    @classmethod
    def of(cls, t) -> "GeneralizedTimes":
        """Coerce a GeneralizedTimes or a plain iterable of values."""
        if isinstance(t, cls):
            return t
        return cls(tuple(t))

    @property
    def order(self) -> int:
        return len(self.values)

    def get(self, k: int):
        """The time t_k (1-based); zero beyond the stored window."""
        if k < 1:
            raise IndexError(f"time index must be >= 1, got {k}")
        if k <= len(self.values):
            return self.values[k - 1]
        return 0.0

    def xi(self, z):
        """The exponent ``sum_k t_k z**k``; exact, the sum is finite."""
        total = 0.0
        for k, v in enumerate(self.values, start=1):
            total = total + v * z**k
        return total

    def __neg__(self) -> "GeneralizedTimes":
        return GeneralizedTimes(tuple(-v for v in self.values))

    def sato_shifted(self, z: complex, terms: int = 24) -> "GeneralizedTimes":
        """The shifted vector ``t_k - 1/(k z^k)`` over ``k = 1..terms``.

        This is the time shift entering the wave-function quotient
        ``exp(xi) tau(t - [z^{-1}]) / tau(t)``; ``terms`` truncates the
        geometric tail, which decays like ``|z|^-terms``.
        """
        z = complex(z)
        span = max(len(self.values), int(terms))
        return GeneralizedTimes(
            tuple(self.get(k) - 1.0 / (k * z**k) for k in range(1, span + 1))
        )


def schur(t, K: int) -> np.ndarray:
    """Schur polynomial values ``S_0..S_K`` of the time vector.

    Defined by ``exp(sum_k t_k z^k) = sum_q S_q z^q``.  Numeric inputs go
    through :func:`exp_series`; symbolic or exact entries (sympy
    expressions, Fractions) use the equivalent differential recurrence
    ``q S_q = sum_j j t_j S_{q-j}`` in object arithmetic.
    """
    times = GeneralizedTimes.of(t)
    if K < 0:
        raise ValueError("Schur order must be >= 0")
    vals = times.values
    if all(isinstance(v, _NUMERIC) for v in vals):
        coeffs = np.zeros(K + 1, dtype=complex)
        for k, v in enumerate(vals, start=1):
            if k <= K:
                coeffs[k] = v
        series = exp_series(TruncatedSeries(coeffs))
        return np.asarray([series.coeff(q) for q in range(K + 1)], dtype=complex)
    out = [1]
    for q in range(1, K + 1):
        acc = 0
        for j in range(1, q + 1):
            tj = vals[j - 1] if j <= len(vals) else 0
            if tj == 0:
                continue
            acc = acc + j * tj * out[q - j]
        out.append(Fraction(1, q) * acc if isinstance(acc, (int, Fraction)) else acc / q)
    return np.asarray(out, dtype=object)


@dataclasses.dataclass(frozen=True)
class ABForm:
    """The tabulated bilinear pairings ``D_s`` of a shape at a time vector.

    ``table[s]`` holds ``D_s`` for ``s = 0.._TABLE_DEPTH``; every partial
    derivative of the base value ``A = D_0`` with respect to the times is
    another table slot, ``d^alpha A = D_{alpha_1 + 2 alpha_2 + 3 alpha_3}``,
    because each ``d/dt_k`` shifts the Schur index by ``k``.
    """

    f_coeffs: tuple
    t: GeneralizedTimes
    N: int
    table: tuple

    @classmethod
    def build(cls, f_coeffs, t, N: int) -> "ABForm":
        times = GeneralizedTimes.of(t)
        if N < 1:
            raise WindowTooSmall(f"bilinear form needs N >= 1, got {N}")
        c = np.zeros(N, dtype=complex)
        supplied = np.asarray(tuple(f_coeffs), dtype=complex).ravel()
        c[: min(N, supplied.size)] = supplied[:N]
        cbar = np.conj(c)
        deriv = np.concatenate([[1.0 + 0.0j], (np.arange(1, N + 1) + 1) * cbar])
        r = TruncatedSeries(deriv).reciprocal()
        rv = np.asarray([r.coeff(j) for j in range(N + 1)], dtype=complex)
        a = np.asarray(schur(times, N + 1), dtype=complex)

        def aval(q: int) -> complex:
            return a[q] if 0 <= q < a.size else 0.0

        table = []
        for s in range(_TABLE_DEPTH + 1):
            total = 0.0 + 0.0j
            for m in range(1, N + 1):
                inner = 0.0 + 0.0j
                for j in range(0, N + 1 - m + 1):
                    inner += rv[j] * aval(m + j - s)
                total += m * cbar[m - 1] * inner
            table.append(complex(total))
        return cls(
            f_coeffs=tuple(complex(v) for v in supplied),
            t=times,
            N=int(N),
            table=tuple(table),
        )

    @staticmethod
    def _slot(alpha) -> int:
        alpha = tuple(int(x) for x in alpha)
        if len(alpha) > 3:
            raise ValueError("derivative multi-index runs over (t_1, t_2, t_3)")
        alpha = alpha + (0,) * (3 - len(alpha))
        if any(x < 0 for x in alpha):
            raise ValueError(f"negative derivative order in {alpha}")
        if sum(alpha) > 4:
            raise ValueError(f"total derivative order above 4 is not tabulated: {alpha}")
        return alpha[0] + 2 * alpha[1] + 3 * alpha[2]

    def partial(self, alpha=(0, 0, 0)) -> complex:
        """The exact partial ``d^alpha A`` as a table lookup."""
        return self.table[self._slot(alpha)]

    @property
    def a(self) -> complex:
        """The base value A = D_0."""
        return self.table[0]

    @property
    def b(self) -> complex:
        """B = dA/dt_1 = D_1."""
        return self.table[1]


def a_form(f_coeffs, t, alpha, N: int) -> complex:
    """One exact partial derivative ``d^alpha A`` of the bilinear form."""
    return ABForm.build(f_coeffs, t, N).partial(alpha)


@functools.lru_cache(maxsize=None)
def _d_symbols():
    return sympy.symbols(f"D0:{_ENGINE_DEPTH + 1}")


def _shift_derive(expr, k: int):
    """Formal time derivative: chain rule with each slot D_s flowing to D_{s+k}."""
    syms = _d_symbols()
    out = sympy.S.Zero
    for s, sym in enumerate(syms):
        g = sympy.diff(expr, sym)
        if g == 0:
            continue
        if s + k > _ENGINE_DEPTH:
            raise RuntimeError(
                f"formal derivative needs slot {s + k}, beyond engine depth {_ENGINE_DEPTH}"
            )
        out = out + g * syms[s + k]
    return sympy.together(out)


@functools.lru_cache(maxsize=None)
def _omega_expr(alpha: tuple):
    """Symbolic ``d^alpha omega_1`` with omega_1 = D_1/(1 - D_0)."""
    syms = _d_symbols()
    if alpha == (0, 0, 0):
        return syms[1] / (1 - syms[0])
    lead = next(i for i, x in enumerate(alpha) if x > 0)
    parent = list(alpha)
    parent[lead] -= 1
    return _shift_derive(_omega_expr(tuple(parent)), lead + 1)


@functools.lru_cache(maxsize=None)
def _omega_lambda(alpha: tuple):
    return sympy.lambdify(_d_symbols(), _omega_expr(alpha), "numpy")


@functools.lru_cache(maxsize=None)
def _kp_lambda():
    """Evaluator for 3 d2^2 lam - d1(4 d3 lam - 12 lam d1 lam - d1^3 lam), lam = -d1 omega_1."""
    lam = sympy.together(-_shift_derive(_omega_expr((0, 0, 0)), 1))
    lam_1 = _shift_derive(lam, 1)
    lam_11 = _shift_derive(lam_1, 1)
    lam_111 = _shift_derive(lam_11, 1)
    lam_22 = _shift_derive(_shift_derive(lam, 2), 2)
    lam_3 = _shift_derive(lam, 3)
    expr = 3 * lam_22 - _shift_derive(4 * lam_3 - 12 * lam * lam_1 - lam_111, 1)
    return sympy.lambdify(_d_symbols(), expr, "numpy")


def _engine_values(ab: ABForm) -> tuple:
    return tuple(complex(v) for v in ab.table[: _ENGINE_DEPTH + 1])


def _check_denominator(ab: ABForm) -> None:
    if abs(1.0 - complex(ab.table[0])) <= 1e-10:
        raise NearSingularA(
            f"1 - A = {1.0 - complex(ab.table[0]):.3e} is too small to divide by"
        )


def omega1_and_partials(ab: ABForm) -> dict:
    """omega_1 = B/(1-A) and all its time-partials of total order <= 3.

    Returns a dict keyed by the multi-index ``(alpha_1, alpha_2, alpha_3)``.
    Derivatives are exact: the quotient rule is applied symbolically to the
    slot variables and then filled with the tabulated values.
    """
    _check_denominator(ab)
    vals = _engine_values(ab)
    out = {}
    for alpha in itertools.product(range(4), repeat=3):
        if sum(alpha) <= 3:
            out[alpha] = complex(_omega_lambda(alpha)(*vals))
    return out


def kp_residual(f_coeffs, t, N: int) -> float:
    """Absolute value of the KP combination for the first wave coefficient.

    Evaluates ``|3 d_{t2}^2 lam - d_{t1}(4 d_{t3} lam - 12 lam d_{t1} lam
    - d_{t1}^3 lam)|`` with ``lam = -d_{t1} omega_1``, every derivative
    taken exactly through the shift rule.  The combination is an algebraic
    identity in the table slots, so the returned value measures only the
    floating-point noise of the quotient-rule arithmetic: it sits at
    roundoff level (~1e-15) for every window size N rather than decaying
    with N.
    """
    ab = ABForm.build(f_coeffs, t, N)
    _check_denominator(ab)
    return float(abs(_kp_lambda()(*_engine_values(ab))))


@dataclasses.dataclass(frozen=True)
class BakerAkhiezer:
    """A wave function ``Psi = exp(xi) (1 + sum_k omega_k z^-k)``.

    ``laurent`` holds the coefficient window of Psi on ``z^-n .. z^N``;
    ``values`` are evaluations at the requested sample points.
    """

    n: int
    omegas: tuple
    laurent: TruncatedLaurent
    samples: tuple
    values: tuple


def baker_akhiezer(op: GraphOperator, t, z_samples: Sequence = ()) -> BakerAkhiezer:
    """The wave function of a graph operator at a time vector.

    The pole coefficients ``omega_1..omega_n`` are fixed by requiring the
    coefficient vector of Psi to satisfy the graph relation: each negative
    coefficient equals the graph matrix applied to the nonnegative ones.
    That gives an n-by-n linear system; a condition number above 1e12
    raises :class:`SingularSystem`.
    """
    times = GeneralizedTimes.of(t)
    n, N = op.n, op.N
    graph = np.asarray(op.matrix, dtype=complex)
    a = np.asarray(schur(times, N + n), dtype=complex)

    def aval(q: int) -> complex:
        return a[q] if 0 <= q < a.size else 0.0

    shifted = np.empty((N + 1, n), dtype=complex)
    for ell in range(1, n + 1):
        shifted[:, ell - 1] = [aval(i + ell) for i in range(N + 1)]
    body = np.array(
        [[aval(ell - k) for ell in range(1, n + 1)] for k in range(1, n + 1)],
        dtype=complex,
    )
    system = body - graph @ shifted
    rhs = graph @ a[: N + 1]
    cond = np.linalg.cond(system)
    if not np.isfinite(cond) or cond > 1e12:
        raise SingularSystem(
            f"wave-coefficient system has condition number {cond:.3e} at N={N}"
        )
    omegas = np.linalg.solve(system, rhs)

    negative = [
        sum(omegas[ell - 1] * aval(ell - k) for ell in range(1, n + 1))
        for k in range(n, 0, -1)
    ]
    positive = a[: N + 1] + shifted @ omegas
    laurent = TruncatedLaurent(-n, list(negative) + list(positive))

    zs = np.atleast_1d(np.asarray(z_samples, dtype=complex)).ravel()
    values = []
    for z in zs:
        tail = sum(omegas[ell - 1] / z**ell for ell in range(1, n + 1))
        values.append(complex(np.exp(times.xi(z)) * (1.0 + tail)))
    return BakerAkhiezer(
        n=n,
        omegas=tuple(complex(w) for w in omegas),
        laurent=laurent,
        samples=tuple(complex(z) for z in zs),
        values=tuple(values),
    )


def tau(op: GraphOperator, t, N: int) -> complex:
    """The tau determinant ``det(1 + a^{-1} b T)`` truncated to (N+1)x(N+1).

    ``a`` and ``b`` are the triangular and cut blocks of multiplication by
    ``exp(-xi)`` on the coefficient window, and ``a^{-1}`` is the exact
    triangular Toeplitz inverse (multiplication by ``exp(+xi)``).  The
    perturbation ``a^{-1} b T`` has rank at most n, so the determinant
    stabilizes once N covers the decay of the Schur values.
    """
    times = GeneralizedTimes.of(t)
    n = op.n
    h = np.asarray(schur(-times, N + n), dtype=complex)
    inv_sym = np.asarray(schur(times, N), dtype=complex)
    a_inv = np.zeros((N + 1, N + 1), dtype=complex)
    for q in range(N + 1):
        a_inv[q:, q] = inv_sym[: N + 1 - q]
    b = np.empty((N + 1, n), dtype=complex)
    for k in range(1, n + 1):
        b[:, k - 1] = h[k : N + 1 + k]
    graph_cols = np.zeros((n, N + 1), dtype=complex)
    cols = min(N, op.N) + 1
    graph_cols[:, :cols] = np.asarray(op.matrix, dtype=complex)[:, :cols]
    return complex(np.linalg.det(np.eye(N + 1) + a_inv @ b @ graph_cols))


def sato_psi(op: GraphOperator, t, z: complex, N: int, terms: int = 24) -> complex:
    """The wave function reconstructed from two tau evaluations.

    Computes ``exp(xi(t, z)) * tau(t - [z^{-1}]) / tau(t)`` where
    ``[z^{-1}]_k = 1/(k z^k)``; for an order-1 graph this must agree with
    :func:`baker_akhiezer` evaluated at z.
    """
    times = GeneralizedTimes.of(t)
    z = complex(z)
    numerator = tau(op, times.sato_shifted(z, terms), N)
    denominator = tau(op, times, N)
    return complex(np.exp(times.xi(z)) * numerator / denominator)
