"""Finite-rank graph model for the shape phase space.

The generating coefficients of a trajectory assemble into a Laurent vector
G(z) = sum_k G_{k+1} z^k whose positive part is governed by the
unit-triangular Toeplitz block C11 (multiplication by the derivative of the
conjugated map) and whose finitely many negative coefficients are linear in
the positive ones.  Step 1 removes the raw psi-dependence (operator T~_n);
Step 2 replaces the raw negative rows with the corrected observables G_0,
G_{-1}, G_{-2}, producing an operator T_n whose graph

    W_{T_n} = span{e_0, e_1, ...}

contains every G built from the same map.  Index bookkeeping is done through
finite symmetric-difference descriptions of subsets of the integers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .series import TruncatedLaurent, TruncatedSeries

__all__ = [
    "GraphOperator",
    "IndexSet",
    "UnsupportedOrder",
    "c_blocks",
    "graph_membership",
    "step1_ttilde",
    "step2_graph",
    "virtual_dimension",
]


class UnsupportedOrder(ValueError):
    """Requested more negative rows than closed-form corrections exist for."""


@dataclass(frozen=True)
class IndexSet:
    """A subset S of the integers with finite symmetric difference from Z+.

    `added` holds S \\ Z+ (negative members), `removed` holds Z+ \\ S.
    """

    added: frozenset
    removed: frozenset

    def __post_init__(self):
        if any(k >= 0 for k in self.added):
            raise ValueError("added indices must be negative")
        if any(k < 0 for k in self.removed):
            raise ValueError("removed indices must be nonnegative")


def virtual_dimension(s: IndexSet) -> int:
    """Fredholm index of the projection H_S -> H_+: kernel minus cokernel."""
    return len(s.added) - len(s.removed)


def _coeff_lookup(f_coeffs):
    arr = list(f_coeffs)

    def cc(i):
        if i == 0:
            return 1
        if 1 <= i <= len(arr):
            return arr[i - 1]
        return 0

    return cc


def _is_object(f_coeffs):
    return any(
        not isinstance(v, (int, float, complex, np.number)) for v in f_coeffs
    )


def _conjugate_all(f_coeffs):
    return [v.conjugate() if hasattr(v, "conjugate") else np.conj(v) for v in f_coeffs]


def _zeros(shape, obj):
    if obj:
        return np.zeros(shape, dtype=object)
    return np.zeros(shape, dtype=complex)


def c_blocks(f_coeffs, n: int, N: int):
    """Truncated blocks (C11, C12_cut, C11inv) for the given map coefficients.

    C11 is the (N+1) x (N+1) upper unit-triangular Toeplitz band with first
    row 1, 2c_1, 3c_2, ...; C12_cut holds the n raw negative rows (column q
    pairs with psibar_{q+1}); C11inv is the Toeplitz band of the reciprocal
    of the derivative symbol, which inverts C11 exactly in this truncation.
    """
    if N < n:
        raise ValueError("window N must be at least n")
    obj = _is_object(f_coeffs)
    cc = _coeff_lookup(f_coeffs)
    d = [(j + 1) * cc(j) for j in range(N + 1)]
    r = TruncatedSeries(d).reciprocal().coeffs

    c11 = _zeros((N + 1, N + 1), obj)
    c11inv = _zeros((N + 1, N + 1), obj)
    for k in range(N + 1):
        for m in range(k, N + 1):
            c11[k, m] = d[m - k]
            c11inv[k, m] = r[m - k]
    c12 = _zeros((n, N + 1), obj)
    for j in range(1, n + 1):
        for q in range(N + 1):
            if q + j <= N:
                c12[j - 1, q] = (q + 1 + j) * cc(q + j)
    return c11, c12, c11inv


def _correction_rows(f_coeffs, n: int, N: int):
    """Rows B~ that turn the raw cut rows into gradients of G_0, G_-1, G_-2."""
    obj = _is_object(f_coeffs)
    cc = _coeff_lookup(f_coeffs)
    rows = _zeros((n, N + 1), obj)
    if n >= 3:
        a = TruncatedSeries([cc(j) for j in range(N + 1)]).reciprocal().coeffs
    for q in range(N + 1):
        k = q + 1  # the psibar index this column pairs with
        ck = cc(k)
        rows[0, q] = -ck
        if n >= 2:
            rows[1, q] = -2 * cc(1) * ck
        if n >= 3:
            rows[2, q] = (cc(1) * cc(1) - 4 * cc(2)) * ck
            if k + 2 <= N:
                rows[2, q] = rows[2, q] - a[k + 2]
    return rows


def step1_ttilde(f_coeffs, n: int, N: int):
    """Raw finite-rank operator: negative rows of the conjugated map times C11inv."""
    cbar = _conjugate_all(f_coeffs)
    _, c12, c11inv = c_blocks(cbar, n, N)
    return c12 @ c11inv


@dataclass
class GraphOperator:
    """Finite-rank operator T_n together with the graph basis it defines."""

    n: int
    N: int
    matrix: np.ndarray  # n x (N+1)
    c11: np.ndarray
    c11_inv: np.ndarray
    basis: list  # e_0..e_N as TruncatedLaurent with lo = -n

    def element_from_psi(self, psi) -> TruncatedLaurent:
        """The graph element with positive part C11 psi and negative part T (C11 psi)."""
        psi = np.asarray(psi)
        if psi.shape != (self.N + 1,):
            raise ValueError(f"psi must have length {self.N + 1}")
        pos = self.c11 @ psi
        neg = self.matrix @ pos
        return TruncatedLaurent(-self.n, list(neg[::-1]) + list(pos))

    def combination(self, psi) -> TruncatedLaurent:
        """sum_k psi[k] e_k over the basis."""
        psi = np.asarray(psi)
        if psi.shape != (self.N + 1,):
            raise ValueError(f"psi must have length {self.N + 1}")
        stack = np.stack([np.asarray(e.coeffs) for e in self.basis], axis=1)
        return TruncatedLaurent(-self.n, stack @ psi)

    def index_set(self, tol: float = 1e-9) -> IndexSet:
        """Pivot powers of the basis under column reduction, relative to Z+.

        The stacked basis matrix is reduced left to right; each independent
        column contributes the power of its largest remaining entry.  Powers
        in 0..N that never appear are `removed`; negative pivot powers are
        `added`.
        """
        stack = np.stack(
            [np.asarray(e.coeffs, dtype=complex) for e in self.basis], axis=1
        )
        work = stack.copy()
        pivots = {}
        for col in range(work.shape[1]):
            v = work[:, col]
            for prow, pcol in pivots.items():
                v = v - v[prow] * work[:, pcol]
            r = int(np.abs(v).argmax())
            if abs(v[r]) < tol:
                continue
            work[:, col] = v / v[r]
            pivots[r] = col
        powers = {r - self.n for r in pivots}
        added = frozenset(p for p in powers if p < 0)
        removed = frozenset(set(range(self.N + 1)) - powers)
        return IndexSet(added, removed)

    def virtual_dimension(self, tol: float = 1e-9) -> int:
        return virtual_dimension(self.index_set(tol))

    def to_json(self) -> str:
        def ri(x):
            x = complex(x)
            return [x.real, x.imag]

        payload = {
            "n": self.n,
            "N": self.N,
            "T": [[ri(x) for x in row] for row in self.matrix],
            "c11_band": [ri(self.c11[0, m]) for m in range(self.N + 1)],
            "basis": [
                {"lo": e.lo, "coeffs": [ri(x) for x in e.coeffs]} for e in self.basis
            ],
        }
        return json.dumps(payload, sort_keys=True)


def step2_graph(f_coeffs, n: int, N: int) -> GraphOperator:
    """Corrected graph operator; n in {1, 2, 3} (closed forms through G_{-2})."""
    if not 1 <= n <= 3:
        raise UnsupportedOrder("graphs are constructed for 1 <= n <= 3")
    cbar = _conjugate_all(f_coeffs)
    c11, c12, c11inv = c_blocks(cbar, n, N)
    gamma = c12 + _correction_rows(cbar, n, N)
    t_n = gamma @ c11inv
    if not _is_object(cbar):
        scale = max(1.0, float(np.abs(c11inv).max()))
        resid = np.abs(c11 @ c11inv - np.eye(N + 1)).max() / scale
        if resid > 1e-12:
            raise ArithmeticError(f"triangular inverse check failed: {resid:g}")
    basis = []
    for k in range(N + 1):
        coeffs = list(gamma[::-1, k]) + list(c11[:, k])
        basis.append(TruncatedLaurent(-n, coeffs))
    return GraphOperator(n=n, N=N, matrix=t_n, c11=c11, c11_inv=c11inv, basis=basis)


def graph_membership(g: TruncatedLaurent, op: GraphOperator, psi) -> float:
    """Sup-norm residual of G against the basis combination sum psi[k] e_k."""
    if g.lo > -op.n or g.hi < op.N:
        raise ValueError(
            f"G must cover powers {-op.n}..{op.N}, got {g.lo}..{g.hi}"
        )
    combo = op.combination(psi)
    return max(
        abs(complex(g.coeff(p)) - complex(combo.coeff(p)))
        for p in range(-op.n, op.N + 1)
    )
