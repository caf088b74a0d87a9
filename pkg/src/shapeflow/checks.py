"""Runnable identity checks behind the command-line ``check`` command.

Each entry re-verifies one algebraic identity of the library at runtime and
produces a machine-readable record.  The ``source`` string points at the
code that implements the identity being exercised, so a failing record can
be traced straight to the responsible function.
"""

from __future__ import annotations

import dataclasses
from typing import Callable, Tuple

import numpy as np

from .grassmannian import step2_graph
from .observables import (
    BracketWindow,
    corrected_G,
    gbar_coefficient,
    iota,
    poisson_bracket,
)
from .series import TruncatedSeries
from .virasoro import commutator, kirillov_L, schaeffer_spencer

SUITES = ("witt", "bracket", "basis", "quadrature")


@dataclasses.dataclass(frozen=True)
class IdentityCheck:
    name: str
    suite: str
    source: str
    run: Callable[[], Tuple[bool, str]]


def _shift(series: TruncatedSeries, m: int, order: int) -> TruncatedSeries:
    """z^m * series, truncated to the given order."""
    coeffs = np.zeros(order + 1, dtype=complex)
    src = series.coeffs[: max(order + 1 - m, 0)]
    coeffs[m : m + len(src)] = src
    return TruncatedSeries(coeffs)


def _field_closed_form(f: TruncatedSeries, k: int) -> TruncatedSeries:
    """Direct image of f under the degree-k deformation field."""
    if k >= 1:
        return _shift(f.differentiate(), k + 1, f.order + k)
    if k == 0:
        return _shift(f.differentiate(), 1, f.order) - f
    if k == -1:
        c1 = complex(f.coeff(2))
        one = TruncatedSeries.constant(1, f.order)
        fp = _shift(f.differentiate(), 0, f.order)
        return fp - f.scale(2 * c1) - one
    raise ValueError(k)


# ---------------------------------------------------------------------------
# witt suite


def _check_structure_constants() -> Tuple[bool, str]:
    window = BracketWindow(n_c=16, m_neg=0, n_psi=16)
    pairs = [(1, 2), (1, 3), (2, 3), (0, 2), (-1, 1), (-1, 2), (-2, 3)]
    fields = {k: kirillov_L(k, window) for k in sorted({x for p in pairs for x in p})}
    sums = {k + n: kirillov_L(k + n, window) for k, n in pairs}
    for k, n in pairs:
        got = commutator(fields[k], fields[n]).restricted(12, c_max=12)
        want = sums[k + n].scale(n - k).restricted(12, c_max=12)
        if got != want:
            return False, f"[L_{k}, L_{n}] != ({n}-{k}) L_{k + n} on window 12"
    return True, f"{len(pairs)} bracket pairs exact on window 12"


def _check_recursive_fields() -> Tuple[bool, str]:
    window = BracketWindow(n_c=16, m_neg=0, n_psi=16)
    lm3 = kirillov_L(-3, window)
    l3 = kirillov_L(3, window)
    got = commutator(lm3, l3).restricted(4, c_max=4)
    want = kirillov_L(0, window).scale(6).restricted(4, c_max=4)
    if got != want:
        return False, "[L_-3, L_3] != 6 L_0 on window 4"
    return True, "recursively built L_-3 satisfies its bracket with L_3"


# ---------------------------------------------------------------------------
# bracket suite


def _check_gbar_brackets() -> Tuple[bool, str]:
    window = BracketWindow(n_c=12, m_neg=0, n_psi=12)
    gs = {m: gbar_coefficient(m, window) for m in range(1, 9)}
    count = 0
    for m in range(1, 5):
        for n in range(m + 1, 5):
            got = poisson_bracket(gs[m], gs[n])
            want = gs[m + n].scale(n - m)
            if got != want:
                return False, f"{{G_{m}, G_{n}}} != ({n}-{m}) G_{m + n} at window 12"
            count += 1
    return True, f"{count} generating-coefficient brackets exact at window 12"


def _check_observable_lift() -> Tuple[bool, str]:
    window = BracketWindow(n_c=10, m_neg=2, n_psi=10)
    for k in (1, 2, 3):
        if iota(gbar_coefficient(k, window)) != kirillov_L(k, window):
            return False, f"lift of G_{k} differs from L_{k}"
    for j in (0, -1, -2):
        if iota(corrected_G(j, window)) != kirillov_L(j, window):
            return False, f"lift of corrected G_{j} differs from L_{j}"
    return True, "gradient lift reproduces L_k for k in {1,2,3,0,-1,-2}"


# ---------------------------------------------------------------------------
# basis suite


def _basis_fixture():
    N = 8
    c = 0.4 ** np.arange(1, N + 1) * np.exp(0.2j * np.arange(1, N + 1))
    return c, step2_graph(c, 3, N)


def _check_basis_displays() -> Tuple[bool, str]:
    c, op = _basis_fixture()
    b = np.conj(np.concatenate([[0.0], c]))  # b[k] = conj(c_k)
    display = {
        (0, -1): b[1],
        (0, -2): 3 * b[2] - 2 * b[1] ** 2,
        (0, -3): 5 * b[3] + 2 * b[1] ** 3 - 6 * b[1] * b[2],
        (1, 0): 2 * b[1],
        (1, -1): 2 * b[2],
        (1, -2): 4 * b[3] - 2 * b[1] * b[2],
        (1, -3): 6 * b[4] - 5 * b[2] ** 2 + 4 * b[1] ** 2 * b[2]
        - 2 * b[1] * b[3] - b[1] ** 4,
        (2, 1): 2 * b[1],
        (2, 0): 3 * b[2],
        (2, -1): 3 * b[3],
        (2, -2): 5 * b[4] - 2 * b[1] * b[3],
        (2, -3): 7 * b[5] - 6 * b[2] * b[3] + 4 * b[1] ** 2 * b[3]
        + 3 * b[1] * b[2] ** 2 - 2 * b[1] * b[4] - 4 * b[1] ** 3 * b[2]
        + b[1] ** 5,
    }
    worst = 0.0
    for (k, power), want in display.items():
        worst = max(worst, abs(complex(op.basis[k].coeff(power)) - want))
    if worst > 1e-12:
        return False, f"basis coefficient mismatch, worst |error| = {worst:.3e}"
    return True, f"e_0..e_2 match their closed forms, worst |error| = {worst:.3e}"


def _check_basis_gradients() -> Tuple[bool, str]:
    c, op = _basis_fixture()
    N = len(c)
    window = BracketWindow(n_c=N, m_neg=0, n_psi=N + 1)
    cbar = {i + 1: np.conj(c[i]) for i in range(N)}
    worst = 0.0
    for j in (1, 2, 3):
        g = corrected_G(1 - j, window)
        for k in range(N + 1):
            grad = g.diff("psi", k + 1).evaluate(cbar, {})
            worst = max(worst, abs(complex(op.basis[k].coeff(-j)) - complex(grad)))
    if worst > 1e-12:
        return False, f"basis/gradient mismatch, worst |error| = {worst:.3e}"
    return True, f"negative basis parts equal observable gradients, worst {worst:.3e}"


# ---------------------------------------------------------------------------
# quadrature suite


def _check_quadrature_identity_map() -> Tuple[bool, str]:
    f = TruncatedSeries(np.concatenate([[0.0, 1.0], np.zeros(7)]))
    for k in (1, 2, 3):
        out = schaeffer_spencer(f, k)
        want = np.zeros(out.order + 1)
        want[k + 1] = 1.0
        if max(abs(complex(out.coeff(j)) - want[j]) for j in range(out.order + 1)) > 1e-12:
            return False, f"identity map at k={k} is not z^{k + 1}"
    for k in (0, -1):
        out = schaeffer_spencer(f, k)
        if max(abs(complex(out.coeff(j))) for j in range(out.order + 1)) > 1e-12:
            return False, f"identity map at k={k} is not zero"
    return True, "monomial images of the identity map reproduced exactly"


def _check_quadrature_sample_map() -> Tuple[bool, str]:
    coeffs = [0.0, 1.0, 0.12, -0.08 + 0.05j, 0.04, -0.02j, 0.01, 0.005j]
    f = TruncatedSeries(np.asarray(coeffs, dtype=complex))
    z = 0.5 * np.exp(2j * np.pi * np.arange(129) / 129)
    worst = 0.0
    for k in (-1, 0, 1, 2, 3):
        got = schaeffer_spencer(f, k)
        want = _field_closed_form(f, k)
        worst = max(worst, np.abs(got.evaluate(z) - want.evaluate(z)).max())
    if worst > 1e-10:
        return False, f"quadrature sup-error {worst:.3e} exceeds 1e-10"
    return True, f"quadrature matches closed forms, sup-error {worst:.3e}"


def registry() -> list:
    """All identity checks, grouped by suite, in a stable order."""
    return [
        IdentityCheck(
            name="witt_structure_constants",
            suite="witt",
            source="shapeflow.virasoro:commutator",
            run=_check_structure_constants,
        ),
        IdentityCheck(
            name="witt_recursive_fields",
            suite="witt",
            source="shapeflow.virasoro:kirillov_L",
            run=_check_recursive_fields,
        ),
        IdentityCheck(
            name="bracket_generating_coefficients",
            suite="bracket",
            source="shapeflow.observables:poisson_bracket",
            run=_check_gbar_brackets,
        ),
        IdentityCheck(
            name="bracket_observable_lift",
            suite="bracket",
            source="shapeflow.observables:iota",
            run=_check_observable_lift,
        ),
        IdentityCheck(
            name="basis_displayed_coefficients",
            suite="basis",
            source="shapeflow.grassmannian:step2_graph",
            run=_check_basis_displays,
        ),
        IdentityCheck(
            name="basis_observable_gradients",
            suite="basis",
            source="shapeflow.grassmannian:step2_graph",
            run=_check_basis_gradients,
        ),
        IdentityCheck(
            name="quadrature_identity_map",
            suite="quadrature",
            source="shapeflow.virasoro:schaeffer_spencer",
            run=_check_quadrature_identity_map,
        ),
        IdentityCheck(
            name="quadrature_sample_map",
            suite="quadrature",
            source="shapeflow.virasoro:schaeffer_spencer",
            run=_check_quadrature_sample_map,
        ),
    ]


def run_suite(suite: str) -> list:
    """Execute one suite; returns one record dict per identity."""
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    records = []
    for check in registry():
        if check.suite != suite:
            continue
        passed, detail = check.run()
        records.append(
            {
                "name": check.name,
                "suite": check.suite,
                "source": check.source,
                "passed": bool(passed),
                "detail": detail,
            }
        )
    return records


def catalogue() -> list:
    """Name/suite/source listing of every identity check, without running."""
    return [
        {"name": c.name, "suite": c.suite, "source": c.source} for c in registry()
    ]
