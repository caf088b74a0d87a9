"""Driving functions p(z,t) from discrete Herglotz measures.

A driver is piecewise constant in time; each piece carries finitely many
atoms (theta_j, mu_j) on the unit circle with mu_j >= 0 summing to 1, giving

    p(z) = sum_j mu_j (e^{i theta_j} + z) / (e^{i theta_j} - z)
         = 1 + sum_{k>=1} 2 (sum_j mu_j e^{-i k theta_j}) z^k.

A piece with no atoms stands for the normalized uniform measure, whose
Herglotz transform is identically 1 (the trivial driver).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .series import TruncatedSeries

__all__ = ["Atom", "DriverPiece", "HerglotzDriver", "InvalidMeasure"]

_WEIGHT_TOL = 1e-12


class InvalidMeasure(ValueError):
    """Atom weights violate the probability-measure invariants."""


@dataclass(frozen=True)
class Atom:
    theta: float
    mu: float


@dataclass(frozen=True)
class DriverPiece:
    t_start: float
    atoms: tuple = ()

    def check(self):
        """List of invariant violations (empty when valid)."""
        problems = []
        if any(a.mu < 0 for a in self.atoms):
            problems.append("negative weight")
        if self.atoms and abs(sum(a.mu for a in self.atoms) - 1.0) > _WEIGHT_TOL:
            problems.append("weights do not sum to 1")
        return problems


@dataclass(frozen=True)
class HerglotzDriver:
    pieces: tuple

    @classmethod
    def identity(cls):
        """The trivial driver p == 1 (uniform measure)."""
        return cls(pieces=(DriverPiece(0.0),))

    @classmethod
    def single_atom(cls, theta=0.0):
        return cls(pieces=(DriverPiece(0.0, (Atom(theta, 1.0),)),))

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        pieces = tuple(
            DriverPiece(
                float(p["t_start"]),
                tuple(Atom(float(a["theta"]), float(a["mu"])) for a in p.get("atoms", ())),
            )
            for p in data["pieces"]
        )
        return cls(pieces=pieces)

    def to_json(self):
        return json.dumps(
            {
                "pieces": [
                    {
                        "t_start": p.t_start,
                        "atoms": [{"theta": a.theta, "mu": a.mu} for a in p.atoms],
                    }
                    for p in self.pieces
                ]
            },
            sort_keys=True,
        )

    def is_autonomous(self):
        return len(self.pieces) == 1

    def piece_at(self, t):
        if not self.pieces or self.pieces[0].t_start > t:
            raise InvalidMeasure(f"no driver piece covers t={t}")
        current = self.pieces[0]
        for p in self.pieces[1:]:
            if p.t_start <= t:
                current = p
        return current

    def moments(self, t, N):
        """Coefficients p_1..p_N of p(z,t): p_k = 2 sum_j mu_j e^{-ik theta_j}."""
        piece = self.piece_at(t)
        problems = piece.check()
        if problems:
            raise InvalidMeasure("; ".join(problems))
        if not piece.atoms:
            return np.zeros(N, dtype=complex)
        thetas = np.array([a.theta for a in piece.atoms])
        mus = np.array([a.mu for a in piece.atoms])
        k = np.arange(1, N + 1)
        return 2.0 * (mus[None, :] * np.exp(-1j * np.outer(k, thetas))).sum(axis=1)

    def p_series(self, t, N):
        """Taylor window of p(z,t) to order N; constant term exactly 1."""
        if t < 0:
            raise ValueError("t must be nonnegative")
        return TruncatedSeries(np.concatenate([[1.0 + 0j], self.moments(t, N)]))

    def validate(self, grid=1024, radius=0.99):
        """Invariant report; never raises.

        Checks weights and ordering, and probes min Re p on |z| = radius for
        every piece (positive for any genuine Herglotz transform).
        """
        problems = []
        starts = [p.t_start for p in self.pieces]
        if not self.pieces:
            problems.append("no pieces")
        elif starts[0] != 0.0:
            problems.append("first piece must start at t=0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            problems.append("t_start values must be strictly increasing")
        for i, piece in enumerate(self.pieces):
            problems.extend(f"piece {i}: {msg}" for msg in piece.check())
        z = radius * np.exp(2j * np.pi * np.arange(grid) / grid)
        min_re = np.inf
        for piece in self.pieces:
            if piece.check():
                continue
            if not piece.atoms:
                min_re = min(min_re, 1.0)
                continue
            p = sum(
                (a.mu * (np.exp(1j * a.theta) + z) / (np.exp(1j * a.theta) - z)
                 for a in piece.atoms),
                start=np.zeros_like(z),
            )
            min_re = min(min_re, float(p.real.min()))
        return {
            "ok": not problems,
            "problems": problems,
            "min_re_p": None if min_re is np.inf else min_re,
        }
