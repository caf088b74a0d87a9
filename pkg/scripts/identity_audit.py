#!/usr/bin/env python3
"""Run every identity-check suite and print a one-line verdict per check.

These are the structural identities the library is built on: Witt
commutation relations, Poisson brackets of the conserved coefficients and
their lift to vector fields, the closed-form graph basis, and the contour
quadrature against closed forms.

Usage: python3 scripts/identity_audit.py
"""

import sys

from shapeflow import checks


def main():
    failures = 0
    for suite in checks.SUITES:
        for rec in checks.run_suite(suite):
            status = "ok" if rec["passed"] else "FAIL"
            print(f"[{status}] {rec['suite']}/{rec['name']}: {rec['detail']}")
            failures += 0 if rec["passed"] else 1
    if failures:
        print(f"{failures} check(s) failed")
        sys.exit(1)
    print("all identity checks passed")


if __name__ == "__main__":
    main()
