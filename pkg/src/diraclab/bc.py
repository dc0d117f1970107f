"""Boundary-condition algebra for the Dirac operator on [0, pi].

The general family couples the endpoint values of y = (y1, y2) through

    y1(0) + b*y1(pi) + a*y2(0) = 0
    d*y1(pi) + c*y2(0) + y2(pi) = 0

subject to b + c = 0 and a*d = 1 - b^2 with a*d != 0.  Periodic (y(pi) = y(0))
and antiperiodic (y(pi) = -y(0)) conditions sit outside the family and are
handled by kind.  The adjoint map and the free-operator eigenvector
coefficients below are the closed forms used everywhere else in the package.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

from .errors import ConstraintViolation, DegenerateBC

CONSTRAINT_TOL = 1e-12


class BCKind(Enum):
    PER_PLUS = "per+"
    PER_MINUS = "per-"
    GENERAL = "general"


@dataclass(frozen=True)
class BoundaryCondition:
    """A boundary condition: periodic, antiperiodic, or a general family member."""

    kind: BCKind
    a: complex = 0j
    b: complex = 0j
    c: complex = 0j
    d: complex = 0j

    def __post_init__(self):
        if self.kind is BCKind.GENERAL:
            validate_params(self.a, self.b, self.c, self.d)

    @property
    def is_general(self) -> bool:
        return self.kind is BCKind.GENERAL

    def coeffs(self):
        return (self.a, self.b, self.c, self.d)

    def label(self) -> str:
        if self.kind is BCKind.PER_PLUS:
            return "per+"
        if self.kind is BCKind.PER_MINUS:
            return "per-"
        return "general(a={0.a}, b={0.b}, c={0.c}, d={0.d})".format(self)

    def to_jsonable(self):
        if self.kind is not BCKind.GENERAL:
            return {"kind": self.kind.value}
        return {
            "kind": self.kind.value,
            "a": [self.a.real, self.a.imag],
            "b": [self.b.real, self.b.imag],
            "c": [self.c.real, self.c.imag],
            "d": [self.d.real, self.d.imag],
        }


def validate_params(a, b, c, d):
    """Check the family constraints; raise on violation.

    b + c must vanish, a*d must equal 1 - b^2, and a*d must be nonzero.
    """
    a, b, c, d = complex(a), complex(b), complex(c), complex(d)
    r1 = abs(b + c)
    if r1 > CONSTRAINT_TOL:
        raise ConstraintViolation("b + c = 0", r1)
    r2 = abs(a * d - (1 - b * b))
    if r2 > CONSTRAINT_TOL:
        raise ConstraintViolation("a*d = 1 - b^2", r2)
    if abs(a * d) <= CONSTRAINT_TOL:
        raise DegenerateBC(f"a*d = {a * d} is numerically zero")
    return True


def general_bc(a, b, c, d) -> BoundaryCondition:
    return BoundaryCondition(BCKind.GENERAL, complex(a), complex(b), complex(c), complex(d))


def per_plus() -> BoundaryCondition:
    return BoundaryCondition(BCKind.PER_PLUS)


def per_minus() -> BoundaryCondition:
    return BoundaryCondition(BCKind.PER_MINUS)


def dirichlet_plus() -> BoundaryCondition:
    """Family member (1, 0, 0, 1).

    Named by analogy with the decoupled endpoint conditions it produces; see
    the README for the caveat that this is not a Dirichlet condition in the
    Schrodinger sense.
    """
    return general_bc(1, 0, 0, 1)


def dirichlet_minus() -> BoundaryCondition:
    """Family member (-1, 0, 0, -1)."""
    return general_bc(-1, 0, 0, -1)


def adjoint_bc(bc: BoundaryCondition) -> BoundaryCondition:
    """Adjoint boundary condition.

    Per+ and Per- are self-adjoint; a general member (a, b, c, d) maps to
    (conj(d), -conj(c), -conj(b), conj(a)), which is again a valid member.
    """
    if not bc.is_general:
        return bc
    a, b, c, d = bc.coeffs()
    return general_bc(
        d.conjugate(), -c.conjugate(), -b.conjugate(), a.conjugate()
    )


def boundary_minors(bc: BoundaryCondition):
    """Determinants A_ij of column pairs of the 2x4 coefficient matrix.

    Rows are (1, b, a, 0) and (0, d, c, 1), columns ordered
    (y1(0), y1(pi), y2(0), y2(pi)).
    """
    a, b, c, d = bc.coeffs()
    rows = ((1 + 0j, b, a, 0j), (0j, d, c, 1 + 0j))

    def minor(i, j):
        return rows[0][i] * rows[1][j] - rows[0][j] * rows[1][i]

    return {
        "A12": minor(0, 1),
        "A13": minor(0, 2),
        "A14": minor(0, 3),
        "A23": minor(1, 2),
        "A24": minor(1, 3),
        "A34": minor(2, 3),
    }


def strict_regularity(bc: BoundaryCondition) -> dict:
    """Classify regularity of a general family member.

    Regular: A14 != 0 and A23 != 0.  Strictly regular: additionally the
    discriminant (A13 + A24)^2 - 4*A14*A23 is nonzero, i.e. the quadratic
    A14*z^2 + (A13 + A24)*z + A23 has distinct roots.  Under the family
    constraints the discriminant is identically 4, so every valid member is
    strictly regular.
    """
    if not bc.is_general:
        return {"regular": True, "strictly_regular": True, "minors": None,
                "discriminant": None}
    m = boundary_minors(bc)
    disc = (m["A13"] + m["A24"]) ** 2 - 4 * m["A14"] * m["A23"]
    regular = abs(m["A14"]) > CONSTRAINT_TOL and abs(m["A23"]) > CONSTRAINT_TOL
    return {
        "regular": regular,
        "strictly_regular": regular and abs(disc) > CONSTRAINT_TOL,
        "minors": m,
        "discriminant": disc,
    }


def free_eigvec_coeffs(bc: BoundaryCondition, n: int):
    """Coefficients (A_n, B_n) of the free adjoint-operator eigenvector.

    The adjoint free operator at eigenvalue n has unit eigenvector
    (A_n e^{-inx}, B_n e^{inx}) with

        A_n = (1 - (-1)^n conj(b)) / s,  B_n = -conj(a) / s,
        s = sqrt(|a|^2 + |1 - (-1)^n conj(b)|^2).

    |A_n|^2 + |B_n|^2 = 1 by construction.
    """
    if not bc.is_general:
        raise ValueError("free eigenvector coefficients are defined for the general family")
    a, b, _, _ = bc.coeffs()
    sign = -1.0 if n % 2 else 1.0
    top = 1 - sign * b.conjugate()
    s = math.sqrt(abs(a) ** 2 + abs(top) ** 2)
    return top / s, -a.conjugate() / s


def free_nullvector(bc: BoundaryCondition, n: int):
    """Eigenvector direction (xi, zeta) of the free operator itself at lambda = n.

    The eigenfunction is (xi e^{-inx}, zeta e^{inx}) with
    (xi, zeta) proportional to (a, -(1 + b*(-1)^n)), normalized to unit norm.
    """
    if not bc.is_general:
        raise ValueError("defined for the general family")
    a, b, _, _ = bc.coeffs()
    sign = -1.0 if n % 2 else 1.0
    xi, zeta = a, -(1 + b * sign)
    s = math.sqrt(abs(xi) ** 2 + abs(zeta) ** 2)
    return xi / s, zeta / s


def boundary_functionals(trace, bc: BoundaryCondition):
    """Evaluate (l0, l1) on an endpoint trace.

    trace = (s1_0, s1_pi, s2_0, s2_pi), the component values at x = 0 and x = pi.
    l0(s) = s1(0) + b*s1(pi) + a*s2(0);  l1(s) = d*s1(pi) + c*s2(0) + s2(pi).
    """
    if not bc.is_general:
        raise ValueError("boundary functionals are defined for the general family")
    s1_0, s1_pi, s2_0, s2_pi = (complex(t) for t in trace)
    a, b, c, d = bc.coeffs()
    l0 = s1_0 + b * s1_pi + a * s2_0
    l1 = d * s1_pi + c * s2_0 + s2_pi
    return l0, l1


def random_general_bc(rng) -> BoundaryCondition:
    """Draw a random valid family member (used by tests and demos).

    rng: a random.Random-like object, or an integer seed.  b is drawn in a
    complex disc, a on an annulus keeping |a*d| away from zero.
    """
    if isinstance(rng, int):
        import random

        rng = random.Random(rng)
    while True:
        b = complex(rng.uniform(-1.2, 1.2), rng.uniform(-1.2, 1.2))
        ad = 1 - b * b
        if abs(ad) < 0.1:
            continue
        mod = rng.uniform(0.4, 2.0)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        a = mod * cmath.exp(1j * phase)
        d = ad / a
        return general_bc(a, b, -b, d)
