"""Shared test utilities: terse phase constructors and catalog data."""

from fractions import Fraction

from newton_sublevel import PuiseuxPoly


def phase(*terms):
    """phase((c, a, b), ...) -> PuiseuxPoly sum of c * x^a * y^b."""
    return PuiseuxPoly.from_terms(terms)


# (name, phase, expected growth index (j, p), morse_hyperbolic)
CATALOG = [
    ("x^2+y^2", phase((1, 2, 0), (1, 0, 2)), Fraction(1), 0, False),
    ("x*y", phase((1, 1, 1)), Fraction(1), 1, True),
    ("x^2-y^2", phase((1, 2, 0), (-1, 0, 2)), Fraction(1), 1, True),
    ("(y-x^2)^2", phase((1, 0, 2), (-2, 2, 1), (1, 4, 0)), Fraction(1, 2), 0, False),
    ("x^2y^2+x^5", phase((1, 2, 2), (1, 5, 0)), Fraction(1, 2), 1, False),
    ("y^2-x^3", phase((1, 0, 2), (-1, 3, 0)), Fraction(5, 6), 0, False),
]

# the two extra resolution stress phases
RESOLVE_EXTRAS = [
    ("(y-x^2-x^3)^2-x^9",
     phase((1, 0, 2), (-2, 2, 1), (-2, 3, 1), (1, 4, 0), (2, 5, 0), (1, 6, 0), (-1, 9, 0))),
    ("y^2-2x^2y+x^4-x^7",
     phase((1, 0, 2), (-2, 2, 1), (1, 4, 0), (-1, 7, 0))),
]
