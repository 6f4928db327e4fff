"""Symmetric Gauss rules on the reference triangle.

Weights are normalized to sum to 1; multiply by the physical cell area at
the use site.  Three fixed rules are provided: degree 2 (3 points) for
cheap checks, degree 6 (12 points) for operator assembly, and degree 10
(25 points) for error norms and manufactured-solution loads.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    degree: int
    points: np.ndarray    # (n, 3) barycentric
    weights: np.ndarray   # (n,), sums to 1


def _orbit(a, b, c):
    """All distinct permutations of a barycentric triple."""
    perms = {(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)}
    return sorted(perms)


def _build(groups):
    pts, wts = [], []
    for (a, b, c), w in groups:
        orb = _orbit(a, b, c)
        pts.extend(orb)
        wts.extend([w] * len(orb))
    pts = np.array(pts)
    wts = np.array(wts)
    wts /= wts.sum()  # remove residual rounding in tabulated weights
    return pts, wts


_D2 = [((2 / 3, 1 / 6, 1 / 6), 1 / 3)]

# Dunavant degree-6, 12 points
_D6 = [
    ((0.873821971016996, 0.063089014491502, 0.063089014491502),
     0.050844906370207),
    ((0.501426509658179, 0.249286745170910, 0.249286745170910),
     0.116786275726379),
    ((0.636502499121399, 0.310352451033785, 0.053145049844816),
     0.082851075618374),
]

# Dunavant degree-10, 25 points
_D10 = [
    ((1 / 3, 1 / 3, 1 / 3), 0.090817990382754),
    ((0.028844733232685, 0.485577633383657, 0.485577633383657),
     0.036725957756467),
    ((0.781036849029926, 0.109481575485037, 0.109481575485037),
     0.045321059435528),
    ((0.141707219414880, 0.307939838764121, 0.550352941820999),
     0.072757916845420),
    ((0.025003534762686, 0.246672560639903, 0.728323904597411),
     0.028327242531057),
    ((0.009540815400299, 0.066803251012200, 0.923655933587500),
     0.009421666963733),
]

_TABLES = {2: _D2, 6: _D6, 10: _D10}
_CACHE: dict[int, QuadratureRule] = {}


def rule(degree: int) -> QuadratureRule:
    """Return the fixed rule of the requested exactness degree (2, 6 or 10)."""
    if degree not in _TABLES:
        raise ValueError(f"unsupported quadrature degree {degree}; "
                         f"available: {sorted(_TABLES)}")
    if degree not in _CACHE:
        pts, wts = _build(_TABLES[degree])
        _CACHE[degree] = QuadratureRule(degree=degree, points=pts, weights=wts)
    return _CACHE[degree]


def monomial_moment(a: int, b: int, c: int) -> float:
    """Exact integral of lam1^a lam2^b lam3^c over a unit-area triangle.

    Classical formula: a! b! c! * 2 / (a+b+c+2)!  times the triangle area;
    returned here for area 1 (weights in this module sum to 1).
    """
    from math import factorial

    return (2.0 * factorial(a) * factorial(b) * factorial(c)
            / factorial(a + b + c + 2))
