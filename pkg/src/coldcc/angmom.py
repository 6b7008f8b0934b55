"""Wigner 3-j and 6-j symbols and Clebsch-Gordan coefficients.

All angular momenta here are non-negative integers (the electronic spin
S = 1 keeps every coupled quantum number integral), so the Racah sums are
evaluated in exact rational arithmetic and converted to float once at the
end.  Each symbol is canonicalized under its full symmetry group before
hitting the cache, so symmetry-related queries share one entry.
"""
from fractions import Fraction
from functools import lru_cache
from math import factorial, sqrt


def _check_j(*js: int) -> None:
    for j in js:
        if not isinstance(j, int) or isinstance(j, bool):
            raise TypeError(f"angular momenta must be ints, got {j!r}")
        if j < 0:
            raise ValueError(f"angular momenta must be >= 0, got {j}")


def _check_m(*ms: int) -> None:
    for m in ms:
        if not isinstance(m, int) or isinstance(m, bool):
            raise TypeError(f"projections must be ints, got {m!r}")


def triangle(a: int, b: int, c: int) -> bool:
    """Triangle condition |a-b| <= c <= a+b."""
    return abs(a - b) <= c <= a + b


def _delta_fraction(a: int, b: int, c: int) -> Fraction:
    """Triangle coefficient Delta(abc) as an exact rational."""
    return Fraction(
        factorial(a + b - c) * factorial(a - b + c) * factorial(-a + b + c),
        factorial(a + b + c + 1),
    )


@lru_cache(maxsize=None)
def _threej_exact(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> float:
    """Racah sum for the 3-j symbol, exact until the final square root."""
    s = Fraction(0)
    t_min = max(0, j2 - j3 - m1, j1 - j3 + m2)
    t_max = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    for t in range(t_min, t_max + 1):
        den = (
            factorial(t)
            * factorial(j3 - j2 + t + m1)
            * factorial(j3 - j1 + t - m2)
            * factorial(j1 + j2 - j3 - t)
            * factorial(j1 - t - m1)
            * factorial(j2 - t + m2)
        )
        s += Fraction(-1 if t % 2 else 1, den)
    if s == 0:
        return 0.0
    prod = (
        _delta_fraction(j1, j2, j3)
        * factorial(j1 + m1) * factorial(j1 - m1)
        * factorial(j2 + m2) * factorial(j2 - m2)
        * factorial(j3 + m3) * factorial(j3 - m3)
    )
    sign = -1.0 if (s < 0) ^ ((j1 - j2 - m3) % 2 != 0) else 1.0
    return sign * sqrt(float(s * s * prod))


def _canonical_threej(j1, j2, j3, m1, m2, m3):
    """Minimal representative under column permutations and m negation.

    Even column permutations leave the symbol invariant; odd permutations and
    the simultaneous sign flip of all m each contribute (-1)^(j1+j2+j3).
    """
    cols = ((j1, m1), (j2, m2), (j3, m3))
    perms = (
        (0, 1, 2, 0), (1, 2, 0, 0), (2, 0, 1, 0),
        (0, 2, 1, 1), (2, 1, 0, 1), (1, 0, 2, 1),
    )
    best = None
    best_odd = 0
    for a, b, c, odd in perms:
        for flip in (0, 1):
            sgn = -1 if flip else 1
            key = (
                cols[a][0], cols[b][0], cols[c][0],
                sgn * cols[a][1], sgn * cols[b][1], sgn * cols[c][1],
            )
            if best is None or key < best:
                best = key
                best_odd = odd ^ flip
    return best, best_odd


def wigner3j(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> float:
    _check_j(j1, j2, j3)
    _check_m(m1, m2, m3)
    if m1 + m2 + m3 != 0 or not triangle(j1, j2, j3):
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    key, odd = _canonical_threej(j1, j2, j3, m1, m2, m3)
    val = _threej_exact(*key)
    if odd and (j1 + j2 + j3) % 2:
        return -val
    return val


@lru_cache(maxsize=None)
def _sixj_exact(a: int, b: int, c: int, d: int, e: int, f: int) -> float:
    s = Fraction(0)
    t_min = max(a + b + c, a + e + f, d + b + f, d + e + c)
    t_max = min(a + b + d + e, b + c + e + f, a + c + d + f)
    for t in range(t_min, t_max + 1):
        den = (
            factorial(t - a - b - c)
            * factorial(t - a - e - f)
            * factorial(t - d - b - f)
            * factorial(t - d - e - c)
            * factorial(a + b + d + e - t)
            * factorial(b + c + e + f - t)
            * factorial(a + c + d + f - t)
        )
        s += Fraction((-1 if t % 2 else 1) * factorial(t + 1), den)
    if s == 0:
        return 0.0
    prod = (
        _delta_fraction(a, b, c)
        * _delta_fraction(a, e, f)
        * _delta_fraction(d, b, f)
        * _delta_fraction(d, e, c)
    )
    sign = -1.0 if s < 0 else 1.0
    return sign * sqrt(float(s * s * prod))


def _canonical_sixj(a, b, c, d, e, f):
    """Minimal representative under the 24 classical 6-j symmetries.

    Columns permute freely, and the upper and lower entries of any two
    columns may be swapped together; no phase appears in either case.
    """
    cols = ((a, d), (b, e), (c, f))
    best = None
    for p in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
        pc = (cols[p[0]], cols[p[1]], cols[p[2]])
        for swaps in ((0, 0, 0), (0, 1, 1), (1, 0, 1), (1, 1, 0)):
            key = tuple(
                pc[i][1] if swaps[i] else pc[i][0] for i in range(3)
            ) + tuple(
                pc[i][0] if swaps[i] else pc[i][1] for i in range(3)
            )
            if best is None or key < best:
                best = key
    return best


def wigner6j(j1: int, j2: int, j3: int, j4: int, j5: int, j6: int) -> float:
    """6-j symbol {j1 j2 j3; j4 j5 j6} for integer arguments."""
    _check_j(j1, j2, j3, j4, j5, j6)
    if not (
        triangle(j1, j2, j3)
        and triangle(j1, j5, j6)
        and triangle(j4, j2, j6)
        and triangle(j4, j5, j3)
    ):
        return 0.0
    return _sixj_exact(*_canonical_sixj(j1, j2, j3, j4, j5, j6))


def clebsch_gordan(j1: int, m1: int, j2: int, m2: int, j: int, m: int) -> float:
    """<j1 m1 j2 m2 | j m> via the 3-j symbol."""
    _check_j(j1, j2, j)
    _check_m(m1, m2, m)
    if m1 + m2 != m:
        return 0.0
    val = sqrt(2 * j + 1) * wigner3j(j1, j2, j, m1, m2, -m)
    if (j1 - j2 + m) % 2:
        return -val
    return val


def cache_stats():
    """Hit/miss counters of the two exact-symbol caches (for diagnostics)."""
    return {
        "threej": _threej_exact.cache_info(),
        "sixj": _sixj_exact.cache_info(),
    }
