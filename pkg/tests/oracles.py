"""Independent reference implementations used only by the tests.

Everything here is written from the definitions with plain Python numbers
(``Fraction`` where the map is rational) and shares no code with the package.
"""
from fractions import Fraction
import math

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def doubling(x: Fraction, n: int = 1) -> Fraction:
    for _ in range(n):
        x = 2 * x
        if x >= 1:
            x -= 1
    return x


def hybrid(x: Fraction, f: Fraction, n: int = 1) -> Fraction:
    # identity below f; f + (2(x - f) mod (1 - f)) above
    for _ in range(n):
        if x < f:
            return x
        y = 2 * (x - f)
        while y >= 1 - f:
            y -= 1 - f
        x = f + y
    return x


def circle(x: float, y: float) -> float:
    d = abs(x - y) % 1.0
    return min(d, 1.0 - d)


def euclid(x: float, y: float) -> float:
    return abs(x - y)


def arc_cell(x: float, m: int) -> int:
    return min(int(math.floor(x * m)), m - 1)


def arc_partition(x: float, y: float, m: int) -> float:
    return euclid(x, y) if arc_cell(x, m) == arc_cell(y, m) else 1.0


def spillover_cell(x: float, k0: int = 1, kmax: int = 52) -> int:
    """Cell index by walking the blocks one at a time."""
    if x < 1.0 - 2.0 ** -k0:
        return 0
    index = 1
    for k in range(k0, kmax + 1):
        lo, hi = 1.0 - 2.0 ** -k, 1.0 - 2.0 ** -(k + 1)
        ncell = 2 ** (k - 1)
        if x < hi or k == kmax:
            c = int((x - lo) // 2.0 ** (-2 * k))
            return index + min(c, ncell - 1)
        index += ncell
    raise AssertionError("unreachable")


def spillover(x: float, y: float) -> float:
    return euclid(x, y) if spillover_cell(x) == spillover_cell(y) else 1.0


def pullback(x: float, y: float, knots, values) -> float:
    def f(t):
        for j in range(len(knots) - 1):
            if knots[j] <= t < knots[j + 1] or j == len(knots) - 2:
                a, b = knots[j], knots[j + 1]
                return values[j] + (t - a) * (values[j + 1] - values[j]) / (b - a)
    return abs(f(x) - f(y))
