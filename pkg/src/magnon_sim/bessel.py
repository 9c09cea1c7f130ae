"""Integer-order Bessel functions of the first kind."""

from __future__ import annotations

import math

MAX_ORDER = 60
MAX_ARG = 30.0

_RESCALE = 1e250


def _miller(order: int, x: float) -> float:
    """J_order(x) for order >= 0, x > 0 by normalized downward recurrence."""
    # start well above both the order and the turning point x
    start = max(order, int(x)) + 20 + int(math.sqrt(40.0 * max(order, x, 1.0)))
    start += start % 2
    j_next, j_cur = 0.0, 1e-300
    norm = 0.0
    result = 0.0
    two_over_x = 2.0 / x
    for k in range(start, 0, -1):
        j_prev = k * two_over_x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds the (unnormalized) J_{k-1}
        if k - 1 == order:
            result = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
        if abs(j_cur) > _RESCALE:
            j_cur /= _RESCALE
            j_next /= _RESCALE
            norm /= _RESCALE
            result /= _RESCALE
    norm += j_cur  # J_0 term
    return result / norm


def bessel_j(order: int, x: float) -> float:
    """
    Bessel function of the first kind J_order(x) for integer order.

    Accurate to about 1e-13 absolute for |order| <= 60 and |x| <= 30.
    Negative orders and arguments use J_{-n}(x) = (-1)^n J_n(x) and
    J_n(-x) = (-1)^n J_n(x).
    """
    if int(order) != order:
        raise ValueError(f"order must be an integer, got {order}")
    order = int(order)
    if abs(order) > MAX_ORDER or not abs(x) <= MAX_ARG:
        raise ValueError(f"bessel_j supports |order| <= {MAX_ORDER}, |x| <= {MAX_ARG}; got ({order}, {x})")
    sign = 1.0
    if order < 0:
        order = -order
        if order % 2:
            sign = -sign
    if x < 0:
        x = -x
        if order % 2:
            sign = -sign
    if x < 1e-8:
        # two series terms are exact to double precision here, and 2/x would overflow
        half = 0.5 * x
        return sign * half**order / math.factorial(order) * (1.0 - half * half / (order + 1))
    return sign * _miller(order, x)
