"""Independent 50-digit decimal evaluations of the closed forms, and timing builders"""

import os
from decimal import Decimal, localcontext

PRECISION = 50

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "configs")


def D(x):
    return Decimal(str(x))


def retrans_delay(x, rate, k, a, constant):
    """(e^(rate x) - 1)((K-1)/2 + 2a + 1) + constant + a"""
    with localcontext() as ctx:
        ctx.prec = PRECISION
        x, k, a = D(x), D(k), D(a)
        factor = (k - 1) / 2 + 2 * a + 1
        return float(((D(rate) * x).exp() - 1) * factor + D(constant) + a)


def csma_kernel(g, b):
    with localcontext() as ctx:
        ctx.prec = PRECISION
        g, b = D(g), D(b)
        if g == 0:
            return 0.0
        numerator = g * (1 + g + b * g * (1 + g + b * g / 2)) * (-g * (1 + 2 * b)).exp()
        denominator = g * (1 + 2 * b) - (1 - (-b * g).exp()) + (1 + b * g) * (-g * (1 + b)).exp()
        return float(numerator / denominator)


def aloha(g, slotted=False):
    with localcontext() as ctx:
        ctx.prec = PRECISION
        g = D(g)
        return float(g * (-(g if slotted else 2 * g)).exp())


ZERO_TIMING = dict(
    n_overhead_bits=0, n_ack_bits=0, n_sync_bits=0, n_data_bits=0,
    guard_time=0, backoff_slots=0, backoff_slot_time=0, rts_time=0, cts_time=0,
    idle_time=0, slot_boundary_wait=0, queue_time=0,
)


def zero_timing(**fields):
    """FrameTiming with every component zeroed unless given"""
    from macbench.frame_timing import FrameTiming
    return FrameTiming(**{**ZERO_TIMING, **fields})
