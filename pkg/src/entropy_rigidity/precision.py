"""Helpers around the mpmath working precision."""
import contextlib

import mpmath
from mpmath import mp

DEFAULT_BITS = 256


@contextlib.contextmanager
def working_precision(bits=None):
    """Run a block at ``bits`` of binary precision (``None`` keeps the current one)."""
    if bits is None:
        yield
        return
    if bits < 53:
        raise ValueError("precision below 53 bits is not supported")
    with mp.workprec(int(bits)):
        yield


def mpf(x):
    if isinstance(x, str):
        return mp.mpf(x)
    return mp.mpf(x)


def eps():
    return mp.eps


def to_decimal(x, digits=None):
    """Decimal string with enough digits for the current precision (at least 30)."""
    if digits is None:
        digits = max(30, mp.dps)
    if isinstance(x, (int,)):
        return str(x)
    return mpmath.nstr(mp.mpf(x), digits, strip_zeros=False, min_fixed=-5, max_fixed=20)


def ctx_of(x):
    """mpmath context matching the scalar type (``mp`` for mpf, ``fp`` for floats)."""
    if isinstance(x, mpmath.mpf):
        return mp
    return mpmath.fp
