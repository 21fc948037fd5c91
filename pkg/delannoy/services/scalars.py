"""Exact scalar fields.

Scalars are elements of a sympy ground domain: the rationals ``QQ`` by
default, or a prime field ``GF(p)``. All arithmetic in the library goes
through the domain returned by :func:`get_domain`, so no floating point
value ever enters a computation.
"""

import re
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from sympy import GF, QQ, isprime

from delannoy.config import settings
from delannoy.errors import InvalidInputError

_PRIME_FIELD = re.compile(r"^GF\((\d+)\)$")


def get_domain(name: Optional[str] = None):
    """Return the sympy domain named by ``name`` (defaults to SCALAR_FIELD).

    Args:
        name: ``"QQ"`` or ``"GF(p)"`` with p prime.

    Returns:
        The sympy domain object.

    Raises:
        InvalidInputError: If the name is not a supported field.
    """
    return _domain((name or settings.SCALAR_FIELD).strip())


@lru_cache(maxsize=None)
def _domain(name: str):
    if name == "QQ":
        return QQ
    match = _PRIME_FIELD.match(name)
    if match is None:
        raise InvalidInputError(f"Unsupported scalar field '{name}'")
    p = int(match.group(1))
    if not isprime(p):
        raise InvalidInputError(f"GF({p}) is not a prime field")
    return GF(p)


def is_rational(K) -> bool:
    """True when ``K`` has characteristic zero."""
    return K.characteristic() == 0


def to_fraction(K, x) -> Fraction:
    """Convert a domain element to a Fraction (prime fields give 0..p-1)."""
    if is_rational(K):
        return Fraction(int(K.numer(x)), int(K.denom(x)))
    return Fraction(int(x) % K.characteristic())


def format_scalar(K, x) -> str:
    """Render a scalar as ``"p/q"`` (or an integer string)."""
    value = to_fraction(K, x)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def parse_scalar(K, text: str):
    """Parse the output of :func:`format_scalar` back into ``K``."""
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise InvalidInputError(f"Invalid scalar '{text}'")
    return K(value.numerator) / K(value.denominator)


def sign(K, exponent: int):
    """Return (-1)**exponent in ``K``."""
    return -K.one if exponent % 2 else K.one


def domain_name(K) -> str:
    """Inverse of :func:`get_domain`: ``"QQ"`` or ``"GF(p)"``."""
    if is_rational(K):
        return "QQ"
    return f"GF({K.characteristic()})"
