"""Scaled p-adic numbers at finite precision and the coefficient streams built on them."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

from .errors import PrecisionError

Number = Union[int, Fraction, "ScaledPAdic"]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % k == 0:
            return False
        k += 1
    return True


def check_odd_prime(p: int) -> int:
    if not isinstance(p, int) or not is_prime(p):
        raise ValueError(f"p must be a prime, got {p!r}")
    if p == 2:
        raise ValueError("p = 2 is not supported; use an odd prime")
    return p


def vp(x: Union[int, Fraction], p: int) -> float | int:
    """Valuation of an integer or rational; ``float('inf')`` for zero."""
    if isinstance(x, Fraction):
        if x == 0:
            return float("inf")
        return vp(x.numerator, p) - vp(x.denominator, p)
    if x == 0:
        return float("inf")
    x = abs(x)
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def vp_factorial(n: int, p: int) -> int:
    """Legendre's formula for v_p(n!)."""
    total = 0
    q = p
    while q <= n:
        total += n // q
        q *= p
    return total


def split_unit(x: Union[int, Fraction], p: int) -> tuple[int, Fraction]:
    """Write a nonzero rational as p^v * u with u a p-adic unit."""
    v = vp(x, p)
    return v, Fraction(x) / Fraction(p) ** v


def rational_mod(x: Fraction, p: int, v: int, prec: int) -> int:
    """Mantissa of x / p^v modulo p^prec, for x with valuation exactly v."""
    u = Fraction(x) / Fraction(p) ** v
    mod = p**prec
    return u.numerator * pow(u.denominator, -1, mod) % mod


@dataclass(frozen=True)
class PrecisionBudget:
    n_work: int = 8
    slack: int = 4

    def __post_init__(self) -> None:
        if self.n_work < 1:
            raise ValueError("n_work must be at least 1")
        if self.slack < 0:
            raise ValueError("slack must be non-negative")

    @property
    def internal(self) -> int:
        return self.n_work + self.slack


@dataclass(frozen=True)
class ScaledPAdic:
    """The number p^val * mantissa, known modulo p^(val + prec).

    The zero element keeps ``mantissa == 0`` and uses ``val`` to record the
    absolute precision it is known to (``prec`` is then 0).
    """

    p: int
    val: int
    mantissa: int
    prec: int

    def __post_init__(self) -> None:
        if self.mantissa == 0:
            if self.prec != 0:
                object.__setattr__(self, "prec", 0)
            return
        if self.prec < 1:
            raise PrecisionError("nonzero value with no known digits")
        if self.mantissa % self.p == 0:
            raise ValueError("mantissa must be a unit")
        if not 0 < self.mantissa < self.p**self.prec:
            object.__setattr__(self, "mantissa", self.mantissa % self.p**self.prec)

    # construction -----------------------------------------------------
    @classmethod
    def zero(cls, p: int, abs_prec: int) -> "ScaledPAdic":
        return cls(p, abs_prec, 0, 0)

    @classmethod
    def from_rational(cls, x: Union[int, Fraction], p: int, prec: int) -> "ScaledPAdic":
        """Encode an exact rational with ``prec`` unit digits."""
        x = Fraction(x)
        if x == 0:
            return cls.zero(p, prec)
        v = vp(x, p)
        return cls(p, v, rational_mod(x, p, v, prec), prec)

    @classmethod
    def from_abs(cls, x: Union[int, Fraction], p: int, abs_prec: int) -> "ScaledPAdic":
        """Encode x known modulo p^abs_prec."""
        x = Fraction(x)
        if x == 0 or vp(x, p) >= abs_prec:
            return cls.zero(p, abs_prec)
        v = vp(x, p)
        return cls(p, v, rational_mod(x, p, v, abs_prec - v), abs_prec - v)

    # accessors --------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.mantissa == 0

    @property
    def abs_prec(self) -> int:
        return self.val if self.is_zero else self.val + self.prec

    @property
    def valuation(self) -> float | int:
        return float("inf") if self.is_zero else self.val

    def to_fraction(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        return Fraction(self.p) ** self.val * self.mantissa

    # arithmetic -------------------------------------------------------
    def _coerce(self, other: Number) -> "ScaledPAdic":
        if isinstance(other, ScaledPAdic):
            if other.p != self.p:
                raise ValueError("mismatched primes")
            return other
        x = Fraction(other)
        # exact inputs inherit the precision of self
        return ScaledPAdic.from_abs(x, self.p, max(self.abs_prec, vp(x, self.p) + 1 if x else 0))

    def __add__(self, other: Number) -> "ScaledPAdic":
        o = self._coerce(other)
        a = min(self.abs_prec, o.abs_prec)
        return ScaledPAdic.from_abs(self.to_fraction() + o.to_fraction(), self.p, a)

    __radd__ = __add__

    def __neg__(self) -> "ScaledPAdic":
        if self.is_zero:
            return self
        return ScaledPAdic(self.p, self.val, (-self.mantissa) % self.p**self.prec, self.prec)

    def __sub__(self, other: Number) -> "ScaledPAdic":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Number) -> "ScaledPAdic":
        return self._coerce(other) - self

    def __mul__(self, other: Number) -> "ScaledPAdic":
        o = self._coerce(other)
        if self.is_zero and o.is_zero:
            return ScaledPAdic.zero(self.p, self.val + o.val)
        if self.is_zero:
            return ScaledPAdic.zero(self.p, self.val + o.val)
        if o.is_zero:
            return ScaledPAdic.zero(self.p, self.val + o.val)
        prec = min(self.prec, o.prec)
        mod = self.p**prec
        return ScaledPAdic(self.p, self.val + o.val, self.mantissa * o.mantissa % mod, prec)

    __rmul__ = __mul__

    def inv(self) -> "ScaledPAdic":
        if self.is_zero:
            raise ZeroDivisionError("inverse of a p-adic zero")
        mod = self.p**self.prec
        return ScaledPAdic(self.p, -self.val, pow(self.mantissa, -1, mod), self.prec)

    def __truediv__(self, other: Number) -> "ScaledPAdic":
        return self * self._coerce(other).inv()

    def equals(self, other: Number, abs_prec: int | None = None) -> bool:
        """Equality modulo p^abs_prec (defaults to the common known precision)."""
        o = self._coerce(other)
        a = min(self.abs_prec, o.abs_prec) if abs_prec is None else abs_prec
        d = self.to_fraction() - o.to_fraction()
        return d == 0 or vp(d, self.p) >= a

    def __repr__(self) -> str:
        if self.is_zero:
            return f"O({self.p}^{self.val})"
        return f"{self.mantissa}*{self.p}^{self.val} + O({self.p}^{self.abs_prec})"


def scaled_arith(a: ScaledPAdic, b: ScaledPAdic | None, kind: str) -> ScaledPAdic:
    """Dispatch one of add, mul, neg, inv."""
    if kind == "add":
        return a + b
    if kind == "mul":
        return a * b
    if kind == "neg":
        return -a
    if kind == "inv":
        return a.inv()
    raise ValueError(f"unknown kind {kind!r}")


def binom_int(c: int, k: int) -> int:
    """Exact binomial coefficient c choose k for an integer c (any sign)."""
    out = 1
    for j in range(k):
        out = out * (c - j) // (j + 1)
    return out


def binom_coeff(c: ScaledPAdic, k: int) -> ScaledPAdic:
    """c(c-1)...(c-k+1)/k! for a p-adic integer c."""
    if k < 0:
        raise ValueError("k must be non-negative")
    p = c.p
    if not c.is_zero and c.val < 0:
        raise ValueError("exponent must be a p-adic integer")
    if k == 0:
        return ScaledPAdic.from_rational(1, p, max(c.abs_prec, 1))
    a = c.abs_prec
    loss = vp_factorial(k, p)
    if a - loss < 1:
        raise PrecisionError(f"binomial of order {k} needs more than {a} digits of the exponent")
    cint = int(c.to_fraction())
    return ScaledPAdic.from_abs(binom_int(cint, k), p, a - loss)


@lru_cache(maxsize=None)
def _log_over_x(k: int) -> Fraction:
    return Fraction((-1) ** k, k + 1)


@lru_cache(maxsize=None)
def _x_over_log_table(k: int) -> tuple[Fraction, ...]:
    b = [Fraction(1)]
    for m in range(1, k + 1):
        b.append(-sum(_log_over_x(j) * b[m - j] for j in range(1, m + 1)))
    return tuple(b)


def log_series_rational(k: int, kind: str = "log_over_x") -> Fraction:
    if k < 0:
        raise ValueError("k must be non-negative")
    if kind == "log_over_x":
        return _log_over_x(k)
    if kind == "x_over_log":
        return _x_over_log_table(k)[k]
    raise ValueError(f"unknown kind {kind!r}")


def log_series_coeff(k: int, kind: str = "log_over_x", p: int = 3, prec: int = 20) -> ScaledPAdic:
    """Coefficient of X^k in log(1+X)/X or X/log(1+X), with the growth bound asserted."""
    x = log_series_rational(k, kind)
    if x != 0 and vp(x, p) < Fraction(-k, p - 1):
        raise AssertionError(f"coefficient {k} violates the growth bound")
    return ScaledPAdic.from_rational(x, p, prec)


def exp_padic(x: int, p: int, abs_prec: int) -> int:
    """exp(x) mod p^abs_prec for an integer x with v_p(x) >= 1."""
    if vp(x, p) < 1:
        raise ValueError("exp needs v_p(x) >= 1")
    mod = p**abs_prec
    total = 0
    m = 0
    vx = vp(x, p)
    while True:
        v_term = m * vx - vp_factorial(m, p)
        if m > 0 and v_term >= abs_prec:
            break
        fact = 1
        for j in range(2, m + 1):
            fact *= j
        vf = vp_factorial(m, p)
        unit = fact // p**vf
        num = x**m // p**vf
        total = (total + num * pow(unit, -1, mod)) % mod
        m += 1
    return total
