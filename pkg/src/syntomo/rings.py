"""Band-truncated decorated Laurent series in the arithmetic variable, and their torus extensions.

A decoration fixes an integer valuation floor ``lb(i)`` for the coefficient of
the i-th power of the variable; the ring is the set of series whose
coefficients sit above the floor.  The free lattice basis is
``p^lb(i) * X^i`` and all matrices elsewhere in the package are written in it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

from . import _poly
from .errors import BandError, MembershipError, PrecisionError
from .padic import (
    PrecisionBudget,
    ScaledPAdic,
    binom_int,
    check_odd_prime,
    vp,
    vp_factorial,
)

DECORATIONS = ("Plus", "Laurent", "PD", "U", "UV", "ZeroVPlus")
_NONNEGATIVE = ("Plus", "PD", "U")

Scalar = Union[int, Fraction, ScaledPAdic]


def _frac(x) -> Fraction:
    return Fraction(x) if x is not None else None


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


@dataclass(frozen=True)
class RingSpec:
    """Which ring: prime, ramification, cyclotomic level, decoration and annulus radii."""

    p: int
    e: int = 1
    i_cyclo: int = 0
    deco: str = "Plus"
    u: Fraction | None = None
    v: Fraction | None = None
    variable: str = "X0"
    eisenstein: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        check_odd_prime(self.p)
        if self.deco not in DECORATIONS:
            raise ValueError(f"unknown decoration {self.deco!r}")
        if self.e < 1:
            raise ValueError("ramification index must be >= 1")
        object.__setattr__(self, "u", Fraction(self.p - 1, self.p) if self.u is None else Fraction(self.u))
        object.__setattr__(self, "v", Fraction(self.p - 1) if self.v is None else Fraction(self.v))
        if not 0 < self.u <= self.v:
            raise ValueError("need 0 < u <= v")
        if self.i_cyclo > 0:
            if self.variable != "T":
                raise ValueError("the cyclotomic profile uses the variable T")
            if self.e != (self.p - 1) * self.p ** (self.i_cyclo - 1):
                raise ValueError("cyclotomic profile needs e = (p-1) p^(i-1)")
            if self.eisenstein is not None:
                raise ValueError("the cyclotomic profile fixes its own polynomial")
        else:
            if self.variable != "X0":
                raise ValueError("the Kummer profile uses the variable X0")
            if self.eisenstein is None:
                if self.e != 1:
                    raise ValueError("an Eisenstein polynomial is required when e > 1")
                object.__setattr__(self, "eisenstein", (-self.p, 1))
            else:
                object.__setattr__(self, "eisenstein", tuple(int(c) for c in self.eisenstein))
            P = self.eisenstein
            if len(P) != self.e + 1 or P[-1] != 1:
                raise ValueError("Eisenstein polynomial must be monic of degree e")
            if any(c % self.p for c in P[:-1]) or P[0] % (self.p * self.p) == 0:
                raise ValueError("polynomial is not Eisenstein")

    # constructors ----------------------------------------------------
    @classmethod
    def kummer(cls, p: int, deco: str = "Plus", e: int = 1, eisenstein=None, u=None, v=None) -> "RingSpec":
        spec = cls(p, e, 0, deco, _frac(u), _frac(v), "X0", tuple(eisenstein) if eisenstein else None)
        spec.check_standing()
        return spec

    @classmethod
    def cyclotomic(cls, p: int, i_cyclo: int, deco: str = "Plus", u=None, v=None) -> "RingSpec":
        spec = cls(p, (p - 1) * p ** (i_cyclo - 1), i_cyclo, deco, _frac(u), _frac(v), "T")
        spec.check_standing()
        return spec

    def check_standing(self) -> None:
        """The annulus inequalities required for user-facing UV rings."""
        if self.deco == "UV":
            p = self.p
            if not (Fraction(p - 1, p) <= self.u <= self.v / p < 1 < self.v):
                raise ValueError("UV needs (p-1)/p <= u <= v/p < 1 < v")

    def with_deco(self, deco: str, u=None, v=None) -> "RingSpec":
        return replace(self, deco=deco, u=self.u if u is None else Fraction(u),
                       v=self.v if v is None else Fraction(v))

    # properties -------------------------------------------------------
    @property
    def profile(self) -> str:
        return "B" if self.i_cyclo > 0 else "A"

    @property
    def allows_negative(self) -> bool:
        return self.deco not in _NONNEGATIVE

    @property
    def filtered(self) -> bool:
        if self.deco in ("PD", "U"):
            return True
        if self.deco == "UV":
            return self.u <= 1 <= self.v
        return False

    def lb(self, i: int) -> int:
        return lb(self, i)

    def filtration_poly(self) -> tuple[int, ...]:
        """P (profile A) or P0 (profile B) as integer coefficients, low degree first."""
        if self.profile == "A":
            return self.eisenstein
        return cyclotomic_p0(self.p, self.i_cyclo)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "e": self.e,
            "i_cyclo": self.i_cyclo,
            "deco": self.deco,
            "u": str(self.u),
            "v": str(self.v),
            "variable": self.variable,
            "eisenstein": list(self.eisenstein) if self.eisenstein else None,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "RingSpec":
        return cls(int(d["p"]), int(d["e"]), int(d["i_cyclo"]), d["deco"], Fraction(d["u"]), Fraction(d["v"]),
                   d["variable"], tuple(d["eisenstein"]) if d.get("eisenstein") else None)


@lru_cache(maxsize=None)
def cyclotomic_p0(p: int, i: int) -> tuple[int, ...]:
    """((1+T)^{p^i}-1)/((1+T)^{p^{i-1}}-1) = sum_k (1+T)^{k p^{i-1}}, k < p."""
    m = p ** (i - 1)
    out = [0] * ((p - 1) * m + 1)
    for k in range(p):
        for j in range(k * m + 1):
            out[j] += binom_int(k * m, j)
    return tuple(out)


def lb(spec: RingSpec, i: int) -> int:
    """Integer valuation floor of the degree-i coefficient."""
    d = spec.deco
    if i < 0 and d in _NONNEGATIVE:
        raise BandError(f"negative degree {i} is not allowed for {d}")
    if d in ("Plus", "Laurent"):
        return 0
    if d == "PD":
        return -vp_factorial(i // spec.e, spec.p)
    if d == "U":
        return _ceil(Fraction(-i) * spec.u / spec.e)
    if d == "UV":
        return _ceil(Fraction(-i) * (spec.u if i >= 0 else spec.v) / spec.e)
    if d == "ZeroVPlus":
        return 0 if i >= 0 else _ceil(Fraction(-i) * spec.v / spec.e)
    raise ValueError(d)


@lru_cache(maxsize=4096)
def _lb_table(spec: RingSpec, lo: int, hi: int) -> tuple[int, ...]:
    return tuple(lb(spec, i) for i in range(lo, hi + 1))


def _check_band(spec: RingSpec, band) -> tuple[int, int]:
    lo, hi = int(band[0]), int(band[1])
    if hi < lo:
        raise BandError("empty band")
    if lo < 0 and not spec.allows_negative:
        raise BandError(f"{spec.deco} forces a non-negative band")
    return lo, hi


def _to_fraction(x: Scalar) -> Fraction:
    if isinstance(x, ScaledPAdic):
        return x.to_fraction()
    return Fraction(x)


@dataclass(frozen=True, eq=False)
class DecoSeries:
    """A truncated series sum a_i X^i stored as a_i = data[i - lo] / p^scale.

    The degree-i coefficient is known modulo p^(lb(i) + n_work + slack).
    """

    spec: RingSpec
    band: tuple[int, int]
    scale: int
    data: tuple[int, ...]
    budget: PrecisionBudget = field(default_factory=PrecisionBudget)
    tail_discarded: bool = False
    basis: str = "plain"

    # construction -------------------------------------------------
    @classmethod
    def _make(cls, spec, band, budget, scale, data, tail=False, basis="plain") -> "DecoSeries":
        lo, hi = band
        p = spec.p
        P = budget.internal
        lbs = _lb_table(spec, lo, hi) if basis == "plain" else (0,) * (hi - lo + 1)
        data = list(data)
        if len(data) != hi - lo + 1:
            raise ValueError("data length does not match band")
        if scale < -min(lbs):
            shift = -min(lbs) - scale
            data = [c * p**shift for c in data]
            scale += shift
        data = [c % p ** (scale + b + P) for c, b in zip(data, lbs)]
        # canonical scale: the smallest that keeps everything integral
        need = max(0, -min(lbs))
        for c in data:
            if c:
                need = max(need, scale - vp(c, p))
        if need != scale:
            if need < scale:
                d = p ** (scale - need)
                data = [c // d for c in data]
            else:
                m = p ** (need - scale)
                data = [c * m for c in data]
            scale = need
        return cls(spec, (lo, hi), scale, tuple(data), budget, bool(tail), basis)

    @classmethod
    def zero(cls, spec: RingSpec, band, budget: PrecisionBudget | None = None) -> "DecoSeries":
        lo, hi = _check_band(spec, band)
        return cls._make(spec, (lo, hi), budget or PrecisionBudget(), 0, [0] * (hi - lo + 1))

    @classmethod
    def from_coeffs(cls, spec: RingSpec, band, coeffs: Mapping[int, Scalar],
                    budget: PrecisionBudget | None = None, check: bool = True) -> "DecoSeries":
        lo, hi = _check_band(spec, band)
        budget = budget or PrecisionBudget()
        fr = {int(k): _to_fraction(v) for k, v in coeffs.items() if _to_fraction(v) != 0}
        for k in fr:
            if not lo <= k <= hi:
                raise BandError(f"degree {k} outside band {band}")
        p = spec.p
        scale = 0
        for x in fr.values():
            scale = max(scale, -vp(x, p))
        lbs = _lb_table(spec, lo, hi)
        scale = max(scale, -min(lbs))
        P = budget.internal
        data = []
        for i in range(lo, hi + 1):
            x = fr.get(i)
            if x is None:
                data.append(0)
                continue
            y = x * Fraction(p) ** scale
            mod = p ** (scale + lbs[i - lo] + P)
            data.append(y.numerator * pow(y.denominator, -1, mod) % mod)
        out = cls._make(spec, (lo, hi), budget, scale, data)
        if check:
            bad = check_membership(out)
            if bad:
                raise MembershipError(f"coefficients below the floor at degrees {bad}", bad)
        return out

    @classmethod
    def monomial(cls, spec: RingSpec, band, k: int, coeff: Scalar = 1,
                 budget: PrecisionBudget | None = None, check: bool = True) -> "DecoSeries":
        return cls.from_coeffs(spec, band, {k: coeff}, budget, check)

    @classmethod
    def from_lattice(cls, spec: RingSpec, band, coords: Iterable[int],
                     budget: PrecisionBudget | None = None) -> "DecoSeries":
        """Series sum x_i p^lb(i) X^i from lattice coordinates x_i."""
        lo, hi = _check_band(spec, band)
        budget = budget or PrecisionBudget()
        lbs = _lb_table(spec, lo, hi)
        s = max(0, -min(lbs))
        data = [int(x) * spec.p ** (b + s) for x, b in zip(coords, lbs)]
        return cls._make(spec, (lo, hi), budget, s, data)

    @classmethod
    def from_polynomial(cls, spec: RingSpec, band, poly: Iterable[int], offset: int = 0,
                        budget: PrecisionBudget | None = None) -> "DecoSeries":
        """Integer polynomial sum poly[j] X^(offset+j); terms outside the band are dropped."""
        poly = list(poly)
        return cls.from_coeffs(spec, band, {offset + j: c for j, c in enumerate(poly)
                                            if c and band[0] <= offset + j <= band[1]}, budget)

    # accessors ----------------------------------------------------
    @property
    def p(self) -> int:
        return self.spec.p

    @property
    def lo(self) -> int:
        return self.band[0]

    @property
    def hi(self) -> int:
        return self.band[1]

    def lbs(self) -> tuple[int, ...]:
        if self.basis != "plain":
            return (0,) * len(self.data)
        return _lb_table(self.spec, self.lo, self.hi)

    def fraction(self, i: int) -> Fraction:
        if not self.lo <= i <= self.hi:
            return Fraction(0)
        return Fraction(self.data[i - self.lo], self.p**self.scale)

    def coeff(self, i: int) -> ScaledPAdic:
        b = self.lbs()[i - self.lo] if self.lo <= i <= self.hi else 0
        return ScaledPAdic.from_abs(self.fraction(i), self.p, b + self.budget.internal)

    def coeffs(self) -> dict[int, Fraction]:
        return {self.lo + k: Fraction(c, self.p**self.scale) for k, c in enumerate(self.data) if c}

    def support(self) -> list[int]:
        return [self.lo + k for k, c in enumerate(self.data) if c]

    def lattice_coords(self, n: int | None = None) -> list[int]:
        """Coordinates in the basis p^lb(i) X^i, reduced mod p^n (n defaults to n_work)."""
        n = self.budget.n_work if n is None else n
        p = self.p
        out = []
        for i, (c, b) in enumerate(zip(self.data, self.lbs())):
            e = self.scale + b
            if c % p**e if e > 0 else False:
                raise MembershipError(f"degree {self.lo + i} is not integral for the lattice", [self.lo + i])
            out.append((c // p**e if e >= 0 else c * p ** (-e)) % p**n)
        return out

    def is_zero(self, prec: int | None = None) -> bool:
        prec = self.budget.n_work if prec is None else prec
        return all(v >= b + prec for v, b in self._vals_and_lbs())

    def _vals_and_lbs(self):
        p = self.p
        for c, b in zip(self.data, self.lbs()):
            yield (math.inf if c == 0 else vp(c, p) - self.scale), b

    # arithmetic -----------------------------------------------------
    def _compatible(self, other: "DecoSeries") -> None:
        if not isinstance(other, DecoSeries):
            raise TypeError("expected a DecoSeries")
        if other.spec != self.spec:
            raise ValueError("ring spec mismatch")
        if self.basis != "plain" or other.basis != "plain":
            raise ValueError("arithmetic needs the plain coefficient basis")

    def _aligned(self, other: "DecoSeries"):
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        s = max(self.scale, other.scale)
        a = [0] * (hi - lo + 1)
        b = [0] * (hi - lo + 1)
        ma, mb = self.p ** (s - self.scale), self.p ** (s - other.scale)
        for k, c in enumerate(self.data):
            a[self.lo - lo + k] = c * ma
        for k, c in enumerate(other.data):
            b[other.lo - lo + k] = c * mb
        return (lo, hi), s, a, b

    def __add__(self, other):
        if not isinstance(other, DecoSeries):
            return self + DecoSeries.from_coeffs(self.spec, self.band, {0: other} if _to_fraction(other) else {},
                                                 self.budget, check=False) if self.lo <= 0 <= self.hi else NotImplemented
        self._compatible(other)
        band, s, a, b = self._aligned(other)
        return DecoSeries._make(self.spec, band, _min_budget(self, other), s, [x + y for x, y in zip(a, b)],
                                self.tail_discarded or other.tail_discarded)

    __radd__ = __add__

    def __neg__(self):
        return DecoSeries._make(self.spec, self.band, self.budget, self.scale, [-c for c in self.data],
                                self.tail_discarded, self.basis)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scalar_mul(self, x: Scalar) -> "DecoSeries":
        x = _to_fraction(x)
        if x == 0:
            return DecoSeries.zero(self.spec, self.band, self.budget)
        p = self.p
        v = vp(x, p)
        u = x / Fraction(p) ** v
        s = self.scale
        data = list(self.data)
        if v >= 0:
            data = [c * p**v for c in data]
        else:
            s += -v
        big = p ** (s + max(self.lbs()) + self.budget.internal + 1)
        unit = u.numerator * pow(u.denominator, -1, big)
        return DecoSeries._make(self.spec, self.band, self.budget, s, [c * unit for c in data],
                                self.tail_discarded, self.basis)

    def __mul__(self, other):
        if isinstance(other, DecoSeries):
            return self.mul(other)
        if isinstance(other, (int, Fraction, ScaledPAdic)):
            return self.scalar_mul(other)
        return NotImplemented

    __rmul__ = __mul__

    def mul(self, other: "DecoSeries", band=None) -> "DecoSeries":
        """Product truncated to ``band`` (default: the hull of the operand bands)."""
        self._compatible(other)
        if band is None:
            band = (min(self.lo, other.lo), max(self.hi, other.hi))
        lo, hi = _check_band(self.spec, band)
        plo = self.lo + other.lo
        full = poly_mul_laurent(self.data, other.data)
        out = [0] * (hi - lo + 1)
        tail = self.tail_discarded or other.tail_discarded
        scale = self.scale + other.scale
        p = self.p
        for k, c in enumerate(full):
            deg = plo + k
            if lo <= deg <= hi:
                out[deg - lo] = c
            elif c:
                b = lb(self.spec, deg) if (deg >= 0 or self.spec.allows_negative) else 0
                if vp(c, p) - scale < b + self.budget.n_work:
                    tail = True
        res = DecoSeries._make(self.spec, (lo, hi), _min_budget(self, other), scale, out, tail)
        bad = check_membership(res)
        if bad:
            raise MembershipError(f"product leaves the ring at degrees {bad}", bad)
        return res

    def truncate(self, band) -> "DecoSeries":
        lo, hi = _check_band(self.spec, band)
        out = [0] * (hi - lo + 1)
        for k, c in enumerate(self.data):
            d = self.lo + k
            if lo <= d <= hi:
                out[d - lo] = c
        dropped = any(c for k, c in enumerate(self.data) if not lo <= self.lo + k <= hi)
        return DecoSeries._make(self.spec, (lo, hi), self.budget, self.scale, out,
                                self.tail_discarded or dropped, self.basis)

    def recast(self, spec: RingSpec, band=None, check: bool = True) -> "DecoSeries":
        """The same coefficients viewed in another decoration."""
        band = self.band if band is None else band
        out = DecoSeries.from_coeffs(spec, band, {k: v for k, v in self.coeffs().items()
                                                  if band[0] <= k <= band[1]}, self.budget, check=check)
        return replace(out, tail_discarded=self.tail_discarded) if self.tail_discarded else out

    def equals(self, other: "DecoSeries", prec: int | None = None) -> bool:
        """Coefficientwise equality modulo p^(lb(i) + prec); prec defaults to n_work."""
        prec = self.budget.n_work if prec is None else prec
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        p = self.p
        for i in range(lo, hi + 1):
            d = self.fraction(i) - other.fraction(i)
            if d == 0:
                continue
            b = lb(self.spec, i) if (i >= 0 or self.spec.allows_negative) else 0
            if vp(d, p) < b + prec:
                return False
        return True

    def __eq__(self, other) -> bool:
        if not isinstance(other, DecoSeries):
            return NotImplemented
        return (self.spec, self.band, self.scale, self.data, self.basis) == (
            other.spec, other.band, other.scale, other.data, other.basis)

    def __hash__(self) -> int:
        return hash((self.spec, self.band, self.scale, self.data, self.basis))

    def __repr__(self) -> str:
        terms = ", ".join(f"{k}: {v}" for k, v in list(self.coeffs().items())[:6])
        more = "..." if len(self.support()) > 6 else ""
        return f"DecoSeries({self.spec.deco}, band={self.band}, {{{terms}{more}}})"

    # serialization ----------------------------------------------------
    def to_json(self) -> dict:
        spec = self.spec.to_dict()
        spec["n_work"] = self.budget.n_work
        spec["slack"] = self.budget.slack
        if self.basis != "plain":
            spec["basis"] = self.basis
        coeffs = []
        p = self.p
        for k, c in enumerate(self.data):
            if c:
                v = vp(c, p)
                coeffs.append([self.lo + k, v - self.scale, c // p**v])
        return {"spec": spec, "band": [self.lo, self.hi], "coeffs": coeffs}

    @classmethod
    def from_json(cls, obj: Mapping) -> "DecoSeries":
        sd = dict(obj["spec"])
        budget = PrecisionBudget(int(sd.pop("n_work")), int(sd.pop("slack")))
        basis = sd.pop("basis", "plain")
        spec = RingSpec.from_dict(sd)
        lo, hi = obj["band"]
        entries = obj["coeffs"]
        scale = max([0] + [-int(v) for _, v, _ in entries])
        data = [0] * (hi - lo + 1)
        for deg, v, m in entries:
            data[deg - lo] = int(m) * spec.p ** (int(v) + scale)
        return cls._make(spec, (lo, hi), budget, scale, data, basis=basis)


def _min_budget(a: DecoSeries, b: DecoSeries) -> PrecisionBudget:
    if a.budget == b.budget:
        return a.budget
    return PrecisionBudget(min(a.budget.n_work, b.budget.n_work), min(a.budget.slack, b.budget.slack))


def poly_mul_laurent(a, b) -> list[int]:
    """Exact product of two integer coefficient lists."""
    return _poly.mul(list(a), list(b))


def check_membership(f: DecoSeries) -> list[int]:
    """Degrees whose coefficient valuation falls below the floor."""
    bad = []
    for k, (v, b) in enumerate(f._vals_and_lbs()):
        if v < b:
            bad.append(f.lo + k)
    return bad


def ring_arith(f, g, kind: str):
    if kind == "add":
        return f + g
    if kind == "mul":
        return f * g
    if kind == "scalar_mul":
        return f.scalar_mul(g)
    raise ValueError(f"unknown kind {kind!r}")


# ---------------------------------------------------------------------------
# filtration by order of vanishing at the uniformizer

@dataclass(frozen=True)
class FiltClass:
    """Remainder modulo P^r, with coefficients known modulo p^abs_prec."""

    spec: RingSpec
    r: int
    rep: tuple[Fraction, ...]
    abs_prec: float

    def coeffs(self) -> list[ScaledPAdic]:
        return [ScaledPAdic.from_abs(c, self.spec.p, int(min(self.abs_prec, 10**6))) for c in self.rep]

    def is_zero(self, prec: int | None = None) -> bool:
        prec = self.abs_prec if prec is None else prec
        return all(c == 0 or vp(c, self.spec.p) >= prec for c in self.rep)

    def __mul__(self, other: "FiltClass") -> "FiltClass":
        if (self.spec.filtration_poly(), self.r) != (other.spec.filtration_poly(), other.r):
            raise ValueError("incompatible quotients")
        prod = [Fraction(0)] * (2 * len(self.rep))
        for i, a in enumerate(self.rep):
            if a:
                for j, b in enumerate(other.rep):
                    prod[i + j] += a * b
        rem = _reduce_poly(prod, _power_poly(self.spec.filtration_poly(), self.r))
        va = min((vp(c, self.spec.p) for c in self.rep if c), default=0)
        vb = min((vp(c, self.spec.p) for c in other.rep if c), default=0)
        prec = min(self.abs_prec + vb, other.abs_prec + va)
        return FiltClass(self.spec, self.r, tuple(rem), prec)

    def equals(self, other: "FiltClass", prec: float | None = None) -> bool:
        prec = min(self.abs_prec, other.abs_prec) if prec is None else prec
        return all((a - b) == 0 or vp(a - b, self.spec.p) >= prec for a, b in zip(self.rep, other.rep))


@lru_cache(maxsize=None)
def _power_poly(P: tuple[int, ...], r: int) -> tuple[int, ...]:
    out = [1]
    for _ in range(r):
        out = _poly.mul(out, list(P))
    return tuple(out)


def _reduce_poly(f: list[Fraction], Pr: tuple[int, ...]) -> list[Fraction]:
    deg = len(Pr) - 1
    f = list(f) + [Fraction(0)] * max(0, deg - len(f))
    for k in range(len(f) - 1, deg - 1, -1):
        c = f[k]
        if c:
            for j in range(deg + 1):
                f[k - deg + j] -= c * Pr[j]
    return f[:deg]


class _PowerTable:
    """Remainders of X^k modulo P^r for a growing range of k (exact rationals)."""

    def __init__(self, P: tuple[int, ...], r: int):
        self.Pr = _power_poly(P, r)
        self.deg = len(self.Pr) - 1
        self.pos = [[Fraction(1)] + [Fraction(0)] * (self.deg - 1)]
        self.neg = [self.pos[0]]
        c0 = Fraction(self.Pr[0])
        # X^{-1} = -(P^r - c0)/X / c0
        self.xinv = [-Fraction(self.Pr[j + 1]) / c0 for j in range(self.deg)]

    def _times_x(self, y):
        top = y[-1]
        out = [Fraction(0)] + y[:-1]
        if top:
            for j in range(self.deg):
                out[j] -= top * self.Pr[j]
        return out

    def _over_x(self, y):
        y0 = y[0]
        out = y[1:] + [Fraction(0)]
        if y0:
            out = [a + y0 * b for a, b in zip(out, self.xinv)]
        return out

    def get(self, k: int) -> list[Fraction]:
        if k >= 0:
            while len(self.pos) <= k:
                self.pos.append(self._times_x(self.pos[-1]))
            return self.pos[k]
        while len(self.neg) <= -k:
            self.neg.append(self._over_x(self.neg[-1]))
        return self.neg[-k]


_TABLES: dict = {}


def power_table(spec: RingSpec, r: int) -> _PowerTable:
    key = (spec.filtration_poly(), r)
    if key not in _TABLES:
        _TABLES[key] = _PowerTable(*key)
    return _TABLES[key]


def reduce_mod_Fr(f: DecoSeries, r: int) -> FiltClass:
    """Canonical remainder of f modulo P^r (profile A) or P0^r (profile B)."""
    if not f.spec.filtered:
        raise ValueError(f"{f.spec.deco} carries no filtration here")
    if r < 0:
        raise ValueError("r must be non-negative")
    p = f.p
    if r == 0:
        return FiltClass(f.spec, 0, (), math.inf)
    tab = power_table(f.spec, r)
    rep = [Fraction(0)] * tab.deg
    prec = math.inf
    P = f.budget.internal
    for k, (c, b) in enumerate(zip(f.data, f.lbs())):
        i = f.lo + k
        row = tab.get(i)
        vrow = min((vp(x, p) for x in row if x), default=math.inf)
        prec = min(prec, b + P + vrow)
        if c:
            a = Fraction(c, p**f.scale)
            for j in range(tab.deg):
                if row[j]:
                    rep[j] += a * row[j]
    return FiltClass(f.spec, r, tuple(rep), prec)


def split_plus_minus(f: DecoSeries, r: int) -> tuple[DecoSeries, DecoSeries]:
    """f = f_plus + f_minus with f_plus in F^r and f_minus a polynomial of degree < r e."""
    if f.spec.deco not in ("PD", "U"):
        raise ValueError("split needs the PD or U decoration")
    rem = reduce_mod_Fr(f, r)
    minus = DecoSeries.from_coeffs(f.spec, f.band, {j: c for j, c in enumerate(rem.rep)
                                                    if c and f.lo <= j <= f.hi}, f.budget, check=False)
    plus = f - minus
    return plus, minus


def pd_basis_convert(f: DecoSeries, direction: str) -> DecoSeries:
    """Switch between sum a_i X^i and sum b_i X^i / floor(i/e)!."""
    if f.spec.deco != "PD":
        raise ValueError("divided-power basis needs the PD decoration")
    e = f.spec.e
    p = f.p
    if direction == "to_pd_monomials":
        if f.basis != "plain":
            raise ValueError("already in divided-power basis")
        vals = {i: c * math.factorial(i // e) for i, c in f.coeffs().items()}
        bad = sorted(i for i, x in vals.items() if vp(x, p) < 0)
        if bad:
            raise MembershipError(f"non-integral divided-power coordinates at {bad}", bad)
        data = []
        for i in range(f.lo, f.hi + 1):
            x = vals.get(i, Fraction(0))
            mod = p ** f.budget.internal
            data.append(x.numerator * pow(x.denominator, -1, mod) % mod if x else 0)
        res = DecoSeries._make(f.spec, f.band, f.budget, 0, data, f.tail_discarded, basis="pd")
        return res
    if direction == "to_plain":
        if f.basis != "pd":
            raise ValueError("not in divided-power basis")
        vals = {i: c / math.factorial(i // e) for i, c in f.coeffs().items()}
        return DecoSeries.from_coeffs(f.spec, f.band, vals, f.budget)
    raise ValueError(f"unknown direction {direction!r}")


# ---------------------------------------------------------------------------
# torus extension

@dataclass(frozen=True, eq=False)
class TorusSeries:
    """Sum over multi-exponents b in [-Mg, Mg]^d of coeffs[b] * X_1^b_1 ... X_d^b_d."""

    d: int
    Mg: int
    coeffs: Mapping[tuple[int, ...], DecoSeries]
    spec: RingSpec
    band: tuple[int, int]
    budget: PrecisionBudget = field(default_factory=PrecisionBudget)
    tail_discarded: bool = False

    def __post_init__(self) -> None:
        clean = {}
        for k, c in self.coeffs.items():
            if len(k) != self.d or any(abs(b) > self.Mg for b in k):
                raise BandError(f"multi-exponent {k} outside the torus band")
            if c.spec != self.spec:
                raise ValueError("coefficients must share one ring spec")
            if c.support():
                clean[tuple(k)] = c
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))

    @classmethod
    def zero(cls, spec, band, d, Mg, budget=None) -> "TorusSeries":
        return cls(d, Mg, {}, spec, tuple(band), budget or PrecisionBudget())

    def like(self, coeffs, tail=False) -> "TorusSeries":
        return TorusSeries(self.d, self.Mg, coeffs, self.spec, self.band, self.budget,
                           self.tail_discarded or tail)

    def coeff(self, k) -> DecoSeries:
        return self.coeffs.get(tuple(k), DecoSeries.zero(self.spec, self.band, self.budget))

    def __add__(self, other: "TorusSeries") -> "TorusSeries":
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return self.like(out, other.tail_discarded)

    def __neg__(self) -> "TorusSeries":
        return self.like({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scalar_mul(self, x) -> "TorusSeries":
        return self.like({k: c.scalar_mul(x) for k, c in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, TorusSeries):
            return self.mul(other)
        return self.scalar_mul(other)

    __rmul__ = __mul__

    def mul(self, other: "TorusSeries") -> "TorusSeries":
        out: dict = {}
        tail = False
        for k1, c1 in self.coeffs.items():
            for k2, c2 in other.coeffs.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                prod = c1.mul(c2, self.band)
                if any(abs(b) > self.Mg for b in k):
                    tail = tail or not prod.is_zero()
                    continue
                out[k] = out[k] + prod if k in out else prod
        return self.like(out, tail or other.tail_discarded)

    def map_coeffs(self, fn) -> "TorusSeries":
        out = {k: fn(c) for k, c in self.coeffs.items()}
        spec = next(iter(out.values())).spec if out else self.spec
        band = next(iter(out.values())).band if out else self.band
        return TorusSeries(self.d, self.Mg, out, spec, band, self.budget, self.tail_discarded)

    def equals(self, other: "TorusSeries", prec: int | None = None) -> bool:
        keys = set(self.coeffs) | set(other.coeffs)
        return all(self.coeff(k).equals(other.coeff(k), prec) for k in keys)

    def to_json(self) -> dict:
        return {"d": self.d, "Mg": self.Mg,
                "coeffs": [[list(k), c.to_json()] for k, c in self.coeffs.items()],
                "spec": {**self.spec.to_dict(), "n_work": self.budget.n_work, "slack": self.budget.slack},
                "band": list(self.band)}

    @classmethod
    def from_json(cls, obj) -> "TorusSeries":
        sd = dict(obj["spec"])
        budget = PrecisionBudget(int(sd.pop("n_work")), int(sd.pop("slack")))
        spec = RingSpec.from_dict(sd)
        coeffs = {tuple(k): DecoSeries.from_json(c) for k, c in obj["coeffs"]}
        return cls(int(obj["d"]), int(obj["Mg"]), coeffs, spec, tuple(obj["band"]), budget)


def random_element(spec: RingSpec, band, rng, budget: PrecisionBudget | None = None,
                   support=None, density: float = 1.0) -> DecoSeries:
    """Random ring member with lattice coordinates uniform mod p^n_work on ``support``."""
    budget = budget or PrecisionBudget()
    lo, hi = _check_band(spec, band)
    s_lo, s_hi = support if support is not None else (lo, hi)
    mod = spec.p**budget.n_work
    coords = []
    for i in range(lo, hi + 1):
        if s_lo <= i <= s_hi and rng.random() < density:
            coords.append(int(rng.integers(0, mod)))
        else:
            coords.append(0)
    return DecoSeries.from_lattice(spec, (lo, hi), coords, budget)
