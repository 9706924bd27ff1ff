"""Frobenius lifts, their left inverses, derivations, the Galois action and the Lazard series.

Two Frobenius flavours act on the arithmetic variable: the Kummer one
``X -> X^p`` and the cyclotomic one ``T -> (1+T)^p - 1``.  Both extend to torus
variables by ``X_j -> X_j^p``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence, Union

from . import _poly
from .errors import BandError, ConvergenceError, MembershipError, PrecisionError
from .padic import ScaledPAdic, binom_int, exp_padic, log_series_rational, vp, vp_factorial
from .rings import DecoSeries, RingSpec, TorusSeries, check_membership, lb

Element = Union[DecoSeries, TorusSeries]


# ---------------------------------------------------------------------------
# decoration bookkeeping

def frob_target(spec: RingSpec) -> RingSpec:
    if spec.deco == "UV":
        return spec.with_deco("UV", v=spec.v / spec.p)
    if spec.deco == "ZeroVPlus":
        return spec.with_deco("ZeroVPlus", v=spec.v / spec.p)
    return spec


def psi_target(spec: RingSpec) -> RingSpec:
    p = spec.p
    if spec.deco == "U":
        return spec.with_deco("U", u=spec.u * p)
    if spec.deco == "UV":
        return spec.with_deco("UV", u=spec.u * p, v=spec.v * p)
    if spec.deco == "PD":
        # PD sits inside U(1/(p-1)), which psi sends to U(p/(p-1))
        return spec.with_deco("U", u=Fraction(p, p - 1))
    return spec


def _finish(spec: RingSpec, band, budget, scale: int, data: list[int], tail: bool, check: bool = True) -> DecoSeries:
    out = DecoSeries._make(spec, tuple(band), budget, scale, data, tail)
    if check:
        bad = check_membership(out)
        if bad:
            raise MembershipError(f"result leaves {spec.deco} at degrees {bad[:8]}", bad)
    return out


def _work_mod(spec: RingSpec, band, scale: int, budget) -> int:
    lo, hi = band
    top = max(lb(spec, lo), lb(spec, hi), lb(spec, 0) if lo <= 0 <= hi else -10**9)
    return spec.p ** (scale + max(top, 0) + budget.internal + 2)


def _on_torus(f: TorusSeries, fn: Callable[[DecoSeries], DecoSeries], exp_map=None) -> TorusSeries:
    out: dict = {}
    tail = False
    for k, c in f.coeffs.items():
        k2 = exp_map(k) if exp_map else k
        img = fn(c)
        if any(abs(b) > f.Mg for b in k2):
            tail = tail or not img.is_zero()
            continue
        if k2 is None:
            continue
        out[k2] = out[k2] + img if k2 in out else img
    if out:
        first = next(iter(out.values()))
        spec, band = first.spec, first.band
    else:
        spec, band = fn(DecoSeries.zero(f.spec, f.band, f.budget)).spec, f.band
    return TorusSeries(f.d, f.Mg, out, spec, band, f.budget, f.tail_discarded or tail)


# ---------------------------------------------------------------------------
# Kummer Frobenius, psi, derivations

def frob_kum(f: Element, target: RingSpec | None = None, band=None) -> Element:
    """X_j -> X_j^p on every variable."""
    if isinstance(f, TorusSeries):
        return _on_torus(f, lambda c: frob_kum(c, target, band), lambda k: tuple(f.spec.p * b for b in k))
    p = f.p
    target = frob_target(f.spec) if target is None else target
    lo, hi = f.band if band is None else band
    data = [0] * (hi - lo + 1)
    tail = f.tail_discarded
    for k, c in enumerate(f.data):
        if c:
            d = p * (f.lo + k)
            if lo <= d <= hi:
                data[d - lo] = c
            else:
                tail = True
    return _finish(target, (lo, hi), f.budget, f.scale, data, tail)


def psi_kum(f: Element, target: RingSpec | None = None, band=None) -> Element:
    """Keep exponents divisible by p and divide them by p."""
    if isinstance(f, TorusSeries):
        p = f.spec.p

        def emap(k):
            return tuple(b // p for b in k) if all(b % p == 0 for b in k) else None

        out: dict = {}
        for k, c in f.coeffs.items():
            k2 = emap(k)
            if k2 is not None:
                out[k2] = psi_kum(c, target, band)
        sample = psi_kum(DecoSeries.zero(f.spec, f.band, f.budget), target, band)
        return TorusSeries(f.d, f.Mg, out, sample.spec, sample.band, f.budget, f.tail_discarded)
    p = f.p
    target = psi_target(f.spec) if target is None else target
    lo, hi = f.band if band is None else band
    data = [0] * (hi - lo + 1)
    for k, c in enumerate(f.data):
        d = f.lo + k
        if c and d % p == 0 and lo <= d // p <= hi:
            data[d // p - lo] = c
    return _finish(target, (lo, hi), f.budget, f.scale, data, f.tail_discarded)


def partial(f: Element, j: int = 0, basis: str = "kum") -> Element:
    """X_j d/dX_j (Kummer) or, for j = 0 in the cyclotomic basis, (1+T) d/dT."""
    if isinstance(f, TorusSeries):
        if j == 0:
            return _on_torus(f, lambda c: partial(c, 0, basis))
        out = {k: c.scalar_mul(k[j - 1]) for k, c in f.coeffs.items() if k[j - 1]}
        return f.like(out)
    if j != 0:
        raise ValueError("a single-variable series only has the derivation j = 0")
    if basis == "kum":
        data = [c * (f.lo + k) for k, c in enumerate(f.data)]
        return _finish(f.spec, f.band, f.budget, f.scale, data, f.tail_discarded)
    if basis == "cycl":
        if f.spec.profile != "B":
            raise ValueError("the cyclotomic derivation needs profile B")
        n = len(f.data)
        data = [0] * n
        tail = f.tail_discarded
        for k, c in enumerate(f.data):
            if not c:
                continue
            deg = f.lo + k
            data[k] += deg * c
            if k >= 1:
                data[k - 1] += deg * c
            elif deg:
                tail = True
        return _finish(f.spec, f.band, f.budget, f.scale, data, tail)
    raise ValueError(f"unknown basis {basis!r}")


def basis_decompose(f: Element, basis: str = "kum") -> dict:
    """Components c_alpha(f), alpha in {0..p-1}^(d+1), summing back to f."""
    p = f.spec.p
    if basis == "kum":
        if isinstance(f, TorusSeries):
            comps: dict = {}
            for k, c in f.coeffs.items():
                for a0, part in basis_decompose(c, "kum").items():
                    alpha = (a0[0],) + tuple(b % p for b in k)
                    comps.setdefault(alpha, {})[k] = part
            return {a: f.like(v) for a, v in sorted(comps.items())}
        out = {}
        for a in range(p):
            data = [c if (f.lo + k) % p == a else 0 for k, c in enumerate(f.data)]
            out[(a,)] = DecoSeries._make(f.spec, f.band, f.budget, f.scale, data, f.tail_discarded)
        return out
    if basis == "cycl":
        if isinstance(f, TorusSeries):
            comps = {}
            for k, c in f.coeffs.items():
                for a0, part in basis_decompose(c, "cycl").items():
                    alpha = (a0[0],) + tuple(b % p for b in k)
                    comps.setdefault(alpha, {})[k] = part
            return {a: f.like(v) for a, v in sorted(comps.items())}
        _require_b(f.spec)
        pos, neg, S = _split(f)
        mod = _work_mod(f.spec, f.band, S, f.budget)
        lo, hi = f.band
        comps_data = {a: [0] * (hi - lo + 1) for a in range(p)}
        # non-negative part: exact in the basis (1+T)^j
        if pos:
            b = _taylor_shift(pos, -1, mod)  # coefficients in Y = 1+T
            for a in range(p):
                part = [x if j % p == a else 0 for j, x in enumerate(b)]
                back = _taylor_shift(part, 1, mod)
                for j, x in enumerate(back):
                    if lo <= j <= hi:
                        comps_data[a][j - lo] += x
        # negative part: T^{-k} = phi(T^{-k}) q^k with q = phi(T)/T
        for k, c in enumerate(neg, start=1):
            if not c:
                continue
            qk = _q_power(p, k, mod)
            yb = _taylor_shift(qk, -1, mod)
            # series in s = 1/T starting at s^{pk}; a term T^a s^m lands in the band while m <= a - lo
            inv = _phi_t_inverse_power(p, k, len(yb) - lo, mod)
            for a in range(p):
                part = [x if j % p == a else 0 for j, x in enumerate(yb)]
                poly = _taylor_shift(part, 1, mod)
                prod = _laurent_times_s_series(poly, inv, lo, hi, mod)
                for deg, x in prod.items():
                    comps_data[a][deg - lo] += c * x
        return {(a,): DecoSeries._make(f.spec, f.band, f.budget, S, comps_data[a], f.tail_discarded)
                for a in range(p)}
    raise ValueError(f"unknown basis {basis!r}")


# ---------------------------------------------------------------------------
# cyclotomic Frobenius and psi

def _require_b(spec: RingSpec) -> None:
    if spec.profile != "B":
        raise ValueError("this operator needs the cyclotomic profile")


def _split(f: DecoSeries):
    pos = [f.data[d - f.lo] for d in range(max(0, f.lo), f.hi + 1)] if f.hi >= 0 else []
    if f.lo > 0:
        pos = [0] * f.lo + pos
    neg = [f.data[-k - f.lo] for k in range(1, -f.lo + 1)] if f.lo < 0 else []
    return pos, neg, f.scale


@lru_cache(maxsize=None)
def phi_t_poly(p: int) -> tuple[int, ...]:
    """(1+T)^p - 1."""
    return tuple(binom_int(p, j) if j else 0 for j in range(p + 1))


def _taylor_shift(a: Sequence[int], shift: int, mod: int) -> list[int]:
    """Coefficients of a(X + shift) for shift = +1 or -1."""
    b = list(a)
    n = len(b)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            b[j] = (b[j] + shift * b[j + 1]) % mod
    return b


@lru_cache(maxsize=None)
def _q_power_cached(p: int, k: int, mod: int) -> tuple[int, ...]:
    q = [binom_int(p, j + 1) for j in range(p)]
    return tuple(_poly.mul([1], [1]) if k == 0 else _poly_pow(q, k, mod))


def _poly_pow(q, k, mod):
    out = [1]
    base = list(q)
    while k:
        if k & 1:
            out = _poly.mul(out, base, mod=mod)
        k >>= 1
        if k:
            base = _poly.mul(base, base, mod=mod)
    return out


def _q_power(p: int, k: int, mod: int) -> list[int]:
    return list(_q_power_cached(p, k, mod))


@lru_cache(maxsize=None)
def _inv_unit_s(p: int, length: int, mod: int) -> tuple[int, ...]:
    """(T^{-p} phi(T))^{-1} as a power series in s = 1/T."""
    # T^{-p} phi(T) = sum_j binom(p, j) s^{p-j} = 1 + p s + ... + p s^{p-1}
    unit = [binom_int(p, p - m) for m in range(p)]
    return tuple(_poly.power_series_inverse(unit, length, mod))


def _phi_t_inverse_power(p: int, k: int, length: int, mod: int) -> list[int]:
    """phi(T)^{-k} as coefficients of s^0..s^{length-1} (s = 1/T)."""
    if p * k >= length:
        return [0] * length
    base = list(_inv_unit_s(p, length, mod))
    pw = _poly_pow_trunc(base, k, length - p * k, mod)
    return [0] * (p * k) + pw


def _poly_pow_trunc(base, k, length, mod):
    out = [1] + [0] * (length - 1)
    b = base[:length]
    while k:
        if k & 1:
            out = _poly.mul(out, b, length, mod)
        k >>= 1
        if k:
            b = _poly.mul(b, b, length, mod)
    return out


def _laurent_times_s_series(poly: Sequence[int], s_series: Sequence[int], lo: int, hi: int, mod: int) -> dict:
    """Product of a polynomial in T with a series in s = 1/T, restricted to degrees in [lo, hi]."""
    out: dict = {}
    for a, x in enumerate(poly):
        if not x:
            continue
        for m, y in enumerate(s_series):
            if y:
                deg = a - m
                if lo <= deg <= hi:
                    out[deg] = (out.get(deg, 0) + x * y) % mod
    return out


def frob_cycl(f: Element, target: RingSpec | None = None, band=None) -> Element:
    """T -> (1+T)^p - 1 (torus variables X_j -> X_j^p)."""
    if isinstance(f, TorusSeries):
        return _on_torus(f, lambda c: frob_cycl(c, target, band), lambda k: tuple(f.spec.p * b for b in k))
    _require_b(f.spec)
    p = f.p
    target = frob_target(f.spec) if target is None else target
    lo, hi = f.band if band is None else band
    pos, neg, S = _split(f)
    mod = _work_mod(target, (lo, hi), S, f.budget)
    data = [0] * (hi - lo + 1)
    tail = f.tail_discarded
    if pos and hi >= 0:
        full_len = (len(pos) - 1) * p + 1
        length = min(hi + 1, full_len)
        img = _poly.compose_horner(pos, phi_t_poly(p), length, mod)
        if full_len > hi + 1 and any(pos[j] for j in range(len(pos)) if p * j > hi):
            tail = True
        for j, x in enumerate(img):
            if j >= lo:
                data[j - lo] = x
    if neg:
        length = -lo + 1 if lo < 0 else 1
        acc = [0] * length
        psi_s = _phi_t_inverse_power(p, 1, length, mod)
        for c in reversed(neg):
            acc[0] = (acc[0] + c) % mod
            acc = _poly.mul(acc, psi_s, length, mod)
        for m, x in enumerate(acc):
            if x and lo <= -m <= hi:
                data[-m - lo] = (data[-m - lo] + x) % mod
        tail = True if lo > -p * len(neg) else tail
    return _finish(target, (lo, hi), f.budget, S, data, tail)


def psi_cycl(f: Element, target: RingSpec | None = None, band=None) -> Element:
    """Left inverse of the cyclotomic Frobenius: phi^{-1} of the alpha = 0 component."""
    if isinstance(f, TorusSeries):
        p = f.spec.p
        out: dict = {}
        for k, c in f.coeffs.items():
            if all(b % p == 0 for b in k):
                out[tuple(b // p for b in k)] = psi_cycl(c, target, band)
        sample = psi_cycl(DecoSeries.zero(f.spec, f.band, f.budget), target, band)
        return TorusSeries(f.d, f.Mg, out, sample.spec, sample.band, f.budget, f.tail_discarded)
    _require_b(f.spec)
    p = f.p
    target = psi_target(f.spec) if target is None else target
    lo, hi = f.band if band is None else band
    pos, neg, S = _split(f)
    mod = _work_mod(target, (lo, hi), S, f.budget) * p ** (len(neg) + 2)
    data = [0] * (hi - lo + 1)
    if pos:
        y = _taylor_shift(pos, -1, mod)
        z = [y[j] for j in range(0, len(y), p)]
        back = _taylor_shift(z, 1, mod)
        for j, x in enumerate(back):
            if lo <= j <= hi:
                data[j - lo] = (data[j - lo] + x) % mod
    for k, c in enumerate(neg, start=1):
        if not c:
            continue
        y = _taylor_shift(_q_power(p, k, mod), -1, mod)
        z = [y[j] for j in range(0, len(y), p)]
        back = _taylor_shift(z, 1, mod)
        for j, x in enumerate(back):
            deg = j - k
            if lo <= deg <= hi:
                data[deg - lo] = (data[deg - lo] + c * x) % mod
    return _finish(target, (lo, hi), f.budget, S, data, f.tail_discarded)


# ---------------------------------------------------------------------------
# Galois action

@dataclass(frozen=True)
class OperatorHandle:
    """A named operator with its numerical parameters."""

    kind: str
    spec: RingSpec
    j: int = 0
    exponent: int | None = None
    c: int | None = None
    a: int | None = None

    def __post_init__(self) -> None:
        kinds = {"frob_kum", "psi_kum", "frob_cycl", "psi_cycl", "partial", "gamma", "nabla", "tau"}
        if self.kind not in kinds:
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.kind in ("gamma", "nabla", "tau", "frob_cycl", "psi_cycl"):
            _require_b(self.spec)
        if self.kind in ("gamma", "tau") and self.c is None:
            c, a = gamma_params(self.spec, 40)
            object.__setattr__(self, "c", c)
            object.__setattr__(self, "a", a)

    def __call__(self, f: Element) -> Element:
        if self.kind == "frob_kum":
            return frob_kum(f)
        if self.kind == "psi_kum":
            return psi_kum(f)
        if self.kind == "frob_cycl":
            return frob_cycl(f)
        if self.kind == "psi_cycl":
            return psi_cycl(f)
        if self.kind == "partial":
            return partial(f, self.j)
        if self.kind == "gamma":
            return gamma_act(f, self.j, self.exponent if self.exponent is not None else self.a)
        if self.kind == "tau":
            return gamma_act(f, self.j, self.exponent if self.exponent is not None else self.a) - f
        return nabla(f, self.j)


@lru_cache(maxsize=None)
def gamma_params(spec: RingSpec, prec: int) -> tuple[int, int]:
    """c = exp(p^i) mod p^prec and a = (c - 1)/p^i mod p^(prec - i)."""
    _require_b(spec)
    p, i = spec.p, spec.i_cyclo
    c = exp_padic(p**i, p, prec + i)
    if c % p ** (2 * i) != (1 + p**i) % p ** (2 * i):
        raise AssertionError("c is not 1 + p^i modulo p^(2i)")
    a = (c - 1) // p**i % p**prec
    if a % p == 0:
        raise AssertionError("a must be a unit")
    return c % p ** (prec + i), a


def binomial_series(x: int, length: int, mod: int, extra: int) -> list[int]:
    """Coefficients of (1+T)^x mod (T^length, mod), x an integer standing for a p-adic exponent.

    ``extra`` must dominate v_p(k!) for k < length, so that x is used to enough digits.
    """
    out = [1]
    cur = 1
    for k in range(1, length):
        cur = cur * (x - k + 1) // k
        out.append(cur % mod)
    return out


def _series_mod(spec, S, budget, band, extra_digits=0):
    return _work_mod(spec, band, S, budget) * spec.p**extra_digits


def gamma_act(f: Element, j: int = 0, exponent: int | ScaledPAdic | None = None, twist: int = 0) -> Element:
    """Galois action.

    j = 0 substitutes (1+T) -> (1+T)^(1 + p^i * exponent); the default exponent is
    a = (c-1)/p^i, i.e. the generator gamma_0.  j >= 1 multiplies the X_j^b part
    by (1+T)^(p^i * exponent * b).  ``twist`` multiplies the j = 0 action by c^twist.
    """
    spec = f.spec
    _require_b(spec)
    p, i = spec.p, spec.i_cyclo
    budget = f.budget
    lo, hi = f.band
    extra = vp_factorial(max(hi - lo, 1) + 2, p) + budget.internal + 8
    if exponent is None:
        c, a = gamma_params(spec, extra + 8)
        exponent = a
    if isinstance(exponent, ScaledPAdic):
        exponent = int(exponent.to_fraction())
    if isinstance(f, TorusSeries):
        if j == 0:
            return _on_torus(f, lambda cc: gamma_act(cc, 0, exponent, twist))
        out = {}
        for k, cc in f.coeffs.items():
            N = p**i * exponent * k[j - 1]
            out[k] = _times_binomial(cc, N, extra)
        return f.like(out)
    if j != 0:
        raise ValueError("a single-variable series only carries gamma_0")
    x = 1 + p**i * exponent
    pos, neg, S = _split(f)
    mod = _series_mod(spec, S, budget, f.band, 2)
    length = hi + 1 if hi >= 0 else 0
    data = [0] * (hi - lo + 1)
    if length:
        g = binomial_series(x, max(length, 2), mod, extra)
        g[0] = 0
        img = _poly.compose_horner(pos, g, length, mod) if pos else []
        for d, v in enumerate(img):
            if d >= lo:
                data[d - lo] = v
    if neg:
        # (G/T)^{-1} as a power series; G^{-k} = T^{-k} (G/T)^{-k}
        L = hi - lo + 2
        g = binomial_series(x, L + 1, mod, extra)
        unit = g[1:L + 1]
        inv = _poly.power_series_inverse(unit, L, mod)
        pw = [1] + [0] * (L - 1)
        for k, cc in enumerate(neg, start=1):
            pw = _poly.mul(pw, inv, L, mod)
            if not cc:
                continue
            for m, v in enumerate(pw):
                d = -k + m
                if d > hi:
                    break
                if d >= lo:
                    data[d - lo] = (data[d - lo] + cc * v) % mod
    if twist:
        c, _ = gamma_params(spec, extra + 8)
        data = [v * pow(c, twist, mod) for v in data]
    return _finish(spec, f.band, budget, S, data, f.tail_discarded)


def _times_binomial(f: DecoSeries, N: int, extra: int) -> DecoSeries:
    lo, hi = f.band
    mod = _series_mod(f.spec, f.scale, f.budget, f.band, 2)
    g = binomial_series(N, hi - lo + 1, mod, extra)
    prod = _poly.mul(list(f.data), g, hi - lo + 1, mod)
    return _finish(f.spec, f.band, f.budget, f.scale, prod, f.tail_discarded)


def tau(f: Element, j: int = 0, twist: int = 0, conjugated: bool = False) -> Element:
    """tau_j = gamma_j - 1 (tau_0 = c^twist gamma_0 - 1); conjugated uses gamma_j^c."""
    spec = f.spec
    c, a = gamma_params(spec, 60)
    if j == 0:
        return gamma_act(f, 0, a, twist) - f
    return gamma_act(f, j, c if conjugated else 1) - f


def nabla(f: Element, j: int = 0) -> Element:
    """Lie-algebra operator t * partial_j for j >= 1, p^i times the cyclotomic derivation for j = 0."""
    spec = f.spec
    lo, hi = f.band
    # negative degrees of f pull t-coefficients above hi back into the band
    t, _ = compute_t(TwistParams.make(spec.p, 0), spec, (lo, hi - min(lo, 0)), f.budget)
    if isinstance(f, TorusSeries):
        if j == 0:
            return _on_torus(f, lambda cc: nabla(cc, 0))
        return partial(f, j).map_coeffs(
            lambda cc: cc.mul(t.recast(cc.spec, check=False) if t.spec != cc.spec else t, band=cc.band))
    return partial(f, 0, "cycl").scalar_mul(spec.p ** spec.i_cyclo)


# ---------------------------------------------------------------------------
# the period t

@dataclass(frozen=True)
class TwistParams:
    r: int
    a_r: int
    b_r: int

    @classmethod
    def make(cls, p: int, r: int) -> "TwistParams":
        if r < 0:
            raise ValueError("r must be non-negative")
        return cls(r, r // (p - 1), r % (p - 1))


def log1p_poly(length: int) -> list[Fraction]:
    return [Fraction(0)] + [Fraction((-1) ** (k - 1), k) for k in range(1, length)]


def compute_t(tw: TwistParams, spec: RingSpec, band=None, budget=None,
              check_membership_of_t_over_p: bool = True) -> tuple[DecoSeries, DecoSeries]:
    """t = p^i log(1+T) truncated to the band, and t^{r} = t^b (t^(p-1)/p)^a."""
    _require_b(spec)
    from .padic import PrecisionBudget

    budget = budget or PrecisionBudget()
    lo, hi = band if band is not None else (0, 8 * spec.e)
    if hi < 1:
        raise BandError("band too short for t")
    p, i = spec.p, spec.i_cyclo
    coeffs = {k: p**i * x for k, x in enumerate(log1p_poly(hi + 1)) if k >= max(lo, 1)}
    t = DecoSeries.from_coeffs(spec, (lo, hi), coeffs, budget)
    if check_membership_of_t_over_p and spec.deco == "UV":
        t_over_p = {k: x / p for k, x in coeffs.items()}
        for target in (spec, spec.with_deco("UV", v=spec.v / p)):
            DecoSeries.from_coeffs(target, (lo, hi), t_over_p, budget)
    one = DecoSeries.from_coeffs(spec, (lo, hi), {0: 1}, budget) if lo <= 0 else None
    if one is None:
        raise BandError("band must contain degree 0")
    out = one
    for _ in range(tw.b_r):
        out = out.mul(t)
    if tw.a_r:
        tp = t
        for _ in range(p - 2):
            tp = tp.mul(t)
        tp = tp.scalar_mul(Fraction(1, p))
        for _ in range(tw.a_r):
            out = out.mul(tp)
    return t, out


# ---------------------------------------------------------------------------
# series inverse of (1 - p^{-s} phi)

def frob_floor(spec: RingSpec, s: int) -> int:
    """Smallest N with 1 - p^{-s} phi bijective on the degree >= N part."""
    if spec.deco == "PD":
        return max(0, s * spec.e)
    if spec.deco == "U":
        return max(0, math.ceil(Fraction(s * spec.e) / (spec.u * (spec.p - 1))))
    raise ValueError("the bijectivity floor is defined for PD and U")


def solve_one_minus_frob(f: DecoSeries, s: int, N_floor: int, frob: str = "kum", k_max: int = 200) -> DecoSeries:
    """g with (1 - p^{-s} phi) g = f, summing p^{-ks} phi^k(f)."""
    if N_floor < frob_floor(f.spec, s):
        raise ValueError(f"N_floor {N_floor} is below the bijectivity floor {frob_floor(f.spec, s)}")
    if any(d < N_floor for d in f.support()):
        raise ValueError("f must be supported in degrees >= N_floor")
    phi = frob_kum if frob == "kum" else frob_cycl
    g = f
    term = f
    prec = f.budget.n_work
    for _ in range(k_max):
        term = phi(term, target=f.spec).scalar_mul(Fraction(1, f.p**s) if s >= 0 else f.p ** (-s))
        if term.is_zero(prec + f.budget.slack):
            # a term that vanished by leaving the band marks g as truncated
            return replace(g, tail_discarded=True) if term.tail_discarded else g
        g = g + term
    raise ConvergenceError("series for (1 - p^-s phi)^-1 did not converge")


# ---------------------------------------------------------------------------
# implicit function solver

@dataclass
class ImplicitSolution:
    value: object
    iterations: int
    residual_valuations: list
    correction: object


def implicit_solve(Q: Callable, jac: Callable, Z0, ideal_gen: int, z: int = 1, p: int | None = None,
                   prec: int = 8, H=None, max_iter: int = 200) -> ImplicitSolution:
    """Fixed point of x -> x - H Q(Z0 + x) over Z_p (scalars or vectors of integers).

    ``ideal_gen`` and ``z`` are integers (the ideal (ideal_gen) and the scaling z of
    the contraction argument); the correction is certified to lie in z^{-1}(ideal_gen).
    """
    p = p or _smallest_prime_factor(ideal_gen)
    mod = p**prec
    vector = isinstance(Z0, (list, tuple))
    z0 = list(Z0) if vector else [Z0]
    n = len(z0)

    def as_list(v):
        return list(v) if isinstance(v, (list, tuple)) else [v]

    q0 = as_list(Q(Z0))
    if any(x % ideal_gen for x in q0):
        raise ValueError("Q(Z0) is not in the ideal")
    if H is None:
        J = jac(Z0)
        J = [list(row) for row in J] if vector else [[J]]
        H = _mat_inverse_mod(J, p, mod)
    else:
        H = [list(row) for row in H] if vector else [[H]]
    x = [0] * n
    vals = []
    last = -1
    for it in range(1, max_iter + 1):
        arg = [(a + b) for a, b in zip(z0, x)]
        q = [v % mod for v in as_list(Q(arg if vector else arg[0]))]
        v = min((vp(c, p) if c else prec for c in q))
        vals.append(min(v, prec))
        if v >= prec:
            break
        if v <= last:
            raise ConvergenceError("residual valuation did not increase; the map is not contracting")
        last = v
        step = [sum(H[r][c] * q[c] for c in range(n)) for r in range(n)]
        x = [(a - b) % mod for a, b in zip(x, step)]
    else:
        raise ConvergenceError("iteration bound reached")
    ig = ideal_gen // z if ideal_gen % z == 0 else None
    if ig is not None and any(c % ig for c in x):
        raise ConvergenceError("correction is not in z^-1 (ideal)")
    val = [(a + b) % mod for a, b in zip(z0, x)]
    return ImplicitSolution(val if vector else val[0], it, vals, x if vector else x[0])


def _smallest_prime_factor(n: int) -> int:
    n = abs(n)
    k = 2
    while k * k <= n:
        if n % k == 0:
            return k
        k += 1
    return n


def _mat_inverse_mod(J, p, mod):
    n = len(J)
    A = [[x % mod for x in row] + [1 if i == j else 0 for j in range(n)] for i, row in enumerate(J)]
    for col in range(n):
        piv = next((r for r in range(col, n) if A[r][col] % p), None)
        if piv is None:
            raise ValueError("Jacobian is not invertible modulo p; supply H")
        A[col], A[piv] = A[piv], A[col]
        inv = pow(A[col][col], -1, mod)
        A[col] = [x * inv % mod for x in A[col]]
        for r in range(n):
            if r != col and A[r][col]:
                f = A[r][col]
                A[r] = [(x - f * y) % mod for x, y in zip(A[r], A[col])]
    return [row[n:] for row in A]


# ---------------------------------------------------------------------------
# Lazard operators

def lazard_beta(f: Element, j: int = 1, direction: str = "nabla_over_tau", twist: int = 0,
                k_max: int = 400) -> Element:
    """Apply sum_k a_k tau_j^k (nabla_over_tau) or sum_k b_k tau_j^k (tau_over_nabla)."""
    kind = {"nabla_over_tau": "log_over_x", "tau_over_nabla": "x_over_log"}[direction]
    prec = f.budget.internal
    out = f
    term = f
    gains: list[float] = []
    prev = _lattice_val(f)
    quiet = 0
    for k in range(1, k_max + 1):
        term = tau(term, j, twist)
        v = _lattice_val(term)
        gains.append(v - prev if prev != math.inf and v != math.inf else math.inf)
        prev = v
        coef = log_series_rational(k, kind)
        contrib_val = v + vp(coef, f.spec.p) if coef and v != math.inf else math.inf
        if coef:
            out = out + term.scalar_mul(coef)
        if contrib_val >= prec:
            quiet += 1
            if quiet >= 3 and (v == math.inf or v - k / (f.spec.p - 1) >= prec):
                return out
        else:
            quiet = 0
        if k >= 8 and v != math.inf and all(g <= 0 for g in gains[-8:]):
            raise ConvergenceError("tau gains no valuation; parameters outside the convergent regime")
    raise ConvergenceError("Lazard series did not reach working precision")


def _lattice_val(f: Element) -> float:
    if isinstance(f, TorusSeries):
        return min((_lattice_val(c) for c in f.coeffs.values()), default=math.inf)
    best = math.inf
    for v, b in f._vals_and_lbs():
        best = min(best, v - b)
    return best
