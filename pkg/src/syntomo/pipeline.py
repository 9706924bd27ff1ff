"""Concrete syntomic, Kummer, cyclotomic, de Rham and Herr complexes on band-truncated lattices.

Every complex here is assembled from matrices over Z/p^n written in the lattice
bases ``p^lb(k) X^k`` of the rings in ``rings``.  A band model keeps degrees
``lo..hi``; the discarded degrees always form a subcomplex (or, for the Herr
model, the kept degrees do), so the model is an honest quotient (or sub) complex.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from . import _poly
from .errors import BandError, ConfigError, MembershipError
from .homcx import (
    Certificate,
    ChainComplex,
    ChainMap,
    CohomologyReport,
    as_mod_array,
    cohomology,
    cone_and_total,
    image_report,
    identity,
    koszul_build,
    matmul_mod,
    quasi_iso_certificate,
    snf,
    zeros,
)
from .operators import binomial_series, gamma_params, phi_t_poly
from .padic import PrecisionBudget, vp, vp_factorial
from .rings import RingSpec, _lb_table, lb, power_table

log = logging.getLogger("syntomo.pipeline")

COMPLEX_NAMES = ("syn", "kum", "kum_psi", "cycl", "hk", "dr")
EDGE_NAMES = ("pd_to_u", "phi_to_psi", "u_to_uv", "psi_uv_back_to_phi", "kum_vs_cycl_table",
              "filt_drop_by_t", "lie_to_group", "group_to_cont")


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class PipelineConfig:
    profile: str = "A"
    p: int = 3
    e: int = 1
    eisenstein: tuple | None = None
    i_cyclo: int = 3
    d: int = 0
    r: int = 1
    n: int = 4
    M: int | None = None
    u: Fraction | None = None
    v: Fraction | None = None
    margin: int = 4
    n_work: int = 12
    slack: int = 4
    decorations: tuple = ("PD", "U", "UV")

    def __post_init__(self) -> None:
        if self.profile not in ("A", "B"):
            raise ConfigError("profile must be 'A' or 'B'")
        if self.d not in (0, 1):
            raise ConfigError("torus rank d must be 0 or 1")
        if self.r < 0:
            raise ConfigError("twist r must be non-negative")
        if self.n < 1:
            raise ConfigError("n must be at least 1")
        if self.margin < 0:
            raise ConfigError("margin must be non-negative")
        if self.n_work < self.n:
            raise ConfigError("n_work must be at least n")
        if self.profile == "B" and self.i_cyclo < 3:
            raise ConfigError("profile B needs i_cyclo >= 3 (enough roots of unity)")
        bad = [x for x in self.decorations if x not in ("PD", "U", "UV")]
        if bad:
            raise ConfigError(f"unknown decorations {bad}")
        try:
            self.ring("UV")
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.M is not None and self.M < truncation_floor(self):
            raise ConfigError(f"M = {self.M} is below the certified floor {truncation_floor(self)}")

    # ring specs ---------------------------------------------------------
    @property
    def ram(self) -> int:
        return (self.p - 1) * self.p ** (self.i_cyclo - 1) if self.profile == "B" else self.e

    @property
    def uu(self) -> Fraction:
        return Fraction(self.p - 1, self.p) if self.u is None else Fraction(self.u)

    @property
    def vv(self) -> Fraction:
        return Fraction(self.p - 1) if self.v is None else Fraction(self.v)

    def ring(self, deco: str, u=None, v=None) -> RingSpec:
        u = self.uu if u is None else u
        v = self.vv if v is None else v
        if self.profile == "A":
            spec = RingSpec(self.p, self.e, 0, deco, u, v, "X0", self.eisenstein)
        else:
            spec = RingSpec(self.p, self.ram, self.i_cyclo, deco, u, v, "T")
        if deco == "UV" and u == self.uu and v == self.vv:
            spec.check_standing()
        return spec

    @property
    def budget(self) -> PrecisionBudget:
        return PrecisionBudget(self.n_work, self.slack)

    def with_(self, **kw) -> "PipelineConfig":
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return {"profile": self.profile, "p": self.p, "e": self.ram, "i_cyclo": self.i_cyclo if self.profile == "B" else 0,
                "eisenstein": list(self.ring("PD").eisenstein) if self.profile == "A" else None,
                "d": self.d, "r": self.r, "n": self.n, "M": self.M, "u": str(self.uu), "v": str(self.vv),
                "margin": self.margin, "n_work": self.n_work, "slack": self.slack,
                "decorations": list(self.decorations)}


def truncation_floor(cfg: PipelineConfig) -> int:
    """max(r e, r e / (u (p-1))) + margin, the degree past which 1 - p^-s phi is bijective."""
    e, r, p, u = cfg.ram, cfg.r, cfg.p, cfg.uu
    a = r * e
    b = math.ceil(Fraction(r * e) / (u * (p - 1))) if r else 0
    return max(a, b) + cfg.margin


def _decay_rate(spec: RingSpec, positive: bool) -> Fraction:
    """Growth of the valuation of p^lb(k) X^k in K[X]/P^r per unit of |k|."""
    e, p = spec.e, spec.p
    if not positive:
        return (spec.v - 1) / e
    if spec.deco == "PD":
        return Fraction(1, e) * (1 - Fraction(1, p - 1))
    if spec.deco in ("U", "UV"):
        return (1 - spec.u) / e
    return Fraction(1, e)


@dataclass(frozen=True)
class TruncationPlan:
    M_floor: int
    M: int
    M_neg: int
    K_herr: int
    certified_degrees: tuple

    def to_dict(self) -> dict:
        return {"M_floor": self.M_floor, "M": self.M, "M_neg": self.M_neg, "K_herr": self.K_herr,
                "certified_degrees": list(self.certified_degrees)}


def truncation_plan(cfg: PipelineConfig) -> TruncationPlan:
    """Band radii: the bijectivity floor, and the degree where filtration quotients see only p^n."""
    floor = truncation_floor(cfg)
    need = cfg.n + cfg.r + 1
    rates = [_decay_rate(cfg.ring(x), True) for x in cfg.decorations]
    dr_floor = max(math.ceil(need / rt) for rt in rates) + cfg.margin
    M = max(floor, dr_floor, cfg.M or 0)
    neg_rate = _decay_rate(cfg.ring("UV"), False)
    M_neg = math.ceil(need / neg_rate) + cfg.margin if "UV" in cfg.decorations else 0
    K_herr = cfg.n + cfg.margin
    return TruncationPlan(floor, M, M_neg, K_herr, tuple(range(0, cfg.d + 3)))


# ---------------------------------------------------------------------------
# lattice spaces and operator matrices

@dataclass(frozen=True)
class Space:
    """The lattice with basis p^lb(k) X^k, lo <= k <= hi."""

    spec: RingSpec
    lo: int
    hi: int

    @property
    def dim(self) -> int:
        return max(0, self.hi - self.lo + 1)

    @cached_property
    def lbs(self) -> tuple:
        return _lb_table(self.spec, self.lo, self.hi) if self.dim else ()

    def lbk(self, k: int) -> int:
        return self.lbs[k - self.lo]

    def __contains__(self, k: int) -> bool:
        return self.lo <= k <= self.hi

    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)


def _shift_entry(p: int, shift: int, q: int, what: str, k: int) -> int:
    if shift < 0:
        raise MembershipError(f"{what} is not integral on the lattice at degree {k}", [k])
    return pow(p, shift, q)


def mat_incl(src: Space, tgt: Space, q: int) -> np.ndarray:
    p = src.spec.p
    M = zeros((tgt.dim, src.dim), q)
    for k in src.degrees():
        if k in tgt:
            M[k - tgt.lo, k - src.lo] = _shift_entry(p, src.lbk(k) - tgt.lbk(k), q, "inclusion", k)
    return M


def mat_frob_kum(src: Space, tgt: Space, q: int) -> np.ndarray:
    p = src.spec.p
    M = zeros((tgt.dim, src.dim), q)
    for k in src.degrees():
        if p * k in tgt:
            M[p * k - tgt.lo, k - src.lo] = _shift_entry(p, src.lbk(k) - tgt.lbk(p * k), q, "phi", k)
    return M


def mat_psi_kum(src: Space, tgt: Space, q: int) -> np.ndarray:
    p = src.spec.p
    M = zeros((tgt.dim, src.dim), q)
    for k in src.degrees():
        if k % p == 0 and k // p in tgt:
            M[k // p - tgt.lo, k - src.lo] = _shift_entry(p, src.lbk(k) - tgt.lbk(k // p), q, "psi", k)
    return M


def mat_partial_kum(src: Space, tgt: Space, q: int) -> np.ndarray:
    M = zeros((tgt.dim, src.dim), q)
    p = src.spec.p
    for k in src.degrees():
        if k in tgt and k:
            M[k - tgt.lo, k - src.lo] = k * _shift_entry(p, src.lbk(k) - tgt.lbk(k), q, "derivation", k) % q
    return M


def mat_partial_cycl(src: Space, tgt: Space, q: int) -> np.ndarray:
    """(1+T) d/dT; the target band must end one degree below the source band."""
    p = src.spec.p
    M = zeros((tgt.dim, src.dim), q)
    for k in src.degrees():
        if not k:
            continue
        for m in (k - 1, k):
            if m in tgt:
                sh = src.lbk(k) - tgt.lbk(m) + vp(k, p)
                if sh < 0:
                    raise MembershipError(f"cyclotomic derivation not integral at degree {k}", [k])
                unit = k // p ** vp(k, p)
                M[m - tgt.lo, k - src.lo] = unit * pow(p, sh, q) % q
    return M


def _work_digits(src: Space, tgt: Space, n: int) -> int:
    spread = max((abs(x) for x in src.lbs + tgt.lbs), default=0)
    return n + 2 * spread + 2


def _coords_from_poly(poly_coeffs: Mapping[int, int], src_lb: int, tgt: Space, p: int, n: int,
                      k: int, what: str) -> dict:
    out = {}
    q = p**n
    for m, c in poly_coeffs.items():
        if not c or m not in tgt:
            continue
        sh = src_lb - tgt.lbk(m)
        if sh >= 0:
            out[m] = c * pow(p, sh, q) % q
        else:
            d = p ** (-sh)
            if c % d:
                raise MembershipError(f"{what} of degree {k} lands below the floor at degree {m}", [m])
            out[m] = c // d % q
    return out


def mat_frob_cycl(src: Space, tgt: Space, q: int, strict: bool = False) -> np.ndarray:
    """T -> (1+T)^p - 1 on lattice coordinates, built from running powers.

    With ``strict`` the image of the band must not reach below the target band.
    """
    p = src.spec.p
    if strict and src.lo < 0:
        pad = 2 * p + (p - 1) * round(math.log(q, p))
        wide = Space(tgt.spec, tgt.lo - pad, tgt.hi)
        Mw = mat_frob_cycl(src, wide, q)
        if np.any(Mw[:pad, :] != 0):
            raise BandError("phi_cycl leaves the target band")
        return Mw[pad:, :]
    n = round(math.log(q, p))
    W = p ** _work_digits(src, tgt, n)
    M = zeros((tgt.dim, src.dim), q)
    phi_t = list(phi_t_poly(p))
    if src.hi >= 0:
        length = max(tgt.hi + 1, 1)
        cur = [1] + [0] * (length - 1)
        for k in range(0, src.hi + 1):
            if k >= src.lo:
                poly = {m: c for m, c in enumerate(cur) if c}
                for m, c in _coords_from_poly(poly, src.lbk(k), tgt, p, n, k, "phi_cycl").items():
                    M[m - tgt.lo, k - src.lo] = c
            cur = _poly.mul(cur, phi_t, length, W)
    if src.lo < 0:
        length = max(-tgt.lo + 1, 1)
        inv = list(_inv_phi_unit(p, length, W))
        base = [0] * p + inv[:max(0, length - p)]  # phi(T)^-1 in s = 1/T
        base = base[:length]
        cur = [1] + [0] * (length - 1)
        for k in range(1, -src.lo + 1):
            cur = _poly.mul(cur, base, length, W)
            if -k > src.hi:
                continue
            poly = {-m: c for m, c in enumerate(cur) if c}
            for m, c in _coords_from_poly(poly, src.lbk(-k), tgt, p, n, -k, "phi_cycl").items():
                M[m - tgt.lo, -k - src.lo] = c
    return M


def _inv_phi_unit(p: int, length: int, W: int) -> list[int]:
    unit = [1 if m == 0 else (math.comb(p, p - m)) for m in range(p)]
    return _poly.power_series_inverse(unit, length, W)


def mat_gamma(space: Space, q: int, c: int, twist: int = 0) -> np.ndarray:
    """(1+T) -> (1+T)^c, times c^twist, on a band whose lattice is closed under it."""
    p = space.spec.p
    n = round(math.log(q, p))
    digits = _work_digits(space, space, n)
    W = p**digits
    L = space.hi - space.lo + 2
    extra = vp_factorial(L + 2, p)
    g = binomial_series(c, L + 1, W * p**extra, extra)
    g = [x % W for x in g]
    M = zeros((space.dim, space.dim), q)
    ct = pow(c, twist, W)
    if space.hi >= 0:
        length = space.hi + 1
        G = [0] + g[1:length]
        cur = [1] + [0] * (length - 1)
        for k in range(0, space.hi + 1):
            if k >= space.lo:
                poly = {m: x * ct % W for m, x in enumerate(cur) if x}
                for m, x in _coords_from_poly(poly, space.lbk(k), space, p, n, k, "gamma").items():
                    M[m - space.lo, k - space.lo] = x
            cur = _poly.mul(cur, G, length, W)
    if space.lo < 0:
        unit = g[1:L + 1]
        inv = _poly.power_series_inverse(unit, L, W)
        cur = [1] + [0] * (L - 1)
        for k in range(1, -space.lo + 1):
            cur = _poly.mul(cur, inv, L, W)
            if -k > space.hi:
                continue
            poly = {m - k: x * ct % W for m, x in enumerate(cur) if x and m - k <= space.hi}
            for m, x in _coords_from_poly(poly, space.lbk(-k), space, p, n, -k, "gamma").items():
                M[m - space.lo, -k - space.lo] = x
    return M


def mat_mult_series(src: Space, tgt: Space, q: int, coeffs: Mapping[int, Fraction]) -> np.ndarray:
    """Multiplication by a (finite) series sum coeffs[j] X^j."""
    p = src.spec.p
    n = round(math.log(q, p))
    M = zeros((tgt.dim, src.dim), q)
    for k in src.degrees():
        for j, a in coeffs.items():
            m = k + j
            if m not in tgt or a == 0:
                continue
            x = a * Fraction(p) ** (src.lbk(k) - tgt.lbk(m))
            if x.denominator % p == 0:
                raise MembershipError(f"product leaves the lattice at degree {m}", [m])
            M[m - tgt.lo, k - src.lo] = x.numerator * pow(x.denominator, -1, q) % q
    return M


# ---------------------------------------------------------------------------
# filtration quotients

class FiltQuotient:
    """Image lattice of a band of S in K[X]/P^r, with coordinates mod p^n.

    ``proj`` maps lattice coordinates of the band to coordinates in the image
    lattice; ``lift`` holds, column by column, band elements mapping to its basis.
    """

    def __init__(self, space: Space, r: int, n: int, tail_check: bool = True):
        self.space = space
        self.r = r
        self.n = n
        spec = space.spec
        p = spec.p
        self.p = p
        q = p**n
        self.rank = r * spec.e if r > 0 else 0
        self.tail_ok = True
        if self.rank == 0:
            self.proj = zeros((0, space.dim), q)
            self.lift = zeros((space.dim, 0), q)
            return
        tab = power_table(spec, r)
        imgs = [self._image(tab, k) for k in space.degrees()]
        s = 0
        for col in imgs:
            for x in col:
                if x:
                    s = max(s, -vp(x, p))
        self.s = s
        big = s + 2 * n + 60
        Q = p**big
        A = np.empty((self.rank, space.dim), dtype=object)
        for j, col in enumerate(imgs):
            for i, x in enumerate(col):
                y = x * Fraction(p) ** s
                A[i, j] = y.numerator * pow(y.denominator, -1, Q) % Q if y else 0
        res = snf(A, p, big)
        exps = res.exponents[: self.rank]
        if len(exps) < self.rank or max(exps) >= big - n - 2:
            raise BandError("band too small to span the filtration quotient")
        self._exps = exps
        self._U = res.U[: self.rank, :]
        self._big = big
        self.proj = self.coords_of(A)
        self.lift = as_mod_array(res.V[:, : self.rank], q)
        if tail_check:
            self.tail_ok = self._check_tail(tab)

    def _image(self, tab, k: int) -> list[Fraction]:
        row = tab.get(k)
        f = Fraction(self.p) ** self.space.lbk(k) if k in self.space else Fraction(self.p) ** lb(self.space.spec, k)
        return [x * f for x in row]

    def coords_of(self, A_scaled: np.ndarray) -> np.ndarray:
        """Coordinates mod p^n of columns given as p^s * (vector) mod p^big."""
        Q = self.p**self._big
        C = np.mod(self._U.astype(object) @ A_scaled.astype(object), Q)
        out = zeros((self.rank, C.shape[1]), self.p**self.n)
        for i, a in enumerate(self._exps):
            d = self.p**a
            row = C[i, :]
            if any(int(x) % d for x in row):
                raise BandError("vector outside the filtration lattice")
            out[i, :] = [int(x) // d % self.p**self.n for x in row]
        return out

    def _check_tail(self, tab) -> bool:
        sp = self.space
        p = self.p
        Q = p**self._big
        degs = list(range(sp.hi + 1, 2 * sp.hi + 2))
        if sp.lo < 0:
            degs += list(range(2 * sp.lo - 1, sp.lo))
        if not degs:
            return True
        A = np.empty((self.rank, len(degs)), dtype=object)
        for j, k in enumerate(degs):
            col = [x * Fraction(p) ** lb(sp.spec, k) for x in tab.get(k)]
            for i, x in enumerate(col):
                y = x * Fraction(p) ** self.s
                if y and y.denominator % p == 0:
                    return False
                A[i, j] = y.numerator * pow(y.denominator, -1, Q) % Q if y else 0
        try:
            C = self.coords_of(A)
        except BandError:
            return False
        return not np.any(C != 0)


# ---------------------------------------------------------------------------
# complexes

def _blocks(rows: Sequence[Sequence[np.ndarray]], q: int) -> np.ndarray:
    heights = [next((b.shape[0] for b in row if b is not None), 0) for row in rows]
    widths = []
    for j in range(len(rows[0])):
        widths.append(next((rows[i][j].shape[1] for i in range(len(rows)) if rows[i][j] is not None), 0))
    M = zeros((sum(heights), sum(widths)), q)
    r0 = 0
    for i, row in enumerate(rows):
        c0 = 0
        for j, b in enumerate(row):
            if b is not None and b.size:
                M[r0:r0 + heights[i], c0:c0 + widths[j]] = b
            c0 += widths[j]
        r0 += heights[i]
    return M


@dataclass
class Flavour:
    """The ingredients of one Kummer-type complex for d = 0."""

    name: str
    src0: Space
    src1: Space
    tgt0: Space
    tgt1: Space
    d_src: np.ndarray
    d_tgt: np.ndarray
    f0: np.ndarray
    f1: np.ndarray
    dr: "DRData | None" = None


@dataclass
class DRData:
    fq0: FiltQuotient
    fq1: FiltQuotient | None
    complex: ChainComplex


def _fiber_two_term(p: int, n: int, fl: Flavour, name: str) -> ChainComplex:
    """Fibre of (Om0 -> Om1) -> (Om0' -> Om1') with maps f0, f1."""
    q = p**n
    a0, a1, b0, b1 = fl.src0.dim, fl.src1.dim, fl.tgt0.dim, fl.tgt1.dim
    d0 = _blocks([[fl.d_src], [fl.f0]], q)
    d1 = _blocks([[fl.f1, np.mod(-fl.d_tgt, q)]], q)
    return ChainComplex(p, n, {0: a0, 1: a1 + b0, 2: b1}, {0: d0, 1: d1}, name)


def dr_complex(src0: Space, src1: Space, d_src: np.ndarray, r: int, n: int, name: str = "DR") -> DRData:
    p = src0.spec.p
    q = p**n
    fq0 = FiltQuotient(src0, r, n)
    fq1 = FiltQuotient(src1, r - 1, n) if r >= 2 else None
    dims = {0: fq0.rank, 1: fq1.rank if fq1 else 0}
    diffs = {}
    if fq1 is not None and fq0.rank:
        diffs[0] = matmul_mod(fq1.proj, matmul_mod(d_src, fq0.lift, q), q)
    C = ChainComplex(p, n, dims, diffs, name)
    return DRData(fq0, fq1, C)


def _hk_to_dr(hk: ChainComplex, fl: Flavour, q: int) -> ChainMap:
    dr = fl.dr
    maps = {0: fl.dr.fq0.proj}
    if dr.fq1 is not None:
        maps[1] = _blocks([[dr.fq1.proj, zeros((dr.fq1.rank, fl.tgt0.dim), q)]], q)
    return ChainMap(hk, dr.complex, maps, f"{hk.name}->DR")


class Bundle:
    """Lazily assembled complexes and chain maps for one configuration."""

    def __init__(self, cfg: PipelineConfig, plan: TruncationPlan | None = None):
        self.cfg = cfg
        self.plan = plan or truncation_plan(cfg)
        self.p = cfg.p
        self.n = cfg.n
        self.q = cfg.p**cfg.n
        self._flavours: dict = {}
        self._complexes: dict = {}
        self.tail_flags: dict = {}

    # spaces --------------------------------------------------------------
    def band(self, deco: str) -> tuple[int, int]:
        lo = -self.plan.M_neg if deco in ("UV", "Laurent") else 0
        return lo, self.plan.M

    def space(self, spec: RingSpec, lo: int, hi: int) -> Space:
        return Space(spec, lo, hi)

    # flavours --------------------------------------------------------------
    def bands(self, kind: str, deco: str) -> tuple:
        """(lo, hi) of source 0-forms, source 1-forms, target 0-forms, target 1-forms.

        Above, the model is a quotient by the tail; below, the target is widened
        so that the kept degrees form a subcomplex.
        """
        p, n = self.p, self.n
        lo, hi = self.band(deco)
        if kind == "kum":
            return (lo, hi), (lo, hi), (p * lo, hi), (p * lo, hi)
        if kind == "kum_psi":
            return (lo, hi), (lo, hi), (lo, hi // p), (lo, hi // p)
        if kind == "cycl":
            if lo < 0:
                a0 = p * (lo - 1) - (p - 1) * (n - 1) - 1
                return (lo, hi), (lo - 1, hi - 1), (a0, hi), (a0 - 1, hi - 1)
            return (lo, hi), (lo, hi - 1), (lo, hi), (lo, hi - 1)
        raise ValueError(kind)

    def flavour(self, kind: str, deco: str) -> Flavour:
        key = (kind, deco)
        if key in self._flavours:
            return self._flavours[key]
        cfg, q, p, r = self.cfg, self.q, self.p, self.cfg.r
        S = cfg.ring(deco)
        b_s0, b_s1, b_t0, b_t1 = self.bands(kind, deco)
        src0, src1 = Space(S, *b_s0), Space(S, *b_s1)
        if kind == "kum":
            Sp = S.with_deco("UV", v=S.v / p) if deco == "UV" else S
            tgt0, tgt1 = Space(Sp, *b_t0), Space(Sp, *b_t1)
            f0 = np.mod(p**r * mat_incl(src0, tgt0, q) - mat_frob_kum(src0, tgt0, q), q)
            f1 = np.mod(p**r * mat_incl(src1, tgt1, q) - p * mat_frob_kum(src1, tgt1, q), q)
            d_src = mat_partial_kum(src0, src1, q)
            d_tgt = mat_partial_kum(tgt0, tgt1, q)
        elif kind == "kum_psi":
            if deco not in ("U", "UV"):
                raise ConfigError("the psi complex is defined for U and UV")
            Spp = S.with_deco(deco, u=S.u * p)
            tgt0, tgt1 = Space(Spp, *b_t0), Space(Spp, *b_t1)
            f0 = np.mod(p**r * mat_psi_kum(src0, tgt0, q) - mat_incl(src0, tgt0, q), q)
            f1 = np.mod(p**r * mat_psi_kum(src1, tgt1, q) - p * mat_incl(src1, tgt1, q), q)
            d_src = mat_partial_kum(src0, src1, q)
            # psi d = p d psi, so the target carries p times the derivation
            d_tgt = np.mod(p * mat_partial_kum(tgt0, tgt1, q), q)
        elif kind == "cycl":
            if S.profile != "B" or deco != "UV":
                raise ConfigError("the cyclotomic complex needs profile B and the UV decoration")
            Sp = S.with_deco("UV", v=S.v / p)
            tgt0, tgt1 = Space(Sp, *b_t0), Space(Sp, *b_t1)
            f0 = np.mod(p**r * mat_incl(src0, tgt0, q) - mat_frob_cycl(src0, tgt0, q, strict=True), q)
            f1 = np.mod(p**r * mat_incl(src1, tgt1, q) - p * mat_frob_cycl(src1, tgt1, q, strict=True), q)
            d_src = mat_partial_cycl(src0, src1, q)
            d_tgt = mat_partial_cycl(tgt0, tgt1, q)
        else:
            raise ValueError(kind)
        fl = Flavour(f"{kind}_{deco}", src0, src1, tgt0, tgt1, d_src, d_tgt, f0, f1)
        fl.dr = dr_complex(src0, src1, d_src, r, self.n, f"DR_{deco}")
        self.tail_flags[fl.name] = fl.dr.fq0.tail_ok and (fl.dr.fq1.tail_ok if fl.dr.fq1 else True)
        self._flavours[key] = fl
        return fl

    def hk(self, kind: str, deco: str) -> ChainComplex:
        key = ("hk", kind, deco)
        if key not in self._complexes:
            fl = self.flavour(kind, deco)
            self._complexes[key] = _fiber_two_term(self.p, self.n, fl, f"HK_{fl.name}")
        return self._complexes[key]

    def kum(self, kind: str, deco: str) -> ChainComplex:
        key = ("kum", kind, deco)
        if key not in self._complexes:
            fl = self.flavour(kind, deco)
            H = self.hk(kind, deco)
            f = _hk_to_dr(H, fl, self.q)
            C = cone_and_total(f, "fiber", name=fl.name)
            self._complexes[key] = C
        return self._complexes[key]

    def dr(self, kind: str, deco: str) -> ChainComplex:
        return self.flavour(kind, deco).dr.complex

    # named complexes ---------------------------------------------------------
    def build(self, name: str, deco: str | None = None) -> ChainComplex:
        if name == "syn":
            return self.kum("kum", "PD")
        if name == "kum":
            return self.kum("kum", deco or "UV")
        if name == "kum_psi":
            return self.kum("kum_psi", deco or "U")
        if name == "cycl":
            return self.kum("cycl", deco or "UV")
        if name == "hk":
            return self.hk("kum", deco or "PD")
        if name == "dr":
            return self.dr("kum", deco or "PD")
        raise ConfigError(f"unknown complex {name!r}; choose from {COMPLEX_NAMES}")

    # chain maps ----------------------------------------------------------------
    def _kum_map(self, src: tuple, tgt: tuple, A0, A1, B0, B1, name: str) -> ChainMap:
        """Map of Kummer-type complexes: A on the source forms, B on the target forms, induced on DR."""
        q = self.q
        fs, ft = self.flavour(*src), self.flavour(*tgt)
        C, D = self.kum(*src), self.kum(*tgt)
        drs, drt = fs.dr, ft.dr
        dr0 = matmul_mod(drt.fq0.proj, matmul_mod(A0, drs.fq0.lift, q), q)
        dr1 = None
        if drs.fq1 is not None:
            dr1 = matmul_mod(drt.fq1.proj, matmul_mod(A1, drs.fq1.lift, q), q)
        dr1 = dr1 if dr1 is not None else zeros((0, 0), q)
        maps = {0: A0, 1: _diag([A1, B0, dr0], q), 2: _diag([B1, dr1], q)}
        return ChainMap(C, D, maps, name)

    def chain_map(self, edge: str):
        q, p = self.q, self.p
        if edge == "pd_to_u":
            a, b = self.flavour("kum", "PD"), self.flavour("kum", "U")
            return self._kum_map(("kum", "PD"), ("kum", "U"), mat_incl(a.src0, b.src0, q), mat_incl(a.src1, b.src1, q),
                                 mat_incl(a.tgt0, b.tgt0, q), mat_incl(a.tgt1, b.tgt1, q), edge)
        if edge == "phi_to_psi":
            a, b = self.flavour("kum", "U"), self.flavour("kum_psi", "U")
            return self._kum_map(("kum", "U"), ("kum_psi", "U"), identity(a.src0.dim, q), identity(a.src1.dim, q),
                                 mat_psi_kum(a.tgt0, b.tgt0, q), mat_psi_kum(a.tgt1, b.tgt1, q), edge)
        if edge == "u_to_uv":
            a, b = self.flavour("kum_psi", "U"), self.flavour("kum_psi", "UV")
            return self._kum_map(("kum_psi", "U"), ("kum_psi", "UV"), mat_incl(a.src0, b.src0, q),
                                 mat_incl(a.src1, b.src1, q), mat_incl(a.tgt0, b.tgt0, q),
                                 mat_incl(a.tgt1, b.tgt1, q), edge)
        if edge == "psi_uv_back_to_phi":
            a, b = self.flavour("kum", "UV"), self.flavour("kum_psi", "UV")
            return self._kum_map(("kum", "UV"), ("kum_psi", "UV"), identity(a.src0.dim, q), identity(a.src1.dim, q),
                                 mat_psi_kum(a.tgt0, b.tgt0, q), mat_psi_kum(a.tgt1, b.tgt1, q), edge)
        if edge == "kum_vs_cycl_table":
            return (cohomology(self.kum("kum", "UV")), cohomology(self.kum("cycl", "UV")))
        if edge == "filt_drop_by_t":
            return filt_drop_by_t(self.cfg)
        if edge == "lie_to_group":
            return lie_to_group(self.cfg)
        if edge == "group_to_cont":
            raise ConfigError("continuous cochains of profinite groups are not modelled")
        raise ConfigError(f"unknown edge {edge!r}; choose from {EDGE_NAMES}")


def _diag(blocks: Sequence[np.ndarray], q: int) -> np.ndarray:
    h = [b.shape[0] for b in blocks]
    w = [b.shape[1] for b in blocks]
    M = zeros((sum(h), sum(w)), q)
    r0 = c0 = 0
    for b in blocks:
        if b.size:
            M[r0:r0 + b.shape[0], c0:c0 + b.shape[1]] = b
        r0 += b.shape[0]
        c0 += b.shape[1]
    return M


# ---------------------------------------------------------------------------
# window complexes and band stability

def restrict(C: ChainComplex, keep: Mapping[int, Sequence[int]], name: str = "") -> ChainComplex:
    """Submatrix complex on the kept indices (a subcomplex or a quotient, as the caller certifies)."""
    dims = {k: len(keep[k]) for k in C.degrees}
    diffs = {}
    for k in C.degrees:
        if k + 1 in C.dims:
            diffs[k] = C.d(k)[np.ix_(list(keep[k + 1]), list(keep[k]))] if keep[k] and keep[k + 1] else None
    return ChainComplex(C.p, C.N, dims, {k: v for k, v in diffs.items() if v is not None}, name)


def _window_indices(big: "Bundle", small: "Bundle", kind: str, deco: str, side: str) -> dict:
    fl = big.flavour(kind, deco)
    spaces = (fl.src0, fl.src1, fl.tgt0, fl.tgt1)
    out = []
    for sp, (lo, hi) in zip(spaces, small.bands(kind, deco)):
        if side == "top":
            out.append([i for i, k in enumerate(sp.degrees()) if k > hi])
        else:
            out.append([i for i, k in enumerate(sp.degrees()) if k < lo])
    w0, w1, v0, v1 = out
    return {0: w0, 1: w1 + [fl.src1.dim + i for i in v0], 2: v1}


def kum_windows(big: "Bundle", small: "Bundle", kind: str, deco: str) -> list[ChainComplex]:
    """Pieces separating the doubled model from the original one.

    The top piece is a subcomplex of the doubled model; the bottom piece is the
    quotient of the doubled model by everything else.  Both closure properties
    are checked.
    """
    C = big.kum(kind, deco)
    top = _window_indices(big, small, kind, deco, "top")
    bottom = _window_indices(big, small, kind, deco, "bottom")
    for k in (0, 1):
        rows = sorted(set(range(C.dims[k + 1])) - set(top[k + 1]))
        if rows and top[k] and np.any(C.d(k)[np.ix_(rows, top[k])] != 0):
            raise BandError(f"top window of {kind}_{deco} is not a subcomplex in degree {k}")
        cols = sorted(set(range(C.dims[k])) - set(bottom[k]))
        if cols and bottom[k + 1] and np.any(C.d(k)[np.ix_(bottom[k + 1], cols)] != 0):
            raise BandError(f"bottom window of {kind}_{deco} is not a quotient in degree {k}")
    out = [restrict(C, top, f"top window[{kind}_{deco}]")]
    if any(bottom.values()):
        out.append(restrict(C, bottom, f"bottom window[{kind}_{deco}]"))
    return out


@dataclass
class StabilityResult:
    M: int
    M2: int
    tau: int
    matched: bool
    report_M: CohomologyReport
    report_2M: CohomologyReport

    def to_dict(self) -> dict:
        return {"M": self.M, "2M": self.M2, "window_exponent": self.tau, "2M matched": self.matched}


def compare_above(a: CohomologyReport, b: CohomologyReport, tau: int, degrees=None) -> bool:
    degs = degrees if degrees is not None else sorted(set(a.divisors) | set(b.divisors))
    for k in degs:
        x = sorted(e for e in a.divisors.get(k, []) if e > tau)
        y = sorted(e for e in b.divisors.get(k, []) if e > tau)
        if x != y:
            return False
    return True


def stability(cfg: PipelineConfig, kind: str, deco: str, degrees=None) -> StabilityResult:
    plan = truncation_plan(cfg)
    b1 = Bundle(cfg, plan)
    plan2 = replace(plan, M=2 * plan.M, M_neg=2 * plan.M_neg)
    b2 = Bundle(cfg, plan2)
    h1 = cohomology(b1.kum(kind, deco))
    h2 = cohomology(b2.kum(kind, deco))
    tau = 0
    for W in kum_windows(b2, b1, kind, deco):
        hw = cohomology(W)
        tau = max([tau] + [max(v, default=0) for v in hw.divisors.values()])
    return StabilityResult(plan.M, plan2.M, tau, compare_above(h1, h2, tau, degrees), h1, h2)


# ---------------------------------------------------------------------------
# Herr complex

@dataclass
class HerrModel:
    complex: ChainComplex
    M: int
    K: int
    A0: Space
    B: Space


def build_herr(cfg: PipelineConfig, M: int | None = None, K: int | None = None) -> HerrModel:
    """[A0 -> A0 + B -> B] with d0 = (tau_0, 1 - phi), d1 = -(1 - phi) + tau_0 on the twist r."""
    if cfg.profile != "B":
        raise ConfigError("the Herr complex needs profile B")
    if cfg.d != 0:
        raise ConfigError("the Herr complex is built for d = 0")
    plan = truncation_plan(cfg)
    p, n, q = cfg.p, cfg.n, cfg.p**cfg.n
    M = M if M is not None else max(2 * cfg.n + cfg.margin, 8)
    K = K if K is not None else plan.K_herr
    A = cfg.ring("Laurent")
    A0 = Space(A, -M, K - 1)
    low = p * M + (p - 1) * (n - 1)
    B = Space(A, -low, K - 1)
    extra_prec = vp_factorial(low + K + 2, p) + n + 8
    c, _ = gamma_params(cfg.ring("UV"), extra_prec)
    tau_A = np.mod(mat_gamma(A0, q, c, cfg.r) - identity(A0.dim, q), q)
    tau_B = np.mod(mat_gamma(B, q, c, cfg.r) - identity(B.dim, q), q)
    # phi on A0 must land inside B modulo p^n
    phi = mat_frob_cycl(A0, B, q, strict=True)
    one_minus_phi = np.mod(mat_incl(A0, B, q) - phi, q)
    d0 = _blocks([[tau_A], [one_minus_phi]], q)
    d1 = _blocks([[np.mod(-one_minus_phi, q), tau_B]], q)
    C = ChainComplex(p, n, {0: A0.dim, 1: A0.dim + B.dim, 2: B.dim}, {0: d0, 1: d1}, f"Herr(r={cfg.r})")
    return HerrModel(C, M, K, A0, B)


def herr_inclusion(small: HerrModel, big: HerrModel) -> ChainMap:
    """The smaller Herr model sits inside the larger one degree by degree."""
    q = small.complex.modulus

    def emb(sa: Space, ba: Space) -> np.ndarray:
        E = zeros((ba.dim, sa.dim), q)
        for k in sa.degrees():
            E[k - ba.lo, k - sa.lo] = 1
        return E

    eA, eB = emb(small.A0, big.A0), emb(small.B, big.B)
    return ChainMap(small.complex, big.complex, {0: eA, 1: _diag([eA, eB], q), 2: eB}, "herr inclusion")


@dataclass
class HerrResult:
    """Image of H(C_M) in H(C_2M), and the same one doubling later."""

    M: int
    image: CohomologyReport
    image_doubled: CohomologyReport

    @property
    def stable(self) -> bool:
        return self.image.divisors == self.image_doubled.divisors

    def to_dict(self) -> dict:
        return {"M": self.M, "2M": 2 * self.M, "cohomology": self.image.to_json()["cohomology"],
                "2M matched": self.stable}


def herr_cohomology(cfg: PipelineConfig, M: int | None = None) -> HerrResult:
    """Cohomology of the Herr complex over (Z/p^n)((T)) as a colimit of band models.

    The model with negative degrees >= -M is a subcomplex of the full complex,
    and its bottom degrees carry classes that die in larger models; the image
    of H(C_M) in H(C_2M) discards them.
    """
    # smallest measured stable radius: 32 at n = 4, 48 at n = 6
    M = M if M is not None else 8 * cfg.n
    m1, m2, m4 = build_herr(cfg, M), build_herr(cfg, 2 * M), build_herr(cfg, 4 * M)
    im1 = image_report(herr_inclusion(m1, m2))
    im2 = image_report(herr_inclusion(m2, m4))
    return HerrResult(M, im1, im2)


# ---------------------------------------------------------------------------
# de Rham / Hyodo-Kato report

def truncation_certificate(H: CohomologyReport, m: int) -> dict:
    """Certificate of tau_{<= m} C -> C: iso up to degree m, and H^q itself above."""
    out = {}
    for k, divs in H.divisors.items():
        if k <= m:
            out[k] = (0, 0)
        else:
            out[k] = (0, max(divs, default=0))
    return out


def dr_hk_report(cfg: PipelineConfig, bundle: Bundle | None = None) -> dict:
    b = bundle or Bundle(cfg)
    r = cfg.r
    syn = b.build("syn")
    Hs = cohomology(syn)
    hk = b.build("hk")
    Hh = cohomology(hk)
    a = truncation_certificate(Hs, r + 1)
    hk_small = {k: max(Hh.divisors.get(k, []), default=0) for k in hk.degrees if k <= r - 1}
    # DR[-1] -> Syn sits in Syn as the last block of each degree
    fl = b.flavour("kum", "PD")
    dr = fl.dr.complex
    q = b.q
    dims = {k + 1: v for k, v in dr.dims.items()}
    dims[0] = 0
    dims = dict(sorted(dims.items()))
    diffs = {k + 1: np.mod(-dr.d(k), q) for k in dr.degrees}
    shifted = ChainComplex(b.p, b.n, dims, diffs, "DR[-1]")
    maps = {}
    for k in shifted.degrees:
        w = shifted.dims[k]
        h = syn.dims.get(k, 0)
        M = zeros((h, w), q)
        if w:
            M[h - w:, :] = identity(w, q)
        maps[k] = M
    cert = quasi_iso_certificate(ChainMap(shifted, syn, maps, "DR[-1]->Syn"), degrees=[k for k in range(1, r + 1)])
    return {
        "r": r,
        "a_truncation_certificate": {str(k): list(v) for k, v in sorted(a.items())},
        "b_hk_annihilators": {str(k): v for k, v in sorted(hk_small.items())},
        "c_dr_to_syn_certificate": cert.to_json(),
    }


# ---------------------------------------------------------------------------
# further edges

def filt_drop_by_t(cfg: PipelineConfig, shrink: int | None = None) -> Certificate:
    """Multiplication by t^{r}: S -> F^r S on the UV lattice, as a map of one-term complexes.

    The source band stops ``shrink`` degrees below the target band so that
    products are not lost to the top truncation; only the kernel exponent is
    meaningful near the band edges.
    """
    from .operators import TwistParams, compute_t

    if cfg.profile != "B":
        raise ConfigError("t is defined in profile B")
    plan = truncation_plan(cfg)
    p, n, q = cfg.p, cfg.n, cfg.p**cfg.n
    S = cfg.ring("UV")
    lo, hi = -plan.M_neg, plan.M
    shrink = shrink if shrink is not None else cfg.p ** cfg.i_cyclo * n
    tgt = Space(S, lo, hi)
    src = Space(S, lo, hi - shrink)
    fq = FiltQuotient(tgt, cfg.r, n)
    # F^r S mod p^n is the kernel of the (surjective) projection, a free module
    res = snf(fq.proj, p, n)
    inv = as_mod_array(res.Vinv[fq.rank:, :], q)
    _, tr = compute_t(TwistParams.make(p, cfg.r), S, (0, hi), PrecisionBudget(n + 24, 4))
    T = mat_mult_series(src, tgt, q, tr.coeffs())
    if np.any(matmul_mod(as_mod_array(res.Vinv[: fq.rank, :], q), T, q) != 0):
        raise MembershipError("t^{r} S is not inside F^r S", [])
    img = matmul_mod(inv, T, q)
    one_src = ChainComplex(p, n, {0: src.dim}, {}, "S(r)")
    one_tgt = ChainComplex(p, n, {0: tgt.dim - fq.rank}, {}, "F^r S")
    return quasi_iso_certificate(ChainMap(one_src, one_tgt, {0: img}, "filt_drop_by_t"))


def lie_to_group(cfg: PipelineConfig, b: int = 1, hi: int | None = None) -> Certificate:
    """(id, beta): [M -nabla-> M] -> [M -tau-> M] on X_1^b times the U lattice, beta = tau/nabla.

    On this module tau_1 is multiplication by exp(b t) - 1 and nabla_1 by b t, so
    beta = x/log(1+x) evaluated at tau_1 makes the square commute.
    """
    from .operators import log1p_poly
    from .padic import log_series_rational

    if cfg.profile != "B":
        raise ConfigError("the Lie comparison needs profile B")
    p, n, q = cfg.p, cfg.n, cfg.p**cfg.n
    i = cfg.i_cyclo
    hi = hi if hi is not None else 3 * cfg.ram
    sp = Space(cfg.ring("U"), 0, hi)
    extra = 2 * n + hi // (p - 1) + 4
    Q = p ** (n + extra)
    N = p**i * b
    tau = mat_mult_series(sp, sp, Q, {j: Fraction(math.comb(N, j)) for j in range(1, min(N, hi) + 1)})
    t = {k: p**i * x for k, x in enumerate(log1p_poly(hi + 1)) if k >= 1}
    nabla = np.mod(b * mat_mult_series(sp, sp, q, t), q)
    beta = zeros((sp.dim, sp.dim), Q)
    power = identity(sp.dim, Q)
    for k in range(0, 64 * n + 64):
        coef = log_series_rational(k, "x_over_log")
        if coef:
            v = vp(coef, p)
            unit = coef / Fraction(p) ** v
            u = unit.numerator * pow(unit.denominator, -1, Q) % Q
            if v >= 0:
                term = np.mod(power * (u * p**v % Q), Q)
            else:
                d = p ** (-v)
                if np.any(np.mod(power, d) != 0):
                    raise MembershipError(f"tau^{k} does not absorb the denominator of its coefficient", [k])
                term = np.mod((power // d) * u, Q)
            beta = np.mod(beta + term, Q)
        power = matmul_mod(power, tau, Q)
        if _min_val(power, p, n + extra) - Fraction(k + 1, p - 1) >= n + 1:
            break
    src = ChainComplex(p, n, {0: sp.dim, 1: sp.dim}, {0: nabla}, "Lie Koszul")
    tgt = ChainComplex(p, n, {0: sp.dim, 1: sp.dim}, {0: np.mod(tau, q)}, "group Koszul")
    f = ChainMap(src, tgt, {0: identity(sp.dim, q), 1: np.mod(beta, q)}, "lie_to_group")
    return quasi_iso_certificate(f)


def _min_val(A: np.ndarray, p: int, cap: int) -> int:
    v = cap
    for x in A.flat:
        x = int(x)
        if x:
            v = min(v, vp(x, p))
    return v


# ---------------------------------------------------------------------------
# torus eigencomponents

def torus_eigen_complex(cfg: PipelineConfig, alpha: tuple[int, int], Mg: int = 6,
                        deco: str = "PD", hi: int | None = None) -> ChainComplex:
    """de Rham (Koszul) complex of the alpha-part of S<X_1^{+-1}> for one torus variable.

    The alpha-part is spanned by p^lb(k) X_0^k X_1^b with (k, b) = alpha mod p.  The
    derivations are applied through ``operators.partial`` on torus series and read
    back in lattice coordinates; psi is checked to vanish on every basis vector.
    """
    from .operators import partial, psi_kum
    from .rings import DecoSeries, TorusSeries

    p, n, q = cfg.p, cfg.n, cfg.p**cfg.n
    a0, a1 = alpha[0] % p, alpha[1] % p
    if (a0, a1) == (0, 0):
        raise ConfigError("alpha must be a non-zero eigencharacter")
    spec = cfg.ring(deco)
    lo = -truncation_plan(cfg).M_neg if spec.allows_negative else 0
    hi = hi if hi is not None else min(truncation_plan(cfg).M, 6 * p * spec.e + cfg.margin)
    budget = PrecisionBudget(max(cfg.n_work, n), cfg.slack)
    ks = [k for k in range(lo, hi + 1) if k % p == a0]
    bs = [b for b in range(-Mg, Mg + 1) if b % p == a1]
    basis = [(b, k) for b in bs for k in ks]
    pos = {x: i for i, x in enumerate(basis)}
    dim = len(basis)
    ops = {0: zeros((dim, dim), q), 1: zeros((dim, dim), q)}
    for col, (b, k) in enumerate(basis):
        coords = [0] * (hi - lo + 1)
        coords[k - lo] = 1
        f = TorusSeries(1, Mg, {(b,): DecoSeries.from_lattice(spec, (lo, hi), coords, budget)}, spec, (lo, hi), budget)
        if psi_kum(f).coeffs:
            raise AssertionError(f"psi does not vanish on the eigencomponent {alpha}")
        for j in (0, 1):
            g = partial(f, j)
            for (bb,), c in g.coeffs.items():
                for kk, x in zip(range(lo, hi + 1), c.lattice_coords(n)):
                    if x:
                        ops[j][pos[(bb, kk)], col] = x
    return koszul_build("derivation", p, n, {(): dim}, ops, 2, name=f"dR[alpha={alpha}]")
