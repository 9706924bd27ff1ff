"""Named check suites run by ``syntomo run`` and by the acceptance tests.

Each suite returns a :class:`SuiteReport` of pass/fail checks with the
measured quantities attached.  Randomized checks draw from a generator keyed
on ``(seed, item)`` so the outcome does not depend on the thread count.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import _poly
from . import operators as op
from .errors import ConfigError, MembershipError, SyntomoError
from .homcx import (
    ChainComplex,
    ChainMap,
    CohomologyReport,
    cohomology,
    identity,
    kernel_basis,
    matmul_mod,
    quasi_iso_certificate,
)
from .padic import PrecisionBudget, log_series_rational, vp
from .pipeline import (
    Bundle,
    PipelineConfig,
    compare_above,
    filt_drop_by_t,
    herr_cohomology,
    lie_to_group,
    stability,
    torus_eigen_complex,
)
from .rings import (
    DECORATIONS,
    DecoSeries,
    RingSpec,
    TorusSeries,
    check_membership,
    lb,
    random_element,
    reduce_mod_Fr,
)

log = logging.getLogger("syntomo.suites")

SUITE_NAMES = ("operators", "rings", "homology", "chain", "herr", "all")


@dataclass
class Check:
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "measured": self.measured}


@dataclass
class SuiteReport:
    suite: str
    checks: list = field(default_factory=list)
    complexes: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    stability: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def extend(self, other: "SuiteReport") -> None:
        self.checks += other.checks
        self.complexes += other.complexes
        self.edges += other.edges
        self.stability += other.stability
        self.skipped += other.skipped

    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng([seed, *key])


def _pmap(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _tally(name: str, outcomes: Sequence[bool], **extra) -> Check:
    good = sum(1 for x in outcomes if x)
    return Check(name, good == len(outcomes), {"passed": good, "total": len(outcomes), **extra})


def _safe(fn: Callable[[], bool]) -> bool:
    try:
        return bool(fn())
    except (SyntomoError, ValueError, ArithmeticError) as exc:
        log.debug("check raised %r", exc)
        return False


def cohomology_entry(name: str, H: CohomologyReport, C: ChainComplex | None = None) -> dict:
    return {"name": name, "degrees": sorted(H.divisors),
            "divisors": [{"degree": k, "divisor_exponents": sorted(v)} for k, v in sorted(H.divisors.items())],
            "dims": [C.dims[k] for k in C.degrees] if C is not None else None}


# ---------------------------------------------------------------------------
# operators

def _ring_for(cfg: PipelineConfig, deco: str) -> RingSpec:
    if cfg.profile == "B":
        return RingSpec.cyclotomic(cfg.p, cfg.i_cyclo, deco)
    return RingSpec.kummer(cfg.p, deco, cfg.e, cfg.eisenstein)


def _sample_band(spec: RingSpec, radius: int) -> tuple[tuple[int, int], tuple[int, int]]:
    band = (-radius if spec.allows_negative else 0, radius)
    return band, (band[0] // 4, band[1] // 4)


def operator_identities(cfg: PipelineConfig, samples: int = 100, seed: int = 0, threads: int = 1,
                        radius: int = 40) -> list[Check]:
    """psi phi = id, the projection formula, the two derivation rules and decomposition round trips."""
    p = cfg.p

    def run(item):
        idx, deco = item
        S = _ring_for(cfg, deco)
        band, support = _sample_band(S, radius)
        rng = _rng(seed, 1, idx)
        res = {k: [] for k in ("psi_phi", "projection", "partial_phi", "psi_partial", "decompose_kum")}
        if cfg.profile == "B":
            res["decompose_cycl"] = []
        for _ in range(samples):
            x = random_element(S, band, rng, support=support)
            y = random_element(S, band, rng, support=support)
            fx = op.frob_kum(x)

            def psi_phi():
                back = op.psi_kum(fx)
                return back.equals(x.recast(back.spec, check=False))

            def projection():
                lhs = op.psi_kum(fx.mul(y.recast(fx.spec)))
                rhs = x.recast(lhs.spec, check=False).mul(op.psi_kum(y.recast(fx.spec)).recast(lhs.spec, check=False))
                return lhs.equals(rhs)

            def partial_phi():
                lhs = op.partial(fx)
                return lhs.equals(op.frob_kum(op.partial(x)).scalar_mul(p).recast(lhs.spec, check=False))

            def psi_partial():
                lhs = op.psi_kum(op.partial(x))
                return lhs.equals(op.partial(op.psi_kum(x)).scalar_mul(p).recast(lhs.spec, check=False))

            def decompose(basis):
                comps = op.basis_decompose(x, basis)
                total = DecoSeries.zero(S, band, x.budget)
                for c in comps.values():
                    total = total + c
                if basis == "kum":
                    for (a,), c in comps.items():
                        if any((k - a) % p for k in c.support()):
                            return False
                return total.equals(x) and set(comps) == {(a,) for a in range(p)}

            res["psi_phi"].append(_safe(psi_phi))
            res["projection"].append(_safe(projection))
            res["partial_phi"].append(_safe(partial_phi))
            res["psi_partial"].append(_safe(psi_partial))
            res["decompose_kum"].append(_safe(lambda: decompose("kum")))
            if cfg.profile == "B":
                res["decompose_cycl"].append(_safe(lambda: decompose("cycl")))
        return deco, res

    out = []
    for deco, res in _pmap(run, list(enumerate(DECORATIONS)), threads):
        for key, vals in res.items():
            out.append(_tally(f"operators[{cfg.profile}:{deco}]:{key}", vals))
    return out


def lazard_checks(cfg: PipelineConfig, samples: int = 50, seed: int = 0, threads: int = 1,
                  coeff_bound_k: int = 50) -> list[Check]:
    """beta round trips, nabla = (nabla/tau) tau against t d, and the coefficient bound of log(1+x)/x."""
    if cfg.profile != "B":
        raise ConfigError("the Lazard checks need profile B")
    p = cfg.p

    def run(item):
        idx, deco = item
        S = RingSpec.cyclotomic(p, cfg.i_cyclo, deco)
        band = (0, 60) if deco == "U" else (-40, 60)
        rng = _rng(seed, 2, idx)
        trip, nab = [], []
        for _ in range(samples):
            coeffs = {(b,): random_element(S, band, rng, support=(band[0] // 4, 10)) for b in (-1, 0, 1, 2)}
            f = TorusSeries(1, 3, coeffs, S, band, coeffs[(0,)].budget)
            trip.append(_safe(lambda: op.lazard_beta(op.lazard_beta(f, 1, "nabla_over_tau"), 1,
                                                     "tau_over_nabla").equals(f)))
            nab.append(_safe(lambda: op.lazard_beta(op.tau(f, 1), 1, "nabla_over_tau").equals(op.nabla(f, 1))))
        return deco, trip, nab

    out = []
    for deco, trip, nab in _pmap(run, list(enumerate(("U", "UV"))), threads):
        out.append(_tally(f"lazard[{deco}]:beta_round_trip", trip))
        out.append(_tally(f"lazard[{deco}]:nabla_equals_t_partial", nab))
    slack = [vp(log_series_rational(k), p) + Fraction(k, p - 1) for k in range(1, coeff_bound_k + 1)]
    out.append(Check("lazard:coefficient_bound", min(slack) >= 0,
                     {"k_max": coeff_bound_k, "min_slack": str(min(slack))}))
    return out


# ---------------------------------------------------------------------------
# rings

def inverse_pi1_expansion(p: int, i: int, length: int, mod: int) -> dict[int, int]:
    """1/((1+T)^(p^(i-1)) - 1) expanded in powers of 1/T, coefficients mod ``mod``."""
    m = p ** (i - 1)
    # pi_1 = T^m (1 + sum_j binom(m, m-j) T^-j)
    w = [1] + [_binom(m, m - j) for j in range(1, m)]
    inv = _poly.power_series_inverse(w, length, mod)
    return {-m - k: c for k, c in enumerate(inv) if c}


def _binom(a: int, b: int) -> int:
    from math import comb
    return comb(a, b)


def divisibility_checks(p: int = 3, i: int = 3, budget: PrecisionBudget | None = None) -> list[Check]:
    """p / T^((p-1)p^(i-2)), p^2 / pi_1 and pi / (pi_1 T^((p-1)p^(i-2))) in the (0, p-1]+ ring."""
    budget = budget or PrecisionBudget(12, 4)
    S = RingSpec.cyclotomic(p, i, "ZeroVPlus", v=p - 1)
    k0 = (p - 1) * p ** (i - 2)
    out = []

    def member(coeffs: dict, band) -> list[int]:
        try:
            f = DecoSeries.from_coeffs(S, band, coeffs, budget, check=False)
        except MembershipError as exc:
            return exc.degrees
        return check_membership(f)

    bad = member({-k0: p}, (-k0, 0))
    out.append(Check("divisibility:p_over_T_power", not bad, {"violations": bad}))

    m = p ** (i - 1)
    length = S.e * budget.n_work // 2
    depth = -lb(S, -m - length) + budget.n_work + 4
    mod = p ** (depth + 2)
    inv = inverse_pi1_expansion(p, i, length, mod)
    coeffs = {k: p * p * c % mod for k, c in inv.items()}
    bad = member(coeffs, (-m - length + 1, 0))
    out.append(Check("divisibility:p2_over_pi1", not bad, {"violations": bad, "terms": length}))

    # pi / pi_1 = sum_j (1+T)^(j p^(i-1)), then divide by T^k0
    poly = [0] * (p**i)
    for j in range(p):
        for a in range(j * m + 1):
            poly[a] += _binom(j * m, a)
    shifted = {a - k0: c for a, c in enumerate(poly) if c}
    bad = member(shifted, (-k0, len(poly) - 1 - k0))
    out.append(Check("divisibility:pi_over_pi1_by_T_power", not bad, {"violations": bad}))
    return out


def cyclotomic_checks(cfg: PipelineConfig, radius: int = 400, n_work: int = 12) -> list[Check]:
    """Membership of t/p, t in F^1, phi(t) = p t, gamma_0(t) = c t, and the t^{r} cocycle."""
    if cfg.profile != "B":
        raise ConfigError("the cyclotomic checks need profile B")
    budget = PrecisionBudget(max(n_work, cfg.n_work), cfg.slack)
    S = RingSpec.cyclotomic(cfg.p, cfg.i_cyclo, "UV")
    band = (-radius, radius)
    p = cfg.p
    out = []
    t, tr = op.compute_t(op.TwistParams.make(p, cfg.r), S, band, budget, check_membership_of_t_over_p=False)
    for label, target in (("t_over_p_in_UV", S), ("t_over_p_in_UV_v_over_p", S.with_deco("UV", v=S.v / p))):
        f = DecoSeries.from_coeffs(target, band, {k: c / p for k, c in t.coeffs().items()}, budget, check=False)
        bad = check_membership(f)
        out.append(Check(f"cyclotomic:{label}", not bad, {"violations": bad, "band": list(band)}))
    prec = budget.n_work - budget.slack
    out.append(Check("cyclotomic:t_in_F1", reduce_mod_Fr(t, 1).is_zero(prec), {"precision": prec}))
    ft = op.frob_cycl(t)
    out.append(Check("cyclotomic:phi_t_equals_p_t", ft.equals(t.scalar_mul(p).recast(ft.spec, check=False))))
    c, a = op.gamma_params(S, 60)
    gt = op.gamma_act(t, 0, a)
    out.append(Check("cyclotomic:gamma_t_equals_c_t", gt.equals(t.scalar_mul(c)),
                     {"c_mod_p_n_work": c % p**budget.n_work}))
    if cfg.r >= 1:
        ftr = op.frob_cycl(tr)
        out.append(Check(f"cyclotomic:t_braced_{cfg.r}_is_cocycle",
                         ftr.equals(tr.scalar_mul(p**cfg.r).recast(ftr.spec, check=False))))
        out.append(Check(f"cyclotomic:t_braced_{cfg.r}_in_F{cfg.r}", reduce_mod_Fr(tr, cfg.r).is_zero(prec),
                         {"precision": prec}))
    out += divisibility_checks(p, cfg.i_cyclo, budget)
    return out


def ring_closure_checks(cfg: PipelineConfig, samples: int = 20, seed: int = 0, threads: int = 1,
                        radius: int = 30) -> list[Check]:
    """Sums and band-truncated products stay in the ring; reduction mod F^r is multiplicative."""

    def run(item):
        idx, deco = item
        S = _ring_for(cfg, deco)
        band, support = _sample_band(S, radius)
        rng = _rng(seed, 3, idx)
        add, mul, red = [], [], []
        r = max(cfg.r, 1)
        for _ in range(samples):
            f = random_element(S, band, rng, support=support)
            g = random_element(S, band, rng, support=support)
            add.append(_safe(lambda: not check_membership(f + g) and (f + g - g).equals(f)))
            mul.append(_safe(lambda: not check_membership(f.mul(g))))
            if S.filtered and not S.allows_negative:
                red.append(_safe(lambda: reduce_mod_Fr(f.mul(g), r).equals(reduce_mod_Fr(f, r) * reduce_mod_Fr(g, r))))
        return deco, add, mul, red

    out = []
    for deco, add, mul, red in _pmap(run, list(enumerate(DECORATIONS)), threads):
        out.append(_tally(f"rings[{cfg.profile}:{deco}]:sum_closure", add))
        out.append(_tally(f"rings[{cfg.profile}:{deco}]:product_closure", mul))
        if red:
            out.append(_tally(f"rings[{cfg.profile}:{deco}]:reduction_multiplicative", red))
    return out


# ---------------------------------------------------------------------------
# homology

def random_complex(rng: np.random.Generator, p: int = 3, N: int = 2, max_terms: int = 3,
                   max_dim: int = 3) -> ChainComplex:
    """A random cochain complex with d o d = 0: each differential is built on the kernel of the next."""
    q = p**N
    terms = int(rng.integers(1, max_terms + 1))
    dims = [int(rng.integers(0, max_dim + 1)) for _ in range(terms)]
    diffs = {}
    for k in range(terms - 1):
        shape = (dims[k + 1], dims[k])
        if k == 0 or not dims[k] or not dims[k + 1]:
            diffs[k] = rng.integers(0, q, size=shape)
            continue
        # rows of d^k must kill the image of d^(k-1)
        K = kernel_basis(np.asarray(diffs[k - 1]).T % q, p, N)
        if K.shape[1] == 0:
            diffs[k] = np.zeros(shape, dtype=np.int64)
            continue
        R = rng.integers(0, q, size=(dims[k + 1], K.shape[1]))
        diffs[k] = matmul_mod(R, K.T, q)
    return ChainComplex(p, N, dict(enumerate(dims)), diffs, "random")


def permuted(C: ChainComplex, rng: np.random.Generator) -> ChainComplex:
    perms = {k: rng.permutation(C.dims[k]) for k in C.degrees}
    diffs = {}
    for k in C.degrees:
        if k + 1 in C.dims:
            diffs[k] = C.d(k)[np.ix_(perms[k + 1], perms[k])]
    return ChainComplex(C.p, C.N, C.dims, diffs, C.name + "[shuffled]")


def homology_checks(samples: int = 200, seed: int = 0, p: int = 3, N: int = 2) -> list[Check]:
    """Reduced vs plain SNF cohomology, basis shuffles, and the identity and p-multiple certificates."""
    rng = _rng(seed, 4)
    same, shuffle, ident, pmul = [], [], [], []
    q = p**N
    for _ in range(samples):
        C = random_complex(rng, p, N)
        H = cohomology(C, reduce=False)
        same.append(cohomology(C).divisors == H.divisors)
        shuffle.append(cohomology(permuted(C, rng)).divisors == H.divisors)
        idm = ChainMap(C, C, {k: identity(C.dims[k], q) for k in C.degrees})
        ident.append(quasi_iso_certificate(idm).c == 0)
        pm = ChainMap(C, C, {k: np.mod(p * identity(C.dims[k], q), q) for k in C.degrees})
        cert = quasi_iso_certificate(pm)
        pmul.append(all(a <= 1 and b <= 1 for a, b in cert.per_degree.values()))
    return [
        _tally("homology:reduced_matches_plain_snf", same),
        _tally("homology:shuffle_invariance", shuffle),
        _tally("homology:identity_certificate_zero", ident),
        _tally("homology:p_multiple_certificate_at_most_one", pmul),
    ]


# ---------------------------------------------------------------------------
# pipeline level

# edge -> bound on the certificate exponent as a function of r (None: finite, reported)
EDGE_BOUNDS = {
    "pd_to_u": lambda r: 6 * r,
    "phi_to_psi": lambda r: 0,
    "u_to_uv": lambda r: 2 * r,
    "psi_uv_back_to_phi": lambda r: None,
}
EDGE_COMPLEXES = {
    "pd_to_u": (("kum", "PD"), ("kum", "U")),
    "phi_to_psi": (("kum", "U"), ("kum_psi", "U")),
    "u_to_uv": (("kum_psi", "U"), ("kum_psi", "UV")),
    "psi_uv_back_to_phi": (("kum", "UV"), ("kum_psi", "UV")),
}


def syntomic_table(cfg: PipelineConfig, bundle: Bundle | None = None) -> tuple[CohomologyReport, dict]:
    """Cohomology of Syn with the measured torsion exponents."""
    b = bundle or Bundle(cfg)
    C = b.build("syn")
    H = cohomology(C)
    measured = {
        "c0": H.torsion_exponent(0) if H.full_rank(0) == 0 else None,
        "full_ranks": {str(k): H.full_rank(k) for k in sorted(H.divisors)},
        "torsion_exponents": {str(k): H.torsion_exponent(k) for k in sorted(H.divisors)},
        "dims": [C.dims[k] for k in C.degrees],
    }
    return H, measured


def chain_checks(cfg: PipelineConfig, threads: int = 1, with_stability: bool = True,
                 extra_edges: bool = True) -> SuiteReport:
    """Edge certificates in degrees <= r against their bounds, plus band-doubling stability."""
    rep = SuiteReport("chain")
    r = cfg.r
    b = Bundle(cfg)
    degrees = [k for k in range(0, r + 1)]
    for edge, bound in EDGE_BOUNDS.items():
        f = b.chain_map(edge)
        cert = quasi_iso_certificate(f, degrees=[k for k in f.source.degrees if k in degrees])
        lim = bound(r)
        ok = cert.c <= lim if lim is not None else cert.c < cfg.n
        rep.edges.append({"name": edge, "certificate": cert.to_json()})
        rep.checks.append(Check(f"chain:{edge}", ok, {"N_min": cert.c, "bound": lim, "r": r}))
    if extra_edges and cfg.profile == "B":
        cert = filt_drop_by_t(cfg)
        rep.edges.append({"name": "filt_drop_by_t", "certificate": cert.to_json()})
        rep.checks.append(Check("chain:filt_drop_by_t_kernel", cert.kernel <= 2 * r,
                                {"kernel": cert.kernel, "cokernel": cert.cokernel, "bound": 2 * r}))
        cert = lie_to_group(cfg)
        rep.edges.append({"name": "lie_to_group", "certificate": cert.to_json()})
        rep.checks.append(Check("chain:lie_to_group_iso", cert.c == 0, {"N_min": cert.c}))
    if with_stability:
        pairs = []
        for src, tgt in EDGE_COMPLEXES.values():
            for x in (src, tgt):
                if x not in pairs:
                    pairs.append(x)
        for kind, deco, st in _pmap(lambda kd: (*kd, stability(cfg, *kd, degrees=degrees)), pairs, threads):
            rep.stability.append({"name": f"{kind}_{deco}", **st.to_dict()})
            rep.checks.append(Check(f"chain:stability[{kind}_{deco}]", st.matched,
                                    {"window_exponent": st.tau, "M": st.M}))
    return rep


def change_of_frobenius(cfg: PipelineConfig, threads: int = 1) -> SuiteReport:
    """Kum and Cycl on the annulus: divisor multisets above the window exponents, with stability."""
    if cfg.profile != "B":
        raise ConfigError("the cyclotomic comparison needs profile B")
    rep = SuiteReport("compare")
    res = _pmap(lambda kind: stability(cfg, kind, "UV"), ["kum", "cycl"], threads)
    tau = max(s.tau for s in res)
    for kind, s in zip(("kum", "cycl"), res):
        rep.complexes.append(cohomology_entry(f"{kind}_UV", s.report_M))
        rep.stability.append({"name": f"{kind}_UV", **s.to_dict()})
        rep.checks.append(Check(f"compare:stability[{kind}_UV]", s.matched, {"window_exponent": s.tau}))
    agree = compare_above(res[0].report_M, res[1].report_M, tau)
    rep.checks.append(Check("compare:kum_vs_cycl_divisors", agree, {"certified_above_exponent": tau}))
    return rep


def herr_checks(cfg: PipelineConfig, M: int | None = None) -> SuiteReport:
    """Herr cohomology, its stability, and the H^2 comparison with Syn."""
    rep = SuiteReport("herr")
    h = herr_cohomology(cfg, M)
    H = h.image
    rep.complexes.append(cohomology_entry("herr", H))
    rep.stability.append({"name": "herr", **{k: v for k, v in h.to_dict().items() if k != "cohomology"}})
    c0 = H.torsion_exponent(0) if H.full_rank(0) == 0 else cfg.n
    rep.checks.append(Check("herr:H0_small_exponent", c0 < cfg.n, {"c0": c0}))
    rep.checks.append(Check("herr:stability", h.stable, {"M": h.M}))
    st = stability(cfg.with_(decorations=("PD",)), "kum", "PD")
    syn = st.report_M
    rep.complexes.append(cohomology_entry("syn", syn))
    c_prime = h2_distance(H, syn, st.tau)
    rep.checks.append(Check("herr:H2_matches_syn", c_prime is not None and c_prime < cfg.n,
                            {"c_prime": c_prime, "syn_window_exponent": st.tau}))
    return rep


def h2_distance(herr: CohomologyReport, syn: CohomologyReport, tau: int, degree: int = 2) -> int | None:
    """Largest exponent gap between the two H^2 tables above tau (None if the counts differ)."""
    a = sorted((e for e in herr.divisors.get(degree, []) if e > tau), reverse=True)
    b = sorted((e for e in syn.divisors.get(degree, []) if e > tau), reverse=True)
    if len(a) != len(b):
        return None
    return max((abs(x - y) for x, y in zip(a, b)), default=0)


def torus_acyclicity(cfg: PipelineConfig, deco: str = "PD", Mg: int = 4, hi: int | None = None) -> list[Check]:
    """Every non-zero eigencomponent de Rham complex for one torus variable is acyclic."""
    p = cfg.p
    out = []
    for a0 in range(p):
        for a1 in range(p):
            if (a0, a1) == (0, 0):
                continue
            C = torus_eigen_complex(cfg.with_(d=1), (a0, a1), Mg=Mg, deco=deco, hi=hi)
            H = cohomology(C)
            total = sum(len(v) for v in H.divisors.values())
            out.append(Check(f"torus:acyclic[{deco}:{a0},{a1}]", total == 0,
                             {"dims": [C.dims[k] for k in C.degrees], "classes": total}))
    return out


# ---------------------------------------------------------------------------
# dispatch

def run_suite(cfg: PipelineConfig, suite: str, seed: int = 0, threads: int = 1) -> SuiteReport:
    if suite not in SUITE_NAMES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {SUITE_NAMES}")
    if suite == "all":
        rep = SuiteReport("all")
        for name in SUITE_NAMES[:-1]:
            rep.extend(run_suite(cfg, name, seed, threads))
        return rep
    rep = SuiteReport(suite)
    if suite == "operators":
        rep.checks += operator_identities(cfg, seed=seed, threads=threads)
        if cfg.profile == "B":
            rep.checks += lazard_checks(cfg, seed=seed, threads=threads)
        else:
            rep.skipped.append("lazard (profile B only)")
    elif suite == "rings":
        rep.checks += ring_closure_checks(cfg, seed=seed, threads=threads)
        if cfg.profile == "B":
            rep.checks += cyclotomic_checks(cfg)
        else:
            rep.skipped.append("cyclotomic (profile B only)")
    elif suite == "homology":
        rep.checks += homology_checks(seed=seed)
    elif suite == "chain":
        rep.extend(chain_checks(cfg, threads=threads))
        H, measured = syntomic_table(cfg)
        rep.complexes.append(cohomology_entry("syn", H))
    elif suite == "herr":
        if cfg.profile == "B" and cfg.d == 0:
            rep.extend(herr_checks(cfg))
        else:
            rep.skipped.append("herr (profile B, d = 0 only)")
    return rep
