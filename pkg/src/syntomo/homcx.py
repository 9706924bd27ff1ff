"""Cochain complexes of free Z/p^N-modules: Smith normal form, cohomology, cones and Koszul complexes."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import CommutationError

_INT64_SAFE = (1 << 62)
_FLOAT_EXACT = (1 << 53)


def _dtype_for(q: int):
    return np.int64 if (q - 1) * (q - 1) < _INT64_SAFE else object


def as_mod_array(A, q: int) -> np.ndarray:
    """A copy of ``A`` reduced into [0, q) with a dtype that cannot overflow in products."""
    dt = _dtype_for(q)
    if isinstance(A, np.ndarray) and A.dtype != object and dt is np.int64:
        return np.mod(A.astype(np.int64), q)
    arr = np.array(A, dtype=object)
    if arr.ndim == 0:
        arr = arr.reshape(0, 0)
    arr = np.mod(arr, q)
    return arr.astype(np.int64) if dt is np.int64 else arr


def zeros(shape, q: int) -> np.ndarray:
    dt = _dtype_for(q)
    return np.zeros(shape, dtype=np.int64) if dt is np.int64 else np.zeros(shape, dtype=object)


def identity(n: int, q: int) -> np.ndarray:
    out = zeros((n, n), q)
    for i in range(n):
        out[i, i] = 1
    return out


def matmul_mod(A: np.ndarray, B: np.ndarray, q: int) -> np.ndarray:
    """A @ B mod q, exactly.

    Small moduli go through float64 BLAS on inner-dimension chunks short enough
    that every partial sum stays below 2^53.
    """
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"shape mismatch {A.shape} @ {B.shape}")
    k = A.shape[1]
    if k == 0:
        return zeros((A.shape[0], B.shape[1]), q)
    if A.dtype == object or B.dtype == object:
        return np.mod(A.astype(object) @ B.astype(object), q)
    sq = (q - 1) * (q - 1)
    if sq < _FLOAT_EXACT:
        chunk = max(1, (_FLOAT_EXACT - 1) // sq)
        Af = np.mod(A, q).astype(np.float64)
        Bf = np.mod(B, q).astype(np.float64)
        out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
        for s in range(0, k, chunk):
            part = Af[:, s:s + chunk] @ Bf[s:s + chunk, :]
            out = np.mod(out + np.mod(part.astype(np.int64), q), q)
        return out if _dtype_for(q) is np.int64 else out.astype(object)
    chunk = max(1, (_INT64_SAFE - 1) // max(1, sq))
    if chunk >= k:
        return np.mod(A @ B, q)
    out = zeros((A.shape[0], B.shape[1]), q)
    for s in range(0, k, chunk):
        out = np.mod(out + np.mod(A[:, s:s + chunk] @ B[s:s + chunk, :], q), q)
    return out


def _vp_int(x: int, p: int, cap: int) -> int:
    x = int(x)
    if x == 0:
        return cap
    v = 0
    while x % p == 0 and v < cap:
        x //= p
        v += 1
    return v


# ---------------------------------------------------------------------------
# sparse matrices and complexes

@dataclass
class SparseIntMat:
    """Integer matrix as (row, col, value) triplets reduced mod ``modulus``."""

    shape: tuple[int, int]
    entries: dict
    modulus: int

    @classmethod
    def from_dense(cls, A: np.ndarray, modulus: int) -> "SparseIntMat":
        A = as_mod_array(A, modulus)
        ent = {(int(i), int(j)): int(A[i, j]) for i, j in zip(*np.nonzero(A))}
        return cls((int(A.shape[0]), int(A.shape[1])), ent, modulus)

    def to_dense(self) -> np.ndarray:
        out = zeros(self.shape, self.modulus)
        for (i, j), v in self.entries.items():
            out[i, j] = v % self.modulus
        return out

    def triplets(self) -> list[list[int]]:
        return [[i, j, v] for (i, j), v in sorted(self.entries.items()) if v % self.modulus]


@dataclass
class ChainComplex:
    """d^q : C^q -> C^(q+1) for q in ``degrees`` (consecutive), modulo p^N."""

    p: int
    N: int
    dims: dict
    diffs: dict
    name: str = ""
    labels: dict = field(default_factory=dict)
    check: bool = True

    def __post_init__(self) -> None:
        q = self.modulus
        self.dims = {int(k): int(v) for k, v in sorted(self.dims.items())}
        degs = list(self.dims)
        if degs and degs != list(range(degs[0], degs[-1] + 1)):
            raise ValueError("degrees must be consecutive")
        clean = {}
        for k in degs:
            want = (self.dims.get(k + 1, 0), self.dims[k])
            M = self.diffs.get(k)
            if M is None:
                clean[k] = zeros(want, q)
                continue
            M = M.to_dense() if isinstance(M, SparseIntMat) else as_mod_array(M, q)
            if M.size == 0:
                M = zeros(want, q)
            if M.shape != want:
                raise ValueError(f"differential in degree {k} has shape {M.shape}, expected {want}")
            clean[k] = M
        self.diffs = clean
        if self.check:
            self.assert_d_squared_zero()

    @property
    def modulus(self) -> int:
        return self.p**self.N

    @property
    def degrees(self) -> list[int]:
        return list(self.dims)

    def d(self, k: int) -> np.ndarray:
        if k in self.diffs:
            return self.diffs[k]
        return zeros((self.dims.get(k + 1, 0), self.dims.get(k, 0)), self.modulus)

    def assert_d_squared_zero(self) -> None:
        for k in self.degrees:
            if k + 1 in self.dims:
                dd = matmul_mod(self.d(k + 1), self.d(k), self.modulus)
                if np.any(dd != 0):
                    raise CommutationError(f"d o d != 0 at degree {k} in {self.name or 'complex'}")

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "p": self.p,
            "degrees": self.degrees,
            "dims": [self.dims[k] for k in self.degrees],
            "diffs": [{"degree": k, "triplets": SparseIntMat.from_dense(self.d(k), self.modulus).triplets()}
                      for k in self.degrees],
            "modulus": [self.p, self.N],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "ChainComplex":
        p, N = obj["modulus"]
        dims = dict(zip(obj["degrees"], obj["dims"]))
        diffs = {}
        for entry in obj["diffs"]:
            k = entry["degree"]
            shape = (dims.get(k + 1, 0), dims[k])
            diffs[k] = SparseIntMat(shape, {(i, j): v for i, j, v in entry["triplets"]}, p**N)
        return cls(int(p), int(N), dims, diffs, obj.get("name", ""))


@dataclass
class ChainMap:
    """f^q : C^q -> D^q commuting with the differentials."""

    source: ChainComplex
    target: ChainComplex
    maps: dict
    name: str = ""
    check: bool = True

    def __post_init__(self) -> None:
        q = self.source.modulus
        if self.target.modulus != q:
            raise ValueError("source and target must share the modulus")
        clean = {}
        for k in self.source.degrees:
            want = (self.target.dims.get(k, 0), self.source.dims[k])
            M = self.maps.get(k)
            if M is None:
                clean[k] = zeros(want, q)
                continue
            M = M.to_dense() if isinstance(M, SparseIntMat) else as_mod_array(M, q)
            if M.size == 0:
                M = zeros(want, q)
            if M.shape != want:
                raise ValueError(f"map in degree {k} has shape {M.shape}, expected {want}")
            clean[k] = M
        self.maps = clean
        if self.check:
            self.assert_commutes()

    def f(self, k: int) -> np.ndarray:
        if k in self.maps:
            return self.maps[k]
        return zeros((self.target.dims.get(k, 0), self.source.dims.get(k, 0)), self.source.modulus)

    def assert_commutes(self) -> None:
        q = self.source.modulus
        for k in self.source.degrees:
            lhs = matmul_mod(self.target.d(k), self.f(k), q)
            rhs = matmul_mod(self.f(k + 1), self.source.d(k), q)
            if lhs.shape != rhs.shape or np.any(np.mod(lhs - rhs, q) != 0):
                raise CommutationError(f"chain map {self.name or ''} fails to commute in degree {k}")


# ---------------------------------------------------------------------------
# Smith normal form over Z/p^N

@dataclass
class SNFResult:
    """U A V = D with D diagonal, entries p^exponents[j] (N means zero)."""

    exponents: list
    U: np.ndarray
    V: np.ndarray
    Vinv: np.ndarray
    shape: tuple

    @property
    def rank(self) -> int:
        return sum(1 for a in self.exponents if a < self.N)

    N: int = 0


def snf(A, p: int, N: int, track: bool = True) -> SNFResult:
    """Smith normal form over the local ring Z/p^N.

    Pivot rule: smallest valuation, ties broken by the first entry in row-major order.
    """
    q = p**N
    A = as_mod_array(A, q).copy()
    m, n = A.shape
    U = identity(m, q) if track else None
    V = identity(n, q) if track else None
    Vinv = identity(n, q) if track else None
    exps = []
    for k in range(min(m, n)):
        sub = A[k:, k:]
        found = None
        pe = 1
        for a in range(N):
            pe *= p
            mask = np.mod(sub, pe) != 0
            if mask.any():
                flat = int(np.argmax(mask))
                found = (a, k + flat // sub.shape[1], k + flat % sub.shape[1])
                break
        if found is None:
            exps.extend([N] * (min(m, n) - k))
            break
        a, i, j = found
        if i != k:
            A[[k, i], :] = A[[i, k], :]
            if track:
                U[[k, i], :] = U[[i, k], :]
        if j != k:
            A[:, [k, j]] = A[:, [j, k]]
            if track:
                V[:, [k, j]] = V[:, [j, k]]
                Vinv[[k, j], :] = Vinv[[j, k], :]
        pa = p**a
        unit = int(A[k, k]) // pa
        uinv = pow(unit, -1, q)
        A[k, :] = np.mod(A[k, :] * uinv, q)
        if track:
            U[k, :] = np.mod(U[k, :] * uinv, q)
        col = A[k + 1:, k] // pa
        if np.any(col):
            A[k + 1:, k:] = np.mod(A[k + 1:, k:] - np.mod(np.outer(col, A[k, k:]), q), q)
            if track:
                U[k + 1:, :] = np.mod(U[k + 1:, :] - np.mod(np.outer(col, U[k, :]), q), q)
        row = A[k, k + 1:] // pa
        if np.any(row):
            A[k, k + 1:] = 0
            if track:
                V[:, k + 1:] = np.mod(V[:, k + 1:] - np.mod(np.outer(V[:, k], row), q), q)
                Vinv[k:k + 1, :] = np.mod(Vinv[k:k + 1, :] + matmul_mod(row.reshape(1, -1), Vinv[k + 1:, :], q), q)
        exps.append(a)
    res = SNFResult(exps, U, V, Vinv, (m, n))
    res.N = N
    return res


def snf_exponents(A, p: int, N: int) -> list[int]:
    """Nonzero invariant-factor exponents (N stands for a free summand) of coker(A) on the row side."""
    res = snf(A, p, N, track=False)
    m = res.shape[0]
    exps = list(res.exponents) + [N] * (m - len(res.exponents))
    return sorted(e for e in exps if e > 0)


def kernel_basis(A, p: int, N: int) -> np.ndarray:
    """Columns generating {x : A x = 0 mod p^N}."""
    q = p**N
    A = as_mod_array(A, q)
    m, n = A.shape
    res = snf(A, p, N)
    cols = []
    for j in range(n):
        a = res.exponents[j] if j < len(res.exponents) else N
        if a >= N:
            cols.append(res.V[:, j])
        elif a > 0:
            cols.append(np.mod(res.V[:, j] * p ** (N - a), q))
    if not cols:
        return zeros((n, 0), q)
    return np.stack(cols, axis=1)


# ---------------------------------------------------------------------------
# elimination of unit entries

@dataclass
class Reduction:
    """A smaller complex homotopy equivalent to the original one.

    ``iota[k]`` (old x new) and ``pi[k]`` (new x old) are the comparison chain maps;
    they are only filled in when tracking was requested.
    """

    complex: "ChainComplex"
    iota: dict
    pi: dict


def reduce_complex(C: "ChainComplex", track: bool = False) -> Reduction:
    """Cancel unit entries of the differentials by Gaussian elimination on the complex.

    Pivots are chosen by a Markowitz count with index tie-breaks, so the result
    is deterministic.
    """
    p, q = C.p, C.modulus
    degs = C.degrees
    rows: dict = {}
    cols: dict = {}
    for k in degs:
        if k + 1 not in C.dims:
            continue
        d = C.d(k)
        rk: dict = {}
        ck: dict = {}
        nz_r, nz_c = np.nonzero(d)
        for i, j in zip(nz_r.tolist(), nz_c.tolist()):
            v = int(d[i, j])
            rk.setdefault(i, {})[j] = v
            ck.setdefault(j, {})[i] = v
        rows[k], cols[k] = rk, ck
    alive = {k: set(range(C.dims[k])) for k in degs}
    iota = {k: {j: {j: 1} for j in range(C.dims[k])} for k in degs} if track else {}
    pi = {k: {j: {j: 1} for j in range(C.dims[k])} for k in degs} if track else {}

    def axpy(target: dict, key, coef: int, src: dict) -> None:
        vec = target.setdefault(key, {})
        for o, v in src.items():
            w = (vec.get(o, 0) + coef * v) % q
            if w:
                vec[o] = w
            else:
                vec.pop(o, None)

    def eliminate(k: int, i: int, j: int) -> None:
        rk, ck = rows[k], cols[k]
        b = rk[i][j]
        binv = pow(b, -1, q)
        row_i = {jj: v for jj, v in rk[i].items() if jj != j}
        col_j = {ii: v for ii, v in ck[j].items() if ii != i}
        for ii, c in col_j.items():
            f = c * binv % q
            r_ii = rk[ii]
            for jj, a in row_i.items():
                w = (r_ii.get(jj, 0) - f * a) % q
                if w:
                    r_ii[jj] = w
                    ck.setdefault(jj, {})[ii] = w
                else:
                    r_ii.pop(jj, None)
                    ck[jj].pop(ii, None)
        for jj in list(rk[i]):
            ck[jj].pop(i, None)
            if not ck[jj]:
                del ck[jj]
        del rk[i]
        for ii in list(ck.get(j, {})):
            rk[ii].pop(j, None)
            if not rk[ii]:
                del rk[ii]
        ck.pop(j, None)
        # neighbouring differentials lose a row (below) and a column (above)
        if k - 1 in rows:
            r_prev, c_prev = rows[k - 1], cols[k - 1]
            for jj in list(r_prev.get(j, {})):
                c_prev[jj].pop(j, None)
                if not c_prev[jj]:
                    del c_prev[jj]
            r_prev.pop(j, None)
        if k + 1 in rows:
            r_next, c_next = rows[k + 1], cols[k + 1]
            for ii in list(c_next.get(i, {})):
                r_next[ii].pop(i, None)
                if not r_next[ii]:
                    del r_next[ii]
            c_next.pop(i, None)
        if track:
            for jj, a in row_i.items():
                axpy(iota[k], jj, -binv * a % q, iota[k][j])
            for ii, c in col_j.items():
                axpy(pi[k + 1], ii, -c * binv % q, pi[k + 1][i])
            del iota[k][j]
            iota[k + 1].pop(i, None)
            pi[k].pop(j, None)
            del pi[k + 1][i]
        alive[k].discard(j)
        alive[k + 1].discard(i)

    changed = True
    while changed:
        changed = False
        for k in sorted(rows):
            rk, ck = rows[k], cols[k]
            cands = []
            for i, r in rk.items():
                for j, v in r.items():
                    if v % p:
                        cands.append(((len(r) - 1) * (len(ck[j]) - 1), i, j))
            cands.sort()
            for cost, i, j in cands:
                r = rk.get(i)
                if r is None or j not in r or r[j] % p == 0:
                    continue
                if (len(r) - 1) * (len(ck[j]) - 1) > cost:
                    continue
                eliminate(k, i, j)
                changed = True

    index = {k: sorted(alive[k]) for k in degs}
    pos = {k: {old: new for new, old in enumerate(index[k])} for k in degs}
    dims = {k: len(index[k]) for k in degs}
    diffs = {}
    for k in rows:
        M = zeros((dims[k + 1], dims[k]), q)
        for i, r in rows[k].items():
            for j, v in r.items():
                M[pos[k + 1][i], pos[k][j]] = v
        diffs[k] = M
    R = ChainComplex(C.p, C.N, dims, diffs, C.name, check=False)
    I, P = {}, {}
    if track:
        for k in degs:
            Ik = zeros((C.dims[k], dims[k]), q)
            Pk = zeros((dims[k], C.dims[k]), q)
            for new, old in enumerate(index[k]):
                for o, v in iota[k][old].items():
                    Ik[o, new] = v
                for o, v in pi[k][old].items():
                    Pk[new, o] = v
            I[k], P[k] = Ik, Pk
    return Reduction(R, I, P)


# ---------------------------------------------------------------------------
# cohomology

@dataclass
class _KernelData:
    """Kernel generators g_j = p^(N - a_j) V e_j of order p^a_j and the presentation of H."""

    orders: list
    gens: np.ndarray
    coord: np.ndarray          # rows of Vinv scaled: x in ker -> kernel coordinates
    divisors: list             # p^(N - a_j)
    presentation: np.ndarray   # [diag(p^a_j) | image columns in kernel coordinates]


def _kernel_data(C: ChainComplex, k: int) -> _KernelData:
    p, N, q = C.p, C.N, C.modulus
    n = C.dims.get(k, 0)
    d = C.d(k)
    if d.shape[0] == 0 or n == 0:
        res_V, res_Vinv, exps = identity(n, q), identity(n, q), [N] * n
    else:
        res = snf(d, p, N)
        res_V, res_Vinv = res.V, res.Vinv
        exps = [N if j >= len(res.exponents) else res.exponents[j] for j in range(n)]
        # kernel generator j is p^(N - a_j) V e_j, of order p^a_j
    keep = [j for j in range(n) if exps[j] > 0]
    orders = [exps[j] for j in keep]
    divs = [p ** (N - exps[j]) for j in keep]
    gens = zeros((n, len(keep)), q)
    for c, j in enumerate(keep):
        gens[:, c] = np.mod(res_V[:, j] * divs[c], q)
    coord = res_Vinv[keep, :] if keep else zeros((0, n), q)
    pres = zeros((len(keep), len(keep)), q)
    for c in range(len(keep)):
        pres[c, c] = p ** orders[c] % q
    if k - 1 in C.dims and C.dims[k - 1] and keep:
        img = to_kernel_coords(coord, divs, C.d(k - 1), q, f"image of d^{k - 1}")
        pres = np.concatenate([pres, img], axis=1)
    return _KernelData(orders, gens, coord, divs, pres)


def to_kernel_coords(coord: np.ndarray, divs: Sequence[int], X: np.ndarray, q: int, what: str = "") -> np.ndarray:
    Y = matmul_mod(coord, as_mod_array(X, q), q)
    out = zeros(Y.shape, q)
    for r, dv in enumerate(divs):
        row = Y[r, :]
        if np.any(np.mod(row, dv) != 0):
            raise CommutationError(f"{what} leaves the kernel")
        out[r, :] = row // dv
    return out


@dataclass
class CohomologyReport:
    """H^q = sum Z/p^b for b in divisors[q]; b = N marks a full (free mod p^N) summand."""

    p: int
    N: int
    divisors: dict

    def full_rank(self, k: int) -> int:
        return sum(1 for b in self.divisors.get(k, []) if b >= self.N)

    def torsion(self, k: int) -> list[int]:
        return [b for b in self.divisors.get(k, []) if b < self.N]

    def torsion_exponent(self, k: int) -> int:
        return max(self.torsion(k), default=0)

    def length(self, k: int) -> int:
        return sum(self.divisors.get(k, []))

    def to_json(self) -> dict:
        return {"modulus": [self.p, self.N],
                "cohomology": [{"degree": k, "divisor_exponents": list(v)} for k, v in sorted(self.divisors.items())]}

    @classmethod
    def from_json(cls, obj) -> "CohomologyReport":
        p, N = obj["modulus"]
        return cls(p, N, {e["degree"]: list(e["divisor_exponents"]) for e in obj["cohomology"]})


def cohomology(C: ChainComplex, reduce: bool = True) -> CohomologyReport:
    if reduce:
        C = reduce_complex(C).complex
    out = {}
    for k in C.degrees:
        kd = _kernel_data(C, k)
        out[k] = snf_exponents(kd.presentation, C.p, C.N) if kd.orders else []
    return CohomologyReport(C.p, C.N, out)


# ---------------------------------------------------------------------------
# cones, fibres, total complexes

def cone_and_total(f: ChainMap, kind: str = "fiber", name: str = "") -> ChainComplex:
    """Mapping fibre (C^q + D^(q-1), d(x, y) = (dx, f x - d y)) or cone (C^(q+1) + D^q)."""
    C, D = f.source, f.target
    q = C.modulus
    if kind == "fiber":
        degs = sorted(set(C.degrees) | {k + 1 for k in D.degrees})
        dims = {k: C.dims.get(k, 0) + D.dims.get(k - 1, 0) for k in degs}
        diffs = {}
        for k in degs:
            a, b = C.dims.get(k, 0), D.dims.get(k - 1, 0)
            a2, b2 = C.dims.get(k + 1, 0), D.dims.get(k, 0)
            M = zeros((a2 + b2, a + b), q)
            if a2 and a:
                M[:a2, :a] = C.d(k)
            if b2 and a:
                M[a2:, :a] = f.f(k)
            if b2 and b:
                M[a2:, a:] = np.mod(-D.d(k - 1), q)
            diffs[k] = M
    elif kind == "cone":
        degs = sorted({k - 1 for k in C.degrees} | set(D.degrees))
        dims = {k: C.dims.get(k + 1, 0) + D.dims.get(k, 0) for k in degs}
        diffs = {}
        for k in degs:
            a, b = C.dims.get(k + 1, 0), D.dims.get(k, 0)
            a2, b2 = C.dims.get(k + 2, 0), D.dims.get(k + 1, 0)
            M = zeros((a2 + b2, a + b), q)
            if a2 and a:
                M[:a2, :a] = np.mod(-C.d(k + 1), q)
            if b2 and a:
                M[a2:, :a] = f.f(k + 1)
            if b2 and b:
                M[a2:, a:] = D.d(k)
            diffs[k] = M
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return ChainComplex(C.p, C.N, dims, diffs, name or f"{kind}({f.name})")


def total_complex(rows: Sequence[ChainComplex], verticals: Sequence[ChainMap], name: str = "") -> ChainComplex:
    """Total complex of a double complex given by rows R_0 -> R_1 -> ... joined by chain maps.

    Degree k of the total complex is the sum of R_s^(k - s); vertical maps carry the sign (-1)^(k - s).
    """
    if len(verticals) != len(rows) - 1:
        raise ValueError("need one vertical map between consecutive rows")
    p, N = rows[0].p, rows[0].N
    q = p**N
    lo = min(min(R.degrees) + s for s, R in enumerate(rows))
    hi = max(max(R.degrees) + s for s, R in enumerate(rows))
    blocks = {k: [(s, k - s) for s, R in enumerate(rows) if (k - s) in R.dims] for k in range(lo, hi + 1)}
    dims = {k: sum(rows[s].dims[j] for s, j in blocks[k]) for k in blocks}
    diffs = {}
    for k in blocks:
        if k + 1 not in blocks:
            continue
        M = zeros((dims[k + 1], dims[k]), q)
        col = 0
        for s, j in blocks[k]:
            w = rows[s].dims[j]
            row = 0
            for s2, j2 in blocks[k + 1]:
                h = rows[s2].dims[j2]
                if s2 == s and j2 == j + 1:
                    M[row:row + h, col:col + w] = rows[s].d(j)
                elif s2 == s + 1 and j2 == j:
                    sign = -1 if j % 2 else 1
                    M[row:row + h, col:col + w] = np.mod(sign * verticals[s].f(j), q)
                row += h
            col += w
        diffs[k] = M
    return ChainComplex(p, N, dims, diffs, name)


# ---------------------------------------------------------------------------
# Koszul complexes

KOSZUL_KINDS = ("derivation", "group", "group_conjugated", "lie", "phi_gamma")


def koszul_build(kind: str, p: int, N: int, modules: Mapping, maps: Mapping, n_ops: int,
                 name: str = "") -> ChainComplex:
    """Koszul complex for operators f_0..f_(n_ops-1).

    ``modules[S]`` is the rank of the module placed on the subset S (a sorted tuple);
    ``maps[(S, j)]`` is the matrix M_S -> M_(S + {j}) for j not in S.  With one module
    and commuting endomorphisms pass ``modules={(): n}`` and ``maps={j: A_j}``.
    The sign of e_S -> e_(S + {j}) is (-1)^#{k in S : k < j}.
    """
    if kind not in KOSZUL_KINDS:
        raise ValueError(f"unknown Koszul kind {kind!r}")
    q = p**N
    subsets = [tuple(S) for r in range(n_ops + 1) for S in itertools.combinations(range(n_ops), r)]
    if set(modules) == {()} and all(isinstance(k, int) for k in maps):
        rank = modules[()]
        modules = {S: rank for S in subsets}
        maps = {(S, j): maps[j] for S in subsets for j in range(n_ops) if j not in S}
    dims = {}
    index = {}
    for r in range(n_ops + 1):
        off = 0
        for S in itertools.combinations(range(n_ops), r):
            index[S] = off
            off += modules[S]
        dims[r] = off
    diffs = {}
    for r in range(n_ops):
        M = zeros((dims[r + 1], dims[r]), q)
        for S in itertools.combinations(range(n_ops), r):
            for j in range(n_ops):
                if j in S:
                    continue
                T = tuple(sorted(S + (j,)))
                sign = -1 if sum(1 for k in S if k < j) % 2 else 1
                A = as_mod_array(maps[(S, j)], q)
                if A.shape != (modules[T], modules[S]):
                    raise ValueError(f"operator {j} on {S} has shape {A.shape}")
                r0, c0 = index[T], index[S]
                M[r0:r0 + modules[T], c0:c0 + modules[S]] = np.mod(
                    M[r0:r0 + modules[T], c0:c0 + modules[S]] + sign * A, q)
        diffs[r] = M
    return ChainComplex(p, N, dims, diffs, name or f"koszul[{kind}]")


# ---------------------------------------------------------------------------
# quasi-isomorphism certificates

@dataclass
class Certificate:
    """Per degree (kernel exponent, cokernel exponent) of H(f); N means unbounded."""

    per_degree: dict

    @property
    def kernel(self) -> int:
        return max((a for a, _ in self.per_degree.values()), default=0)

    @property
    def cokernel(self) -> int:
        return max((b for _, b in self.per_degree.values()), default=0)

    @property
    def c(self) -> int:
        return max(self.kernel, self.cokernel)

    def to_json(self) -> dict:
        return {"kernel": self.kernel, "cokernel": self.cokernel,
                "per_degree": [{"degree": k, "kernel": a, "cokernel": b} for k, (a, b) in sorted(self.per_degree.items())]}


def quasi_iso_certificate(f: ChainMap, degrees: Sequence[int] | None = None, reduce: bool = True) -> Certificate:
    """Smallest exponents killing the kernel and cokernel of the induced map on cohomology."""
    if reduce:
        f = _reduced_map(f)
    C, D = f.source, f.target
    p, N, q = C.p, C.N, C.modulus
    out = {}
    for k in (degrees if degrees is not None else C.degrees):
        kc = _kernel_data(C, k) if k in C.dims else None
        kd = _kernel_data(D, k) if k in D.dims else None
        nc = len(kc.orders) if kc else 0
        nd = len(kd.orders) if kd else 0
        if nc and nd:
            F = to_kernel_coords(kd.coord, kd.divisors, matmul_mod(f.f(k), kc.gens, q), q, f"f^{k}")
        else:
            F = zeros((nd, nc), q)
        # cokernel: H(D) / f(H(C))
        if nd:
            R_D = kd.presentation
            coker = snf_exponents(np.concatenate([R_D, F], axis=1), p, N)
            cok = max(coker, default=0)
        else:
            R_D = zeros((0, 0), q)
            cok = 0
        # kernel: classes y with F y in the span of R_D, modulo the span of R_C
        if nc:
            R_C = kc.presentation
            if nd:
                big = np.concatenate([F, np.mod(-R_D, q)], axis=1)
                K = kernel_basis(big, p, N)[:nc, :]
            else:
                K = identity(nc, q)
            res = snf(R_C, p, N)
            ords = [res.exponents[i] if i < len(res.exponents) else N for i in range(nc)]
            Y = matmul_mod(res.U, K, q) if K.shape[1] else zeros((nc, 0), q)
            ker = 0
            for i in range(nc):
                d_i = ords[i]
                if d_i == 0:
                    continue
                for x in Y[i, :]:
                    x = int(x) % p**d_i
                    if x:
                        ker = max(ker, d_i - _vp_int(x, p, d_i))
        else:
            ker = 0
        out[k] = (ker, cok)
    return Certificate(out)


def _reduced_map(f: ChainMap) -> ChainMap:
    rc = reduce_complex(f.source, track=True)
    rd = reduce_complex(f.target, track=True)
    q = f.source.modulus
    maps = {k: matmul_mod(rd.pi[k], matmul_mod(f.f(k), rc.iota[k], q), q)
            for k in f.source.degrees if k in f.target.dims}
    return ChainMap(rc.complex, rd.complex, maps, f.name)


def image_report(f: ChainMap, degrees: Sequence[int] | None = None) -> CohomologyReport:
    """Elementary divisors of the image of H(f) inside H(target)."""
    f = _reduced_map(f)
    C, D = f.source, f.target
    p, N, q = C.p, C.N, C.modulus
    out = {}
    for k in (degrees if degrees is not None else C.degrees):
        kc = _kernel_data(C, k) if k in C.dims else None
        kd = _kernel_data(D, k) if k in D.dims else None
        nc = len(kc.orders) if kc else 0
        nd = len(kd.orders) if kd else 0
        if not (nc and nd):
            out[k] = []
            continue
        F = to_kernel_coords(kd.coord, kd.divisors, matmul_mod(f.f(k), kc.gens, q), q, f"f^{k}")
        big = np.concatenate([F, np.mod(-kd.presentation, q)], axis=1)
        rel = kernel_basis(big, p, N)[:nc, :]
        out[k] = snf_exponents(rel, p, N)
    return CohomologyReport(p, N, out)


def shift(C: ChainComplex, by: int, name: str = "") -> ChainComplex:
    """C[by]: degree k holds C^(k + by), differential multiplied by (-1)^by."""
    sign = -1 if by % 2 else 1
    dims = {k - by: v for k, v in C.dims.items()}
    diffs = {k - by: np.mod(sign * C.d(k), C.modulus) for k in C.dims}
    return ChainComplex(C.p, C.N, dims, diffs, name or C.name)


def direct_sum(complexes: Sequence[ChainComplex], name: str = "") -> ChainComplex:
    p, N = complexes[0].p, complexes[0].N
    q = p**N
    degs = sorted(set().union(*[C.degrees for C in complexes]))
    dims = {k: sum(C.dims.get(k, 0) for C in complexes) for k in degs}
    diffs = {}
    for k in degs:
        M = zeros((dims.get(k + 1, 0), dims[k]), q)
        r = c = 0
        for C in complexes:
            h, w = C.dims.get(k + 1, 0), C.dims.get(k, 0)
            if h and w:
                M[r:r + h, c:c + w] = C.d(k)
            r += h
            c += w
        diffs[k] = M
    return ChainComplex(p, N, dims, diffs, name)
