"""Independent reference computations used by the tests."""

from __future__ import annotations

import itertools
from fractions import Fraction


def brute_force_divisors(p: int, N: int, d_in, d_out, dim: int) -> list[int]:
    """Invariant factors of ker(d_out)/im(d_in) on (Z/p^N)^dim by enumeration.

    ``d_in`` is a list of rows (dim x n_prev), ``d_out`` a list of rows (n_next x dim).
    """
    q = p**N
    vecs = list(itertools.product(range(q), repeat=dim))

    def apply(M, x):
        return tuple(sum(a * b for a, b in zip(row, x)) % q for row in M)

    ker = [x for x in vecs if not d_out or all(c == 0 for c in apply(d_out, x))]
    n_prev = len(d_in[0]) if d_in and d_in[0] else 0
    if n_prev:
        im = {apply(d_in, y) for y in itertools.product(range(q), repeat=n_prev)}
    else:
        im = {tuple([0] * dim)}
    # n_k = |{x in H : p^k x = 0}|
    counts = []
    for k in range(N + 1):
        pk = p**k
        good = sum(1 for x in ker if tuple(pk * c % q for c in x) in im)
        counts.append(good // len(im))
    # number of cyclic summands of order >= p^k is log_p(n_k / n_{k-1})
    ge = [0]
    for k in range(1, N + 1):
        r = counts[k] // counts[k - 1]
        m = 0
        while r > 1:
            r //= p
            m += 1
        ge.append(m)
    out = []
    for k in range(1, N + 1):
        nxt = ge[k + 1] if k + 1 <= N else 0
        out.extend([k] * (ge[k] - nxt))
    return sorted(out)


def naive_binomial(c: int, k: int) -> Fraction:
    num = Fraction(1)
    for j in range(k):
        num *= Fraction(c - j, j + 1)
    return num


def naive_poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def brute_force_cohomology(C) -> dict[int, list[int]]:
    """Cohomology divisors of every degree of a small complex, by enumeration."""
    out = {}
    for k in C.degrees:
        dim = C.dims[k]
        if dim == 0:
            out[k] = []
            continue
        d_in = C.d(k - 1).tolist() if (k - 1) in C.dims and C.dims[k - 1] else []
        d_out = C.d(k).tolist() if (k + 1) in C.dims and C.dims[k + 1] else []
        out[k] = brute_force_divisors(C.p, C.N, d_in, d_out, dim)
    return out
