"""Dense integer polynomial kernels (Kronecker substitution on Python ints)."""

from __future__ import annotations

from typing import Sequence


def _pack(coeffs: Sequence[int], width: int) -> int:
    nbytes = width // 8
    return int.from_bytes(b"".join(c.to_bytes(nbytes, "little") for c in coeffs), "little")


def _unpack(x: int, width: int, count: int) -> list[int]:
    nbytes = width // 8
    raw = x.to_bytes(nbytes * count, "little")
    return [int.from_bytes(raw[i * nbytes:(i + 1) * nbytes], "little") for i in range(count)]


def mul(a: Sequence[int], b: Sequence[int], length: int | None = None, mod: int | None = None) -> list[int]:
    """Product of two coefficient lists, truncated to ``length`` terms, reduced mod ``mod``.

    Inputs may contain negative integers.
    """
    if not a or not b:
        return [0] * (length or 0)
    full = len(a) + len(b) - 1
    n = full if length is None else min(length, full)
    if mod is not None:
        a = [x % mod for x in a[:n]]
        b = [x % mod for x in b[:n]]
    else:
        a = list(a[:n])
        b = list(b[:n])
    if min(a) < 0 or min(b) < 0:
        # split into positive and negative parts
        ap = [x if x > 0 else 0 for x in a]
        an = [-x if x < 0 else 0 for x in a]
        bp = [x if x > 0 else 0 for x in b]
        bn = [-x if x < 0 else 0 for x in b]
        pp = _mul_nonneg(ap, bp, n)
        nn = _mul_nonneg(an, bn, n)
        pn = _mul_nonneg(ap, bn, n)
        np_ = _mul_nonneg(an, bp, n)
        out = [w + x - y - z for w, x, y, z in zip(pp, nn, pn, np_)]
    else:
        out = _mul_nonneg(a, b, n)
    if mod is not None:
        out = [x % mod for x in out]
    out += [0] * ((length or n) - len(out))
    return out


def _mul_nonneg(a: list[int], b: list[int], n: int) -> list[int]:
    ma = max(a)
    mb = max(b)
    if ma == 0 or mb == 0:
        return [0] * n
    bits = ma.bit_length() + mb.bit_length() + min(len(a), len(b)).bit_length() + 1
    width = ((bits + 7) // 8) * 8
    prod = _pack(a, width) * _pack(b, width)
    count = min(n, len(a) + len(b) - 1)
    out = _unpack(prod, width, count) if prod.bit_length() <= width * count else _unpack(
        prod & ((1 << (width * count)) - 1), width, count)
    return out + [0] * (n - count)


def power_series_inverse(a: Sequence[int], length: int, mod: int) -> list[int]:
    """Inverse of a power series with unit constant term, modulo (X^length, mod)."""
    if length <= 0:
        return []
    inv0 = pow(a[0] % mod, -1, mod)
    out = [inv0]
    prec = 1
    while prec < length:
        prec = min(2 * prec, length)
        # Newton step: out <- out * (2 - a*out)
        t = mul(a[:prec], out, prec, mod)
        t = [(-x) % mod for x in t]
        t[0] = (t[0] + 2) % mod
        out = mul(out, t, prec, mod)
    return out[:length]


def compose_horner(coeffs: Sequence[int], g: Sequence[int], length: int, mod: int) -> list[int]:
    """Sum_k coeffs[k] * g^k truncated to ``length`` terms (g may have g[0] != 0)."""
    acc = [0] * length
    for c in reversed(coeffs):
        acc = mul(acc, g, length, mod)
        acc[0] = (acc[0] + c) % mod
    return acc


def powers(g: Sequence[int], count: int, length: int, mod: int) -> list[list[int]]:
    """[g^0, g^1, ..., g^(count-1)] truncated to ``length`` terms."""
    out = []
    cur = [1] + [0] * (length - 1)
    for _ in range(count):
        out.append(cur)
        cur = mul(cur, g, length, mod)
    return out
