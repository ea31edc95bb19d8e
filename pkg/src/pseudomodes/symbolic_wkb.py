"""Exact term algebra for the WKB coefficients and remainders.

Every quantity produced by the recursion is a finite sum of terms

    c * prod_i (V^(i))^{a_i} * lam^{p/2} * (lam - V)^{q/2}

with a Gaussian-rational coefficient ``c``, a monomial in the derivatives
``V^(i)`` (``i >= 1``) and integer half-powers ``p`` and ``q``.  Treating
``lam^{1/2}``, ``(lam - V)^{1/2}`` and the ``V^(i)`` as independent symbols
makes the representation canonical, so equality of two sums is equality of
their term dictionaries.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Tuple

__all__ = [
    "GaussianRational",
    "Monomial",
    "Term",
    "TermSum",
    "StructureReport",
    "t_derive",
    "t_mul",
    "t_add",
    "t_scale",
    "gen_psi_prime",
    "gen_psi_derivative",
    "gen_exponent_derivative",
    "gen_remainder",
    "structure_check",
    "remainder_shape_check",
    "kill_derivatives",
    "format_termsum",
    "N_MAX_DEFAULT",
]

N_MAX_DEFAULT = 8


@dataclass(frozen=True, order=True)
class GaussianRational:
    """Exact complex number with rational real and imaginary parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @classmethod
    def of(cls, value) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, complex):
            return cls(Fraction(value.real), Fraction(value.imag))
        return cls(Fraction(value), Fraction(0))

    def __add__(self, other):
        other = GaussianRational.of(other)
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-GaussianRational.of(other))

    def __mul__(self, other):
        other = GaussianRational.of(other)
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussianRational.of(other)
        den = other.re * other.re + other.im * other.im
        if den == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * GaussianRational(other.re, -other.im)
        return GaussianRational(num.re / den, num.im / den)

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


I = GaussianRational(0, 1)
ONE = GaussianRational(1, 0)

# A monomial is a sorted tuple of (derivative order, power) pairs, orders >= 1.
Monomial = Tuple[Tuple[int, int], ...]
# Key of a term: (monomial, lam_half_pow, res_half_pow).
Key = Tuple[Monomial, int, int]


def mono_mul(a: Monomial, b: Monomial) -> Monomial:
    d: Dict[int, int] = dict(a)
    for i, p in b:
        d[i] = d.get(i, 0) + p
    return tuple(sorted(d.items()))


def mono_weight(m: Monomial) -> int:
    """Total derivative weight r = sum i * alpha_i."""
    return sum(i * p for i, p in m)


def mono_factors(m: Monomial) -> int:
    """Number of factors j = sum alpha_i."""
    return sum(p for _, p in m)


def mono_max_order(m: Monomial) -> int:
    return max((i for i, _ in m), default=0)


@dataclass(frozen=True)
class Term:
    coeff: GaussianRational
    mono: Monomial
    lam_half_pow: int
    res_half_pow: int

    @property
    def key(self) -> Key:
        return (self.mono, self.lam_half_pow, self.res_half_pow)


@dataclass(frozen=True)
class TermSum:
    """Canonical sum of terms; zero coefficients never stored."""

    data: Tuple[Tuple[Key, GaussianRational], ...] = ()

    @classmethod
    def from_dict(cls, d: Dict[Key, GaussianRational]) -> "TermSum":
        items = tuple(sorted(((k, c) for k, c in d.items() if c), key=lambda kc: _sort_key(kc[0])))
        return cls(items)

    @classmethod
    def single(cls, coeff, mono: Monomial = (), lam: int = 0, res: int = 0) -> "TermSum":
        return cls.from_dict({(tuple(sorted(mono)), lam, res): GaussianRational.of(coeff)})

    @classmethod
    def zero(cls) -> "TermSum":
        return cls(())

    def as_dict(self) -> Dict[Key, GaussianRational]:
        return dict(self.data)

    @property
    def terms(self) -> List[Term]:
        return [Term(c, k[0], k[1], k[2]) for k, c in self.data]

    def __iter__(self) -> Iterator[Term]:
        return iter(self.terms)

    def __len__(self):
        return len(self.data)

    def is_zero(self) -> bool:
        return len(self.data) == 0

    def __add__(self, other: "TermSum") -> "TermSum":
        return t_add(self, other)

    def __sub__(self, other: "TermSum") -> "TermSum":
        return t_add(self, t_scale(other, -1))

    def __mul__(self, other: "TermSum") -> "TermSum":
        return t_mul(self, other)

    def max_derivative(self) -> int:
        return max((mono_max_order(k[0]) for k, _ in self.data), default=0)


def _sort_key(k: Key):
    mono, lam, res = k
    return (mono_factors(mono), mono_weight(mono), mono, lam, -res)


def t_add(*sums: TermSum) -> TermSum:
    acc: Dict[Key, GaussianRational] = {}
    for s in sums:
        for k, c in s.data:
            acc[k] = acc.get(k, GaussianRational()) + c
    return TermSum.from_dict(acc)


def t_scale(s: TermSum, c) -> TermSum:
    c = GaussianRational.of(c)
    return TermSum.from_dict({k: v * c for k, v in s.data})


def t_shift(s: TermSum, lam: int = 0, res: int = 0) -> TermSum:
    """Multiply by lam^{lam/2} (lam - V)^{res/2}."""
    return TermSum.from_dict({(k[0], k[1] + lam, k[2] + res): v for k, v in s.data})


def t_mul(s1: TermSum, s2: TermSum) -> TermSum:
    acc: Dict[Key, GaussianRational] = {}
    for (m1, l1, q1), c1 in s1.data:
        for (m2, l2, q2), c2 in s2.data:
            k = (mono_mul(m1, m2), l1 + l2, q1 + q2)
            acc[k] = acc.get(k, GaussianRational()) + c1 * c2
    return TermSum.from_dict(acc)


def t_derive(s: TermSum) -> TermSum:
    """Exact x-derivative.

    Product rule on the monomial raises one derivative order; the factor
    (lam - V)^{q/2} contributes -(q/2) V' (lam - V)^{q/2 - 1}.
    """
    acc: Dict[Key, GaussianRational] = {}

    def put(k, c):
        acc[k] = acc.get(k, GaussianRational()) + c

    for (mono, lam, res), c in s.data:
        d = dict(mono)
        for i, p in mono:
            nd = dict(d)
            if p == 1:
                del nd[i]
            else:
                nd[i] = p - 1
            nd[i + 1] = nd.get(i + 1, 0) + 1
            put((tuple(sorted(nd.items())), lam, res), c * p)
        if res != 0:
            nm = mono_mul(mono, ((1, 1),))
            put((nm, lam, res - 2), c * Fraction(-res, 2))
    return TermSum.from_dict(acc)


def kill_derivatives(s: TermSum) -> TermSum:
    """Substitute V^(i) -> 0 for every i >= 1 (constant potential)."""
    return TermSum.from_dict({k: c for k, c in s.data if not k[0]})


# --------------------------------------------------------------------------
# recursion

_memo_lock = threading.Lock()
_psi_memo: Dict[int, TermSum] = {}


def _psi_prime_chain(kmax: int) -> List[TermSum]:
    """psi'_k for k = -1..kmax.  The recursion for psi'_{k+1} only involves
    psi'_{-1..k}, so a single chain serves every n."""
    with _memo_lock:
        if kmax in _psi_memo or all(k in _psi_memo for k in range(-1, kmax + 1)):
            return [_psi_memo[k] for k in range(-1, kmax + 1)]
        if -1 not in _psi_memo:
            _psi_memo[-1] = TermSum.single(I, (), -1, 1)
        inv_two_psi = TermSum.single(ONE / (2 * I), (), 1, -1)
        for k in range(-1, kmax):
            if k + 1 in _psi_memo:
                continue
            acc = t_derive(_psi_memo[k])
            for a in range(0, k + 1):
                b = k - a
                acc = acc - t_mul(_psi_memo[a], _psi_memo[b])
            _psi_memo[k + 1] = t_mul(inv_two_psi, acc)
        return [_psi_memo[k] for k in range(-1, kmax + 1)]


def gen_psi_prime(k: int, n: int | None = None) -> TermSum:
    """psi'_k as an exact term sum.

    ``n`` only fixes the admissible range ``k <= n - 1``; the value of
    psi'_k itself does not depend on n.
    """
    if k < -1 or (n is not None and k > n - 1):
        raise ValueError(f"k={k} out of range [-1, {None if n is None else n - 1}]")
    return _psi_prime_chain(k)[k + 1]


def gen_psi_derivative(k: int, m: int) -> TermSum:
    """psi_k^(m) for m >= 1 (m = 1 is psi'_k)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    s = gen_psi_prime(k)
    for _ in range(m - 1):
        s = t_derive(s)
    return s


def gen_exponent_derivative(n: int) -> TermSum:
    """E' = sum_{k=-1}^{n-1} lam^{-k/2} psi'_k, so that g = exp(-E)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    chain = _psi_prime_chain(n - 1) if n >= 1 else _psi_prime_chain(-1)
    return t_add(*[t_shift(chain[k + 1], lam=-k) for k in range(-1, n)])


_rem_memo: Dict[int, TermSum] = {}


def gen_remainder(n: int) -> TermSum:
    """r_n with -g'' + (V - lam) g = r_n g.

    Computed as E'' - E'^2 + (V - lam), where V - lam = -(lam - V) is the
    single term -(lam - V)^{2/2}.  The terms of order lam^{-k/2}, k <= n-2,
    cancel identically because of the recursion.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    with _memo_lock:
        if n in _rem_memo:
            return _rem_memo[n]
    e1 = gen_exponent_derivative(n)
    r = t_derive(e1) - t_mul(e1, e1) - TermSum.single(1, (), 0, 2)
    with _memo_lock:
        _rem_memo[n] = r
    return r


# --------------------------------------------------------------------------
# structure checks


@dataclass
class StructureReport:
    ok: bool
    checked: int
    violations: List[Tuple[Term, str]] = field(default_factory=list)


def structure_check(s: TermSum, k: int, m: int) -> StructureReport:
    """Check that ``s`` fits the normal form of psi_k^(m).

    Each term must read lam^{k/2} (lam - V)^{-k/2} T /(lam - V)^j where T is a
    monomial with exactly j factors, weight k + m, highest derivative at most
    k + m + 1 - j, 0 <= j <= k + m, and no constant monomial when k + m >= 1.
    """
    r = k + m
    bad: List[Tuple[Term, str]] = []
    for t in s:
        j = mono_factors(t.mono)
        if t.lam_half_pow != k:
            bad.append((t, f"lam power {t.lam_half_pow} != {k}"))
            continue
        if t.res_half_pow != -k - 2 * j:
            bad.append((t, f"(lam-V) power {t.res_half_pow} != {-k - 2 * j}"))
            continue
        if not 0 <= j <= r:
            bad.append((t, f"j={j} outside [0, {r}]"))
            continue
        if mono_weight(t.mono) != r:
            bad.append((t, f"weight {mono_weight(t.mono)} != {r}"))
            continue
        if mono_max_order(t.mono) > r + 1 - j:
            bad.append((t, f"derivative order {mono_max_order(t.mono)} > {r + 1 - j}"))
            continue
        if j == 0 and r >= 1:
            bad.append((t, "constant monomial with r >= 1"))
    return StructureReport(not bad, len(s), bad)


def remainder_shape_check(n: int, s: TermSum | None = None) -> StructureReport:
    """Check r_n against the remainder template.

    Allowed: the head V^(n+1) (lam - V)^{-(n+1)/2}, or for some k in [0, n-1]
    and l in [2, n+1+k] a monomial with l factors, weight n+1+k, highest
    derivative <= n, times (lam - V)^{-(n-1+k)/2 - l}.  No lam powers.
    """
    s = gen_remainder(n) if s is None else s
    bad: List[Tuple[Term, str]] = []
    for t in s:
        if t.lam_half_pow != 0:
            bad.append((t, "lam power"))
            continue
        j = mono_factors(t.mono)
        w = mono_weight(t.mono)
        if t.mono == ((n + 1, 1),) and t.res_half_pow == -(n + 1):
            continue
        fits = False
        for k in range(0, n):
            if w == n + 1 + k and 2 <= j <= n + 1 + k and mono_max_order(t.mono) <= n:
                if t.res_half_pow == -(n - 1 + k) - 2 * j:
                    fits = True
                    break
        if not fits:
            bad.append((t, "no template match"))
    return StructureReport(not bad, len(s), bad)


def format_termsum(s: TermSum) -> str:
    """Stable human-readable form, one term per line."""
    if s.is_zero():
        return "0"
    lines = []
    for t in s:
        parts = [str(t.coeff)]
        for i, p in t.mono:
            parts.append(f"V^({i})" + (f"^{p}" if p != 1 else ""))
        if t.lam_half_pow:
            parts.append(f"lam^({t.lam_half_pow}/2)")
        if t.res_half_pow:
            parts.append(f"(lam-V)^({t.res_half_pow}/2)")
        lines.append(" * ".join(parts))
    return "\n".join(lines)


def terms_in(s: TermSum) -> Iterable[Term]:
    return s.terms
