"""Truncated Taylor arithmetic, vectorised over evaluation points.

A jet of order M at points x holds the normalised Taylor coefficients
c_k = f^(k)(x) / k!, k = 0..M, as an array of shape (M + 1, len(x)).
The standard coefficient recurrences give exact derivatives (up to
rounding) of compositions of elementary functions.
"""

from __future__ import annotations

from math import factorial

import numpy as np

__all__ = ["Jet"]


class Jet:
    __slots__ = ("c",)

    def __init__(self, coeffs):
        self.c = np.asarray(coeffs, dtype=complex)

    # -- construction -----------------------------------------------------
    @classmethod
    def variable(cls, x, order: int) -> "Jet":
        x = np.atleast_1d(np.asarray(x, dtype=float))
        c = np.zeros((order + 1, x.size), dtype=complex)
        c[0] = x
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @classmethod
    def constant(cls, value, like: "Jet") -> "Jet":
        c = np.zeros_like(like.c)
        c[0] = value
        return cls(c)

    @property
    def order(self) -> int:
        return self.c.shape[0] - 1

    def derivatives(self) -> np.ndarray:
        """Array of f^(k)(x), shape (M + 1, npts)."""
        fac = np.array([factorial(k) for k in range(self.order + 1)], dtype=float)
        return self.c * fac[:, None]

    # -- arithmetic -------------------------------------------------------
    def _lift(self, other) -> "Jet":
        return other if isinstance(other, Jet) else Jet.constant(other, self)

    def __add__(self, other):
        return Jet(self.c + self._lift(other).c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c)

    def __sub__(self, other):
        return Jet(self.c - self._lift(other).c)

    def __rsub__(self, other):
        return Jet(self._lift(other).c - self.c)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c * other)
        a, b = self.c, other.c
        out = np.zeros_like(a)
        for k in range(a.shape[0]):
            out[k] = np.sum(a[: k + 1] * b[k::-1], axis=0)
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.c / other)
        a, b = self.c, other.c
        out = np.zeros_like(a)
        for k in range(a.shape[0]):
            s = a[k] - np.sum(b[1 : k + 1] * out[k - 1 :: -1][:k], axis=0) if k else a[0]
            out[k] = s / b[0]
        return Jet(out)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, p):
        if isinstance(p, (int, np.integer)) and p >= 0:
            out = Jet.constant(1.0, self)
            base = self
            e = int(p)
            while e:
                if e & 1:
                    out = out * base
                base = base * base
                e >>= 1
            return out
        return self.power(p)

    def power(self, p: float) -> "Jet":
        """a^p for real p, principal branch; requires a0 != 0."""
        a = self.c
        out = np.zeros_like(a)
        out[0] = a[0] ** p
        for k in range(1, a.shape[0]):
            j = np.arange(1, k + 1)[:, None]
            out[k] = np.sum(((p + 1) * j - k) * a[1 : k + 1] * out[k - 1 :: -1][:k], axis=0) / (k * a[0])
        return Jet(out)

    def exp(self) -> "Jet":
        a = self.c
        out = np.zeros_like(a)
        out[0] = np.exp(a[0])
        for k in range(1, a.shape[0]):
            j = np.arange(1, k + 1)[:, None]
            out[k] = np.sum(j * a[1 : k + 1] * out[k - 1 :: -1][:k], axis=0) / k
        return Jet(out)

    def log(self) -> "Jet":
        a = self.c
        out = np.zeros_like(a)
        out[0] = np.log(a[0])
        for k in range(1, a.shape[0]):
            j = np.arange(1, k)[:, None]
            acc = np.sum(j * out[1:k] * a[k - 1 : 0 : -1], axis=0) if k > 1 else 0.0
            out[k] = (a[k] - acc / k) / a[0]
        return Jet(out)

    def _sincos(self, hyperbolic: bool):
        a = self.c
        s = np.zeros_like(a)
        c = np.zeros_like(a)
        if hyperbolic:
            s[0], c[0] = np.sinh(a[0]), np.cosh(a[0])
        else:
            s[0], c[0] = np.sin(a[0]), np.cos(a[0])
        sign = 1.0 if hyperbolic else -1.0
        for k in range(1, a.shape[0]):
            j = np.arange(1, k + 1)[:, None]
            s[k] = np.sum(j * a[1 : k + 1] * c[k - 1 :: -1][:k], axis=0) / k
            c[k] = sign * np.sum(j * a[1 : k + 1] * s[k - 1 :: -1][:k], axis=0) / k
        return Jet(s), Jet(c)

    def sin(self):
        return self._sincos(False)[0]

    def cos(self):
        return self._sincos(False)[1]

    def sinh(self):
        return self._sincos(True)[0]

    def cosh(self):
        return self._sincos(True)[1]

    def arctan(self) -> "Jet":
        """arctan via b' = a' / (1 + a^2)."""
        a = self.c
        M = a.shape[0] - 1
        out = np.zeros_like(a)
        out[0] = np.arctan(a[0].real) if np.all(a[0].imag == 0) else np.arctan(a[0])
        if M == 0:
            return Jet(out)
        da = Jet(np.array([(k + 1) * a[k + 1] for k in range(M)]))
        base = Jet(a[:M])
        q = da / (base * base + 1.0)
        for k in range(1, M + 1):
            out[k] = q.c[k - 1] / k
        return Jet(out)
