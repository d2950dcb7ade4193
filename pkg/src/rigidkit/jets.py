"""Truncated univariate Taylor series (jets) at t = 0.

A Jet holds coefficients c[0..M] of a series truncated at order M.  Ring
operations and the composition helpers sqrt, exp, reciprocal and integer
powers are exact on polynomial inputs up to the truncation order (up to
rounding), which is what makes high-order differentiation of energies along
polynomial trajectories exact.

Every jet also carries a running magnitude vector: the same recurrences
applied to absolute values.  The ratio mag[i] / |c[i]| estimates how much
cancellation went into coefficient i, i.e. how many digits of it can be
trusted; it is reported, not asserted against.
"""

from __future__ import annotations

import numpy as np

MAX_ORDER = 64


class Jet:
    """Immutable truncated Taylor series sum_i c[i] t^i, i <= order."""

    __slots__ = ("c", "mag")

    def __init__(self, coeffs, mag=None):
        c = np.array(coeffs, dtype=float)
        if c.ndim != 1 or c.size < 1:
            raise ValueError("jet coefficients must be a 1-D array")
        if c.size - 1 > MAX_ORDER:
            raise ValueError(f"jet order {c.size - 1} exceeds the cap {MAX_ORDER}")
        c.setflags(write=False)
        self.c = c
        m = np.abs(c) if mag is None else np.array(mag, dtype=float)
        m.setflags(write=False)
        self.mag = m

    @property
    def order(self) -> int:
        return self.c.size - 1

    @classmethod
    def constant(cls, value: float, order: int) -> "Jet":
        c = np.zeros(order + 1)
        c[0] = value
        return cls(c)

    @classmethod
    def from_poly(cls, base: float, t_coeffs, order: int) -> "Jet":
        """Jet of base + sum_l t_coeffs[l-1] t^l, truncated at the given order."""
        c = np.zeros(order + 1)
        c[0] = base
        tc = np.asarray(t_coeffs, dtype=float)
        n = min(tc.size, order)
        c[1 : n + 1] = tc[:n]
        return cls(c)

    def condition(self) -> np.ndarray:
        """Per-coefficient cancellation estimate mag[i] / |c[i]| (inf where
        the coefficient is an exact zero amid nonzero magnitude)."""
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(self.mag == 0.0, 1.0, self.mag / np.abs(self.c))
        return out

    # -- ring operations ----------------------------------------------------

    def _coerce(self, other) -> "Jet":
        if isinstance(other, Jet):
            if other.order != self.order:
                raise ValueError("jet orders differ")
            return other
        return Jet.constant(float(other), self.order)

    def __add__(self, other):
        o = self._coerce(other)
        return Jet(self.c + o.c, self.mag + o.mag)

    __radd__ = __add__

    def __neg__(self):
        return Jet(-self.c, self.mag)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, np.floating)):
            s = float(other)
            return Jet(self.c * s, self.mag * abs(s))
        o = self._coerce(other)
        n = self.order + 1
        c = np.convolve(self.c, o.c)[:n]
        m = np.convolve(self.mag, o.mag)[:n]
        return Jet(c, m)

    __rmul__ = __mul__

    def power(self, n: int) -> "Jet":
        if n < 0:
            return self.reciprocal().power(-n)
        out = Jet.constant(1.0, self.order)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    __pow__ = power

    # -- composition helpers ------------------------------------------------

    def reciprocal(self) -> "Jet":
        g = self.c
        if g[0] == 0.0:
            raise ZeroDivisionError("jet reciprocal with zero constant term")
        n = self.order
        h = np.zeros(n + 1)
        hm = np.zeros(n + 1)
        h[0] = 1.0 / g[0]
        hm[0] = abs(h[0])
        for k in range(1, n + 1):
            acc = np.dot(g[1 : k + 1], h[k - 1 :: -1])
            accm = np.dot(self.mag[1 : k + 1], hm[k - 1 :: -1])
            h[k] = -acc / g[0]
            hm[k] = accm / abs(g[0])
        return Jet(h, hm)

    def sqrt(self) -> "Jet":
        g = self.c
        if g[0] <= 0.0:
            raise ValueError("jet sqrt needs a positive constant term")
        n = self.order
        h = np.zeros(n + 1)
        hm = np.zeros(n + 1)
        h[0] = np.sqrt(g[0])
        hm[0] = h[0]
        for k in range(1, n + 1):
            acc = np.dot(h[1:k], h[k - 1 : 0 : -1]) if k > 1 else 0.0
            accm = np.dot(hm[1:k], hm[k - 1 : 0 : -1]) if k > 1 else 0.0
            h[k] = (g[k] - acc) / (2.0 * h[0])
            hm[k] = (self.mag[k] + accm) / (2.0 * h[0])
        return Jet(h, hm)

    def exp(self) -> "Jet":
        g = self.c
        n = self.order
        h = np.zeros(n + 1)
        hm = np.zeros(n + 1)
        h[0] = np.exp(g[0])
        hm[0] = h[0]
        ks = np.arange(n + 1, dtype=float)
        for k in range(1, n + 1):
            acc = np.dot(ks[1 : k + 1] * g[1 : k + 1], h[k - 1 :: -1])
            accm = np.dot(ks[1 : k + 1] * self.mag[1 : k + 1], hm[k - 1 :: -1])
            h[k] = acc / k
            hm[k] = accm / k
        return Jet(h, hm)

    def __repr__(self):
        return f"Jet({self.c.tolist()})"


def compose_series(f_derivs, g: Jet) -> Jet:
    """Jet of f(g(t)) given derivatives f(g0), f'(g0), ..., f^(m)(g0).

    Evaluates the Taylor polynomial of f around g0 at the shifted jet
    g - g0 by Horner's scheme; exact through min(order, m).
    """
    fd = np.asarray(f_derivs, dtype=float)
    shifted = Jet(np.concatenate(([0.0], g.c[1:])), np.concatenate(([0.0], g.mag[1:])))
    fact = 1.0
    coeffs = []
    for m in range(fd.size):
        coeffs.append(fd[m] / fact)
        fact *= m + 1
    out = Jet.constant(coeffs[-1], g.order)
    for a in reversed(coeffs[:-1]):
        out = out * shifted + a
    return out
