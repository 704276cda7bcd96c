"""Canonical multivariate polynomials over Z_t.

A monomial is a sorted tuple of variable ids with repetition, so ``x0*x0*x3``
is ``(0, 0, 3)`` and the constant monomial is ``()``.  Zero coefficients are
never stored, which makes equality of canonical objects equality of dicts.
"""

from __future__ import annotations

import itertools
from typing import Callable, Iterable, Mapping

import numpy as np


def _merge(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    return tuple(sorted(a + b))


class Poly:
    __slots__ = ("t", "terms", "_hash")

    def __init__(self, t: int, terms: Mapping[tuple, int] | None = None):
        self.t = t
        clean = {}
        if terms:
            for m, c in terms.items():
                c %= t
                if c:
                    clean[tuple(sorted(m))] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, t: int, terms: dict) -> "Poly":
        p = cls.__new__(cls)
        p.t = t
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def var(cls, v: int, t: int) -> "Poly":
        return cls._raw(t, {(v,): 1})

    @classmethod
    def const(cls, c: int, t: int) -> "Poly":
        c %= t
        return cls._raw(t, {(): c} if c else {})

    @classmethod
    def zero(cls, t: int) -> "Poly":
        return cls._raw(t, {})

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.t != self.t:
                raise ValueError("modulus mismatch between polynomials")
            return other
        if isinstance(other, (int, np.integer)):
            return Poly.const(int(other), self.t)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if len(other.terms) > len(self.terms):
            return other + self
        t = self.t
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = (out.get(m, 0) + c) % t
            if v:
                out[m] = v
            else:
                out.pop(m, None)
        return Poly._raw(t, out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        t = self.t
        return Poly._raw(t, {m: t - c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        t = self.t
        if not self.terms or not other.terms:
            return Poly.zero(t)
        if len(other.terms) == 1 and () in other.terms:
            k = other.terms[()]
            return Poly._raw(t, {m: c * k % t for m, c in self.terms.items() if c * k % t})
        out: dict = {}
        for (m1, c1), (m2, c2) in itertools.product(self.terms.items(), other.terms.items()):
            m = _merge(m1, m2)
            out[m] = (out.get(m, 0) + c1 * c2) % t
        return Poly._raw(t, {m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "Poly":
        out = Poly.const(1, self.t)
        for _ in range(e):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, np.integer)):
            other = Poly.const(int(other), self.t)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.t == other.t and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.t, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def variables(self) -> set:
        return {v for m in self.terms for v in m}

    def monomials(self) -> list:
        """Monomials in canonical order: by degree, then lexicographically."""
        return sorted(self.terms, key=lambda m: (len(m), m))

    def coeff(self, monomial: Iterable[int]) -> int:
        return self.terms.get(tuple(sorted(monomial)), 0)

    def evaluate(self, point: Mapping[int, object]):
        """Evaluate at ``point`` (var -> int or array); missing variables are 0.

        Array values broadcast, so one call can evaluate a whole batch.
        """
        t = self.t
        acc = 0
        for m, c in self.terms.items():
            term = c
            for v in m:
                x = point.get(v, 0)
                term = (term * x) % t
            acc = (acc + term) % t
        return acc

    def substitute(self, mapping: Callable[[int], "Poly"]) -> "Poly":
        """Replace each variable ``v`` by ``mapping(v)``."""
        t = self.t
        cache: dict = {}
        out = Poly.zero(t)
        for m, c in self.terms.items():
            term = Poly.const(c, t)
            for v in m:
                if v not in cache:
                    cache[v] = mapping(v)
                term = term * cache[v]
            out = out + term
        return out

    def to_str(self, name: Callable[[int], str] = lambda v: f"x{v}") -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in self.monomials():
            c = self.terms[m]
            # show t - c as a negative coefficient
            neg = c > self.t // 2
            mag = self.t - c if neg else c
            body = "*".join(name(v) for v in m)
            if not body:
                s = str(mag)
            elif mag == 1:
                s = body
            else:
                s = f"{mag}*{body}"
            parts.append(("- " if neg else "+ ") + s)
        out = " ".join(parts)
        return out[2:] if out.startswith("+ ") else "-" + out[1:]

    def __repr__(self):
        return f"Poly({self.to_str()})"

    def to_json(self) -> list:
        return [[list(m), c] for m, c in sorted(self.terms.items(), key=lambda kv: (len(kv[0]), kv[0]))]

    @classmethod
    def from_json(cls, data, t: int) -> "Poly":
        return cls(t, {tuple(m): c for m, c in data})
