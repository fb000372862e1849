"""Truncated multivariate Taylor polynomials ("jets") of tensor fields.

A :class:`Jet` stores, for every tensor component, the Taylor coefficients
``c_a = d^a f / a!`` of a field around a point for all multi-indices ``a``
in the four chart coordinates up to a fixed order.  Products, partial
derivatives and matrix inversion act exactly on the coefficients, so a
metric known to third order yields Christoffel symbols to second order,
Riemann to first order and so on, without any finite differencing.

Coefficient axis is always last; monomials are sorted by total degree, so a
jet of order ``k`` uses the first ``NMONO[k]`` monomials.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

DIM = 4
MAX_ORDER = 3


def _monomials(order: int) -> list[tuple[int, ...]]:
    out = []
    for deg in range(order + 1):
        block = [m for m in itertools.product(range(deg + 1), repeat=DIM) if sum(m) == deg]
        out.extend(sorted(block, reverse=True))
    return out


MONOMIALS = _monomials(MAX_ORDER)
INDEX = {m: k for k, m in enumerate(MONOMIALS)}
NMONO = [sum(1 for m in MONOMIALS if sum(m) <= k) for k in range(MAX_ORDER + 1)]
FACTORIAL = np.array([math.prod(math.factorial(e) for e in m) for m in MONOMIALS], float)


def multi_index(mono: tuple[int, ...]) -> tuple[int, ...]:
    """Sorted coordinate-index tuple of a monomial, e.g. (2,0,1,0) -> (0,0,2)."""
    return tuple(i for i, e in enumerate(mono) for _ in range(e))


def _mult_table() -> np.ndarray:
    n = len(MONOMIALS)
    table = np.zeros((n, n, n))
    for p, mp in enumerate(MONOMIALS):
        for q, mq in enumerate(MONOMIALS):
            s = tuple(a + b for a, b in zip(mp, mq))
            if sum(s) <= MAX_ORDER:
                table[p, q, INDEX[s]] = 1.0
    return table


def _diff_table() -> np.ndarray:
    n = len(MONOMIALS)
    table = np.zeros((DIM, n, n))
    for i in range(DIM):
        for out, m in enumerate(MONOMIALS):
            up = list(m)
            up[i] += 1
            up = tuple(up)
            if sum(up) <= MAX_ORDER:
                table[i, out, INDEX[up]] = m[i] + 1
    return table


MULT = _mult_table()
DIFF = _diff_table()


class Jet:
    """Tensor-valued truncated Taylor polynomial."""

    __slots__ = ("coef", "order")

    def __init__(self, coef: np.ndarray, order: int):
        coef = np.asarray(coef, dtype=float)
        if coef.shape[-1] != NMONO[order]:
            raise ValueError(f"order {order} jet needs {NMONO[order]} coefficients, got {coef.shape[-1]}")
        self.coef = coef
        self.order = order

    @classmethod
    def constant(cls, value, order: int = MAX_ORDER) -> "Jet":
        value = np.asarray(value, dtype=float)
        coef = np.zeros(value.shape + (NMONO[order],))
        coef[..., 0] = value
        return cls(coef, order)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coef.shape[:-1]

    @property
    def value(self) -> np.ndarray:
        return self.coef[..., 0].copy()

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise ValueError("cannot raise the order of a jet")
        if order == self.order:
            return self
        return Jet(self.coef[..., : NMONO[order]], order)

    def grad(self) -> "Jet":
        """Partial derivatives; the derivative index is appended last."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 jet")
        n_out, n_in = NMONO[self.order - 1], NMONO[self.order]
        d = DIFF[:, :n_out, :n_in]
        coef = np.einsum("...q,ipq->...ip", self.coef, d)
        return Jet(coef, self.order - 1)

    def _coerce(self, other):
        if isinstance(other, Jet):
            order = min(self.order, other.order)
            return self.truncate(order).coef, other.truncate(order).coef, order
        other = np.asarray(other, dtype=float)
        return self.coef, Jet.constant(other, self.order).coef, self.order

    def __add__(self, other) -> "Jet":
        a, b, order = self._coerce(other)
        return Jet(a + b, order)

    __radd__ = __add__

    def __sub__(self, other) -> "Jet":
        a, b, order = self._coerce(other)
        return Jet(a - b, order)

    def __rsub__(self, other) -> "Jet":
        a, b, order = self._coerce(other)
        return Jet(b - a, order)

    def __neg__(self) -> "Jet":
        return Jet(-self.coef, self.order)

    def __mul__(self, scalar: float) -> "Jet":
        return Jet(self.coef * float(scalar), self.order)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "Jet":
        return Jet(self.coef / float(scalar), self.order)

    def __repr__(self) -> str:
        return f"Jet(shape={self.shape}, order={self.order})"


def _pair(sa: str, a, sb: str, b, keep: str):
    a_jet, b_jet = isinstance(a, Jet), isinstance(b, Jet)
    if a_jet and b_jet:
        order = min(a.order, b.order)
        n = NMONO[order]
        ca, cb = a.coef[..., :n], b.coef[..., :n]
        outer = np.einsum(f"{sa}P,{sb}Q->{keep}PQ", ca, cb)
        table = MULT[:n, :n, :n].reshape(n * n, n)
        coef = outer.reshape(outer.shape[:-2] + (n * n,)) @ table
        return Jet(coef, order)
    if a_jet:
        return Jet(np.einsum(f"{sa}P,{sb}->{keep}P", a.coef, b), a.order)
    if b_jet:
        return Jet(np.einsum(f"{sa},{sb}P->{keep}P", a, b.coef), b.order)
    return np.einsum(f"{sa},{sb}->{keep}", a, b)


def jeinsum(subscripts: str, *operands):
    """``numpy.einsum`` over tensor indices, with jet multiplication.

    Operands may be :class:`Jet` or plain arrays (treated as constants).
    Subscripts use lowercase letters only; the result order is the minimum
    order of the jet operands.
    """
    ins, out = subscripts.replace(" ", "").split("->")
    subs = ins.split(",")
    if len(subs) != len(operands):
        raise ValueError("operand count does not match subscripts")
    cur_sub, cur = subs[0], operands[0]
    for k in range(1, len(operands)):
        needed = set(out) | set("".join(subs[k + 1:]))
        keep = "".join(dict.fromkeys(c for c in cur_sub + subs[k] if c in needed))
        cur = _pair(cur_sub, cur, subs[k], operands[k], keep)
        cur_sub = keep
    if isinstance(cur, Jet):
        return Jet(np.einsum(f"{cur_sub}P->{out}P", cur.coef), cur.order)
    return np.einsum(f"{cur_sub}->{out}", cur)


def inverse(g: Jet) -> Jet:
    """Jet of the matrix inverse of a (4, 4) matrix-valued jet (Neumann series)."""
    base = np.linalg.inv(g.value)
    delta = g - g.value
    result = Jet.constant(base, g.order)
    term = result
    for _ in range(g.order):
        term = -jeinsum("ab,bc,cd->ad", term, delta, base)
        result = result + term
    return result


def from_partials(values: np.ndarray, order: int) -> Jet:
    """Build a jet from raw partial-derivative values laid out per monomial."""
    n = NMONO[order]
    return Jet(np.asarray(values, float)[..., :n] / FACTORIAL[:n], order)
