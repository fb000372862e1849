"""Dense pointwise tensors on a 4-dimensional space.

Components are stored with all contravariant slots first, then all
covariant slots.  Lowering a contravariant slot moves it to the front of the
covariant block; raising a covariant slot moves it to the back of the
contravariant block.  With that rule ``raise_index(lower_index(t, p-1), p-1)``
and ``lower_index(raise_index(t, p), p)`` are exact round trips.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DIM = 4
SINGULAR_DET = 1e-14


class SingularMetricError(ValueError):
    pass


class SlotError(ValueError):
    pass


@dataclass(frozen=True)
class Tensor:
    components: np.ndarray
    valence: tuple[int, int] = (0, 0)

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float)
        p, q = self.valence
        if p < 0 or q < 0:
            raise ValueError(f"bad valence {self.valence}")
        if comps.shape != (DIM,) * (p + q):
            raise ValueError(f"valence {self.valence} needs shape {(DIM,) * (p + q)}, got {comps.shape}")
        if not np.all(np.isfinite(comps)):
            raise ValueError("tensor components must be finite")
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "valence", (int(p), int(q)))

    @property
    def rank(self) -> int:
        return sum(self.valence)

    def __add__(self, other: "Tensor") -> "Tensor":
        _same_valence(self, other)
        return Tensor(self.components + other.components, self.valence)

    def __sub__(self, other: "Tensor") -> "Tensor":
        _same_valence(self, other)
        return Tensor(self.components - other.components, self.valence)

    def __mul__(self, scalar: float) -> "Tensor":
        return Tensor(self.components * float(scalar), self.valence)

    __rmul__ = __mul__

    def __neg__(self) -> "Tensor":
        return Tensor(-self.components, self.valence)


def _same_valence(a: Tensor, b: Tensor) -> None:
    if a.valence != b.valence:
        raise SlotError(f"valence mismatch {a.valence} vs {b.valence}")


def _array(t) -> np.ndarray:
    return t.components if isinstance(t, Tensor) else np.asarray(t, dtype=float)


def identity() -> Tensor:
    return Tensor(np.eye(DIM), (1, 1))


def invert_metric(g) -> Tensor:
    """Inverse of a (0,2) metric value, as a (2,0) tensor."""
    m = _array(g)
    if m.shape != (DIM, DIM):
        raise ValueError("metric must be 4x4")
    det = np.linalg.det(m)
    if not np.isfinite(det) or abs(det) < SINGULAR_DET:
        raise SingularMetricError(f"singular metric (det={det:.3e})")
    return Tensor(np.linalg.inv(m), (2, 0))


def signature(g) -> tuple[int, int]:
    """(negative, positive) eigenvalue counts of a symmetric metric value."""
    w = np.linalg.eigvalsh(_array(g))
    return int(np.sum(w < 0)), int(np.sum(w > 0))


def tensor_product(a: Tensor, b: Tensor) -> Tensor:
    pa, qa = a.valence
    pb, qb = b.valence
    outer = np.multiply.outer(a.components, b.components)
    ra = pa + qa
    order = (
        list(range(pa)) + [ra + i for i in range(pb)]
        + [pa + i for i in range(qa)] + [ra + pb + i for i in range(qb)]
    )
    return Tensor(np.transpose(outer, order), (pa + pb, qa + qb))


def contract(t: Tensor, upper_slot: int, lower_slot: int) -> Tensor:
    """Trace over one contravariant and one covariant slot."""
    p, q = t.valence
    if not (0 <= upper_slot < p):
        raise SlotError(f"slot {upper_slot} is not contravariant in valence {t.valence}")
    if not (p <= lower_slot < p + q):
        raise SlotError(f"slot {lower_slot} is not covariant in valence {t.valence}")
    return Tensor(np.trace(t.components, axis1=upper_slot, axis2=lower_slot), (p - 1, q - 1))


def lower_index(t: Tensor, slot: int, g) -> Tensor:
    p, q = t.valence
    if not (0 <= slot < p):
        raise SlotError(f"slot {slot} is not contravariant in valence {t.valence}")
    comps = np.tensordot(t.components, _array(g), axes=([slot], [0]))
    # new covariant axis sits last; move it to the front of the covariant block
    comps = np.moveaxis(comps, -1, slot)
    comps = np.moveaxis(comps, slot, p - 1)
    return Tensor(comps, (p - 1, q + 1))


def raise_index(t: Tensor, slot: int, g_inv) -> Tensor:
    p, q = t.valence
    if not (p <= slot < p + q):
        raise SlotError(f"slot {slot} is not covariant in valence {t.valence}")
    comps = np.tensordot(t.components, _array(g_inv), axes=([slot], [0]))
    comps = np.moveaxis(comps, -1, p)
    return Tensor(comps, (p + 1, q - 1))


def max_abs(t) -> float:
    """Largest absolute chart component; 0 for an empty/zero tensor."""
    a = _array(t)
    return float(np.max(np.abs(a))) if a.size else 0.0


def metric_square_norm(t: Tensor, g, g_inv) -> float:
    """Full self-contraction of ``t`` using the metric on every slot."""
    p, q = t.valence
    lowered = t.components
    for s in range(p):
        lowered = np.moveaxis(np.tensordot(lowered, _array(g), axes=([s], [0])), -1, s)
    raised = t.components
    for s in range(p, p + q):
        raised = np.moveaxis(np.tensordot(raised, _array(g_inv), axes=([s], [0])), -1, s)
    return float(np.sum(lowered * raised))
