"""The shifted lattice Z' = Z + 1/2 and filling functions on it."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering
from typing import Iterator, Mapping

import numpy as np

from .errors import ParameterOutOfRange

__all__ = ["HalfInt", "as_halfint", "halfint_range", "SigmaProfile"]


@total_ordering
@dataclass(frozen=True)
class HalfInt:
    """A point ``twice / 2`` of Z', stored through the odd integer ``twice``."""

    twice: int

    def __post_init__(self):
        if not isinstance(self.twice, (int, np.integer)) or self.twice % 2 == 0:
            raise ParameterOutOfRange(f"HalfInt needs an odd doubling, got {self.twice!r}")
        object.__setattr__(self, "twice", int(self.twice))

    @classmethod
    def parse(cls, text: str) -> "HalfInt":
        """Parse ``"p/2"`` with ``p`` odd, or a decimal such as ``"-0.5"``."""
        text = text.strip()
        if "/" in text:
            num, den = text.split("/")
            if den.strip() != "2":
                raise ParameterOutOfRange(f"half-integer must be written p/2, got {text!r}")
            return cls(int(num))
        return cls.from_float(float(text))

    @classmethod
    def from_float(cls, value: float) -> "HalfInt":
        twice = 2.0 * value
        if twice != math.floor(twice) or int(twice) % 2 == 0:
            raise ParameterOutOfRange(f"{value!r} is not in Z + 1/2")
        return cls(int(twice))

    @classmethod
    def nearest(cls, value: float) -> "HalfInt":
        """The element of Z' closest to ``value`` (ties go up)."""
        return cls(2 * math.floor(value) + 1)

    @property
    def lower(self) -> int:
        """The integer ``self - 1/2``."""
        return (self.twice - 1) // 2

    @property
    def upper(self) -> int:
        """The integer ``self + 1/2``."""
        return (self.twice + 1) // 2

    def __float__(self) -> float:
        return self.twice / 2.0

    def __add__(self, other):
        if isinstance(other, (int, np.integer)):
            return HalfInt(self.twice + 2 * int(other))
        if isinstance(other, HalfInt):
            return (self.twice + other.twice) // 2
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, np.integer)):
            return HalfInt(self.twice - 2 * int(other))
        if isinstance(other, HalfInt):
            return (self.twice - other.twice) // 2
        return NotImplemented

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.twice)

    def __lt__(self, other) -> bool:
        if isinstance(other, HalfInt):
            return self.twice < other.twice
        return float(self) < other

    def __str__(self) -> str:
        return f"{self.twice}/2"


def as_halfint(value) -> HalfInt:
    """Coerce ``HalfInt``, ``"p/2"`` strings, ``Fraction`` or floats into :class:`HalfInt`."""
    if isinstance(value, HalfInt):
        return value
    if isinstance(value, str):
        return HalfInt.parse(value)
    if isinstance(value, Fraction):
        if value.denominator != 2:
            raise ParameterOutOfRange(f"{value} is not in Z + 1/2")
        return HalfInt(value.numerator)
    return HalfInt.from_float(float(value))


def halfint_range(lo, hi) -> list[HalfInt]:
    """Inclusive range ``lo, lo+1, ..., hi`` of half-integers."""
    lo, hi = as_halfint(lo), as_halfint(hi)
    return [HalfInt(t) for t in range(lo.twice, hi.twice + 1, 2)]


def _halfint_ceil(t: float) -> float:
    """Smallest element of Z' that is >= t."""
    return math.ceil(t - 0.5) + 0.5


@dataclass(frozen=True)
class SigmaProfile:
    """A filling function ``sigma: Z' -> [0, 1]`` with a constructive left-tail bound.

    Build instances with :meth:`indicator`, :meth:`fermi`, :meth:`table` or
    :meth:`zero`.  Profiles are immutable and hashable so that determinant
    evaluations can be memoised on them.

    ``table`` profiles must say what happens outside the listed points: to the
    left either ``"zero"`` or ``"geometric"`` decay with a given ratio, to the
    right a constant ``right_value`` (default: the value at the largest key).
    """

    kind: str
    u: float = 0.0
    items: tuple = ()
    left_tail: str = "zero"
    ratio: float = 0.0
    right_value: float = 0.0
    _lookup: dict = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("indicator", "fermi", "table"):
            raise ParameterOutOfRange(f"unknown sigma kind {self.kind!r}")
        if self.kind == "fermi" and not 0.0 <= self.u < 1.0:
            raise ParameterOutOfRange(f"fermi parameter u must lie in [0, 1), got {self.u}")
        if self.kind == "table":
            for t, v in self.items:
                if t % 2 == 0:
                    raise ParameterOutOfRange(f"table key {t}/2 is not in Z'")
                if not 0.0 <= v <= 1.0:
                    raise ParameterOutOfRange(f"table value {v} outside [0, 1]")
            if self.left_tail not in ("zero", "geometric"):
                raise ParameterOutOfRange(f"left_tail must be 'zero' or 'geometric', got {self.left_tail!r}")
            if self.left_tail == "geometric" and not 0.0 <= self.ratio < 1.0:
                raise ParameterOutOfRange(f"geometric tail ratio must lie in [0, 1), got {self.ratio}")
            if not 0.0 <= self.right_value <= 1.0:
                raise ParameterOutOfRange(f"right_value {self.right_value} outside [0, 1]")
            object.__setattr__(self, "_lookup", dict(self.items))

    # -- constructors -----------------------------------------------------

    @classmethod
    def indicator(cls) -> "SigmaProfile":
        """``sigma(l) = 1`` for ``l > 0`` and 0 otherwise."""
        return cls(kind="indicator")

    @classmethod
    def fermi(cls, u: float) -> "SigmaProfile":
        """Fermi factor ``sigma(l) = 1 / (1 + u**l)``."""
        return cls(kind="fermi", u=float(u))

    @classmethod
    def table(
        cls,
        values: Mapping,
        left_tail: str = "zero",
        ratio: float = 0.0,
        right_value: float | None = None,
    ) -> "SigmaProfile":
        items = tuple(sorted((as_halfint(k).twice, float(v)) for k, v in values.items()))
        if right_value is None:
            right_value = items[-1][1] if items else 0.0
        return cls(kind="table", items=items, left_tail=left_tail, ratio=float(ratio),
                   right_value=float(right_value))

    @classmethod
    def zero(cls) -> "SigmaProfile":
        """The empty filling ``sigma = 0``."""
        return cls.table({}, left_tail="zero", right_value=0.0)

    # -- evaluation -------------------------------------------------------

    def __call__(self, l) -> float:
        """Value ``sigma(l)`` at a point of Z' (``HalfInt`` or float)."""
        return float(self.values(np.array([float(l)]))[0])

    def values(self, ls) -> np.ndarray:
        """Vectorised ``sigma`` on an array of half-integers."""
        ls = np.asarray(ls, dtype=float)
        if self.kind == "indicator":
            return (ls > 0).astype(float)
        if self.kind == "fermi":
            if self.u == 0.0:
                return (ls > 0).astype(float)
            # u**|l| / (1 + u**|l|) on the left, 1 / (1 + u**l) on the right
            p = np.exp(np.abs(ls) * math.log(self.u))
            return np.where(ls > 0, 1.0 / (1.0 + p), p / (1.0 + p))
        return self._table_values(ls)

    def one_minus(self, ls) -> np.ndarray:
        """``1 - sigma`` without cancellation where ``sigma`` is close to 1."""
        ls = np.asarray(ls, dtype=float)
        if self.kind == "fermi" and self.u > 0.0:
            p = np.exp(np.abs(ls) * math.log(self.u))
            return np.where(ls > 0, p / (1.0 + p), 1.0 / (1.0 + p))
        return 1.0 - self.values(ls)

    def _table_values(self, ls: np.ndarray) -> np.ndarray:
        out = np.empty(ls.shape)
        if not self.items:
            out[:] = 0.0
            return out
        t_min, v_min = self.items[0]
        t_max = self.items[-1][0]
        for idx, l in np.ndenumerate(ls):
            t = int(round(2 * l))
            if t < t_min:
                if self.left_tail == "zero":
                    out[idx] = 0.0
                else:
                    out[idx] = v_min * self.ratio ** ((t_min - t) // 2)
            elif t > t_max:
                out[idx] = self.right_value
            else:
                out[idx] = self._lookup.get(t, 0.0)
        return out

    # -- tail control -----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.kind == "table" and self.right_value == 0.0 and all(v == 0.0 for _, v in self.items)

    def left_support(self) -> float | None:
        """Smallest ``l`` with ``sigma(l) > 0``, or ``None`` if unbounded below."""
        if self.kind == "indicator" or (self.kind == "fermi" and self.u == 0.0):
            return 0.5
        if self.kind == "fermi":
            return None
        nonzero = [t for t, v in self.items if v > 0.0]
        if self.left_tail == "geometric" and self.ratio > 0.0 and self.items and self.items[0][1] > 0.0:
            return None
        if nonzero:
            return nonzero[0] / 2.0
        if self.right_value > 0.0:
            return (self.items[-1][0] + 2) / 2.0 if self.items else None
        return math.inf

    def tail_bound(self, T: float) -> float:
        """Certified upper bound on ``sum_{l in Z', l <= -T} sigma(l)``."""
        m = _halfint_ceil(T)  # the sum runs over l = -m, -m-1, ...
        if self.kind == "indicator" or (self.kind == "fermi" and self.u == 0.0):
            return max(0.0, -m + 0.5)  # points 1/2, ..., -m lie inside the sum
        if self.kind == "fermi":
            u = self.u
            if m > 0:
                return u**m / (1.0 - u)
            # every l in (0, -m] contributes at most 1
            return u**0.5 / (1.0 - u) + (-m + 0.5)
        return self._table_tail(m)

    def _table_tail(self, m: float) -> float:
        if not self.items:
            return 0.0
        t_min, v_min = self.items[0]
        total = 0.0
        upper = int(round(-2 * m))  # doubled coordinate of the largest summed l
        for t, v in self.items:
            if t <= upper:
                total += v
        if upper > self.items[-1][0]:
            total += self.right_value * ((upper - self.items[-1][0]) // 2)
        if self.left_tail == "geometric" and self.ratio > 0.0:
            # geometric continuation starts at t_min - 2
            first = min(upper, t_min - 2)
            steps = (t_min - first) // 2
            total += v_min * self.ratio**steps / (1.0 - self.ratio)
        return total

    def left_cut(self, tol: float) -> float:
        """Largest ``T`` (in Z') with ``tail_bound(T) <= tol``, searched from the right."""
        if self.is_zero:
            return -math.inf
        if self.kind == "fermi" and self.u > 0.0:
            # u**m / (1-u) <= tol
            m = math.log(tol * (1.0 - self.u)) / math.log(self.u)
            m = max(_halfint_ceil(m), 0.5)
            while self.tail_bound(m) > tol:
                m += 1.0
            while m > 0.5 and self.tail_bound(m - 1.0) <= tol:
                m -= 1.0
            return m
        m = 0.5
        support = self.left_support()
        if support is not None and math.isfinite(support):
            m = _halfint_ceil(-support + 1.0)
            while self.tail_bound(m - 1.0) <= tol and m > -1e6:
                m -= 1.0
            return m
        while self.tail_bound(m) > tol:
            m += 1.0
            if m > 1e6:
                raise ParameterOutOfRange("sigma tail bound never drops below tolerance")
        return m

    # -- identity and serialisation --------------------------------------

    @property
    def sigma_id(self) -> str:
        if self.kind == "indicator":
            return "indicator"
        if self.kind == "fermi":
            return f"fermi:{self.u:g}"
        if self.is_zero:
            return "zero"
        digest = hashlib.sha256(json.dumps(self.to_json(), sort_keys=True).encode()).hexdigest()
        return "table:" + digest[:8]

    def to_json(self) -> dict:
        if self.kind == "indicator":
            return {"kind": "indicator"}
        if self.kind == "fermi":
            return {"kind": "fermi", "u": self.u}
        tail = {"type": self.left_tail}
        if self.left_tail == "geometric":
            tail["ratio"] = self.ratio
        return {
            "kind": "table",
            "values": {f"{t}/2": v for t, v in self.items},
            "left_tail": tail,
            "right_value": self.right_value,
        }

    @classmethod
    def from_json(cls, obj) -> "SigmaProfile":
        if isinstance(obj, str):
            obj = json.loads(obj)
        kind = obj.get("kind")
        if kind == "indicator":
            return cls.indicator()
        if kind == "fermi":
            return cls.fermi(obj["u"])
        if kind == "table":
            tail = obj.get("left_tail")
            if tail is None:
                raise ParameterOutOfRange("table sigma must declare its left_tail behaviour")
            return cls.table(
                obj.get("values", {}),
                left_tail=tail["type"],
                ratio=tail.get("ratio", 0.0),
                right_value=obj.get("right_value"),
            )
        raise ParameterOutOfRange(f"unknown sigma kind {kind!r}")

    @classmethod
    def parse(cls, text: str) -> "SigmaProfile":
        """Parse the CLI shorthand ``indicator``, ``zero``, ``fermi:0.5`` or a JSON object."""
        text = text.strip()
        if text.startswith("{"):
            return cls.from_json(text)
        if text == "indicator":
            return cls.indicator()
        if text == "zero":
            return cls.zero()
        if text.startswith("fermi"):
            _, _, u = text.partition(":")
            return cls.fermi(float(u) if u else 0.5)
        raise ParameterOutOfRange(f"cannot parse sigma {text!r}")

    def iter_support(self, lo: float, hi: float) -> Iterator[float]:
        for t in range(int(2 * lo), int(2 * hi) + 1, 2):
            yield t / 2.0
