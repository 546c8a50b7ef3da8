"""Growth functions t -> log_p |X(F^t)| and polynomial-degree detection."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np


class _Verdict:
    def __init__(self, name: str):
        self.name = name

    def __repr__(self) -> str:
        return self.name

    def __reduce__(self):
        return self.name


NonPolynomialOnWindow = _Verdict("NonPolynomialOnWindow")
LSQ_TOL = 1e-9


def _exact_log(c: int, p: int) -> int | None:
    if c < 1:
        return None
    e = 0
    while c % p == 0:
        c //= p
        e += 1
    return e if c == 1 else None


@dataclass(frozen=True)
class GrowthProfile:
    p: int
    cardinalities: tuple[int, ...]

    @property
    def exponents(self) -> tuple[int | None, ...]:
        return tuple(_exact_log(c, self.p) for c in self.cardinalities)

    @property
    def exact(self) -> bool:
        return all(e is not None for e in self.exponents)

    @property
    def values(self) -> tuple[float, ...]:
        out = []
        for c, e in zip(self.cardinalities, self.exponents):
            if e is not None:
                out.append(float(e))
            elif self.p == 2:
                out.append(math.log2(c))
            else:
                out.append(math.log(c) / math.log(self.p))
        return tuple(out)

    def diff_table(self) -> list[list]:
        """Successive finite differences; integers when every value is exact."""
        row = list(self.exponents) if self.exact else list(self.values)
        table = [row]
        while len(row) > 1:
            row = [b - a for a, b in zip(row, row[1:])]
            table.append(row)
        return table

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,cardinality,log_p\n")
        for t, (c, v) in enumerate(zip(self.cardinalities, self.values)):
            buf.write(f"{t},{c},{v!r}\n")
        return buf.getvalue()


def profile(X) -> GrowthProfile:
    """Cardinalities of a set presheaf, linear functor or group presheaf on the window."""
    p = X.site.p
    if hasattr(X, "groups"):
        cards = [G.order for G in X.groups]
    elif hasattr(X, "sizes"):
        cards = list(X.sizes)
    else:
        cards = [p ** int(d) for d in X.dims]
    return GrowthProfile(p, tuple(int(c) for c in cards))


@dataclass(frozen=True)
class DegreeFit:
    degree: object  # int or NonPolynomialOnWindow
    exact: bool
    method: str

    def describe(self) -> str:
        if self.degree is NonPolynomialOnWindow:
            return "NonPolynomialOnWindow"
        if self.exact:
            return str(self.degree)
        return f"consistent-with-degree-{self.degree}"


def _integer_degree(values: list[int]) -> int | None:
    row = list(values)
    for d in range(len(values) - 1):
        row = [b - a for a, b in zip(row, row[1:])]
        if all(v == 0 for v in row):
            return d
    return None


def degree_fit(prof: GrowthProfile) -> DegreeFit:
    """Least degree consistent with the profile on the window."""
    if prof.exact:
        d = _integer_degree(list(prof.exponents))
        if d is None:
            return DegreeFit(NonPolynomialOnWindow, True, "differences")
        return DegreeFit(d, True, "differences")
    vals = np.array(prof.values)
    t = np.arange(vals.size, dtype=np.float64)
    for d in range(max(vals.size - 2, 0)):
        coef = np.polyfit(t, vals, d)
        if np.max(np.abs(np.polyval(coef, t) - vals)) < LSQ_TOL:
            return DegreeFit(d, False, "least-squares")
    surrogate = [math.ceil(v - 1e-12) for v in vals]
    d = _integer_degree(surrogate)
    if d is None:
        return DegreeFit(NonPolynomialOnWindow, False, "surrogate")
    return DegreeFit(d, False, "surrogate")
