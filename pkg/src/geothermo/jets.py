"""Truncated Taylor (jet) arithmetic and the finite-difference oracle.

A :class:`Jet` is a multivariate Taylor polynomial of a scalar field around a
point, truncated at a total degree (at most 4 here).  Propagating jets through
an expression yields the exact partial derivatives of the expression at the
expansion point, which is what the metric/curvature pipeline consumes.

The independent check is :func:`fd_partial`: nested central finite differences,
sharing no code with the jet propagation.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import DomainViolation, NonFinite

EPS = sys.float_info.epsilon
MAX_ORDER = 4


def _unit_index(nvars: int, i: int) -> tuple:
    k = [0] * nvars
    k[i] = 1
    return tuple(k)


class Jet:
    """Multivariate Taylor polynomial truncated at total degree ``order``.

    Coefficients are stored sparsely as ``{exponent-tuple: float}``; the
    coefficient of a monomial ``prod (x_i - x0_i)^k_i`` is the mixed partial
    divided by ``prod k_i!``.
    """

    __slots__ = ("nvars", "order", "coeffs")

    def __init__(self, nvars: int, order: int, coeffs: dict | None = None):
        self.nvars = nvars
        self.order = order
        self.coeffs = coeffs if coeffs is not None else {}

    @classmethod
    def constant(cls, nvars: int, order: int, value: float) -> "Jet":
        zero = (0,) * nvars
        return cls(nvars, order, {zero: float(value)} if value != 0.0 else {zero: 0.0})

    @classmethod
    def variable(cls, nvars: int, order: int, index: int, value: float) -> "Jet":
        coeffs = {(0,) * nvars: float(value)}
        if order >= 1:
            coeffs[_unit_index(nvars, index)] = 1.0
        return cls(nvars, order, coeffs)

    @property
    def value(self) -> float:
        return self.coeffs.get((0,) * self.nvars, 0.0)

    def _like(self, coeffs: dict) -> "Jet":
        return Jet(self.nvars, self.order, coeffs)

    # ---- ring operations -------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, Jet):
            out = dict(self.coeffs)
            zero = (0,) * self.nvars
            out[zero] = out.get(zero, 0.0) + float(other)
            return self._like(out)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0.0) + c
        return self._like(out)

    __radd__ = __add__

    def __neg__(self):
        return self._like({k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet) else -float(other))

    def __rsub__(self, other):
        return (-self) + float(other)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            f = float(other)
            return self._like({k: c * f for k, c in self.coeffs.items()})
        order = self.order
        out: dict = {}
        for k1, c1 in self.coeffs.items():
            if c1 == 0.0:
                continue
            d1 = sum(k1)
            for k2, c2 in other.coeffs.items():
                if c2 == 0.0 or d1 + sum(k2) > order:
                    continue
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0.0) + c1 * c2
        zero = (0,) * self.nvars
        out.setdefault(zero, 0.0)
        return self._like(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / float(other))
        return self * other._reciprocal()

    def __rtruediv__(self, other):
        return self._reciprocal() * float(other)

    def __pow__(self, exponent):
        if isinstance(exponent, Jet):
            # general jet exponent: u^w = exp(w ln u)
            return (exponent * self.ln()).exp()
        r = float(exponent)
        if r == int(r) and abs(r) <= 64:
            return self._int_pow(int(r))
        u0 = self.value
        if u0 <= 0.0:
            raise DomainViolation(
                f"fractional power of non-positive base {u0!r}")
        series = [u0 ** r]
        fac = 1.0
        for k in range(1, self.order + 1):
            fac *= (r - (k - 1)) / k
            series.append(fac * u0 ** (r - k))
        return self._compose(series)

    def _int_pow(self, m: int) -> "Jet":
        if m < 0:
            return self._reciprocal()._int_pow(-m)
        result = Jet.constant(self.nvars, self.order, 1.0)
        base = self
        while m:
            if m & 1:
                result = result * base
            base = base * base
            m >>= 1
        return result

    def _reciprocal(self) -> "Jet":
        u0 = self.value
        if u0 == 0.0:
            raise ZeroDivisionError("jet division by zero value")
        series = [(-1.0) ** k / u0 ** (k + 1) for k in range(self.order + 1)]
        return self._compose(series)

    # ---- analytic functions ----------------------------------------------

    def _compose(self, series: list) -> "Jet":
        """Substitute the zero-value part of self into a univariate series.

        ``series[k]`` must equal f^(k)(value)/k!.
        """
        delta = dict(self.coeffs)
        delta[(0,) * self.nvars] = 0.0
        d = self._like(delta)
        result = Jet.constant(self.nvars, self.order, series[-1])
        for k in range(len(series) - 2, -1, -1):
            result = result * d + series[k]
        return result

    def ln(self) -> "Jet":
        u0 = self.value
        if u0 <= 0.0:
            raise DomainViolation(f"ln of non-positive argument {u0!r}")
        series = [math.log(u0)]
        for k in range(1, self.order + 1):
            series.append((-1.0) ** (k - 1) / (k * u0 ** k))
        return self._compose(series)

    def exp(self) -> "Jet":
        try:
            e0 = math.exp(self.value)
        except OverflowError as exc:
            raise NonFinite(f"exp overflow at {self.value!r}") from exc
        series = [e0]
        fac = 1.0
        for k in range(1, self.order + 1):
            fac /= k
            series.append(e0 * fac)
        return self._compose(series)

    def sqrt(self) -> "Jet":
        if self.value <= 0.0:
            raise DomainViolation(f"sqrt of non-positive argument {self.value!r}")
        return self ** 0.5

    def sinh(self) -> "Jet":
        try:
            s0, c0 = math.sinh(self.value), math.cosh(self.value)
        except OverflowError as exc:
            raise NonFinite(f"sinh overflow at {self.value!r}") from exc
        series, fac = [], 1.0
        for k in range(self.order + 1):
            if k:
                fac /= k
            series.append((s0 if k % 2 == 0 else c0) * fac)
        return self._compose(series)

    def cosh(self) -> "Jet":
        try:
            s0, c0 = math.sinh(self.value), math.cosh(self.value)
        except OverflowError as exc:
            raise NonFinite(f"cosh overflow at {self.value!r}") from exc
        series, fac = [], 1.0
        for k in range(self.order + 1):
            if k:
                fac /= k
            series.append((c0 if k % 2 == 0 else s0) * fac)
        return self._compose(series)

    def tanh(self) -> "Jet":
        return self.sinh() / self.cosh()

    # ---- polynomial manipulation -----------------------------------------

    def deriv(self, i: int) -> "Jet":
        """Formal partial derivative with respect to variable ``i``."""
        out = {}
        for k, c in self.coeffs.items():
            if k[i] == 0 or c == 0.0:
                continue
            kk = list(k)
            kk[i] -= 1
            out[tuple(kk)] = c * k[i]
        out.setdefault((0,) * self.nvars, 0.0)
        return self._like(out)

    def poly_eval(self, deltas: list):
        """Evaluate the polynomial at displacements ``deltas`` from its center.

        Each delta may be a Jet (in any ambient jet space) or a float; all
        deltas must have value zero so truncation is exact.
        """
        terms = sorted(self.coeffs.items(), key=lambda kv: (sum(kv[0]), kv[0]))
        powers = [dict() for _ in range(self.nvars)]
        result = None
        for k, c in terms:
            if c == 0.0 and sum(k) > 0:
                continue
            term = c
            for i, ki in enumerate(k):
                if ki == 0:
                    continue
                p = powers[i].get(ki)
                if p is None:
                    p = deltas[i]
                    for _ in range(ki - 1):
                        p = p * deltas[i]
                    powers[i][ki] = p
                term = p * term
            result = term if result is None else result + term
        return result if result is not None else 0.0


@dataclass
class Jet4:
    """Value and symmetric partial-derivative arrays through order 4."""

    value: float
    grad: np.ndarray
    hess: np.ndarray
    third: np.ndarray
    fourth: np.ndarray
    order: int = MAX_ORDER

    @property
    def n(self) -> int:
        return len(self.grad)


def _as_jet(result, nvars: int, order: int) -> Jet:
    if isinstance(result, Jet):
        return result
    return Jet.constant(nvars, order, float(result))


def jet_poly(field, x, order: int = MAX_ORDER) -> Jet:
    """Raw truncated Taylor polynomial of ``field`` around ``x``."""
    x = [float(c) for c in x]
    n = len(x)
    args = [Jet.variable(n, order, i, x[i]) for i in range(n)]
    return _as_jet(field(args), n, order)


def jet_eval(field, x, order: int = MAX_ORDER) -> Jet4:
    """Evaluate ``field`` and its partials through ``order`` at point ``x``.

    ``field`` is any callable accepting a sequence of Jets (or floats) and
    combining them with arithmetic and the analytic functions above.  Unused
    higher-order slots of the result are zero-filled.
    """
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in 0..{MAX_ORDER}, got {order}")
    x = [float(c) for c in x]
    n = len(x)
    jet = jet_poly(field, x, order)

    value = jet.value
    grad = np.zeros(n)
    hess = np.zeros((n, n))
    third = np.zeros((n, n, n))
    fourth = np.zeros((n, n, n, n))
    for k, c in jet.coeffs.items():
        deg = sum(k)
        if deg == 0 or deg > order:
            continue
        if not math.isfinite(c):
            raise NonFinite(f"non-finite Taylor coefficient for index {k}")
        d = c * math.prod(math.factorial(ki) for ki in k)
        idx = tuple(i for i, ki in enumerate(k) for _ in range(ki))
        target = (grad, hess, third, fourth)[deg - 1]
        # fill every permutation so the arrays are symmetric by construction
        seen = set()
        for perm in product(range(n), repeat=deg):
            if tuple(sorted(perm)) == idx and perm not in seen:
                target[perm] = d
                seen.add(perm)
    if not math.isfinite(value):
        raise NonFinite("non-finite field value")
    return Jet4(value=value, grad=grad, hess=hess, third=third, fourth=fourth,
                order=order)


# Dispatch wrappers usable on floats and Jets alike; evaluators written
# against these run unchanged under jet_eval and under plain evaluation.

def _float_guard(fn, name, x):
    try:
        out = fn(x)
    except ValueError as exc:
        raise DomainViolation(f"{name} of out-of-domain argument {x!r}") from exc
    except OverflowError as exc:
        raise NonFinite(f"{name} overflow at {x!r}") from exc
    return out


def ln(x):
    if isinstance(x, Jet):
        return x.ln()
    if x <= 0.0:
        raise DomainViolation(f"ln of non-positive argument {x!r}")
    return math.log(x)


def exp(x):
    return x.exp() if isinstance(x, Jet) else _float_guard(math.exp, "exp", x)


def sqrt(x):
    if isinstance(x, Jet):
        return x.sqrt()
    if x <= 0.0:
        raise DomainViolation(f"sqrt of non-positive argument {x!r}")
    return math.sqrt(x)


def sinh(x):
    return x.sinh() if isinstance(x, Jet) else _float_guard(math.sinh, "sinh", x)


def cosh(x):
    return x.cosh() if isinstance(x, Jet) else _float_guard(math.cosh, "cosh", x)


def tanh(x):
    return x.tanh() if isinstance(x, Jet) else math.tanh(x)


def power(x, y):
    if isinstance(x, Jet) or isinstance(y, Jet):
        return x ** y
    if x < 0.0 and y != int(y):
        raise DomainViolation(f"fractional power of negative base {x!r}")
    if x == 0.0 and y < 0.0:
        raise DomainViolation("zero base with negative exponent")
    return _float_guard(lambda b: b ** y, "pow", x)


def default_fd_step(x_a: float, total_order: int) -> float:
    """Truncation/round-off balanced step for an order-k partial."""
    return EPS ** (1.0 / (total_order + 2)) * max(1.0, abs(x_a))


def fd_partial(field, x, multi_index, step: float | None = None) -> float:
    """Nested central finite-difference estimate of a mixed partial.

    ``multi_index`` lists coordinate indices, one per differentiation
    (length <= 4).  Raises DomainViolation if any stencil point leaves the
    field's domain.
    """
    multi_index = list(multi_index)
    if len(multi_index) > MAX_ORDER:
        raise ValueError("fd_partial supports orders up to 4")
    x = [float(c) for c in x]
    k = len(multi_index)

    def plain(pt):
        result = field([float(c) for c in pt])
        return result.value if isinstance(result, Jet) else float(result)

    def shifted(idxs, pt, a, mult, h):
        out = list(pt)
        out[a] += mult * h
        return recurse(idxs, out)

    def recurse(idxs, pt):
        if not idxs:
            return plain(pt)
        a = idxs[0]
        h = step if step is not None else default_fd_step(x[a], k)
        # fourth-order-accurate central first derivative; at step
        # h ~ eps^(1/(k+2)) the truncation term h^4 f^(5) is negligible
        # against round-off, which keeps nested high-order estimates
        # inside the 1e-4 oracle budget
        return (shifted(idxs[1:], pt, a, -2, h)
                - 8.0 * shifted(idxs[1:], pt, a, -1, h)
                + 8.0 * shifted(idxs[1:], pt, a, 1, h)
                - shifted(idxs[1:], pt, a, 2, h)) / (12.0 * h)

    out = recurse(multi_index, x)
    if not math.isfinite(out):
        raise NonFinite("finite-difference estimate is not finite")
    return out
