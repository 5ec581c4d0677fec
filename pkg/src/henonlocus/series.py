"""Exact truncated power series with sparse multivariate rational coefficients.

Three layers, all immutable by convention and exact (``fractions.Fraction``
everywhere, so re-running a pipeline is bit-identical):

``MultiPoly``
    sparse polynomial over Q in a fixed tuple of named variables; terms are
    a dict mapping exponent tuples to nonzero Fractions.

``RatFunc``
    a lazy quotient of two MultiPolys over the same ring.  No gcd reduction
    is attempted; equality and the zero test cross-multiply, which is exact
    and cheap at the sizes that appear here.

``TruncSeries``
    a formal power series in one named variable truncated at a fixed order
    N, with MultiPoly (or RatFunc) coefficients.  Arithmetic never exceeds
    the order.  Composition and reversion assume what they classically
    assume (zero inner constant term; invertible linear coefficient).

The quotient-ring helper ``MultiPoly.reduce_cubic_root`` rewrites powers of
a chosen variable b modulo b^2+b+1 (so b^3 = 1, b^2 = -b-1), which keeps
root-of-unity vanishing arguments exact instead of floating.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence, Union

from .errors import (
    NonInvertibleLinearTerm,
    NonzeroConstantInner,
    NotUnitSeries,
    OrderMismatch,
)

Scalar = Union[int, Fraction]


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"expected a rational scalar, got {type(value).__name__}")


class MultiPoly:
    """Sparse exact polynomial over Q in a fixed ordered tuple of variables."""

    __slots__ = ("vars", "terms")

    def __init__(self, vars: Sequence[str], terms: Mapping[tuple, Fraction]):
        self.vars = tuple(vars)
        n = len(self.vars)
        clean = {}
        for exps, coeff in terms.items():
            coeff = _as_fraction(coeff)
            if len(exps) != n:
                raise ValueError(f"exponent tuple {exps} does not fit ring {self.vars}")
            if coeff:
                clean[tuple(exps)] = coeff
        self.terms = clean

    # ---- constructors

    @classmethod
    def zero(cls, vars: Sequence[str]) -> "MultiPoly":
        return cls(vars, {})

    @classmethod
    def const(cls, value, vars: Sequence[str]) -> "MultiPoly":
        value = _as_fraction(value)
        if not value:
            return cls.zero(vars)
        return cls(vars, {(0,) * len(tuple(vars)): value})

    @classmethod
    def variable(cls, name: str, vars: Sequence[str]) -> "MultiPoly":
        vars = tuple(vars)
        exps = [0] * len(vars)
        exps[vars.index(name)] = 1
        return cls(vars, {tuple(exps): Fraction(1)})

    # ---- predicates

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(e) for e in self.terms)

    def constant_value(self) -> Fraction:
        """The value of a constant polynomial (raises if it is not one)."""
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return next(iter(self.terms.values()), Fraction(0))

    def uses(self, name: str) -> bool:
        i = self.vars.index(name)
        return any(e[i] for e in self.terms)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    # ---- ring arithmetic

    def _check_ring(self, other: "MultiPoly") -> None:
        if self.vars != other.vars:
            raise ValueError(f"ring mismatch: {self.vars} vs {other.vars}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(other, self.vars)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        self._check_ring(other)
        terms = dict(self.terms)
        for exps, coeff in other.terms.items():
            acc = terms.get(exps, Fraction(0)) + coeff
            if acc:
                terms[exps] = acc
            else:
                terms.pop(exps, None)
        out = MultiPoly.__new__(MultiPoly)
        out.vars = self.vars
        out.terms = terms
        return out

    __radd__ = __add__

    def __neg__(self):
        out = MultiPoly.__new__(MultiPoly)
        out.vars = self.vars
        out.terms = {e: -c for e, c in self.terms.items()}
        return out

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(other, self.vars)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            q = _as_fraction(other)
            out = MultiPoly.__new__(MultiPoly)
            out.vars = self.vars
            out.terms = {e: c * q for e, c in self.terms.items()} if q else {}
            return out
        if not isinstance(other, MultiPoly):
            return NotImplemented
        self._check_ring(other)
        terms: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                acc = terms.get(key, Fraction(0)) + c1 * c2
                if acc:
                    terms[key] = acc
                else:
                    terms.pop(key, None)
        out = MultiPoly.__new__(MultiPoly)
        out.vars = self.vars
        out.terms = terms
        return out

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = MultiPoly.const(Fraction(1), self.vars)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(other, self.vars)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    # ---- calculus / substitution

    def derivative(self, name: str) -> "MultiPoly":
        i = self.vars.index(name)
        terms = {}
        for exps, coeff in self.terms.items():
            e = exps[i]
            if e:
                key = exps[:i] + (e - 1,) + exps[i + 1:]
                terms[key] = terms.get(key, Fraction(0)) + coeff * e
        return MultiPoly(self.vars, terms)

    def coeff_of(self, name: str, power: int) -> "MultiPoly":
        """The coefficient of name**power, as a polynomial with that variable
        exponent zeroed out (the ring is unchanged)."""
        i = self.vars.index(name)
        terms = {}
        for exps, coeff in self.terms.items():
            if exps[i] == power:
                terms[exps[:i] + (0,) + exps[i + 1:]] = coeff
        return MultiPoly(self.vars, terms)

    def truncate_var(self, name: str, max_power: int) -> "MultiPoly":
        """Drop every term whose exponent in ``name`` exceeds ``max_power``."""
        i = self.vars.index(name)
        out = MultiPoly.__new__(MultiPoly)
        out.vars = self.vars
        out.terms = {e: c for e, c in self.terms.items() if e[i] <= max_power}
        return out

    def max_power(self, name: str) -> int:
        i = self.vars.index(name)
        return max((e[i] for e in self.terms), default=0)

    def evaluate(self, values: Mapping[str, object]):
        """Plug numbers (Fraction, float, complex) in for every variable."""
        total = None
        for exps, coeff in self.terms.items():
            term = coeff if isinstance(coeff, Fraction) else Fraction(coeff)
            acc = term
            for name, e in zip(self.vars, exps):
                if e:
                    acc = acc * values[name] ** e
            total = acc if total is None else total + acc
        if total is None:
            return Fraction(0)
        return total

    def substitute(self, mapping: Mapping[str, object], target_vars: Sequence[str]):
        """Map variables to values (Fraction / MultiPoly / RatFunc over the
        target ring); unmapped variables are carried over by name and must
        exist in the target ring.  Returns a MultiPoly, or a RatFunc if any
        value is one."""
        target_vars = tuple(target_vars)
        values = {}
        rational = False
        for name in self.vars:
            if not self.uses(name):
                continue
            if name in mapping:
                v = mapping[name]
                if isinstance(v, (int, Fraction)):
                    v = MultiPoly.const(v, target_vars)
                if isinstance(v, RatFunc):
                    rational = True
                values[name] = v
            else:
                if name not in target_vars:
                    raise ValueError(
                        f"variable {name!r} is not mapped and not in the target ring"
                    )
                values[name] = MultiPoly.variable(name, target_vars)
        one = MultiPoly.const(Fraction(1), target_vars)
        if rational:
            values = {
                k: (v if isinstance(v, RatFunc) else RatFunc(v, one))
                for k, v in values.items()
            }
            total = RatFunc(MultiPoly.zero(target_vars), one)
        else:
            total = MultiPoly.zero(target_vars)
        powers: dict = {}
        for exps, coeff in self.terms.items():
            acc = (RatFunc(one, one) if rational else one) * coeff
            for name, e in zip(self.vars, exps):
                if e:
                    key = (name, e)
                    if key not in powers:
                        powers[key] = values[name] ** e
                    acc = acc * powers[key]
            total = total + acc
        return total

    def reduce_cubic_root(self, name: str) -> "MultiPoly":
        """Reduce modulo name^2 + name + 1 (so name^3 = 1)."""
        i = self.vars.index(name)
        out = MultiPoly.zero(self.vars)
        for exps, coeff in self.terms.items():
            r = exps[i] % 3
            base = exps[:i] + (0,) + exps[i + 1:]
            if r == 2:
                # name^2 = -name - 1
                out = out + MultiPoly(self.vars, {base[:i] + (1,) + base[i + 1:]: -coeff})
                out = out + MultiPoly(self.vars, {base: -coeff})
            else:
                out = out + MultiPoly(self.vars, {base[:i] + (r,) + base[i + 1:]: coeff})
        return out

    # ---- canonical text form

    def _sorted_terms(self):
        return sorted(
            self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]), reverse=True
        )

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for exps, coeff in self._sorted_terms():
            mono = "*".join(
                name if e == 1 else f"{name}^{e}"
                for name, e in zip(self.vars, exps)
                if e
            )
            mag = abs(coeff)
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{mag}*{mono}"
            else:
                body = str(mag)
            if not pieces:
                pieces.append(body if coeff > 0 else f"-{body}")
            else:
                pieces.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(pieces)

    def __repr__(self):
        return f"MultiPoly({self})"


class RatFunc:
    """Quotient of two MultiPolys over the same ring, kept unreduced."""

    __slots__ = ("num", "den")

    def __init__(self, num: MultiPoly, den: MultiPoly):
        num._check_ring(den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        self.num = num
        self.den = den

    @classmethod
    def from_poly(cls, p: MultiPoly) -> "RatFunc":
        return cls(p, MultiPoly.const(Fraction(1), p.vars))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return (self.num - self.den).is_zero()

    def _coerce(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(other, self.num.vars)
        if isinstance(other, MultiPoly):
            other = RatFunc.from_poly(other)
        return other if isinstance(other, RatFunc) else None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RatFunc(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return RatFunc(self.num * other, self.den)
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return RatFunc(self.num * other.den, self.den * other.num)

    def __pow__(self, n: int):
        if n < 0:
            return RatFunc(self.den, self.num) ** (-n)
        return RatFunc(self.num**n, self.den**n)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return (self.num * other.den - other.num * self.den).is_zero()

    def evaluate(self, values: Mapping[str, object]):
        return self.num.evaluate(values) / self.den.evaluate(values)

    def __repr__(self):
        return f"RatFunc(({self.num}) / ({self.den}))"


def _coeff_zero(sample):
    return sample * 0


def _coeff_is_unit_constant(coeff):
    if isinstance(coeff, MultiPoly):
        return coeff.is_constant() and not coeff.is_zero()
    if isinstance(coeff, RatFunc):
        return not coeff.is_zero()
    return False


def _coeff_invert(coeff):
    if isinstance(coeff, MultiPoly):
        return MultiPoly.const(1 / coeff.constant_value(), coeff.vars)
    return RatFunc(coeff.den, coeff.num)


class TruncSeries:
    """Power series in one named variable, truncated at a fixed order."""

    __slots__ = ("var", "order", "coeffs")

    def __init__(self, var: str, order: int, coeffs: Sequence):
        if order < 0:
            raise ValueError("order must be nonnegative")
        coeffs = list(coeffs)
        if len(coeffs) != order + 1:
            raise ValueError(f"need {order + 1} coefficients, got {len(coeffs)}")
        self.var = var
        self.order = order
        self.coeffs = tuple(coeffs)

    # ---- constructors

    @classmethod
    def from_poly(cls, p, var: str, order: int) -> "TruncSeries":
        """The constant series with coefficient p."""
        zero = _coeff_zero(p)
        return cls(var, order, [p] + [zero] * order)

    @classmethod
    def monomial(cls, p, power: int, var: str, order: int) -> "TruncSeries":
        """p * var**power (the zero series if power exceeds the order)."""
        zero = _coeff_zero(p)
        coeffs = [zero] * (order + 1)
        if power <= order:
            coeffs[power] = p
        return cls(var, order, coeffs)

    # ---- predicates / access

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs)

    def valuation(self) -> int:
        """Index of the first nonzero coefficient; order+1 for the zero series."""
        for k, c in enumerate(self.coeffs):
            if not c.is_zero():
                return k
        return self.order + 1

    def _zero_coeff(self):
        return _coeff_zero(self.coeffs[0])

    def _check(self, other: "TruncSeries") -> None:
        if self.var != other.var or self.order != other.order:
            raise OrderMismatch(
                f"series mismatch: {self.var!r}/N={self.order} vs "
                f"{other.var!r}/N={other.order}"
            )

    # ---- arithmetic

    def __add__(self, other):
        if isinstance(other, TruncSeries):
            self._check(other)
            return TruncSeries(
                self.var, self.order, [a + b for a, b in zip(self.coeffs, other.coeffs)]
            )
        # scalar / polynomial shift of the constant term
        coeffs = list(self.coeffs)
        coeffs[0] = coeffs[0] + other
        return TruncSeries(self.var, self.order, coeffs)

    __radd__ = __add__

    def __neg__(self):
        return TruncSeries(self.var, self.order, [-c for c in self.coeffs])

    def __sub__(self, other):
        if isinstance(other, TruncSeries):
            self._check(other)
            return TruncSeries(
                self.var, self.order, [a - b for a, b in zip(self.coeffs, other.coeffs)]
            )
        coeffs = list(self.coeffs)
        coeffs[0] = coeffs[0] - other
        return TruncSeries(self.var, self.order, coeffs)

    def __mul__(self, other):
        if not isinstance(other, TruncSeries):
            # scalar or coefficient-ring multiplier
            return TruncSeries(self.var, self.order, [c * other for c in self.coeffs])
        self._check(other)
        zero = self._zero_coeff()
        out = [zero] * (self.order + 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j in range(self.order + 1 - i):
                b = other.coeffs[j]
                if not b.is_zero():
                    out[i + j] = out[i + j] + a * b
        return TruncSeries(self.var, self.order, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("use inverse() and a positive power")
        result = None
        base = self
        while n:
            if n & 1:
                result = base if result is None else result * base
            n >>= 1
            if n:
                base = base * base
        if result is None:
            one = self._zero_coeff() + Fraction(1)
            return TruncSeries.from_poly(one, self.var, self.order)
        return result

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return (
            self.var == other.var
            and self.order == other.order
            and all((a - b).is_zero() for a, b in zip(self.coeffs, other.coeffs))
        )

    # ---- series operations

    def shift_up(self) -> "TruncSeries":
        """Multiply by the series variable (the top coefficient falls off)."""
        return TruncSeries(
            self.var, self.order, [self._zero_coeff()] + list(self.coeffs[:-1])
        )

    def shift_down(self, k: int) -> "TruncSeries":
        """Divide by var**k; the low-order coefficients must vanish.  The top
        k coefficients of the result are unknown and set to zero, so the
        caller must carry enough guard order."""
        for j in range(k):
            if not self.coeffs[j].is_zero():
                raise ValueError(
                    f"cannot divide by {self.var}^{k}: coefficient {j} is nonzero"
                )
        zero = self._zero_coeff()
        return TruncSeries(
            self.var, self.order, list(self.coeffs[k:]) + [zero] * k
        )

    def truncate(self, order: int) -> "TruncSeries":
        if order > self.order:
            raise OrderMismatch(f"cannot extend order {self.order} to {order}")
        return TruncSeries(self.var, order, self.coeffs[: order + 1])

    def inverse(self) -> "TruncSeries":
        """Reciprocal series; the constant term must be an invertible scalar
        (or any nonzero RatFunc)."""
        c0 = self.coeffs[0]
        if not _coeff_is_unit_constant(c0):
            raise NotUnitSeries(f"constant term {c0!r} is not invertible")
        inv0 = _coeff_invert(c0)
        out = [inv0]
        for n in range(1, self.order + 1):
            acc = self._zero_coeff()
            for k in range(1, n + 1):
                acc = acc + self.coeffs[k] * out[n - k]
            out.append(-(inv0 * acc))
        return TruncSeries(self.var, self.order, out)

    def pow_rational(self, exponent: Fraction) -> "TruncSeries":
        """(1 + t)^exponent by the binomial series; the constant term must be 1."""
        exponent = _as_fraction(exponent)
        one = self._zero_coeff() + Fraction(1)
        if not (self.coeffs[0] - one).is_zero():
            raise NotUnitSeries("pow_rational needs constant term 1")
        t = self - one
        result = TruncSeries.from_poly(one, self.var, self.order)
        power = result
        binom = Fraction(1)
        for k in range(1, self.order + 1):
            power = power * t
            if power.is_zero():
                break
            binom = binom * (exponent - (k - 1)) / k
            result = result + power * binom
        return result

    def compose(self, inner: "TruncSeries") -> "TruncSeries":
        """self(inner); the inner series must have zero constant term.  The
        result is a series in the inner variable (the outer variable name may
        differ), at the common truncation order."""
        if self.order != inner.order:
            raise OrderMismatch(
                f"compose order mismatch: {self.order} vs {inner.order}"
            )
        if not inner.coeffs[0].is_zero():
            raise NonzeroConstantInner("inner series has a nonzero constant term")
        result = TruncSeries.from_poly(self.coeffs[-1], inner.var, inner.order)
        for k in range(self.order - 1, -1, -1):
            result = result * inner + self.coeffs[k]
        return result

    def reverse(self) -> "TruncSeries":
        """Compositional inverse through the truncation order."""
        if not self.coeffs[0].is_zero():
            raise NonInvertibleLinearTerm("reversion needs zero constant term")
        c1 = self.coeffs[1] if self.order >= 1 else self._zero_coeff()
        if not _coeff_is_unit_constant(c1):
            raise NonInvertibleLinearTerm(
                f"linear coefficient {c1!r} is not invertible"
            )
        inv1 = _coeff_invert(c1)
        ident = TruncSeries.monomial(
            self._zero_coeff() + Fraction(1), 1, self.var, self.order
        )
        # fixed point g <- g - (f(g) - z) / f1; each pass gains one order
        g = ident * inv1
        for _ in range(self.order):
            err = self.compose(g) - ident
            if err.is_zero():
                break
            g = g - err * inv1
        return g

    def derivative(self) -> "TruncSeries":
        zero = self._zero_coeff()
        out = [self.coeffs[k] * Fraction(k) for k in range(1, self.order + 1)]
        return TruncSeries(self.var, self.order, out + [zero])

    def integrate(self) -> "TruncSeries":
        out = [self._zero_coeff()]
        for k in range(self.order):
            out.append(self.coeffs[k] * Fraction(1, k + 1))
        return TruncSeries(self.var, self.order, out)

    def map_coeffs(self, fn) -> "TruncSeries":
        return TruncSeries(self.var, self.order, [fn(c) for c in self.coeffs])

    def substitute_coeff_var(self, name: str, series: "TruncSeries") -> "TruncSeries":
        """Substitute a series for a coefficient-ring variable (Horner in the
        highest power of that variable that occurs)."""
        self._check(series)
        m = max(c.max_power(name) for c in self.coeffs)
        layers = []
        for power in range(m + 1):
            layers.append(
                TruncSeries(
                    self.var, self.order, [c.coeff_of(name, power) for c in self.coeffs]
                )
            )
        result = layers[m]
        for power in range(m - 1, -1, -1):
            result = result * series + layers[power]
        return result

    def evaluate(self, point, values: Mapping[str, object]):
        """Numeric value at var=point with coefficient variables bound."""
        total = None
        for k in range(self.order, -1, -1):
            c = self.coeffs[k].evaluate(values)
            total = c if total is None else total * point + c
        return total

    def __str__(self):
        pieces = []
        for k, c in enumerate(self.coeffs):
            if not c.is_zero():
                pieces.append(f"({c})*{self.var}^{k}")
        return " + ".join(pieces) if pieces else "0"

    def __repr__(self):
        return f"TruncSeries[{self.var}; N={self.order}]({self})"
