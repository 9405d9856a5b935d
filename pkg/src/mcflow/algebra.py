"""Exact arithmetic over a fixed three-variable chart.

Coefficients are arbitrary-precision rationals (``fractions.Fraction``),
polynomials are sparse maps from exponent triples to nonzero coefficients,
and rational functions are kept canonical: numerator and denominator
coprime, denominator monic in graded-lexicographic order.  Syntactic
equality of canonical forms therefore coincides with mathematical
equality, which is what lets the rest of the package claim that a residual
vanishes *identically* rather than merely at sample points.

All values are immutable after construction and all operations are pure.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterator, Mapping, Sequence, Union

Rational = Fraction

DEFAULT_CHART = ("x", "y", "z")

# Exponents must fit a machine word; the inputs of interest have tiny
# degrees, so hitting this bound always indicates a bug upstream.
MAX_EXPONENT = 2**31 - 1


class AlgebraError(Exception):
    """Base class for arithmetic-layer failures."""


class ChartMismatchError(AlgebraError):
    """Operands live on different variable charts."""


class ExponentOverflowError(AlgebraError):
    """A monomial exponent exceeded the machine-word bound."""


class NegativeExponentError(AlgebraError):
    """Polynomial power with a negative exponent."""


class UnknownVariableError(AlgebraError):
    """A variable name that is not part of the chart."""


class ZeroDenominatorError(AlgebraError):
    """Attempt to build a rational function with denominator zero."""


class ZeroPolynomialError(AlgebraError):
    """gcd of two zero polynomials is undefined."""


class NotDivisibleError(AlgebraError):
    """Exact polynomial division left a remainder."""


class SingularPointError(AlgebraError):
    """Evaluation at a point where the denominator vanishes."""

    def __init__(self, denominator: str, point: "Point3"):
        self.denominator = denominator
        self.point = point
        super().__init__(f"denominator {denominator} vanishes at {point}")


Coefficient = Union[int, Fraction]
ExponentTriple = tuple[int, int, int]


def _as_fraction(value: Coefficient) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"not an exact coefficient: {value!r}")


def _grlex_key(exponents: ExponentTriple) -> tuple:
    return (sum(exponents), exponents)


class Poly3:
    """Sparse polynomial in three named variables over the rationals.

    Terms map exponent triples to nonzero ``Fraction`` coefficients; zero
    coefficients are never stored.  Term iteration (``terms()``) is in
    descending graded-lexicographic order of the chart variables.
    """

    __slots__ = ("variables", "_terms", "_hash")

    def __init__(
        self,
        terms: Mapping[ExponentTriple, Coefficient] | None = None,
        variables: Sequence[str] = DEFAULT_CHART,
    ):
        variables = tuple(variables)
        if len(variables) != 3:
            raise ChartMismatchError(f"chart must have 3 variables, got {variables}")
        cleaned: dict[ExponentTriple, Fraction] = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != 3 or any(e < 0 for e in exps):
                raise NegativeExponentError(f"bad exponent triple {exps}")
            if any(e > MAX_EXPONENT for e in exps):
                raise ExponentOverflowError(f"exponent triple {exps} too large")
            coeff = _as_fraction(coeff)
            if coeff != 0:
                cleaned[exps] = coeff
        self.variables = variables
        self._terms = cleaned
        self._hash = None

    # ---- constructors -------------------------------------------------

    @classmethod
    def zero(cls, variables: Sequence[str] = DEFAULT_CHART) -> "Poly3":
        return cls({}, variables)

    @classmethod
    def const(cls, value: Coefficient, variables: Sequence[str] = DEFAULT_CHART) -> "Poly3":
        return cls({(0, 0, 0): _as_fraction(value)}, variables)

    @classmethod
    def variable(cls, name: str, variables: Sequence[str] = DEFAULT_CHART) -> "Poly3":
        variables = tuple(variables)
        if name not in variables:
            raise UnknownVariableError(f"{name!r} not in chart {variables}")
        exps = [0, 0, 0]
        exps[variables.index(name)] = 1
        return cls({tuple(exps): Fraction(1)}, variables)

    @classmethod
    def monomial(
        cls,
        coeff: Coefficient,
        exponents: ExponentTriple,
        variables: Sequence[str] = DEFAULT_CHART,
    ) -> "Poly3":
        return cls({tuple(exponents): coeff}, variables)

    # ---- basic queries -------------------------------------------------

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return not self._terms or set(self._terms) == {(0, 0, 0)}

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise AlgebraError(f"{self} is not constant")
        return self._terms.get((0, 0, 0), Fraction(0))

    def term_count(self) -> int:
        return len(self._terms)

    def terms(self) -> Iterator[tuple[ExponentTriple, Fraction]]:
        for exps in sorted(self._terms, key=_grlex_key, reverse=True):
            yield exps, self._terms[exps]

    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def degree_in(self, index: int) -> int:
        if not self._terms:
            return -1
        return max(e[index] for e in self._terms)

    def leading(self) -> tuple[ExponentTriple, Fraction]:
        if not self._terms:
            raise AlgebraError("zero polynomial has no leading term")
        exps = max(self._terms, key=_grlex_key)
        return exps, self._terms[exps]

    def leading_coefficient(self) -> Fraction:
        return self.leading()[1]

    def uniform_weight(self, weights: tuple[int, int, int]) -> int | None:
        """Common weighted degree of all terms, or None if mixed/zero."""
        seen = {sum(e * w for e, w in zip(exps, weights)) for exps in self._terms}
        if len(seen) != 1:
            return None
        return seen.pop()

    # ---- arithmetic ----------------------------------------------------

    def _require_chart(self, other: "Poly3") -> None:
        if self.variables != other.variables:
            raise ChartMismatchError(
                f"charts differ: {self.variables} vs {other.variables}"
            )

    def _coerce(self, other) -> "Poly3":
        if isinstance(other, Poly3):
            self._require_chart(other)
            return other
        return Poly3.const(other, self.variables)

    def __add__(self, other) -> "Poly3":
        other = self._coerce(other)
        terms = dict(self._terms)
        for exps, coeff in other._terms.items():
            acc = terms.get(exps, Fraction(0)) + coeff
            if acc == 0:
                terms.pop(exps, None)
            else:
                terms[exps] = acc
        return Poly3(terms, self.variables)

    __radd__ = __add__

    def __neg__(self) -> "Poly3":
        return Poly3({e: -c for e, c in self._terms.items()}, self.variables)

    def __sub__(self, other) -> "Poly3":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly3":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly3":
        if isinstance(other, (int, Fraction)):
            c = _as_fraction(other)
            if c == 0:
                return Poly3.zero(self.variables)
            return Poly3({e: k * c for e, k in self._terms.items()}, self.variables)
        other = self._coerce(other)
        out: dict[ExponentTriple, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                exps = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                if exps[0] > MAX_EXPONENT or exps[1] > MAX_EXPONENT or exps[2] > MAX_EXPONENT:
                    raise ExponentOverflowError(f"product exponent {exps} too large")
                acc = out.get(exps)
                acc = c1 * c2 if acc is None else acc + c1 * c2
                if acc == 0:
                    out.pop(exps, None)
                else:
                    out[exps] = acc
        return Poly3(out, self.variables)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly3":
        if not isinstance(n, int):
            raise NegativeExponentError(f"exponent must be an integer, got {n!r}")
        if n < 0:
            raise NegativeExponentError(f"negative polynomial exponent {n}")
        result = Poly3.const(1, self.variables)
        base = self
        while n:
            if n & 1:
                result = result * base
            base_needed = n >> 1
            if base_needed:
                base = base * base
            n = base_needed
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly3.const(other, self.variables)
        if not isinstance(other, Poly3):
            return NotImplemented
        return self.variables == other.variables and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self._terms.items())))
        return self._hash

    # ---- structure -----------------------------------------------------

    def monic(self) -> "Poly3":
        """Scale so the graded-lex leading coefficient is 1."""
        if self.is_zero():
            return self
        lc = self.leading_coefficient()
        if lc == 1:
            return self
        return self * (1 / lc)

    def content(self) -> Fraction:
        """Positive rational c such that self/c has coprime integer coefficients."""
        if self.is_zero():
            return Fraction(0)
        num_gcd = 0
        den_lcm = 1
        for coeff in self._terms.values():
            num_gcd = math.gcd(num_gcd, abs(coeff.numerator))
            den_lcm = den_lcm * coeff.denominator // math.gcd(den_lcm, coeff.denominator)
        return Fraction(num_gcd, den_lcm)

    def diff(self, name: str) -> "Poly3":
        if name not in self.variables:
            raise UnknownVariableError(f"{name!r} not in chart {self.variables}")
        index = self.variables.index(name)
        out: dict[ExponentTriple, Fraction] = {}
        for exps, coeff in self._terms.items():
            e = exps[index]
            if e == 0:
                continue
            new = list(exps)
            new[index] = e - 1
            out[tuple(new)] = coeff * e
        return Poly3(out, self.variables)

    def eval(self, point: "Point3"):
        """Value at a point; exact for Fraction coordinates, float otherwise."""
        coords = point.coords
        if point.is_exact:
            total = Fraction(0)
            for exps, coeff in self._terms.items():
                total += coeff * coords[0] ** exps[0] * coords[1] ** exps[1] * coords[2] ** exps[2]
            return total
        total = 0.0
        for exps, coeff in self._terms.items():
            total += float(coeff) * coords[0] ** exps[0] * coords[1] ** exps[1] * coords[2] ** exps[2]
        return total

    def compose(self, images: Sequence["RationalFunction"]) -> "RationalFunction":
        """Substitute a rational function for each chart variable."""
        if len(images) != 3:
            raise ChartMismatchError("compose needs one image per chart variable")
        chart = images[0].chart
        total = RationalFunction.const(0, chart)
        for exps, coeff in self._terms.items():
            term = RationalFunction.const(coeff, chart)
            for image, e in zip(images, exps):
                if e:
                    term = term * image**e
            total = total + term
        return total

    def try_div(self, divisor: "Poly3") -> "Poly3 | None":
        """Exact quotient self/divisor, or None if division leaves a remainder."""
        self._require_chart(divisor)
        if divisor.is_zero():
            raise ZeroDenominatorError("division by the zero polynomial")
        if self.is_zero():
            return self
        if divisor.is_constant():
            return self * (1 / divisor.constant_value())
        lead_exps, lead_coeff = divisor.leading()
        rest = self
        quotient: dict[ExponentTriple, Fraction] = {}
        while not rest.is_zero():
            exps, coeff = rest.leading()
            q_exps = tuple(a - b for a, b in zip(exps, lead_exps))
            if any(e < 0 for e in q_exps):
                return None
            q_coeff = coeff / lead_coeff
            quotient[q_exps] = quotient.get(q_exps, Fraction(0)) + q_coeff
            rest = rest - divisor * Poly3.monomial(q_coeff, q_exps, self.variables)
        return Poly3(quotient, self.variables)

    def div_exact(self, divisor: "Poly3") -> "Poly3":
        quotient = self.try_div(divisor)
        if quotient is None:
            raise NotDivisibleError(f"({self}) is not divisible by ({divisor})")
        return quotient

    def __str__(self) -> str:
        return format_poly(self)

    def __repr__(self) -> str:
        return f"Poly3({format_poly(self)})"


# ---------------------------------------------------------------------------
# gcd: content/primitive-part recursion with a subresultant PRS in a chosen
# main variable.  The recursion runs on plain integer-coefficient term maps
# (denominators are cleared once up front); only the monic result is lifted
# back to Fraction coefficients.  Exact and dependency-free; adequate at the
# degrees that occur here (single digits).
# ---------------------------------------------------------------------------

IntTerms = dict[ExponentTriple, int]


def poly_gcd(a: Poly3, b: Poly3) -> Poly3:
    """Monic greatest common divisor; gcd(p, 0) = monic(p)."""
    a._require_chart(b)
    if a.is_zero() and b.is_zero():
        raise ZeroPolynomialError("gcd(0, 0) is undefined")
    if a.is_zero():
        return b.monic()
    if b.is_zero():
        return a.monic()
    if a.is_constant() or b.is_constant():
        return Poly3.const(1, a.variables)
    if a.term_count() == 1 or b.term_count() == 1:
        return _monomial_gcd(a, b)
    if a.monic() == b.monic():
        return a.monic()
    g = _int_gcd(_int_primitive(a), _int_primitive(b))
    poly = Poly3(g, a.variables)
    return poly.monic()


def _monomial_gcd(a: Poly3, b: Poly3) -> Poly3:
    exps = [MAX_EXPONENT] * 3
    for poly in (a, b):
        for term_exps in poly._terms:
            exps = [min(x, e) for x, e in zip(exps, term_exps)]
    return Poly3.monomial(1, tuple(exps), a.variables)


def _int_primitive(p: Poly3) -> IntTerms:
    """Integer-primitive term map proportional to p."""
    denominator_lcm = 1
    for coeff in p._terms.values():
        denominator_lcm = denominator_lcm * coeff.denominator // math.gcd(
            denominator_lcm, coeff.denominator
        )
    content = 0
    scaled = {}
    for exps, coeff in p._terms.items():
        value = coeff.numerator * (denominator_lcm // coeff.denominator)
        scaled[exps] = value
        content = math.gcd(content, value)
    if content > 1:
        scaled = {e: v // content for e, v in scaled.items()}
    return scaled


def _int_degree(p: IntTerms, axis: int) -> int:
    return max(e[axis] for e in p) if p else -1


def _int_mul(a: IntTerms, b: IntTerms) -> IntTerms:
    out: IntTerms = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            exps = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
            acc = out.get(exps)
            acc = c1 * c2 if acc is None else acc + c1 * c2
            if acc:
                out[exps] = acc
            else:
                out.pop(exps, None)
    return out


def _int_sub(a: IntTerms, b: IntTerms) -> IntTerms:
    out = dict(a)
    for exps, coeff in b.items():
        acc = out.get(exps, 0) - coeff
        if acc:
            out[exps] = acc
        else:
            out.pop(exps, None)
    return out


def _int_content(p: IntTerms) -> int:
    g = 0
    for value in p.values():
        g = math.gcd(g, value)
        if g == 1:
            break
    return g


def _int_scale_down(p: IntTerms, k: int) -> IntTerms:
    if k == 1:
        return p
    out = {}
    for exps, coeff in p.items():
        q, r = divmod(coeff, k)
        if r:
            raise NotDivisibleError("inexact integer scaling in gcd kernel")
        out[exps] = q
    return out


def _int_div_exact(a: IntTerms, b: IntTerms) -> IntTerms:
    """Exact quotient in Z[x,y,z]; raises NotDivisibleError otherwise."""
    if not b:
        raise ZeroDenominatorError("division by zero in gcd kernel")
    lead = max(b, key=_grlex_key)
    lead_coeff = b[lead]
    rest = dict(a)
    quotient: IntTerms = {}
    while rest:
        exps = max(rest, key=_grlex_key)
        q_exps = (exps[0] - lead[0], exps[1] - lead[1], exps[2] - lead[2])
        q, r = divmod(rest[exps], lead_coeff)
        if r or any(e < 0 for e in q_exps):
            raise NotDivisibleError("inexact polynomial division in gcd kernel")
        quotient[q_exps] = q
        for b_exps, b_coeff in b.items():
            t = (b_exps[0] + q_exps[0], b_exps[1] + q_exps[1], b_exps[2] + q_exps[2])
            acc = rest.get(t, 0) - b_coeff * q
            if acc:
                rest[t] = acc
            else:
                rest.pop(t, None)
    return quotient


def _int_pow(p: IntTerms, n: int) -> IntTerms:
    result: IntTerms = {(0, 0, 0): 1}
    for _ in range(n):
        result = _int_mul(result, p)
    return result


def _choose_main(a: IntTerms, b: IntTerms) -> int:
    """Axis giving the shortest remainder sequence."""
    best, best_cost = None, None
    for axis in range(3):
        da, db = _int_degree(a, axis), _int_degree(b, axis)
        if da <= 0 or db <= 0:
            continue
        cost = (min(da, db), max(da, db))
        if best_cost is None or cost < best_cost:
            best, best_cost = axis, cost
    if best is not None:
        return best
    for axis in range(3):
        if _int_degree(a, axis) > 0 or _int_degree(b, axis) > 0:
            return axis
    return -1


def _int_strip(p: IntTerms) -> IntTerms:
    """Divide out the integer content (the gcd is only needed up to scalars)."""
    c = _int_content(p)
    if c <= 1:
        return p
    return {e: v // c for e, v in p.items()}


def _int_gcd(a: IntTerms, b: IntTerms) -> IntTerms:
    """gcd up to a scalar; arbitrary integer contents are ignored."""
    if not a or not b:
        return a or b
    a = _int_strip(a)
    b = _int_strip(b)
    if len(a) == 1 or len(b) == 1:
        exps = [MAX_EXPONENT] * 3
        for p in (a, b):
            for e in p:
                exps = [min(x, y) for x, y in zip(exps, e)]
        return {tuple(exps): 1}
    main = _choose_main(a, b)
    if main < 0:
        return {(0, 0, 0): 1}
    cont_a, prim_a = _int_split_content(a, main)
    cont_b, prim_b = _int_split_content(b, main)
    cont = _int_gcd(cont_a, cont_b)
    prim = _int_strip(_int_prs_gcd(prim_a, prim_b, main))
    return _int_mul(cont, prim)


def _int_coeffs_in(p: IntTerms, main: int) -> dict[int, IntTerms]:
    out: dict[int, IntTerms] = {}
    for exps, coeff in p.items():
        rest = list(exps)
        degree = rest[main]
        rest[main] = 0
        out.setdefault(degree, {})[tuple(rest)] = coeff
    return out


def _int_split_content(p: IntTerms, main: int) -> tuple[IntTerms, IntTerms]:
    coeffs = list(_int_coeffs_in(p, main).values())
    content = _int_strip(coeffs[0])
    for coeff in coeffs[1:]:
        if content == {(0, 0, 0): 1}:
            break
        content = _int_gcd(content, coeff)
    content = _int_normalize_sign(content)
    if content == {(0, 0, 0): 1}:
        return content, p
    return content, _int_div_exact(p, content)


def _int_normalize_sign(p: IntTerms) -> IntTerms:
    if p and p[max(p, key=_grlex_key)] < 0:
        return {e: -c for e, c in p.items()}
    return p


def _int_lc(p: IntTerms, main: int) -> IntTerms:
    view = _int_coeffs_in(p, main)
    return view[max(view)]


def _int_prem(f: IntTerms, g: IntTerms, main: int) -> IntTerms:
    lc_g = _int_lc(g, main)
    deg_g = _int_degree(g, main)
    steps = _int_degree(f, main) - deg_g + 1
    rest = f
    used = 0
    while rest and _int_degree(rest, main) >= deg_g:
        shift = _int_degree(rest, main) - deg_g
        shifted: IntTerms = {}
        lc_rest = _int_lc(rest, main)
        for exps, coeff in _int_mul(g, lc_rest).items():
            e = list(exps)
            e[main] += shift
            shifted[tuple(e)] = coeff
        rest = _int_sub(_int_mul(rest, lc_g), shifted)
        used += 1
    if used < steps:
        rest = _int_mul(rest, _int_pow(lc_g, steps - used))
    return rest


def _int_prs_gcd(f: IntTerms, g: IntTerms, main: int) -> IntTerms:
    """Subresultant PRS gcd of polynomials primitive in the main variable."""
    if _int_degree(f, main) < _int_degree(g, main):
        f, g = g, f
    one: IntTerms = {(0, 0, 0): 1}
    scale_g, scale_h = one, one
    while True:
        delta = _int_degree(f, main) - _int_degree(g, main)
        remainder = _int_prem(f, g, main)
        if not remainder:
            return _int_normalize_sign(_int_split_content(g, main)[1])
        if _int_degree(remainder, main) == 0:
            return one
        remainder = _int_div_exact(remainder, _int_mul(scale_g, _int_pow(scale_h, delta)))
        f, g = g, remainder
        scale_g = _int_lc(f, main)
        if delta:
            scale_h = _int_div_exact(_int_pow(scale_g, delta), _int_pow(scale_h, delta - 1))


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------


class RationalFunction:
    """Quotient of two Poly3 in canonical form.

    Invariants: denominator nonzero and monic (graded-lex leading
    coefficient 1); numerator and denominator have no common factor.  Two
    values are equal iff their (num, den) pairs are syntactically equal.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=1, variables: Sequence[str] | None = None):
        if not isinstance(num, Poly3):
            num = Poly3.const(num, variables or DEFAULT_CHART)
        if not isinstance(den, Poly3):
            den = Poly3.const(den, num.variables)
        num._require_chart(den)
        self.num, self.den = _normalize(num, den)
        self._hash = None

    @classmethod
    def _raw(cls, num: Poly3, den: Poly3) -> "RationalFunction":
        out = object.__new__(cls)
        out.num = num
        out.den = den
        out._hash = None
        return out

    @classmethod
    def const(cls, value: Coefficient, variables: Sequence[str] = DEFAULT_CHART) -> "RationalFunction":
        return cls._raw(Poly3.const(value, variables), Poly3.const(1, variables))

    @classmethod
    def var(cls, name: str, variables: Sequence[str] = DEFAULT_CHART) -> "RationalFunction":
        return cls._raw(Poly3.variable(name, variables), Poly3.const(1, variables))

    @property
    def chart(self) -> tuple[str, str, str]:
        return self.num.variables

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            if self.chart != other.chart:
                raise ChartMismatchError(f"charts differ: {self.chart} vs {other.chart}")
            return other
        if isinstance(other, Poly3):
            return RationalFunction._raw(other, Poly3.const(1, other.variables))
        return RationalFunction.const(other, self.chart)

    def __add__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        n1, d1, n2, d2 = self.num, self.den, other.num, other.den
        if d1 == d2:
            top = n1 + n2
            if top.is_zero():
                return RationalFunction.const(0, self.chart)
            g = poly_gcd(top, d1)
            if g.is_constant():
                return RationalFunction._raw(top, d1)
            return RationalFunction._raw(top.div_exact(g), d1.div_exact(g))
        g0 = poly_gcd(d1, d2)
        if g0.is_constant():
            top = n1 * d2 + n2 * d1
            if top.is_zero():
                return RationalFunction.const(0, self.chart)
            return RationalFunction._raw(top, d1 * d2)
        d1r = d1.div_exact(g0)
        d2r = d2.div_exact(g0)
        top = n1 * d2r + n2 * d1r
        if top.is_zero():
            return RationalFunction.const(0, self.chart)
        g1 = poly_gcd(top, g0)
        if g1.is_constant():
            return RationalFunction._raw(top, d1r * d2)
        return RationalFunction._raw(top.div_exact(g1), d1r * (d2.div_exact(g1)))

    __radd__ = __add__

    def __neg__(self) -> "RationalFunction":
        return RationalFunction._raw(-self.num, self.den)

    def __sub__(self, other) -> "RationalFunction":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RationalFunction":
        return self._coerce(other) - self

    def __mul__(self, other) -> "RationalFunction":
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return RationalFunction.const(0, self.chart)
            return RationalFunction._raw(self.num * other, self.den)
        other = self._coerce(other)
        if self.is_zero() or other.is_zero():
            return RationalFunction.const(0, self.chart)
        n1, d1, n2, d2 = self.num, self.den, other.num, other.den
        g1 = poly_gcd(n1, d2)
        if not g1.is_constant():
            n1 = n1.div_exact(g1)
            d2 = d2.div_exact(g1)
        g2 = poly_gcd(n2, d1)
        if not g2.is_constant():
            n2 = n2.div_exact(g2)
            d1 = d1.div_exact(g2)
        return RationalFunction._raw(n1 * n2, d1 * d2)

    __rmul__ = __mul__

    def reciprocal(self) -> "RationalFunction":
        if self.is_zero():
            raise ZeroDenominatorError("reciprocal of zero")
        lc = self.num.leading_coefficient()
        return RationalFunction._raw(self.den * (1 / lc), self.num * (1 / lc))

    def __truediv__(self, other) -> "RationalFunction":
        other = self._coerce(other)
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "RationalFunction":
        return self._coerce(other) / self

    def __pow__(self, n: int) -> "RationalFunction":
        if not isinstance(n, int):
            raise NegativeExponentError(f"exponent must be an integer, got {n!r}")
        if n < 0:
            return self.reciprocal() ** (-n)
        return RationalFunction._raw(self.num**n, self.den**n)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, Poly3)):
            other = self._coerce(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def diff(self, name: str) -> "RationalFunction":
        """Exact quotient-rule partial derivative."""
        if name not in self.chart:
            raise UnknownVariableError(f"{name!r} not in chart {self.chart}")
        num_d = self.num.diff(name)
        if self.den.is_constant():
            return RationalFunction._raw(num_d * (1 / self.den.constant_value()),
                                         Poly3.const(1, self.chart))
        den_d = self.den.diff(name)
        # Split off gcd(den, den') first; it absorbs repeated factors and
        # keeps the final reduction small.
        shared = poly_gcd(self.den, den_d) if not den_d.is_zero() else Poly3.const(1, self.chart)
        if shared.is_constant():
            top = num_d * self.den - self.num * den_d
            return RationalFunction(top, self.den * self.den)
        reduced = self.den.div_exact(shared)
        top = num_d * reduced - self.num * den_d.div_exact(shared)
        return RationalFunction(top, self.den * reduced)

    def eval(self, point: "Point3"):
        """Exact Fraction at exact points, float at numeric points."""
        den_value = self.den.eval(point)
        if den_value == 0:
            raise SingularPointError(format_poly(self.den), point)
        return self.num.eval(point) / den_value

    def compose(self, images: Sequence["RationalFunction"]) -> "RationalFunction":
        den = self.den.compose(images)
        if den.is_zero():
            raise ZeroDenominatorError("composition produced a zero denominator")
        return self.num.compose(images) / den

    def uniform_weight(self, weights: tuple[int, int, int]) -> int | None:
        """Weighted degree when both num and den are weight-homogeneous."""
        if self.is_zero():
            return None
        wn = self.num.uniform_weight(weights)
        wd = self.den.uniform_weight(weights)
        if wn is None or wd is None:
            return None
        return wn - wd

    def __str__(self) -> str:
        return format_rational(self)

    def __repr__(self) -> str:
        return f"RationalFunction({format_rational(self)})"


def _normalize(num: Poly3, den: Poly3) -> tuple[Poly3, Poly3]:
    if den.is_zero():
        raise ZeroDenominatorError("zero denominator")
    if num.is_zero():
        return Poly3.zero(num.variables), Poly3.const(1, num.variables)
    if den.is_constant():
        return num * (1 / den.constant_value()), Poly3.const(1, num.variables)
    g = poly_gcd(num, den)
    if not g.is_constant():
        num = num.div_exact(g)
        den = den.div_exact(g)
    lc = den.leading_coefficient()
    if lc != 1:
        num = num * (1 / lc)
        den = den * (1 / lc)
    return num, den


def ratfunc_normalize(num: Poly3, den: Poly3) -> RationalFunction:
    """Canonical rational function num/den."""
    return RationalFunction(num, den)


def partial_derivative(f: RationalFunction, name: str) -> RationalFunction:
    return f.diff(name)


# ---------------------------------------------------------------------------
# Points
# ---------------------------------------------------------------------------


class Point3:
    """Evaluation point, either exact (Fraction coords) or numeric (float)."""

    __slots__ = ("coords", "is_exact")

    def __init__(self, coords: Sequence, is_exact: bool):
        self.coords = tuple(coords)
        self.is_exact = is_exact

    @classmethod
    def exact(cls, a, b, c) -> "Point3":
        return cls((Fraction(a), Fraction(b), Fraction(c)), True)

    @classmethod
    def real(cls, a, b, c) -> "Point3":
        return cls((float(a), float(b), float(c)), False)

    def __iter__(self):
        return iter(self.coords)

    def __eq__(self, other):
        return isinstance(other, Point3) and self.coords == other.coords

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.coords) + ")"

    __repr__ = __str__


def evaluate(f: RationalFunction | Poly3, point: Point3):
    return f.eval(point)


# ---------------------------------------------------------------------------
# Canonical printing.  The output is always re-parseable by the expression
# parser: explicit '*', '^' for powers, '/' only between a numerator and a
# parenthesised (or atomic) denominator.
# ---------------------------------------------------------------------------


def _format_monomial(exps: ExponentTriple, variables: Sequence[str]) -> str:
    parts = []
    for name, e in zip(variables, exps):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def _format_coefficient(coeff: Fraction) -> str:
    if coeff.denominator == 1:
        return str(coeff.numerator)
    return f"{coeff.numerator}/{coeff.denominator}"


def format_poly(p: Poly3) -> str:
    if p.is_zero():
        return "0"
    pieces: list[str] = []
    for exps, coeff in p.terms():
        mono = _format_monomial(exps, p.variables)
        magnitude = abs(coeff)
        if not mono:
            body = _format_coefficient(magnitude)
        elif magnitude == 1:
            body = mono
        else:
            body = f"{_format_coefficient(magnitude)}*{mono}"
        if not pieces:
            pieces.append(body if coeff > 0 else f"-{body}")
        else:
            pieces.append(f"+ {body}" if coeff > 0 else f"- {body}")
    return " ".join(pieces)


def _integer_scaled(f: RationalFunction) -> tuple[Poly3, Poly3]:
    """Rescale (num, den) by a positive rational so both have coprime
    integer coefficients; the canonical denominator stays positive-led."""
    num_content = f.num.content()
    den_content = f.den.content()
    den_lcm = (num_content.denominator * den_content.denominator
               // math.gcd(num_content.denominator, den_content.denominator))
    scaled_num = f.num * den_lcm
    scaled_den = f.den * den_lcm
    g = math.gcd(int(scaled_num.content()), int(scaled_den.content()))
    if g > 1:
        scaled_num = scaled_num * Fraction(1, g)
        scaled_den = scaled_den * Fraction(1, g)
    return scaled_num, scaled_den


def _den_needs_parens(den: Poly3) -> bool:
    if den.term_count() > 1:
        return True
    exps, coeff = den.leading()
    factors = sum(1 for e in exps if e > 0)
    if coeff != 1:
        return factors > 0 or coeff.denominator != 1 or coeff < 0
    return factors > 1


def format_rational(f: RationalFunction) -> str:
    if f.is_zero():
        return "0"
    num, den = _integer_scaled(f)
    num_str = format_poly(num)
    if den.is_constant() and den.constant_value() == 1:
        return num_str
    den_str = format_poly(den)
    if num.term_count() > 1:
        num_str = f"({num_str})"
    if _den_needs_parens(den):
        den_str = f"({den_str})"
    return f"{num_str}/{den_str}"
