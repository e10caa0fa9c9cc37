"""Exact arithmetic for GF(p) and GF(p^2), their unit-group characters, and
root-of-unity bookkeeping.

Field elements are plain integer keys: for GF(p) the key is the residue
itself, for GF(p^2) = GF(p)[t]/(f) the element a + b*t has key a + p*b.
Characters of the unit group are stored as exponents with respect to the
fixed generator, never as complex floats; conversion to Z/l residues
happens in the `characters` module.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

MAX_FIELD_ORDER = 25


class AlgebraError(ValueError):
    pass


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


class FieldSpec:
    """GF(p^k) for k in {1, 2} with full discrete-log tables.

    The generator convention is deterministic: for GF(p) the smallest
    integer generating the unit group; for GF(p^2) the smallest element key
    among generators whose norm equals the base-field generator.  This keeps
    character labels stable across runs.
    """

    def __init__(self, p: int, k: int, _bound: int = MAX_FIELD_ORDER):
        if not _is_prime(p):
            raise AlgebraError(f"p = {p} is not prime")
        if k not in (1, 2):
            raise AlgebraError(f"extension degree k = {k} not supported")
        if p**k > _bound:
            raise AlgebraError(f"field order {p**k} exceeds bound {_bound}")
        self.p = p
        self.k = k
        self.q = p**k
        if k == 1:
            self._f = None
            self.base = self
        else:
            self._f = self._find_poly(p)
            self.base = FieldSpec(p, 1, _bound)
        self._build_tables()

    @staticmethod
    def _find_poly(p: int) -> tuple[int, int]:
        # first monic irreducible t^2 + a*t + b in (a, b) lex order
        for a in range(p):
            for b in range(p):
                if all((x * x + a * x + b) % p for x in range(p)):
                    return (a, b)
        raise AlgebraError("no irreducible quadratic found")  # pragma: no cover

    # -- raw element arithmetic on keys ------------------------------------

    def mul(self, x: int, y: int) -> int:
        p = self.p
        if self.k == 1:
            return (x * y) % p
        a0, b0 = x % p, x // p
        a1, b1 = y % p, y // p
        fa, fb = self._f
        # (a0 + b0 t)(a1 + b1 t) with t^2 = -fa*t - fb
        hi = b0 * b1
        a = (a0 * a1 - hi * fb) % p
        b = (a0 * b1 + a1 * b0 - hi * fa) % p
        return a + p * b

    def add(self, x: int, y: int) -> int:
        p = self.p
        if self.k == 1:
            return (x + y) % p
        return (x + y) % p + p * ((x // p + y // p) % p)

    def pow(self, x: int, n: int) -> int:
        r = 1
        b = x
        while n:
            if n & 1:
                r = self.mul(r, b)
            b = self.mul(b, b)
            n >>= 1
        return r

    def frob(self, x: int) -> int:
        """x -> x^p (the nontrivial automorphism when k = 2)."""
        return self.pow(x, self.p)

    def trace(self, x: int) -> int:
        """Absolute trace down to GF(p), returned as an integer mod p."""
        if self.k == 1:
            return x % self.p
        y = self.add(x, self.frob(x))
        assert y % self.p == y, "trace not in base field"
        return y

    def norm(self, x: int) -> int:
        """Norm map GF(q) -> GF(p) for k = 2 (key in the base field)."""
        if self.k == 1:
            return x
        y = self.mul(x, self.frob(x))
        assert y % self.p == y, "norm not in base field"
        return y

    def embed(self, c: int) -> int:
        """Canonical embedding of a base-field key into this field."""
        return c % self.p

    def _element_order(self, x: int) -> int:
        n = 1
        y = x
        while y != 1:
            y = self.mul(y, x)
            n += 1
        return n

    def _build_tables(self) -> None:
        q = self.q
        units = list(range(1, q))
        # deterministic generator
        g = None
        for x in units:
            if self._element_order(x) == q - 1:
                if self.k == 1:
                    g = x
                    break
                if self.norm(x) == self.base.g:
                    g = x
                    break
        if g is None:
            raise AlgebraError("no generator found")  # pragma: no cover
        self.g = g
        self.exp_table = [0] * (q - 1)
        self.log_table = {}
        y = 1
        for j in range(q - 1):
            self.exp_table[j] = y
            self.log_table[y] = j
            y = self.mul(y, g)
        assert y == 1, "generator order mismatch"
        if self.k == 2:
            assert self.norm(self.g) == self.base.g

    def dlog(self, x: int) -> int:
        if x not in self.log_table:
            raise AlgebraError(f"dlog of non-unit {x}")
        return self.log_table[x]

    def exp(self, j: int) -> int:
        return self.exp_table[j % (self.q - 1)]

    def units(self) -> list[int]:
        return list(self.exp_table)

    def __repr__(self) -> str:
        return f"GF({self.p}^{self.k})" if self.k > 1 else f"GF({self.p})"


def build_field(p: int, k: int, bound: int = MAX_FIELD_ORDER) -> FieldSpec:
    """Build GF(p^k) with dlog tables; rejects composite p and large orders."""
    return FieldSpec(p, k, _bound=bound)


@dataclass(frozen=True)
class MultChar:
    """Multiplicative character x -> zeta_{q-1}^(e * dlog(x)) of GF(q)^x."""

    field: FieldSpec
    e: int

    def __post_init__(self):
        object.__setattr__(self, "e", self.e % (self.field.q - 1))

    def evaluate(self, x: int) -> int:
        """Exponent of zeta_{q-1} representing the value at the unit x."""
        return (self.e * self.field.dlog(x)) % (self.field.q - 1)

    def __mul__(self, other: "MultChar") -> "MultChar":
        assert self.field is other.field
        return MultChar(self.field, self.e + other.e)

    def inverse(self) -> "MultChar":
        return MultChar(self.field, -self.e)

    def is_trivial(self) -> bool:
        return self.e == 0

    def order(self) -> int:
        n = self.field.q - 1
        return n // gcd(self.e, n) if self.e else 1

    def is_general_position(self) -> bool:
        """For k = 2: whether the character differs from its Frobenius twist."""
        if self.field.k != 2:
            raise AlgebraError("general position is a GF(q^2) notion")
        n = self.field.q - 1
        return (self.e * self.field.p - self.e) % n != 0

    def restrict(self) -> "MultChar":
        """Restriction of a GF(q^2)^x character to the base-field units.

        With the norm-compatible generator convention the embedded base
        units are the (p+1)-st powers of g, so the restricted exponent is
        just e mod (p-1).
        """
        if self.field.k != 2:
            raise AlgebraError("restrict requires an extension field")
        return MultChar(self.field.base, self.e % (self.field.p - 1))


def trivial_char(field: FieldSpec) -> MultChar:
    return MultChar(field, 0)


def quadratic_char(field: FieldSpec) -> MultChar:
    """The order-2 character of GF(q)^x; only exists for odd q."""
    if field.q % 2 == 0:
        raise AlgebraError("no quadratic character for even q")
    return MultChar(field, (field.q - 1) // 2)


@dataclass(frozen=True)
class AdditiveChar:
    """Additive character x -> zeta_p^(trace(a*x)) of GF(q)."""

    field: FieldSpec
    a: int = 1

    def evaluate(self, x: int) -> int:
        """Exponent of zeta_p representing the value at x."""
        return self.field.trace(self.field.mul(self.a % self.field.p, x)) % self.field.p

    def is_nontrivial(self) -> bool:
        return any(self.evaluate(x) for x in range(self.field.q))
