"""Unit groups mod q and Dirichlet characters with exact rational-angle values.

A character is stored as an exponent vector on the cyclic generators of
(Z/qZ)*: ``chi(g_i) = e(x_i / ord_i)``.  Values are carried as exact angles
``a/N`` (``value = e(a/N)``); floating point only appears when a caller asks
for complex values.
"""

from __future__ import annotations

import cmath
import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache, reduce
from math import gcd, pi

import numpy as np

from .arith import euler_phi, factorize, lcm

# Dlog tables are int64 and values of p^e are squared inside the block
# exponentiation, so p^e must stay well below 3e9.  Desk scale is q <= 1e6.
MAX_MODULUS = 10**8


class InvalidModulusError(ValueError):
    pass


class DomainError(ValueError):
    """An operation was asked for outside its mathematical domain."""


@dataclass(frozen=True)
class PrimePowerPart:
    """Unit group structure of (Z/p^e Z)* as a product of cyclic groups."""

    prime: int
    exponent: int
    modulus: int
    generators: tuple[int, ...]
    orders: tuple[int, ...]


def _is_primitive_root(g: int, n: int, order: int, order_primes: list[int]) -> bool:
    if gcd(g, n) != 1:
        return False
    return all(pow(g, order // r, n) != 1 for r in order_primes)


@lru_cache(maxsize=None)
def prime_power_part(p: int, e: int) -> PrimePowerPart:
    pe = p**e
    if p == 2:
        if e == 1:
            return PrimePowerPart(2, 1, 2, (), ())
        if e == 2:
            return PrimePowerPart(2, 2, 4, (3,), (2,))
        return PrimePowerPart(2, e, pe, (pe - 1, 5), (2, 2 ** (e - 2)))
    phi = pe - pe // p
    order_primes = [r for r, _ in factorize(phi)]
    g = 2
    while not _is_primitive_root(g, pe, phi, order_primes):
        g += 1
    return PrimePowerPart(p, e, pe, (g,), (phi,))


def _power_table(g: int, count: int, n: int) -> np.ndarray:
    """[g^0, g^1, ..., g^(count-1)] mod n, built in vectorized blocks."""
    block = min(count, 1024)
    out = np.empty(count, dtype=np.int64)
    x = 1
    for i in range(block):
        out[i] = x
        x = x * g % n
    step = pow(g, block, n)
    filled = block
    while filled < count:
        take = min(filled, count - filled)
        stride = pow(step, filled // block, n)
        out[filled : filled + take] = out[:take] * stride % n
        filled += take
    return out


@lru_cache(maxsize=4096)
def dlog_tables(p: int, e: int) -> tuple[np.ndarray, ...]:
    """Discrete-log tables mod p^e, one per cyclic generator; -1 marks non-units."""
    part = prime_power_part(p, e)
    pe = part.modulus
    if not part.generators:
        return ()
    if p != 2 or e == 2:
        (g,), (order,) = part.generators, part.orders
        table = np.full(pe, -1, dtype=np.int64)
        table[_power_table(g, order, pe)] = np.arange(order, dtype=np.int64)
        table.setflags(write=False)
        return (table,)
    # 2^e with e >= 3: u = (-1)^a 5^b
    half = part.orders[1]
    fives = _power_table(5, half, pe)
    sign_t = np.full(pe, -1, dtype=np.int64)
    five_t = np.full(pe, -1, dtype=np.int64)
    b = np.arange(half, dtype=np.int64)
    sign_t[fives] = 0
    five_t[fives] = b
    neg = (pe - fives) % pe
    sign_t[neg] = 1
    five_t[neg] = b
    sign_t.setflags(write=False)
    five_t.setflags(write=False)
    return (sign_t, five_t)


def _local_conductor(part: PrimePowerPart, exps: tuple[int, ...]) -> int:
    """Conductor of the restriction of a character to the p^e component.

    The component is trivial on the kernel of (Z/p^e)* -> (Z/p^f)* exactly when
    the exponent annihilates that kernel's generator; the smallest such f wins.
    """
    p, e = part.prime, part.exponent
    if not any(exps):
        return 1
    if p != 2:
        (x,), (order,) = exps, part.orders
        for f in range(1, e + 1):
            phi_f = p ** (f - 1) * (p - 1)
            if (x * phi_f) % order == 0:
                return p**f
        raise AssertionError("unreachable: f = e always annihilates")
    if e == 2:
        return 4
    x_sign, x_five = exps
    if x_five == 0:
        return 4 if x_sign else 1
    for f in range(3, e + 1):
        if (x_five * 2 ** (f - 2)) % part.orders[1] == 0:
            return 2**f
    raise AssertionError("unreachable")


@lru_cache(maxsize=None)
def group_parts(q: int) -> tuple[PrimePowerPart, ...]:
    if q < 1:
        raise InvalidModulusError(f"modulus must be a positive integer, got {q}")
    return tuple(prime_power_part(p, e) for p, e in factorize(q))


class ResidueGroup:
    """(Z/qZ)* as a product of cyclic factors, with eager discrete-log tables."""

    def __init__(self, modulus: int):
        if not isinstance(modulus, (int, np.integer)) or modulus < 1:
            raise InvalidModulusError(f"modulus must be a positive integer, got {modulus!r}")
        if modulus > MAX_MODULUS:
            raise InvalidModulusError(f"modulus {modulus} exceeds ceiling {MAX_MODULUS}")
        self.modulus = int(modulus)
        self.parts = group_parts(self.modulus)
        self.tables = tuple(dlog_tables(part.prime, part.exponent) for part in self.parts)

    def __repr__(self) -> str:
        return f"ResidueGroup({self.modulus})"

    def __eq__(self, other) -> bool:
        return isinstance(other, ResidueGroup) and other.modulus == self.modulus

    def __hash__(self) -> int:
        return hash(("ResidueGroup", self.modulus))

    @property
    def factor_data(self) -> list[tuple[int, int, tuple[int, ...], tuple[int, ...]]]:
        return [(pt.prime, pt.exponent, pt.generators, pt.orders) for pt in self.parts]

    @cached_property
    def cyclic_orders(self) -> tuple[int, ...]:
        return tuple(o for pt in self.parts for o in pt.orders)

    @cached_property
    def exponent(self) -> int:
        """Exponent of the group: lcm of the cyclic orders."""
        return reduce(lcm, self.cyclic_orders, 1)

    @property
    def order(self) -> int:
        return euler_phi(self.modulus)

    @cached_property
    def generators(self) -> tuple[int, ...]:
        """Cyclic generators lifted to residues mod q (1 on the other components)."""
        q = self.modulus
        lifted = []
        for pt in self.parts:
            rest = q // pt.modulus
            # CRT: x = g mod p^e, x = 1 mod rest
            inv = pow(rest, -1, pt.modulus) if pt.modulus > 1 else 0
            for g in pt.generators:
                x = (1 + (g - 1) * rest * inv) % q if q > 1 else 0
                lifted.append(x)
        return tuple(lifted)

    def is_unit(self, n: int) -> bool:
        return gcd(n, self.modulus) == 1

    def dlog(self, n: int) -> tuple[int, ...]:
        """Exponent vector of the unit ``n`` on the cyclic generators."""
        if not self.is_unit(n):
            raise DomainError(f"{n} is not a unit mod {self.modulus}")
        out = []
        for pt, tabs in zip(self.parts, self.tables):
            r = n % pt.modulus
            out.extend(int(t[r]) for t in tabs)
        return tuple(out)

    def element(self, exps) -> int:
        x = 1 % self.modulus
        for g, k in zip(self.generators, exps):
            x = x * pow(g, int(k), self.modulus) % self.modulus
        return x

    def exponent_columns(self, n: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        """Per-generator dlog columns for an integer array and the unit mask."""
        n = np.asarray(n, dtype=np.int64)
        cols = []
        unit = np.ones(n.shape, dtype=bool)
        for pt, tabs in zip(self.parts, self.tables):
            r = np.mod(n, pt.modulus)
            unit &= np.mod(r, pt.prime) != 0
            for t in tabs:
                cols.append(t[r])
        return cols, unit

    def characters(self):
        """All characters of the group, in lexicographic exponent order."""
        for exps in itertools.product(*(range(o) for o in self.cyclic_orders)):
            yield DirichletCharacter(self, exps)


@lru_cache(maxsize=2048)
def build_group(q: int) -> ResidueGroup:
    return ResidueGroup(q)


@dataclass(frozen=True)
class CharValue:
    """Exact character value: ``e(num/den)``, or zero."""

    num: int
    den: int
    zero: bool = False

    def __post_init__(self):
        if self.den < 1:
            raise ValueError("denominator must be positive")
        if self.zero:
            object.__setattr__(self, "num", 0)
        else:
            g = gcd(self.num % self.den, self.den)
            object.__setattr__(self, "num", (self.num % self.den) // g)
            object.__setattr__(self, "den", self.den // g)

    @classmethod
    def zero_value(cls) -> CharValue:
        return cls(0, 1, True)

    def __mul__(self, other: CharValue) -> CharValue:
        if self.zero or other.zero:
            return CharValue.zero_value()
        d = lcm(self.den, other.den)
        return CharValue(self.num * (d // self.den) + other.num * (d // other.den), d)

    def conjugate(self) -> CharValue:
        return self if self.zero else CharValue(-self.num, self.den)

    def __complex__(self) -> complex:
        if self.zero:
            return 0j
        return cmath.exp(2j * pi * self.num / self.den)


def _orders_of(parts, exps) -> int:
    orders = [o for pt in parts for o in pt.orders]
    return reduce(lcm, (o // gcd(x, o) for x, o in zip(exps, orders)), 1)


def _conductor_of(parts, exps) -> int:
    cond, i = 1, 0
    for pt in parts:
        k = len(pt.orders)
        cond *= _local_conductor(pt, tuple(exps[i : i + k]))
        i += k
    return cond


class DirichletCharacter:
    """A Dirichlet character mod q given by exponents on the unit-group generators."""

    __slots__ = ("group", "exponents", "__dict__")

    def __init__(self, group: ResidueGroup, exponents):
        orders = group.cyclic_orders
        exponents = tuple(int(x) for x in exponents)
        if len(exponents) != len(orders):
            raise ValueError(f"expected {len(orders)} exponents for modulus {group.modulus}, got {len(exponents)}")
        self.group = group
        self.exponents = tuple(x % o for x, o in zip(exponents, orders))

    @classmethod
    def from_id(cls, ident: str) -> DirichletCharacter:
        """Parse ``"q:x1,x2,..."`` (``"q:"`` for the trivial group)."""
        q_str, _, exps = ident.partition(":")
        group = build_group(int(q_str))
        values = [int(x) for x in exps.split(",") if x.strip()]
        return cls(group, values)

    @property
    def modulus(self) -> int:
        return self.group.modulus

    @property
    def id(self) -> str:
        return f"{self.modulus}:{','.join(map(str, self.exponents))}"

    def __repr__(self) -> str:
        return f"DirichletCharacter({self.id})"

    def __eq__(self, other) -> bool:
        return isinstance(other, DirichletCharacter) and (self.modulus, self.exponents) == (
            other.modulus,
            other.exponents,
        )

    def __hash__(self) -> int:
        return hash((self.modulus, self.exponents))

    def sort_key(self) -> tuple:
        return (self.modulus, self.exponents)

    @cached_property
    def order(self) -> int:
        return _orders_of(self.group.parts, self.exponents)

    @property
    def is_principal(self) -> bool:
        return self.order == 1

    @cached_property
    def parity(self) -> int:
        """chi(-1) as +1 or -1."""
        if self.modulus <= 2:
            return 1
        v = self.value(-1)
        return 1 if v.num == 0 else -1

    @cached_property
    def conductor(self) -> int:
        return _conductor_of(self.group.parts, self.exponents)

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    def conj(self) -> DirichletCharacter:
        return DirichletCharacter(self.group, tuple(-x for x in self.exponents))

    def __mul__(self, other: DirichletCharacter) -> DirichletCharacter:
        if other.modulus != self.modulus:
            raise ValueError("characters must share a modulus; use CharacterProduct")
        return DirichletCharacter(self.group, tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __pow__(self, k: int) -> DirichletCharacter:
        return DirichletCharacter(self.group, tuple(k * x for x in self.exponents))

    def value(self, n: int) -> CharValue:
        q = self.modulus
        n = int(n) % q
        if gcd(n, q) != 1:
            return CharValue.zero_value()
        if q == 1:
            return CharValue(0, 1)
        num = sum(x * d * (self.group.exponent // o) for x, d, o in zip(self.exponents, self.group.dlog(n), self.group.cyclic_orders))
        return CharValue(num, self.group.exponent)

    def __call__(self, n):
        """Complex value(s) at an integer or integer array."""
        if np.ndim(n) == 0:
            return complex(self.value(int(n)))
        return self.values(n)

    @cached_property
    def _angles(self) -> np.ndarray:
        q, k = self.modulus, self.order
        big = self.group.exponent
        n = np.arange(q, dtype=np.int64)
        cols, unit = self.group.exponent_columns(n)
        angle = np.zeros(q, dtype=np.int64)
        for col, x, o in zip(cols, self.exponents, self.group.cyclic_orders):
            if x:
                angle = (angle + col * (x * (big // o))) % big
        angle //= big // k
        angle[~unit] = -1
        angle.setflags(write=False)
        return angle

    def angle_table(self) -> tuple[np.ndarray, int]:
        """(angles, den) over n = 0..q-1: chi(n) = e(angle/den), angle -1 marks zero."""
        return self._angles, self.order

    @cached_property
    def _complex_table(self) -> np.ndarray:
        ang, k = self.angle_table()
        vals = np.exp(2j * np.pi * np.where(ang < 0, 0, ang) / k)
        vals[ang < 0] = 0
        vals.setflags(write=False)
        return vals

    def value_table(self) -> np.ndarray:
        """Complex values over one period n = 0..q-1."""
        return self._complex_table

    def values(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=np.int64)
        return self._complex_table[np.mod(n, self.modulus)]

    def angles(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=np.int64)
        return self._angles[np.mod(n, self.modulus)]


def char_value(chi: DirichletCharacter, n: int) -> CharValue:
    return chi.value(n)


def classify(chi: DirichletCharacter) -> tuple[int, int, int, bool]:
    """(order, parity, conductor, is_primitive)."""
    return chi.order, chi.parity, chi.conductor, chi.is_primitive


def all_characters(q: int) -> list[DirichletCharacter]:
    return list(build_group(q).characters())


def primitive_characters(q: int) -> list[DirichletCharacter]:
    """Primitive characters mod q, filtered from the structure before tables are touched."""
    parts = group_parts(q)
    orders = [o for pt in parts for o in pt.orders]
    hits = [exps for exps in itertools.product(*(range(o) for o in orders)) if _conductor_of(parts, exps) == q]
    if not hits:
        return []
    group = build_group(q)
    return [DirichletCharacter(group, exps) for exps in hits]


def find_characters(q: int, order: int | None = None, parity: int | None = None, primitive: bool | None = None):
    out = []
    for chi in all_characters(q):
        if order is not None and chi.order != order:
            continue
        if parity is not None and chi.parity != parity:
            continue
        if primitive is not None and chi.is_primitive != primitive:
            continue
        out.append(chi)
    return out


def _cubic_primitive_exponents(q: int) -> list[tuple[int, ...]]:
    parts = group_parts(q)
    choices = []
    for pt in parts:
        for o in pt.orders:
            choices.append([x for x in range(0, o, o // 3)] if o % 3 == 0 else [0])
    out = []
    for exps in itertools.product(*choices):
        if _orders_of(parts, exps) == 3 and _conductor_of(parts, exps) == q:
            out.append(exps)
    return sorted(out)


def enumerate_cubic_primitive(Q: int) -> list[DirichletCharacter]:
    """The family F3(Q): primitive cubic characters of conductor q <= Q, gcd(q, 3) = 1.

    Sorted by (q, exponent vector).
    """
    family = []
    for q in range(2, Q + 1):
        if q % 3 == 0:
            continue
        hits = _cubic_primitive_exponents(q)
        if hits:
            group = build_group(q)
            family.extend(DirichletCharacter(group, exps) for exps in hits)
    return family


def gauss_sum(chi: DirichletCharacter) -> complex:
    """tau(chi) = sum_{a mod q} chi(a) e(a/q); primitive characters only."""
    if not chi.is_primitive:
        raise DomainError(f"Gauss sum modulus identity needs a primitive character; {chi.id} has conductor {chi.conductor}")
    q = chi.modulus
    a = np.arange(q)
    return complex(np.sum(chi.value_table() * np.exp(2j * np.pi * a / q)))


class CharacterProduct:
    """Pointwise product of characters (optionally conjugated) on the lcm of their moduli.

    Used for twists such as chi * conj(psi) whose moduli differ.
    """

    def __init__(self, *factors: tuple[DirichletCharacter, bool] | DirichletCharacter):
        parsed = []
        for f in factors:
            if isinstance(f, DirichletCharacter):
                parsed.append((f, False))
            else:
                chi, conj = f
                parsed.append((chi, bool(conj)))
        if not parsed:
            raise ValueError("empty product")
        self.factors = tuple(parsed)
        self.modulus = reduce(lcm, (chi.modulus for chi, _ in parsed), 1)

    @property
    def id(self) -> str:
        return "*".join(("~" if c else "") + chi.id for chi, c in self.factors)

    def __repr__(self) -> str:
        return f"CharacterProduct({self.id})"

    @cached_property
    def _angles(self) -> tuple[np.ndarray, int]:
        den = reduce(lcm, (chi.order for chi, _ in self.factors), 1)
        n = np.arange(self.modulus, dtype=np.int64)
        total = np.zeros(self.modulus, dtype=np.int64)
        zero = np.zeros(self.modulus, dtype=bool)
        for chi, conj in self.factors:
            ang = chi.angles(n)
            zero |= ang < 0
            step = den // chi.order
            total += (-ang if conj else ang) * step
        total %= den
        total[zero] = -1
        total.setflags(write=False)
        return total, den

    def angle_table(self) -> tuple[np.ndarray, int]:
        return self._angles

    @cached_property
    def is_principal(self) -> bool:
        ang, _ = self._angles
        return bool(np.all(ang[ang >= 0] == 0))

    @cached_property
    def _complex_table(self) -> np.ndarray:
        ang, den = self._angles
        vals = np.exp(2j * np.pi * np.where(ang < 0, 0, ang) / den)
        vals[ang < 0] = 0
        return vals

    def value_table(self) -> np.ndarray:
        return self._complex_table

    def values(self, n) -> np.ndarray:
        return self._complex_table[np.mod(np.asarray(n, dtype=np.int64), self.modulus)]

    def __call__(self, n):
        if np.ndim(n) == 0:
            return complex(self._complex_table[int(n) % self.modulus])
        return self.values(n)

    def conj(self) -> CharacterProduct:
        return CharacterProduct(*((chi, not c) for chi, c in self.factors))
