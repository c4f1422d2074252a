from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
import re
from typing import Any, Iterable, Mapping

from sympy import QQ, GF, Rational, isprime, symbols
from sympy.polys.monomials import Monomial as SympyMonomial, itermonomials
from sympy.polys.orderings import grevlex, lex
from sympy.polys.rings import PolyElement, PolyRing as SympyPolyRing

from versal_kit.errors import FieldSpecError, RingMismatchError

Monomial = tuple[int, ...]


# 係数体 κ。標数 0 なら有理数体、素数 p なら GF(p) (代表元は [0, p))
class Field:
  def __init__(self, characteristic: int = 0):
    if characteristic != 0 and (characteristic < 2 or not isprime(characteristic)):
      raise FieldSpecError(f"field characteristic must be 0 or a prime, got {characteristic}")
    self.characteristic = characteristic
    self.domain = QQ if characteristic == 0 else GF(characteristic, symmetric=False)

  @classmethod
  def from_spec(cls, spec: str) -> "Field":
    text = spec.strip()
    if text in ("Q", "QQ"):
      return cls(0)
    match = re.fullmatch(r"(?:Fp|GF)\s*[:\s(]\s*(\d+)\s*\)?", text)
    if not match:
      raise FieldSpecError(f"unknown field spec {spec!r} (expected 'Q' or 'Fp:<prime>')")
    return cls(int(match.group(1)))

  @property
  def spec(self) -> str:
    return "Q" if self.characteristic == 0 else f"Fp:{self.characteristic}"

  @property
  def zero(self):
    return self.domain.zero

  @property
  def one(self):
    return self.domain.one

  def __call__(self, value: Any):
    if self.domain.of_type(value):
      return value
    if isinstance(value, bool):
      value = int(value)
    if isinstance(value, int):
      return self.domain(value)
    if isinstance(value, Fraction):
      return self._ratio(value.numerator, value.denominator)
    if isinstance(value, Rational):
      return self._ratio(int(value.p), int(value.q))
    if isinstance(value, str):
      num, _, den = value.strip().partition("/")
      return self._ratio(int(num), int(den) if den else 1)
    if isinstance(value, tuple) and len(value) == 2:
      return self._ratio(int(value[0]), int(value[1]))
    raise FieldSpecError(f"cannot convert {value!r} into {self.spec}")

  def _ratio(self, numerator: int, denominator: int):
    if denominator == 0:
      raise ZeroDivisionError("zero denominator")
    if self.characteristic and denominator % self.characteristic == 0:
      raise FieldSpecError(f"denominator {denominator} is not invertible in {self.spec}")
    return self.domain(numerator) / self.domain(denominator)

  def is_negative(self, value) -> bool:
    return self.characteristic == 0 and value < 0

  # "p/q" 形式。整数なら分母を省く
  def format(self, value) -> str:
    if self.characteristic:
      return str(int(value))
    numerator, denominator = int(value.numerator), int(value.denominator)
    return str(numerator) if denominator == 1 else f"{numerator}/{denominator}"

  # JSON 用: 整数なら int、そうでなければ "p/q"
  def to_json(self, value) -> int | str:
    text = self.format(value)
    return int(text) if "/" not in text else text

  def __eq__(self, other: object) -> bool:
    return isinstance(other, Field) and other.characteristic == self.characteristic

  def __hash__(self) -> int:
    return hash(("Field", self.characteristic))

  def __repr__(self) -> str:
    return f"Field({self.spec})"


QQ_FIELD = Field(0)


@dataclass(frozen=True)
class MonomialOrder:
  kind: str

  def __post_init__(self):
    if self.kind not in ("degrevlex", "lex", "negdegrevlex"):
      raise ValueError(f"unknown monomial order {self.kind!r}")

  @property
  def is_local(self) -> bool:
    return self.kind == "negdegrevlex"

  # 大きいキーほど大きい単項式。局所順序は次数だけ反転し、同次数では grevlex に従う
  def key(self, mono: Monomial):
    if self.kind == "lex":
      return lex(mono)
    degree, revlex = grevlex(mono)
    if self.kind == "degrevlex":
      return (degree, revlex)
    return (-degree, revlex)


DEGREVLEX = MonomialOrder("degrevlex")
LEX = MonomialOrder("lex")
NEGDEGREVLEX = MonomialOrder("negdegrevlex")

_IDENTIFIER = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@lru_cache(maxsize=None)
def _sympy_ring(variables: tuple[str, ...], field: Field) -> SympyPolyRing:
  return SympyPolyRing(",".join(variables), field.domain, lex)


@dataclass(frozen=True)
class PolyRing:
  variables: tuple[str, ...]
  field: Field = QQ_FIELD

  def __post_init__(self):
    object.__setattr__(self, "variables", tuple(self.variables))
    if len(set(self.variables)) != len(self.variables):
      raise ValueError(f"duplicate variable names in {self.variables}")
    for name in self.variables:
      if not _IDENTIFIER.fullmatch(name):
        raise ValueError(f"invalid variable name {name!r}")

  # 実体は sympy の多項式環
  @property
  def sympy(self) -> SympyPolyRing:
    return _sympy_ring(self.variables, self.field)

  @property
  def nvars(self) -> int:
    return len(self.variables)

  def index(self, name: str) -> int:
    try:
      return self.variables.index(name)
    except ValueError:
      raise ValueError(f"variable {name!r} is not in {self.variables}")

  def zero(self) -> "Poly":
    return Poly._wrap(self, self.sympy.zero)

  def one(self) -> "Poly":
    return Poly._wrap(self, self.sympy.one)

  def constant(self, value) -> "Poly":
    return Poly._wrap(self, self.sympy.ground_new(self.field(value)))

  def monomial(self, exponents: Iterable[int], coeff=1) -> "Poly":
    return Poly(self, {tuple(exponents): coeff})

  def gen(self, which: int | str) -> "Poly":
    index = self.index(which) if isinstance(which, str) else which
    return Poly._wrap(self, self.sympy.gens[index])

  def gens(self) -> tuple["Poly", ...]:
    return tuple(Poly._wrap(self, g) for g in self.sympy.gens)

  def from_sympy(self, element: PolyElement) -> "Poly":
    return Poly._wrap(self, self.sympy.ring_new(element))

  def extend(self, names: Iterable[str]) -> "PolyRing":
    return PolyRing(self.variables + tuple(names), self.field)

  def __repr__(self) -> str:
    return f"PolyRing({', '.join(self.variables)}; {self.field.spec})"


class Poly:
  """PolyRing 上の多項式。sympy の PolyElement を包み、terms (Monomial -> 係数) として読む。構築後は変更しない。"""

  __slots__ = ("ring", "terms", "_hash")

  def __init__(self, ring: PolyRing, terms: Mapping[Monomial, Any] | None = None):
    cleaned: dict[Monomial, Any] = {}
    for mono, coeff in (terms or {}).items():
      if len(mono) != ring.nvars:
        raise ValueError(f"monomial {mono} does not match ring {ring}")
      value = ring.field(coeff)
      if value:
        cleaned[tuple(mono)] = value
    self.ring = ring
    self.terms: PolyElement = ring.sympy.from_dict(cleaned)
    self._hash = None

  @classmethod
  def _wrap(cls, ring: PolyRing, element: PolyElement) -> "Poly":
    poly = cls.__new__(cls)
    poly.ring = ring
    poly.terms = element
    poly._hash = None
    return poly

  # 係数が既に体の元で 0 を含まない dict から作る
  @classmethod
  def _trusted(cls, ring: PolyRing, terms: Mapping[Monomial, Any]) -> "Poly":
    return cls._wrap(ring, ring.sympy.from_dict(dict(terms)))

  def _coerce(self, other) -> "Poly":
    if isinstance(other, Poly):
      if other.ring != self.ring:
        raise RingMismatchError(f"ring mismatch: {self.ring} vs {other.ring}")
      return other
    return self.ring.constant(other)

  @property
  def is_zero(self) -> bool:
    return not self.terms

  def __bool__(self) -> bool:
    return bool(self.terms)

  def __add__(self, other) -> "Poly":
    return Poly._wrap(self.ring, self.terms + self._coerce(other).terms)

  __radd__ = __add__

  def __neg__(self) -> "Poly":
    return Poly._wrap(self.ring, -self.terms)

  def __sub__(self, other) -> "Poly":
    return Poly._wrap(self.ring, self.terms - self._coerce(other).terms)

  def __rsub__(self, other) -> "Poly":
    return self._coerce(other) - self

  def __mul__(self, other) -> "Poly":
    if not isinstance(other, Poly):
      return self.scale(other)
    return Poly._wrap(self.ring, self.terms * self._coerce(other).terms)

  __rmul__ = __mul__

  def __pow__(self, exponent: int) -> "Poly":
    if exponent < 0:
      raise ValueError("negative exponent")
    return Poly._wrap(self.ring, self.terms ** exponent)

  def scale(self, factor) -> "Poly":
    return Poly._wrap(self.ring, self.terms.mul_ground(self.ring.field(factor)))

  def __eq__(self, other: object) -> bool:
    if isinstance(other, Poly):
      return self.ring == other.ring and dict(self.terms) == dict(other.terms)
    if isinstance(other, (int, Fraction, Rational)):
      return self == self.ring.constant(other)
    return NotImplemented

  def __hash__(self) -> int:
    if self._hash is None:
      self._hash = hash((self.ring, frozenset(self.terms.items())))
    return self._hash

  def degree(self) -> int:
    return max((sum(m) for m in self.terms), default=-1)

  def low_degree(self) -> int:
    return min((sum(m) for m in self.terms), default=-1)

  def coefficient(self, mono: Monomial):
    return self.terms.get(tuple(mono), self.ring.field.zero)

  def constant_coefficient(self):
    return self.coefficient((0,) * self.ring.nvars)

  def sorted_terms(self, order: MonomialOrder = DEGREVLEX) -> list[tuple[Monomial, Any]]:
    return sorted(self.terms.items(), key=lambda item: order.key(item[0]), reverse=True)

  def leading_term(self, order: MonomialOrder = DEGREVLEX) -> tuple[Monomial, Any]:
    if not self.terms:
      raise ValueError("zero polynomial has no leading term")
    mono = max(self.terms, key=order.key)
    return mono, self.terms[mono]

  def derivative(self, var_index: int) -> "Poly":
    if not 0 <= var_index < self.ring.nvars:
      raise IndexError(f"variable index {var_index} out of range for {self.ring}")
    result = self.terms.diff(self.ring.sympy.gens[var_index])
    # 標数 p では p の倍数の指数が 0 係数として残る
    result.strip_zero()
    return Poly._wrap(self.ring, result)

  def truncate(self, max_degree: int) -> "Poly":
    return Poly._trusted(self.ring, {m: c for m, c in self.terms.items() if sum(m) <= max_degree})

  # 同時代入。images にない変数は target の同名変数へ写す
  def substitute(self, images: Mapping[str, "Poly"], target: PolyRing | None = None) -> "Poly":
    target = target or self.ring
    if target.field != self.ring.field:
      raise RingMismatchError(f"field mismatch: {self.ring.field} vs {target.field}")
    for name, image in images.items():
      if name in self.ring.variables and image.ring != target:
        raise RingMismatchError(f"image of {name} lives in {image.ring}, expected {target}")
    missing = [name for name in self.ring.variables if name not in images and name not in target.variables]
    if missing:
      raise ValueError(f"variables {missing} have no image in {target}")
    moved = {name: name for name in self.ring.variables if name in target.variables}
    if len(moved) == self.ring.nvars:
      # 同名の変数へ付け替えてから target 内で compose する
      positions = [target.index(name) for name in self.ring.variables]
      terms: dict[Monomial, Any] = {}
      for mono, coeff in self.terms.items():
        exps = [0] * target.nvars
        for pos, e in zip(positions, mono):
          exps[pos] += e
        terms[tuple(exps)] = coeff
      embedded = target.sympy.from_dict(terms)
      replacements = [
        (target.sympy.gens[target.index(name)], images[name].terms)
        for name in self.ring.variables if name in images
      ]
      return Poly._wrap(target, embedded.compose(replacements) if replacements else embedded)
    gens = [images[name].terms if name in images else target.sympy.gens[target.index(name)] for name in self.ring.variables]
    result = target.sympy.zero
    for mono, coeff in self.terms.items():
      term = target.sympy.ground_new(coeff)
      for gen, exponent in zip(gens, mono):
        if exponent:
          term *= gen ** exponent
      result += term
    return Poly._wrap(target, result)

  def __str__(self) -> str:
    return format_poly(self)

  def __repr__(self) -> str:
    return f"Poly({format_poly(self)!r}, {self.ring!r})"


def format_monomial(ring: PolyRing, mono: Monomial) -> str:
  factors = []
  for name, exponent in zip(ring.variables, mono):
    if exponent == 1:
      factors.append(name)
    elif exponent > 1:
      factors.append(f"{name}^{exponent}")
  return "*".join(factors)


def format_poly(p: Poly, order: MonomialOrder = DEGREVLEX) -> str:
  if p.is_zero:
    return "0"
  field = p.ring.field
  pieces: list[str] = []
  for index, (mono, coeff) in enumerate(p.sorted_terms(order)):
    negative = field.is_negative(coeff)
    magnitude = -coeff if negative else coeff
    mono_text = format_monomial(p.ring, mono)
    coeff_text = field.format(magnitude)
    if not mono_text:
      body = coeff_text
    elif coeff_text == "1":
      body = mono_text
    else:
      body = f"{coeff_text}*{mono_text}"
    if index == 0:
      pieces.append(f"-{body}" if negative else body)
    else:
      pieces.append(f" - {body}" if negative else f" + {body}")
  return "".join(pieces)


def poly_add(a: Poly, b: Poly) -> Poly:
  if a.ring != b.ring:
    raise RingMismatchError(f"ring mismatch: {a.ring} vs {b.ring}")
  return a + b


def poly_mul(a: Poly, b: Poly) -> Poly:
  if a.ring != b.ring:
    raise RingMismatchError(f"ring mismatch: {a.ring} vs {b.ring}")
  return a * b


def partial_derivative(p: Poly, var_index: int) -> Poly:
  return p.derivative(var_index)


# 次数 max_degree 以下の指数ベクトル (次数の低い順)
def monomials_up_to(nvars: int, max_degree: int) -> list[Monomial]:
  if max_degree < 0:
    return []
  if nvars == 0:
    return [()]
  gens = symbols(f"m0:{nvars}")
  monomials = [SympyMonomial(m, gens).exponents for m in itermonomials(gens, max_degree)]
  return sorted(monomials, key=grevlex)


def monomials_of_degree(nvars: int, degree: int) -> list[Monomial]:
  if degree < 0:
    return []
  if nvars == 0:
    return [()] if degree == 0 else []
  gens = symbols(f"m0:{nvars}")
  monomials = [SympyMonomial(m, gens).exponents for m in itermonomials(gens, degree, degree)]
  return sorted(monomials, key=grevlex)
