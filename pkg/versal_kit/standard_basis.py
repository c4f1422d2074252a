"""イデアルと自由加群 R^k の部分加群の標準基底。

大域順序は Buchberger (完全簡約)、局所順序は ecart 付きの Mora 正規形で原点の局所化を計算する。
イデアルは階数 1 の部分加群として扱う。
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import logging
import math
from typing import Any, Sequence

from sympy.polys.monomials import monomial_divides, monomial_lcm, monomial_ldiv, monomial_mul

from versal_kit.errors import InfiniteQuotientError, RingMismatchError
from versal_kit.poly_core import DEGREVLEX, Monomial, MonomialOrder, Poly, PolyRing

logger = logging.getLogger(__name__)

Term = tuple[int, Monomial]
Vector = tuple[Poly, ...]

STAIRCASE_PREVIEW_DEGREE = 3
# 有限次元でない商の次元
INFINITE = math.inf


@dataclass(frozen=True)
class ModuleOrder:
  # split > 0 のとき位置 < split のブロックを優先する消去順序 (POT)、ブロック内は TOP
  order: MonomialOrder
  split: int = 0

  def block(self, term: Term) -> int:
    return 1 if term[0] < self.split else 0

  def key(self, term: Term):
    return (self.block(term), self.order.key(term[1]), -term[0])


class _Element:
  __slots__ = ("terms", "lead", "coeff", "ecart")

  def __init__(self, terms: dict[Term, Any], mord: ModuleOrder):
    self.terms = terms
    self.lead = max(terms, key=mord.key)
    self.coeff = terms[self.lead]
    self.ecart = max(sum(m) for _, m in terms) - sum(self.lead[1])


def _subtract(work: dict[Term, Any], factor, shift: Monomial, source: dict[Term, Any], max_degree: int | None = None):
  # work -= factor * x^shift * source (その場で更新)
  for (pos, mono), coeff in source.items():
    moved = monomial_mul(mono, shift)
    if max_degree is not None and sum(moved) > max_degree:
      continue
    key = (pos, moved)
    value = work.get(key)
    value = -factor * coeff if value is None else value - factor * coeff
    if value:
      work[key] = value
    else:
      work.pop(key, None)


def _find_reducer(lead: Term, elements: Sequence[_Element]) -> _Element | None:
  for element in elements:
    if element.lead[0] == lead[0] and monomial_divides(element.lead[1], lead[1]):
      return element
  return None


# 大域順序での完全簡約。stop_at_lower_block なら下位ブロックに達した時点で残りをそのまま返す
def _reduce_full(terms: dict[Term, Any], elements: Sequence[_Element], mord: ModuleOrder,
                 stop_at_lower_block: bool = False, max_degree: int | None = None) -> dict[Term, Any]:
  work = dict(terms)
  if max_degree is not None:
    work = {t: c for t, c in work.items() if sum(t[1]) <= max_degree}
  remainder: dict[Term, Any] = {}
  while work:
    lead = max(work, key=mord.key)
    if stop_at_lower_block and mord.split and mord.block(lead) == 0:
      remainder.update(work)
      break
    reducer = _find_reducer(lead, elements)
    if reducer is None:
      remainder[lead] = work.pop(lead)
      continue
    factor = work[lead] / reducer.coeff
    _subtract(work, factor, monomial_ldiv(lead[1], reducer.lead[1]), reducer.terms, max_degree)
  return remainder


# Mora の正規形 (ecart 付き)。局所環での弱正規形を返す
def _reduce_mora(terms: dict[Term, Any], elements: Sequence[_Element], mord: ModuleOrder) -> dict[Term, Any]:
  work = dict(terms)
  pool = list(elements)
  while work:
    current = _Element(work, mord)
    candidates = [g for g in pool if g.lead[0] == current.lead[0] and monomial_divides(g.lead[1], current.lead[1])]
    if not candidates:
      return work
    reducer = min(candidates, key=lambda g: g.ecart)
    if reducer.ecart > current.ecart:
      pool.append(_Element(dict(work), mord))
    factor = current.coeff / reducer.coeff
    _subtract(work, factor, monomial_ldiv(current.lead[1], reducer.lead[1]), reducer.terms)
  return {}


def _spoly(f: _Element, g: _Element) -> dict[Term, Any]:
  lcm = monomial_lcm(f.lead[1], g.lead[1])
  work: dict[Term, Any] = {}
  _subtract(work, -(1 / f.coeff), monomial_ldiv(lcm, f.lead[1]), f.terms)
  _subtract(work, 1 / g.coeff, monomial_ldiv(lcm, g.lead[1]), g.terms)
  return work


def _normalize(terms: dict[Term, Any], mord: ModuleOrder) -> _Element:
  element = _Element(terms, mord)
  inverse = 1 / element.coeff
  return _Element({t: c * inverse for t, c in terms.items()}, mord)


def _compute(vectors: Sequence[dict[Term, Any]], mord: ModuleOrder, rank_one: bool) -> list[_Element]:
  local = mord.order.is_local
  elements: list[_Element] = []
  pairs: set[tuple[int, int]] = set()

  def add(terms: dict[Term, Any]):
    element = _normalize(terms, mord)
    index = len(elements)
    for other_index, other in enumerate(elements):
      if other.lead[0] != element.lead[0]:
        continue
      # 積判定 (イデアル・大域順序のみ)
      if rank_one and not local and all(a == 0 or b == 0 for a, b in zip(other.lead[1], element.lead[1])):
        continue
      pairs.add((other_index, index))
    elements.append(element)

  for terms in vectors:
    if terms:
      add(terms)

  def pair_key(pair: tuple[int, int]):
    lcm = monomial_lcm(elements[pair[0]].lead[1], elements[pair[1]].lead[1])
    return (sum(lcm), pair[1], pair[0])

  reduce = _reduce_mora if local else _reduce_full
  processed = 0
  while pairs:
    pair = min(pairs, key=pair_key)
    pairs.remove(pair)
    processed += 1
    remainder = reduce(_spoly(elements[pair[0]], elements[pair[1]]), elements, mord)
    if remainder:
      add(remainder)
  logger.debug("standard basis: %d elements, %d pairs (%s)", len(elements), processed, mord.order.kind)
  return elements


def _minimalize(elements: list[_Element], mord: ModuleOrder) -> list[_Element]:
  ordered = sorted(elements, key=lambda e: mord.key(e.lead))
  kept: list[_Element] = []
  for element in ordered:
    if _find_reducer(element.lead, kept) is None:
      kept.append(element)
  return kept


def _interreduce(elements: list[_Element], mord: ModuleOrder) -> list[_Element]:
  reduced = []
  for index, element in enumerate(elements):
    others = elements[:index] + elements[index + 1:]
    tail = dict(element.terms)
    lead_coeff = tail.pop(element.lead)
    remainder = _reduce_full(tail, others, mord)
    remainder[element.lead] = lead_coeff
    reduced.append(_normalize(remainder, mord))
  return reduced


def _to_terms(vector: Sequence[Poly], offset: int = 0) -> dict[Term, Any]:
  terms: dict[Term, Any] = {}
  for pos, poly in enumerate(vector):
    for mono, coeff in poly.terms.items():
      terms[(pos + offset, mono)] = coeff
  return terms


def _from_terms(terms: dict[Term, Any], ring: PolyRing, rank: int, offset: int = 0) -> Vector:
  buckets: list[dict[Monomial, Any]] = [{} for _ in range(rank)]
  for (pos, mono), coeff in terms.items():
    if offset <= pos < offset + rank:
      buckets[pos - offset][mono] = coeff
  return tuple(Poly._trusted(ring, bucket) for bucket in buckets)


@dataclass(frozen=True)
class Submodule:
  ring: PolyRing
  rank: int
  generators: tuple[Vector, ...]
  order: MonomialOrder = DEGREVLEX

  def __post_init__(self):
    object.__setattr__(self, "generators", tuple(tuple(v) for v in self.generators))
    for vector in self.generators:
      if len(vector) != self.rank:
        raise ValueError(f"generator of length {len(vector)} in a rank-{self.rank} module")
      for entry in vector:
        if entry.ring != self.ring:
          raise RingMismatchError(f"generator entry lives in {entry.ring}, expected {self.ring}")

  def with_order(self, order: MonomialOrder) -> "Submodule":
    return Submodule(self.ring, self.rank, self.generators, order)


@dataclass(frozen=True)
class Ideal:
  generators: tuple[Poly, ...]
  order: MonomialOrder = DEGREVLEX

  def __post_init__(self):
    object.__setattr__(self, "generators", tuple(self.generators))
    if not self.generators:
      raise ValueError("an ideal needs at least one generator (use the zero polynomial for the zero ideal)")
    ring = self.generators[0].ring
    for g in self.generators:
      if g.ring != ring:
        raise RingMismatchError(f"ideal generators live in different rings: {ring} vs {g.ring}")

  @property
  def ring(self) -> PolyRing:
    return self.generators[0].ring

  def as_submodule(self) -> Submodule:
    return Submodule(self.ring, 1, tuple((g,) for g in self.generators), self.order)

  def basis(self) -> "StandardBasis":
    return compute_standard_basis(self)

  def with_order(self, order: MonomialOrder) -> "Ideal":
    return Ideal(self.generators, order)


@dataclass(frozen=True)
class StandardBasis:
  ring: PolyRing
  rank: int
  order: MonomialOrder
  vectors: tuple[Vector, ...]
  is_reduced: bool
  _elements: tuple[_Element, ...] = field(default=(), compare=False, repr=False)

  @property
  def elements(self) -> tuple[Poly, ...]:
    return tuple(v[0] for v in self.vectors)

  @property
  def leading_terms(self) -> tuple[Term, ...]:
    return tuple(e.lead for e in self._elements)

  @property
  def module_order(self) -> ModuleOrder:
    return ModuleOrder(self.order)


@dataclass(frozen=True)
class Staircase:
  rank: int
  standard_terms: tuple[Term, ...]
  finite: bool
  max_degree: int

  @property
  def standard_monomials(self) -> tuple:
    if self.rank == 1:
      return tuple(mono for _, mono in self.standard_terms)
    return self.standard_terms

  def __len__(self) -> int:
    return len(self.standard_terms)


@dataclass(frozen=True)
class SyzygyModule:
  presentation: tuple[Vector, ...]
  length: int

  @property
  def columns(self) -> tuple[Vector, ...]:
    return self.presentation


@lru_cache(maxsize=2048)
def compute_module_basis(submodule: Submodule) -> StandardBasis:
  mord = ModuleOrder(submodule.order)
  vectors = [_to_terms(v) for v in submodule.generators]
  elements = _minimalize(_compute(vectors, mord, submodule.rank == 1), mord)
  reduced = not submodule.order.is_local
  if reduced:
    elements = _interreduce(elements, mord)
  elements.sort(key=lambda e: mord.key(e.lead), reverse=True)
  return StandardBasis(
    ring=submodule.ring,
    rank=submodule.rank,
    order=submodule.order,
    vectors=tuple(_from_terms(e.terms, submodule.ring, submodule.rank) for e in elements),
    is_reduced=reduced,
    _elements=tuple(elements),
  )


def compute_standard_basis(ideal: Ideal) -> StandardBasis:
  return compute_module_basis(ideal.as_submodule())


def _check_basis(ring: PolyRing, basis: StandardBasis):
  if ring != basis.ring:
    raise RingMismatchError(f"basis lives in {basis.ring}, element in {ring}")


def vector_normal_form(vector: Sequence[Poly], basis: StandardBasis) -> Vector:
  if len(vector) != basis.rank:
    raise ValueError(f"vector of length {len(vector)} against a rank-{basis.rank} basis")
  for entry in vector:
    _check_basis(entry.ring, basis)
  mord = basis.module_order
  terms = _to_terms(vector)
  if basis.order.is_local:
    remainder = _reduce_mora(terms, basis._elements, mord)
  else:
    remainder = _reduce_full(terms, basis._elements, mord)
  return _from_terms(remainder, basis.ring, basis.rank)


def normal_form(p: Poly, basis: StandardBasis) -> Poly:
  if basis.rank != 1:
    raise ValueError("normal_form expects an ideal basis; use vector_normal_form for modules")
  return vector_normal_form((p,), basis)[0]


def module_member(vector: Sequence[Poly], submodule: Submodule) -> bool:
  if all(entry.is_zero for entry in vector):
    return True
  return all(entry.is_zero for entry in vector_normal_form(vector, compute_module_basis(submodule)))


def ideal_member(p: Poly, ideal: Ideal) -> bool:
  if p.ring != ideal.ring:
    raise RingMismatchError(f"element lives in {p.ring}, ideal in {ideal.ring}")
  return module_member((p,), ideal.as_submodule())


def module_staircase(submodule: Submodule, preview_degree: int = STAIRCASE_PREVIEW_DEGREE) -> Staircase:
  basis = compute_module_basis(submodule)
  nvars = submodule.ring.nvars
  leads = basis.leading_terms
  finite = True
  for pos in range(submodule.rank):
    pos_leads = [mono for p, mono in leads if p == pos]
    if any(sum(mono) == 0 for mono in pos_leads):
      continue
    # 有限性: 各変数の純粋冪が先頭項イデアルに入る
    for var in range(nvars):
      if not any(mono[var] > 0 and sum(mono) == mono[var] for mono in pos_leads):
        finite = False
  bound = None if finite else preview_degree
  found: set[Term] = set()
  frontier: list[Term] = []
  for pos in range(submodule.rank):
    start = (pos, (0,) * nvars)
    if _find_reducer(start, basis._elements) is None:
      found.add(start)
      frontier.append(start)
  while frontier:
    pos, mono = frontier.pop()
    for var in range(nvars):
      bigger = list(mono)
      bigger[var] += 1
      candidate = (pos, tuple(bigger))
      if candidate in found or (bound is not None and sum(candidate[1]) > bound):
        continue
      if _find_reducer(candidate, basis._elements) is None:
        found.add(candidate)
        frontier.append(candidate)
  # 次数の昇順、同じ次数では位置の昇順・degrevlex の降順
  ordered = sorted(found, key=lambda t: DEGREVLEX.key(t[1]), reverse=True)
  ordered.sort(key=lambda t: (sum(t[1]), t[0]))
  return Staircase(
    rank=submodule.rank,
    standard_terms=tuple(ordered),
    finite=finite,
    max_degree=max((sum(m) for _, m in ordered), default=-1),
  )


def quotient_staircase(ideal: Ideal, preview_degree: int = STAIRCASE_PREVIEW_DEGREE) -> Staircase:
  return module_staircase(ideal.as_submodule(), preview_degree)


@lru_cache(maxsize=1024)
def _elimination_basis(generators: tuple[Vector, ...], rank: int, ring: PolyRing) -> tuple[_Element, ...]:
  # (g_i, e_i) を R^rank ⊕ R^r で POT 消去順序により計算する
  count = len(generators)
  mord = ModuleOrder(DEGREVLEX, split=rank)
  one = (0,) * ring.nvars
  vectors = []
  for index, vector in enumerate(generators):
    terms = _to_terms(vector)
    terms[(rank + index, one)] = ring.field.one
    vectors.append(terms)
  elements = _minimalize(_compute(vectors, mord, rank_one=False), mord)
  logger.debug("elimination basis: %d generators -> %d elements", count, len(elements))
  return tuple(elements)


def module_syzygies(generators: Sequence[Sequence[Poly]], rank: int, ring: PolyRing) -> SyzygyModule:
  generators = tuple(tuple(v) for v in generators)
  count = len(generators)
  if count == 0:
    return SyzygyModule((), 0)
  mord = ModuleOrder(DEGREVLEX, split=rank)
  columns = []
  for element in _elimination_basis(generators, rank, ring):
    if mord.block(element.lead) == 0:
      columns.append(_from_terms(element.terms, ring, count, offset=rank))
  return SyzygyModule(tuple(columns), count)


def syzygies(polys: Sequence[Poly]) -> SyzygyModule:
  if not polys:
    raise ValueError("syzygies of an empty tuple")
  ring = polys[0].ring
  for p in polys:
    if p.ring != ring:
      raise RingMismatchError(f"tuple entries live in different rings: {ring} vs {p.ring}")
  return module_syzygies([(p,) for p in polys], 1, ring)


# v = Σ c_i g_i となる係数 c を返す (大域順序)。属さなければ None
def lift_cofactors(vector: Sequence[Poly], generators: Sequence[Sequence[Poly]], rank: int, ring: PolyRing) -> tuple[Poly, ...] | None:
  generators = tuple(tuple(v) for v in generators)
  count = len(generators)
  if all(entry.is_zero for entry in vector):
    return tuple(ring.zero() for _ in range(count))
  if count == 0:
    return None
  mord = ModuleOrder(DEGREVLEX, split=rank)
  remainder = _reduce_full(_to_terms(vector), _elimination_basis(generators, rank, ring), mord, stop_at_lower_block=True)
  if any(pos < rank for pos, _ in remainder):
    return None
  return tuple(-c for c in _from_terms(remainder, ring, count, offset=rank))


# 局所環での持ち上げ。u v = Σ c_i g_i かつ u(0) = 1 となる (u, c) を返す。大域で書ければ u = 1、属さなければ None
def local_lift_cofactors(
  vector: Sequence[Poly], generators: Sequence[Sequence[Poly]], rank: int, ring: PolyRing
) -> tuple[Poly, tuple[Poly, ...]] | None:
  cofactors = lift_cofactors(vector, generators, rank, ring)
  if cofactors is not None:
    return ring.one(), cofactors
  # (v, g_1, ..., g_m) のシジジーのうち v の係数が原点で 0 でないもの
  relations = module_syzygies([tuple(vector)] + [tuple(g) for g in generators], rank, ring)
  for column in relations.columns:
    head = column[0].constant_coefficient()
    if head:
      inverse = ring.field.one / head
      return column[0].scale(inverse), tuple(entry.scale(-inverse) for entry in column[1:])
  return None


class QuotientBasis:
  """有限次元の商 R^k / U (局所順序なら局所化したもの) の標準単項式基底と正規座標。"""

  def __init__(self, submodule: Submodule):
    self.submodule = submodule
    self.ring = submodule.ring
    self.rank = submodule.rank
    self.basis = compute_module_basis(submodule)
    self.staircase = module_staircase(submodule)
    if not self.staircase.finite:
      raise InfiniteQuotientError("quotient is not finite-dimensional")
    self.terms = self.staircase.standard_terms
    self._index = {term: i for i, term in enumerate(self.terms)}
    # 局所順序では最高角より上の次数を切り捨てる (m^{D+1} が部分加群に入るため)
    self._max_degree = self.staircase.max_degree if submodule.order.is_local else None

  @property
  def dimension(self) -> int:
    return len(self.terms)

  def _reduce_terms(self, terms: dict[Term, Any]) -> dict[Term, Any]:
    if self._max_degree is not None and self._max_degree < 0:
      return {}
    return _reduce_full(terms, self.basis._elements, self.basis.module_order, max_degree=self._max_degree)

  def reduce(self, vector: Sequence[Poly]) -> Vector:
    return _from_terms(self._reduce_terms(_to_terms(vector)), self.ring, self.rank)

  def coordinates(self, vector: Sequence[Poly]) -> list:
    zero = self.ring.field.zero
    coords = [zero] * self.dimension
    for term, coeff in self._reduce_terms(_to_terms(vector)).items():
      coords[self._index[term]] = coeff
    return coords

  def element(self, coordinates: Sequence) -> Vector:
    terms = {term: c for term, c in zip(self.terms, coordinates) if c}
    return _from_terms(terms, self.ring, self.rank)

  def basis_vector(self, index: int) -> Vector:
    return _from_terms({self.terms[index]: self.ring.field.one}, self.ring, self.rank)

  # 列 j が poly * (基底 j) の座標となる行列
  def multiplication_matrix(self, poly: Poly) -> list[list]:
    columns = [self.coordinates(tuple(poly * entry for entry in self.basis_vector(j))) for j in range(self.dimension)]
    return [[columns[j][i] for j in range(self.dimension)] for i in range(self.dimension)]


def quotient_dimension(submodule: Submodule) -> int | float:
  staircase = module_staircase(submodule)
  return len(staircase) if staircase.finite else INFINITE
