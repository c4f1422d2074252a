"""κ[x] 上の有限表示加群、Hom と Ext、拡大の演算。

Baer 和・押し出し・引き戻しの商や部分加群はシジジーから表示行列を作って表す。
拡大は拡大としての同型でだけ比べる。
"""
from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Sequence

from versal_kit.errors import EndpointMismatchError, InternalConsistencyError, RingMismatchError
from versal_kit.linalg import nullspace, solve
from versal_kit.poly_core import Poly, PolyRing
from versal_kit.standard_basis import (
  INFINITE,
  QuotientBasis,
  Submodule,
  Vector,
  lift_cofactors,
  module_member,
  module_syzygies,
  quotient_dimension,
)

logger = logging.getLogger(__name__)


# ベクトル演算の小道具
def zero_vector(ring: PolyRing, length: int) -> Vector:
  return tuple(ring.zero() for _ in range(length))


def unit_vector(ring: PolyRing, length: int, index: int) -> Vector:
  return tuple(ring.one() if i == index else ring.zero() for i in range(length))


def add_vectors(a: Sequence[Poly], b: Sequence[Poly]) -> Vector:
  return tuple(x + y for x, y in zip(a, b))


def negate_vector(a: Sequence[Poly]) -> Vector:
  return tuple(-x for x in a)


def scale_vector(factor: Poly, a: Sequence[Poly]) -> Vector:
  return tuple(factor * x for x in a)


def combine(coefficients: Sequence[Poly], vectors: Sequence[Sequence[Poly]], ring: PolyRing, length: int) -> Vector:
  total = zero_vector(ring, length)
  for c, v in zip(coefficients, vectors):
    if not c.is_zero:
      total = add_vectors(total, scale_vector(c, v))
  return total


def _pad(vector: Sequence[Poly], ring: PolyRing, before: int, after: int) -> Vector:
  return zero_vector(ring, before) + tuple(vector) + zero_vector(ring, after)


@dataclass(frozen=True)
class PresentedModule:
  """R^rank_free を presentation の列が張る部分加群で割った加群。"""

  ring: PolyRing
  rank_free: int
  presentation: tuple[Vector, ...] = ()

  def __post_init__(self):
    columns = []
    for column in self.presentation:
      column = tuple(column)
      if len(column) != self.rank_free:
        raise ValueError(f"relation of length {len(column)} for a module with {self.rank_free} generators")
      for entry in column:
        if entry.ring != self.ring:
          raise RingMismatchError(f"relation entry lives in {entry.ring}, expected {self.ring}")
      # 零列は落とす
      if any(not entry.is_zero for entry in column):
        columns.append(column)
    object.__setattr__(self, "presentation", tuple(columns))

  @classmethod
  def free(cls, ring: PolyRing, rank: int) -> "PresentedModule":
    return cls(ring, rank, ())

  @classmethod
  def cyclic(cls, ring: PolyRing, relations: Sequence[Poly]) -> "PresentedModule":
    return cls(ring, 1, tuple((r,) for r in relations))

  def relation_module(self) -> Submodule:
    return Submodule(self.ring, self.rank_free, self.presentation)

  def dimension(self) -> int | float:
    return quotient_dimension(self.relation_module())

  def is_finite(self) -> bool:
    return self.dimension() != INFINITE

  def quotient_basis(self) -> QuotientBasis:
    return QuotientBasis(self.relation_module())

  def is_zero_element(self, vector: Sequence[Poly]) -> bool:
    return module_member(tuple(vector), self.relation_module())

  def is_zero(self) -> bool:
    return all(self.is_zero_element(unit_vector(self.ring, self.rank_free, j)) for j in range(self.rank_free))

  def unit(self, index: int) -> Vector:
    return unit_vector(self.ring, self.rank_free, index)

  def block_relations(self, copies: int) -> tuple[Vector, ...]:
    # M^{⊕copies} の関係式
    k = self.rank_free
    return tuple(_pad(column, self.ring, k * c, k * (copies - c - 1)) for c in range(copies) for column in self.presentation)


def direct_sum(first: PresentedModule, second: PresentedModule) -> PresentedModule:
  if first.ring != second.ring:
    raise RingMismatchError(f"direct sum of modules over {first.ring} and {second.ring}")
  ring = first.ring
  relations = tuple(_pad(c, ring, 0, second.rank_free) for c in first.presentation)
  relations += tuple(_pad(c, ring, first.rank_free, 0) for c in second.presentation)
  return PresentedModule(ring, first.rank_free + second.rank_free, relations)


# 写像 R^{len(columns)} -> target の核の生成元
def kernel_generators(columns: Sequence[Sequence[Poly]], target: PresentedModule) -> list[Vector]:
  ring = target.ring
  count = len(columns)
  if target.rank_free == 0:
    return [unit_vector(ring, count, j) for j in range(count)]
  if count == 0:
    return []
  syz = module_syzygies(list(columns) + list(target.presentation), target.rank_free, ring)
  kernel = []
  for column in syz.columns:
    head = tuple(column[:count])
    if any(not entry.is_zero for entry in head):
      kernel.append(head)
  return kernel


# (U + V) / V を U の生成元で表示する
def subquotient(generators: Sequence[Sequence[Poly]], denominators: Sequence[Sequence[Poly]], rank: int, ring: PolyRing) -> PresentedModule:
  count = len(generators)
  if count == 0:
    return PresentedModule(ring, 0, ())
  syz = module_syzygies(list(generators) + list(denominators), rank, ring)
  relations = tuple(tuple(column[:count]) for column in syz.columns)
  return PresentedModule(ring, count, relations)


def _trim_generators(generators: Sequence[Vector], denominators: Sequence[Vector], rank: int, ring: PolyRing) -> list[Vector]:
  # 他の生成元と分母で表せる生成元を後ろから落とす
  kept = [g for g in generators if any(not e.is_zero for e in g)]
  index = len(kept) - 1
  while index >= 0:
    others = kept[:index] + kept[index + 1:]
    if module_member(kept[index], Submodule(ring, rank, tuple(others) + tuple(denominators))):
      kept.pop(index)
    index -= 1
  return kept


@dataclass(frozen=True)
class ModuleHom:
  source: PresentedModule
  target: PresentedModule
  matrix: tuple[Vector, ...]

  def __post_init__(self):
    if self.source.ring != self.target.ring:
      raise RingMismatchError(f"homomorphism between modules over {self.source.ring} and {self.target.ring}")
    columns = tuple(tuple(c) for c in self.matrix)
    object.__setattr__(self, "matrix", columns)
    if len(columns) != self.source.rank_free:
      raise ValueError(f"{len(columns)} images for {self.source.rank_free} generators")
    for column in columns:
      if len(column) != self.target.rank_free:
        raise ValueError(f"image of length {len(column)} in a module with {self.target.rank_free} generators")
    # 関係式が関係式へ写ることを確認
    relations = self.target.relation_module()
    for relation in self.source.presentation:
      if not module_member(self.apply(relation), relations):
        raise ValueError("matrix does not map source relations into target relations")

  @classmethod
  def identity(cls, module: PresentedModule) -> "ModuleHom":
    return cls(module, module, tuple(module.unit(j) for j in range(module.rank_free)))

  @classmethod
  def zero(cls, source: PresentedModule, target: PresentedModule) -> "ModuleHom":
    return cls(source, target, tuple(zero_vector(source.ring, target.rank_free) for _ in range(source.rank_free)))

  def apply(self, vector: Sequence[Poly]) -> Vector:
    return combine(tuple(vector), self.matrix, self.source.ring, self.target.rank_free)

  def compose(self, inner: "ModuleHom") -> "ModuleHom":
    # self ∘ inner
    if inner.target != self.source:
      raise EndpointMismatchError("cannot compose: inner target differs from outer source")
    return ModuleHom(inner.source, self.target, tuple(self.apply(column) for column in inner.matrix))

  def _check_parallel(self, other: "ModuleHom"):
    if self.source != other.source or self.target != other.target:
      raise EndpointMismatchError("homomorphisms have different source or target")

  def __add__(self, other: "ModuleHom") -> "ModuleHom":
    self._check_parallel(other)
    return ModuleHom(self.source, self.target, tuple(add_vectors(a, b) for a, b in zip(self.matrix, other.matrix)))

  def __neg__(self) -> "ModuleHom":
    return ModuleHom(self.source, self.target, tuple(negate_vector(c) for c in self.matrix))

  def __sub__(self, other: "ModuleHom") -> "ModuleHom":
    return self + (-other)

  def scale(self, factor) -> "ModuleHom":
    poly = factor if isinstance(factor, Poly) else self.source.ring.constant(factor)
    return ModuleHom(self.source, self.target, tuple(scale_vector(poly, c) for c in self.matrix))

  def is_zero(self) -> bool:
    return all(self.target.is_zero_element(column) for column in self.matrix)

  def equals(self, other: "ModuleHom") -> bool:
    self._check_parallel(other)
    return (self - other).is_zero()

  def flattened(self) -> Vector:
    return tuple(entry for column in self.matrix for entry in column)


def is_injective(h: ModuleHom) -> bool:
  return all(h.source.is_zero_element(v) for v in kernel_generators(h.matrix, h.target))


def is_surjective(h: ModuleHom) -> bool:
  image = Submodule(h.target.ring, h.target.rank_free, h.matrix + h.target.presentation)
  return all(module_member(h.target.unit(i), image) for i in range(h.target.rank_free))


def is_isomorphism(h: ModuleHom) -> bool:
  return is_injective(h) and is_surjective(h)


@dataclass(frozen=True)
class HomSpace:
  source: PresentedModule
  target: PresentedModule
  dimension: int | float
  basis: tuple[ModuleHom, ...]
  generators: tuple[ModuleHom, ...]
  presentation: PresentedModule | None


def _unflatten(vector: Sequence[Poly], count: int, length: int) -> tuple[Vector, ...]:
  return tuple(tuple(vector[j * length:(j + 1) * length]) for j in range(count))


class _LinearSystem:
  # 有限次元の加群 N への写像を、生成元の像の座標を未知数とする線形方程式で扱う
  def __init__(self, target: PresentedModule, generators: int):
    self.target = target
    self.basis = target.quotient_basis()
    self.dim = self.basis.dimension
    self.generators = generators
    self.field = target.ring.field
    self._cache: dict[Poly, list[list]] = {}

  @property
  def size(self) -> int:
    return self.generators * self.dim

  def _mult(self, poly: Poly) -> list[list]:
    if poly not in self._cache:
      self._cache[poly] = self.basis.multiplication_matrix(poly)
    return self._cache[poly]

  # Σ_j vector_j · φ(e_j) の座標を未知数の一次式 (行のリスト) として返す
  def rows_for(self, vector: Sequence[Poly]) -> list[list]:
    rows = [[self.field.zero] * self.size for _ in range(self.dim)]
    for j, entry in enumerate(vector):
      if entry.is_zero:
        continue
      mult = self._mult(entry)
      for i in range(self.dim):
        for b in range(self.dim):
          if mult[i][b]:
            rows[i][j * self.dim + b] += mult[i][b]
    return rows

  def columns_from(self, solution: Sequence) -> tuple[Vector, ...]:
    return tuple(self.basis.element(solution[j * self.dim:(j + 1) * self.dim]) for j in range(self.generators))


def _hom_module(M: PresentedModule, N: PresentedModule) -> tuple[list[Vector], PresentedModule]:
  ring = M.ring
  k, l, m = M.rank_free, N.rank_free, len(M.presentation)
  if l == 0:
    return [], PresentedModule(ring, 0, ())
  columns = []
  for j in range(k):
    for i in range(l):
      column = [ring.zero()] * (l * m)
      for s, relation in enumerate(M.presentation):
        column[s * l + i] = relation[j]
      columns.append(tuple(column))
  big_target = PresentedModule(ring, l * m, N.block_relations(m))
  generators = kernel_generators(columns, big_target)
  presentation = subquotient(generators, N.block_relations(k), k * l, ring)
  return generators, presentation


def hom_space(M: PresentedModule, N: PresentedModule) -> HomSpace:
  if M.ring != N.ring:
    raise RingMismatchError(f"Hom between modules over {M.ring} and {N.ring}")
  if N.is_finite():
    system = _LinearSystem(N, M.rank_free)
    rows = []
    for relation in M.presentation:
      rows.extend(system.rows_for(relation))
    solutions = nullspace(rows, system.size, system.field)
    basis = tuple(ModuleHom(M, N, system.columns_from(v)) for v in solutions)
    return HomSpace(M, N, len(basis), basis, basis, None)
  generators, presentation = _hom_module(M, N)
  homs = tuple(ModuleHom(M, N, _unflatten(g, M.rank_free, N.rank_free)) for g in generators)
  dimension = presentation.dimension()
  basis: tuple[ModuleHom, ...] = ()
  if dimension != INFINITE:
    quotient = presentation.quotient_basis()
    basis = tuple(
      ModuleHom(M, N, _unflatten(scale_vector(M.ring.monomial(mono), generators[pos]), M.rank_free, N.rank_free))
      for pos, mono in quotient.terms
    )
  return HomSpace(M, N, dimension, basis, homs, presentation)


def _free_resolution(M: PresentedModule) -> tuple[list[int], list[tuple[Vector, ...]]]:
  # F3 -> F2 -> F1 -> F0 -> M
  ring = M.ring
  ranks = [M.rank_free, len(M.presentation)]
  maps = [M.presentation]
  for _ in range(2):
    syz = module_syzygies(maps[-1], ranks[-2], ring) if maps[-1] else None
    columns = syz.columns if syz else ()
    maps.append(columns)
    ranks.append(len(columns))
  return ranks, maps


def _cochain_columns(resolution_map: Sequence[Vector], source_rank: int, target_rank: int, l: int, ring: PolyRing) -> list[Vector]:
  # Hom(F_i, N) -> Hom(F_{i+1}, N) を R^{l·source_rank} -> R^{l·target_rank} の行列として
  columns = []
  for j in range(source_rank):
    for a in range(l):
      column = [ring.zero()] * (l * target_rank)
      for s, image in enumerate(resolution_map):
        column[s * l + a] = image[j]
      columns.append(tuple(column))
  return columns


def ext_module(M: PresentedModule, N: PresentedModule, i: int) -> PresentedModule:
  if i not in (0, 1, 2):
    raise ValueError(f"Ext degree must be 0, 1 or 2, got {i}")
  if M.ring != N.ring:
    raise RingMismatchError(f"Ext between modules over {M.ring} and {N.ring}")
  ring = M.ring
  l = N.rank_free
  ranks, maps = _free_resolution(M)
  if l == 0 or ranks[i] == 0:
    return PresentedModule(ring, 0, ())
  outgoing = _cochain_columns(maps[i], ranks[i], ranks[i + 1], l, ring)
  cycles = kernel_generators(outgoing, PresentedModule(ring, l * ranks[i + 1], N.block_relations(ranks[i + 1])))
  boundaries = list(N.block_relations(ranks[i]))
  if i > 0:
    boundaries += _cochain_columns(maps[i - 1], ranks[i - 1], ranks[i], l, ring)
  return subquotient(cycles, boundaries, l * ranks[i], ring)


def ext_dimension(M: PresentedModule, N: PresentedModule, i: int) -> int | float:
  return ext_module(M, N, i).dimension()


@dataclass(frozen=True)
class Extension:
  """G を F で割る拡大 0 -> G -ι-> E -κ-> F -> 0。"""

  middle: PresentedModule
  iota: ModuleHom
  kappa: ModuleHom

  def __post_init__(self):
    if self.iota.target != self.middle or self.kappa.source != self.middle:
      raise EndpointMismatchError("iota must map into and kappa out of the middle module")

  @property
  def sub(self) -> PresentedModule:
    return self.iota.source

  @property
  def quotient(self) -> PresentedModule:
    return self.kappa.target

  @property
  def ring(self) -> PolyRing:
    return self.middle.ring


@dataclass(frozen=True)
class ExtensionCertificate:
  composite_zero: bool
  iota_injective: bool
  kappa_surjective: bool
  exact_at_middle: bool

  @property
  def valid(self) -> bool:
    return self.composite_zero and self.iota_injective and self.kappa_surjective and self.exact_at_middle


def certify_extension(E: Extension) -> ExtensionCertificate:
  image = Submodule(E.ring, E.middle.rank_free, E.iota.matrix + E.middle.presentation)
  kernel = kernel_generators(E.kappa.matrix, E.quotient)
  return ExtensionCertificate(
    composite_zero=E.kappa.compose(E.iota).is_zero(),
    iota_injective=is_injective(E.iota),
    kappa_surjective=is_surjective(E.kappa),
    exact_at_middle=all(module_member(v, image) for v in kernel),
  )


def _check_endpoints(E1: Extension, E2: Extension):
  if E1.sub != E2.sub or E1.quotient != E2.quotient:
    raise EndpointMismatchError("extensions must share both end modules")


def _coordinates(vector: Vector, generators: Sequence[Vector], denominators: Sequence[Vector], rank: int, ring: PolyRing) -> Vector:
  cofactors = lift_cofactors(vector, list(generators) + list(denominators), rank, ring)
  if cofactors is None:
    raise InternalConsistencyError("element expected in a constructed submodule is not a member")
  return tuple(cofactors[:len(generators)])


def split_extension(F: PresentedModule, G: PresentedModule) -> Extension:
  ring = F.ring
  middle = direct_sum(F, G)
  kF, kG = F.rank_free, G.rank_free
  iota = ModuleHom(G, middle, tuple(_pad(G.unit(y), ring, kF, 0) for y in range(kG)))
  kappa = ModuleHom(middle, F, tuple(F.unit(j) if j < kF else zero_vector(ring, kF) for j in range(kF + kG)))
  return Extension(middle, iota, kappa)


def opposite(E: Extension) -> Extension:
  return Extension(E.middle, -E.iota, E.kappa)


def _baer_sum_data(E1: Extension, E2: Extension) -> tuple[Extension, list[Vector], list[Vector]]:
  _check_endpoints(E1, E2)
  ring = E1.ring
  F, G = E1.quotient, E1.sub
  k1, k2 = E1.middle.rank_free, E2.middle.rank_free
  rank = k1 + k2
  # A = {(e1, e2) : κ1 e1 = κ2 e2}
  columns = list(E1.kappa.matrix) + [negate_vector(c) for c in E2.kappa.matrix]
  pairs = kernel_generators(columns, F)
  # B = {(ι1 y, -ι2 y)} と E1 ⊕ E2 の関係式
  denominators = [tuple(c) for c in direct_sum(E1.middle, E2.middle).presentation]
  denominators += [tuple(a) + negate_vector(b) for a, b in zip(E1.iota.matrix, E2.iota.matrix)]
  pairs = _trim_generators(pairs, denominators, rank, ring)
  middle = subquotient(pairs, denominators, rank, ring)
  iota = ModuleHom(G, middle, tuple(
    _coordinates(_pad(column, ring, 0, k2), pairs, denominators, rank, ring) for column in E1.iota.matrix
  ))
  kappa = ModuleHom(middle, F, tuple(E1.kappa.apply(pair[:k1]) for pair in pairs))
  logger.debug("baer sum: %d generators, %d relations", middle.rank_free, len(middle.presentation))
  return Extension(middle, iota, kappa), pairs, denominators


def baer_sum(E1: Extension, E2: Extension) -> Extension:
  return _baer_sum_data(E1, E2)[0]


def pushforward(g: ModuleHom, E: Extension) -> Extension:
  if g.source != E.sub:
    raise EndpointMismatchError("pushforward map must start at the extension's submodule")
  ring = E.ring
  G2 = g.target
  k, kE = G2.rank_free, E.middle.rank_free
  # (G' ⊕ E) / {(g(y), -ι(y))}
  relations = [tuple(c) for c in direct_sum(G2, E.middle).presentation]
  relations += [tuple(a) + negate_vector(b) for a, b in zip(g.matrix, E.iota.matrix)]
  middle = PresentedModule(ring, k + kE, tuple(relations))
  iota = ModuleHom(G2, middle, tuple(_pad(G2.unit(y), ring, 0, kE) for y in range(k)))
  kappa = ModuleHom(middle, E.quotient, tuple(zero_vector(ring, E.quotient.rank_free) for _ in range(k)) + E.kappa.matrix)
  return Extension(middle, iota, kappa)


def pullback(f: ModuleHom, E: Extension) -> Extension:
  if f.target != E.quotient:
    raise EndpointMismatchError("pullback map must end at the extension's quotient")
  ring = E.ring
  F2 = f.source
  k, kE = F2.rank_free, E.middle.rank_free
  rank = k + kE
  # {(x', e) : f(x') = κ(e)} ⊆ F' ⊕ E
  columns = list(f.matrix) + [negate_vector(c) for c in E.kappa.matrix]
  sections = kernel_generators(columns, E.quotient)
  denominators = [tuple(c) for c in direct_sum(F2, E.middle).presentation]
  sections = _trim_generators(sections, denominators, rank, ring)
  middle = subquotient(sections, denominators, rank, ring)
  iota = ModuleHom(E.sub, middle, tuple(
    _coordinates(_pad(column, ring, k, 0), sections, denominators, rank, ring) for column in E.iota.matrix
  ))
  kappa = ModuleHom(middle, F2, tuple(tuple(s[:k]) for s in sections))
  return Extension(middle, iota, kappa)


def boundary(E: Extension, g: ModuleHom) -> Extension:
  # Hom(G, G') -> Ext^1(F, G') の像 g_*E
  return pushforward(g, E)


def extends_along(E: Extension, g: ModuleHom) -> ModuleHom | None:
  """σ: E -> G' で σ∘ι = g となるものを探す。なければ None。"""
  if g.source != E.sub:
    raise EndpointMismatchError("map must start at the extension's submodule")
  ring = E.ring
  target = g.target
  kE = E.middle.rank_free
  if target.is_finite():
    system = _LinearSystem(target, kE)
    rows, rhs = [], []
    for relation in E.middle.presentation:
      block = system.rows_for(relation)
      rows.extend(block)
      rhs.extend([system.field.zero] * len(block))
    for column, image in zip(E.iota.matrix, g.matrix):
      rows.extend(system.rows_for(column))
      rhs.extend(system.basis.coordinates(image))
    solution = solve(rows, rhs, system.size, system.field)
    if solution is None:
      return None
    return ModuleHom(E.middle, target, system.columns_from(solution))
  # 無限次元のとき: Hom(E, G') の生成元の制限で g を表せるか
  generators, _ = _hom_module(E.middle, target)
  homs = [ModuleHom(E.middle, target, _unflatten(v, kE, target.rank_free)) for v in generators]
  kG = E.sub.rank_free
  restricted = [phi.compose(E.iota).flattened() for phi in homs]
  cofactors = lift_cofactors(g.flattened(), restricted + list(target.block_relations(kG)), target.rank_free * kG, ring)
  if cofactors is None:
    return None
  sigma = ModuleHom.zero(E.middle, target)
  for c, phi in zip(cofactors, homs):
    if not c.is_zero:
      sigma = sigma + phi.scale(c)
  return sigma


def is_split(E: Extension) -> ModuleHom | None:
  return extends_along(E, ModuleHom.identity(E.sub))


def is_extension_morphism(phi: ModuleHom, E1: Extension, E2: Extension) -> bool:
  return phi.compose(E1.iota).equals(E2.iota) and E2.kappa.compose(phi).equals(E1.kappa)


def extensions_isomorphic(E1: Extension, E2: Extension) -> ModuleHom | None:
  """E1 - E2 の分裂から E1 ≅ E2 を組み立てる。分裂しなければ None。"""
  _check_endpoints(E1, E2)
  ring = E1.ring
  difference, pairs, denominators = _baer_sum_data(E1, opposite(E2))
  retraction = is_split(difference)
  if retraction is None:
    return None
  k1, k2 = E1.middle.rank_free, E2.middle.rank_free
  F = E1.quotient
  lift_targets = list(E2.kappa.matrix) + list(F.presentation)
  columns = []
  for j in range(k1):
    # κ2 e2 = κ1 e_j となる e2 を選び φ(e_j) = e2 + ι2 s[e_j, e2]
    cofactors = lift_cofactors(E1.kappa.matrix[j], lift_targets, F.rank_free, ring)
    if cofactors is None:
      raise InternalConsistencyError("kappa of the second extension is not surjective")
    e2 = tuple(cofactors[:k2])
    coords = _coordinates(E1.middle.unit(j) + e2, pairs, denominators, k1 + k2, ring)
    correction = E2.iota.apply(retraction.apply(coords))
    columns.append(add_vectors(e2, correction))
  phi = ModuleHom(E1.middle, E2.middle, tuple(columns))
  if not is_extension_morphism(phi, E1, E2) or not is_isomorphism(phi):
    raise InternalConsistencyError("constructed map is not an isomorphism of extensions")
  return phi
