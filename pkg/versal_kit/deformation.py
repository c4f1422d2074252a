"""アルティン底、小拡大上の埋め込み持ち上げとその不変量。

持ち上げは族の環 κ[x, t] の多項式で持ち、t 係数は底の関係式の正規形にそろえる。
アルティン環の演算はすべて関係式の degrevlex グレブナー基底での正規形計算。
"""
from __future__ import annotations

from dataclasses import dataclass
import logging
from typing import Iterable, Mapping, Sequence

from versal_kit.errors import (
  BaseMismatchError,
  InfiniteQuotientError,
  InternalConsistencyError,
  ReductionMismatchError,
  RestrictionMismatchError,
)
from versal_kit.linalg import echelon_basis, solve
from versal_kit.poly_core import DEGREVLEX, NEGDEGREVLEX, QQ_FIELD, Field, Monomial, Poly, PolyRing, monomials_of_degree
from versal_kit.singularity import (
  Singularity,
  certify_regular_sequence,
  koszul_relations,
  tangent_module,
)
from versal_kit.standard_basis import (
  INFINITE,
  QuotientBasis,
  Submodule,
  Vector,
  compute_standard_basis,
  ideal_member,
  module_syzygies,
  normal_form,
  syzygies,
)

logger = logging.getLogger(__name__)


def embed(p: Poly, target: PolyRing) -> Poly:
  return p.substitute({}, target)


def split_family(p: Poly, t_count: int) -> dict[Monomial, dict[Monomial, object]]:
  # x 部分の単項式ごとに t 係数をまとめる
  n = p.ring.nvars - t_count
  groups: dict[Monomial, dict[Monomial, object]] = {}
  for mono, coeff in p.terms.items():
    groups.setdefault(mono[:n], {})[mono[n:]] = coeff
  return groups


def join_family(groups: Mapping[Monomial, Mapping[Monomial, object]], ring: PolyRing) -> Poly:
  return Poly(ring, {x + t: c for x, coeffs in groups.items() for t, c in coeffs.items()})


def specialize(p: Poly, x_ring: PolyRing) -> Poly:
  """t = 0 を代入して x だけの多項式に戻す。"""
  n = x_ring.nvars
  return Poly(x_ring, {mono[:n]: c for mono, c in p.terms.items() if not any(mono[n:])})


class ArtinianAlgebra:
  """κ[t]/J。J は m の冪を含む。"""

  def __init__(self, t_vars: Iterable[str], relations: Sequence[Poly] = (), field: Field = QQ_FIELD):
    self.t_vars = tuple(t_vars)
    self.field = field
    self.ring = PolyRing(self.t_vars, field)
    for r in relations:
      if r.ring != self.ring:
        raise BaseMismatchError(f"relation lives in {r.ring}, expected {self.ring}")
    gens = tuple(r for r in relations if not r.is_zero) or (self.ring.zero(),)
    try:
      self._quotient = QuotientBasis(Submodule(self.ring, 1, tuple((g,) for g in gens), DEGREVLEX))
    except InfiniteQuotientError:
      raise ValueError("base relations must contain a power of the maximal ideal")
    if self._quotient.dimension == 0:
      raise ValueError("base relations generate the unit ideal")
    self.relations = tuple(v[0] for v in self._quotient.basis.vectors)
    self.order = self._compute_order()

  def _compute_order(self) -> int:
    degree = 0
    while any(not self.reduce(self.ring.monomial(m)).is_zero for m in monomials_of_degree(self.nvars, degree + 1)):
      degree += 1
      # 局所なら m^{dim} = 0
      if degree > self.dimension:
        raise ValueError("base algebra is not local at the origin")
    return degree

  @property
  def nvars(self) -> int:
    return len(self.t_vars)

  @property
  def dimension(self) -> int:
    return self._quotient.dimension

  @property
  def basis(self) -> tuple[Poly, ...]:
    return tuple(v[0] for v in (self._quotient.basis_vector(i) for i in range(self.dimension)))

  def reduce(self, p: Poly) -> Poly:
    if p.ring != self.ring:
      raise BaseMismatchError(f"element lives in {p.ring}, expected {self.ring}")
    return self._quotient.reduce((p,))[0]

  def coordinates(self, p: Poly) -> list:
    return self._quotient.coordinates((p,))

  def family_ring(self, x_ring: PolyRing) -> PolyRing:
    if x_ring.field != self.field:
      raise BaseMismatchError(f"field mismatch: {x_ring.field} vs {self.field}")
    clash = set(x_ring.variables) & set(self.t_vars)
    if clash:
      raise ValueError(f"parameter names clash with variables: {sorted(clash)}")
    return x_ring.extend(self.t_vars)

  def _check_family(self, p: Poly):
    if p.ring.variables[p.ring.nvars - self.nvars:] != self.t_vars or p.ring.field != self.field:
      raise BaseMismatchError(f"{p.ring} is not a family ring over {self.ring}")

  def reduce_family(self, p: Poly) -> Poly:
    """t 係数ごとに正規形をとる。"""
    self._check_family(p)
    groups = {}
    for x_mono, coeffs in split_family(p, self.nvars).items():
      reduced = self.reduce(Poly(self.ring, coeffs))
      if not reduced.is_zero:
        groups[x_mono] = reduced.terms
    return join_family(groups, p.ring)

  def quotient(self, extra: Sequence[Poly]) -> "ArtinianAlgebra":
    return ArtinianAlgebra(self.t_vars, self.relations + tuple(extra), self.field)

  def maximal_ideal_power(self, k: int) -> list[Poly]:
    return [self.ring.monomial(m) for m in monomials_of_degree(self.nvars, k)]

  def truncate(self, n: int) -> "ArtinianAlgebra":
    return self.quotient(self.maximal_ideal_power(n + 1))

  def filtration_steps(self) -> list["SmallExtensionStep"]:
    # A/m^{k+1} -> A/m^k (k = 1..order)
    steps = []
    for k in range(1, self.order + 1):
      total = self.truncate(k)
      steps.append(SmallExtensionStep(total, total.maximal_ideal_power(k)))
    return steps

  def __eq__(self, other: object) -> bool:
    if not isinstance(other, ArtinianAlgebra):
      return NotImplemented
    return self.t_vars == other.t_vars and self.field == other.field and self.relations == other.relations

  def __hash__(self) -> int:
    return hash((self.t_vars, self.field, self.relations))

  def __repr__(self) -> str:
    relations = ", ".join(str(r) for r in self.relations if not r.is_zero)
    return f"ArtinianAlgebra({', '.join(self.t_vars)} / ({relations}); {self.field.spec})"


def make_truncation(r: int, order: int, field: Field = QQ_FIELD, names: Sequence[str] | None = None, prefix: str = "t") -> ArtinianAlgebra:
  """κ[t_1..t_r]/m^{order+1}。"""
  if r < 0 or order < 0:
    raise ValueError("number of parameters and order must be nonnegative")
  names = tuple(names) if names is not None else tuple(f"{prefix}{i + 1}" for i in range(r))
  if len(names) != r:
    raise ValueError(f"{len(names)} names for {r} parameters")
  ring = PolyRing(names, field)
  relations = [ring.monomial(m) for m in monomials_of_degree(r, order + 1)]
  return ArtinianAlgebra(names, relations, field)


class SmallExtensionStep:
  """A' -> A = A'/𝔮 で m_{A'}·𝔮 = 0 となるもの。"""

  def __init__(self, total: ArtinianAlgebra, ideal_q: Sequence[Poly]):
    self.total = total
    self.ideal_q = tuple(total.reduce(q) for q in ideal_q)
    for q in self.ideal_q:
      for t in total.ring.gens():
        if not total.reduce(t * q).is_zero:
          raise ValueError(f"ideal is not annihilated by the maximal ideal: {t}*({q}) != 0")
    self.quotient = total.quotient(self.ideal_q)
    self._columns = sorted(
      (m for m in (b.leading_term()[0] for b in total.basis)), key=DEGREVLEX.key, reverse=True
    )
    rows, self._pivots = echelon_basis(
      [[q.coefficient(m) for m in self._columns] for q in self.ideal_q], len(self._columns), total.field
    )
    self.q_basis = tuple(Poly(total.ring, dict(zip(self._columns, row))) for row in rows)

  @property
  def dimension(self) -> int:
    return len(self.q_basis)

  def _split(self, coefficient: Poly) -> list:
    reduced = self.total.reduce(coefficient)
    values = [reduced.coefficient(m) for m in self._columns]
    parts = [values[p] for p in self._pivots]
    for part, q in zip(parts, self.q_basis):
      for column, m in enumerate(self._columns):
        values[column] -= part * q.coefficient(m)
    if any(values):
      raise ValueError(f"{reduced} does not lie in the ideal of the step")
    return parts

  def decompose(self, p: Poly, x_ring: PolyRing) -> tuple[Poly, ...]:
    """𝔮[x] の元を Σ q_k ⊗ p_k に分解して (p_k) を返す。"""
    self.total._check_family(p)
    parts: list[dict[Monomial, object]] = [{} for _ in self.q_basis]
    for x_mono, coeffs in split_family(p, self.total.nvars).items():
      for k, value in enumerate(self._split(Poly(self.total.ring, coeffs))):
        if value:
          parts[k][x_mono] = value
    return tuple(Poly(x_ring, part) for part in parts)

  def compose(self, parts: Sequence[Poly], family_ring: PolyRing) -> Poly:
    total = family_ring.zero()
    for q, part in zip(self.q_basis, parts):
      total = total + embed(q, family_ring) * embed(part, family_ring)
    return total


class EmbeddedLifting:
  def __init__(self, base: ArtinianAlgebra, equations: Sequence[Poly], reference: Singularity):
    self.base = base
    self.reference = reference
    self.ring = base.family_ring(reference.ring)
    equations = tuple(equations)
    if len(equations) != reference.codimension:
      raise ValueError(f"{len(equations)} lifted equations for {reference.codimension} reference equations")
    self.equations = tuple(base.reduce_family(embed(f, self.ring) if f.ring != self.ring else f) for f in equations)
    for index, (f, f0) in enumerate(zip(self.equations, reference.equations)):
      if specialize(f, reference.ring) != f0:
        raise ReductionMismatchError(f"lifted equation {index + 1} does not reduce to {f0}")

  @classmethod
  def trivial(cls, reference: Singularity, base: ArtinianAlgebra) -> "EmbeddedLifting":
    return cls(base, reference.equations, reference)

  def __eq__(self, other: object) -> bool:
    if not isinstance(other, EmbeddedLifting):
      return NotImplemented
    return self.base == other.base and self.reference == other.reference and self.equations == other.equations

  def __hash__(self) -> int:
    return hash((self.base, self.reference, self.equations))

  def __repr__(self) -> str:
    return f"EmbeddedLifting([{', '.join(str(f) for f in self.equations)}] over {self.base!r})"


@dataclass(frozen=True)
class FlatnessCertificate:
  flat: bool
  method: str
  relations_checked: int
  offending_syzygy: Vector | None = None


def _check_step(lift: EmbeddedLifting, step: SmallExtensionStep):
  if lift.base != step.total:
    raise BaseMismatchError("lifting is not defined over the total algebra of the step")


def _base_syzygies(lift: EmbeddedLifting, step: SmallExtensionStep) -> list[Vector]:
  ring = lift.ring
  c = lift.reference.codimension
  if step.quotient.dimension == 1:
    return [tuple(embed(a, ring) for a in column) for column in syzygies(lift.reference.equations).columns]
  # A 上の関係式: (f̄, J の生成元) のシジジーを f̄ の部分へ射影
  reduced = [step.quotient.reduce_family(f) for f in lift.equations]
  relations = [embed(r, ring) for r in step.quotient.relations if not r.is_zero]
  columns = module_syzygies([(p,) for p in reduced + relations], 1, ring).columns
  projected = []
  for column in columns:
    head = tuple(step.quotient.reduce_family(a) for a in column[:c])
    if any(not a.is_zero for a in head):
      projected.append(head)
  return projected


def relation_residues(lift: EmbeddedLifting, step: SmallExtensionStep) -> list[tuple[Vector, tuple[Poly, ...]]]:
  """A 上の各関係式 a について Σ a_i f'_i を Σ q_k ⊗ s_k に分解した (a, (s_k))。"""
  _check_step(lift, step)
  residues = []
  for column in _base_syzygies(lift, step):
    total = sum((a * f for a, f in zip(column, lift.equations)), lift.ring.zero())
    try:
      parts = step.decompose(lift.base.reduce_family(total), lift.reference.ring)
    except ValueError:
      raise InternalConsistencyError("relation over the quotient does not vanish modulo the step ideal")
    residues.append((column, parts))
  return residues


def check_flatness(lift: EmbeddedLifting, step: SmallExtensionStep) -> FlatnessCertificate:
  """A 上の関係式がすべて A' 上の関係式に 𝔮I' を法として持ち上がるかを確かめる。"""
  _check_step(lift, step)
  reference = lift.reference
  if step.dimension == 0:
    return FlatnessCertificate(True, "vacuous", 0)
  if reference.is_hypersurface:
    return FlatnessCertificate(True, "principal", 0)
  if certify_regular_sequence(reference).regular:
    # Koszul 関係式 (f'_j, -f'_i) はそのまま A' 上の関係式
    relations = koszul_relations(lift.equations)
    for column in relations:
      total = sum((a * f for a, f in zip(column, lift.equations)), lift.ring.zero())
      if not total.is_zero:
        raise InternalConsistencyError("Koszul relation does not vanish")
    return FlatnessCertificate(True, "koszul", len(relations))
  ideal0 = reference.ideal(NEGDEGREVLEX)
  residues = relation_residues(lift, step)
  for column, parts in residues:
    if not all(ideal_member(p, ideal0) for p in parts):
      offending = tuple(specialize(a, reference.ring) for a in column) if step.quotient.dimension == 1 else column
      logger.debug("relation does not lift: %s", [str(a) for a in offending])
      return FlatnessCertificate(False, "syzygy", len(residues), offending)
  return FlatnessCertificate(True, "syzygy", len(residues))


def check_flatness_filtered(lift: EmbeddedLifting) -> list[FlatnessCertificate]:
  certificates = []
  for step in lift.base.filtration_steps():
    certificates.append(check_flatness(restrict(lift, step.total), step))
  return certificates


class NormalSection:
  """Hom(I/I², 𝔮 ⊗ O) の元。components[k] は 𝔮 の基底 k 番目の係数ベクトル (I_0 の正規形)。"""

  def __init__(self, step: SmallExtensionStep, reference: Singularity, components: Sequence[Sequence[Poly]]):
    self.step = step
    self.reference = reference
    basis = compute_standard_basis(reference.ideal(DEGREVLEX))
    self.components = tuple(tuple(normal_form(p, basis) for p in row) for row in components)
    if len(self.components) != step.dimension:
      raise ValueError(f"{len(self.components)} components for a {step.dimension}-dimensional step")

  def _check(self, other: "NormalSection"):
    if self.step.total != other.step.total or self.step.q_basis != other.step.q_basis:
      raise BaseMismatchError("normal sections over different steps")
    if self.reference != other.reference:
      raise RestrictionMismatchError("normal sections of different singularities")

  def __add__(self, other: "NormalSection") -> "NormalSection":
    self._check(other)
    rows = [tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self.components, other.components)]
    return NormalSection(self.step, self.reference, rows)

  def __neg__(self) -> "NormalSection":
    return NormalSection(self.step, self.reference, [tuple(-a for a in row) for row in self.components])

  def __sub__(self, other: "NormalSection") -> "NormalSection":
    return self + (-other)

  def is_zero(self) -> bool:
    return all(p.is_zero for row in self.components for p in row)

  def __eq__(self, other: object) -> bool:
    if not isinstance(other, NormalSection):
      return NotImplemented
    return self.step.q_basis == other.step.q_basis and self.components == other.components

  def __hash__(self) -> int:
    return hash(self.components)


def _check_pair(lift1: EmbeddedLifting, lift2: EmbeddedLifting, step: SmallExtensionStep):
  _check_step(lift1, step)
  _check_step(lift2, step)
  if lift1.reference != lift2.reference:
    raise ReductionMismatchError("liftings of different singularities")
  for f1, f2 in zip(lift1.equations, lift2.equations):
    if not step.quotient.reduce_family(f1 - f2).is_zero:
      raise ReductionMismatchError("liftings differ modulo the step ideal")


def nu_difference(lift1: EmbeddedLifting, lift2: EmbeddedLifting, step: SmallExtensionStep) -> NormalSection:
  _check_pair(lift1, lift2, step)
  reference = lift1.reference
  per_equation = [step.decompose(lift1.base.reduce_family(f1 - f2), reference.ring) for f1, f2 in zip(lift1.equations, lift2.equations)]
  rows = [tuple(parts[k] for parts in per_equation) for k in range(step.dimension)]
  return NormalSection(step, reference, rows)


def section_class(section: NormalSection) -> tuple[tuple, ...]:
  # 𝔮 ⊗ T^1 の座標 (行 k が q_k の係数)
  quotient = tangent_module(section.reference, 1).quotient
  return tuple(tuple(quotient.coordinates(row)) for row in section.components)


def e_class(lift1: EmbeddedLifting, lift2: EmbeddedLifting, step: SmallExtensionStep) -> tuple[tuple, ...]:
  return section_class(nu_difference(lift1, lift2, step))


def liftings_isomorphic(lift1: EmbeddedLifting, lift2: EmbeddedLifting, step: SmallExtensionStep) -> bool:
  return all(not value for row in e_class(lift1, lift2, step) for value in row)


def translate_lifting(lift: EmbeddedLifting, section: NormalSection) -> EmbeddedLifting:
  """f_i + Σ_k q_k ⊗ ν_k,i。ν(translate(X', ν), X') = ν。"""
  _check_step(lift, section.step)
  equations = []
  for i, f in enumerate(lift.equations):
    parts = [row[i] for row in section.components]
    equations.append(f + section.step.compose(parts, lift.ring))
  return EmbeddedLifting(lift.base, equations, lift.reference)


def base_change(lift: EmbeddedLifting, target: ArtinianAlgebra, substitution: Mapping[str, Poly]) -> EmbeddedLifting:
  """t ↦ substitution[t] による係数変換 f_*X'。"""
  if target.field != lift.base.field:
    raise BaseMismatchError(f"field mismatch: {lift.base.field} vs {target.field}")
  ring = target.family_ring(lift.reference.ring)
  images: dict[str, Poly] = {}
  for name in lift.base.t_vars:
    image = substitution.get(name, target.ring.zero())
    if image.ring != target.ring:
      raise BaseMismatchError(f"image of {name} lives in {image.ring}, expected {target.ring}")
    if image.constant_coefficient():
      raise ValueError(f"image of {name} is not in the maximal ideal")
    images[name] = embed(image, ring)
  # 関係式が 0 に写ることを確認
  base_images = {name: substitution.get(name, target.ring.zero()) for name in lift.base.t_vars}
  for relation in lift.base.relations:
    if not target.reduce(relation.substitute(base_images, target.ring)).is_zero:
      raise ValueError(f"substitution does not respect the relation {relation}")
  equations = [f.substitute(images, ring) for f in lift.equations]
  return EmbeddedLifting(target, equations, lift.reference)


def restrict(lift: EmbeddedLifting, quotient_algebra: ArtinianAlgebra) -> EmbeddedLifting:
  if quotient_algebra.t_vars != lift.base.t_vars:
    raise RestrictionMismatchError("quotient algebra has different parameters")
  if any(not quotient_algebra.reduce(r).is_zero for r in lift.base.relations):
    raise RestrictionMismatchError("algebra is not a quotient of the lifting's base")
  return EmbeddedLifting(quotient_algebra, [quotient_algebra.reduce_family(f) for f in lift.equations], lift.reference)


class FiberProduct:
  """A と I_1 ∩ I_2 = 0 となる I_1, I_2。A = A/I_1 ×_{A/(I_1+I_2)} A/I_2。"""

  def __init__(self, ambient: ArtinianAlgebra, ideal1: Sequence[Poly], ideal2: Sequence[Poly]):
    self.ambient = ambient
    self.ideal1 = tuple(ambient.reduce(p) for p in ideal1)
    self.ideal2 = tuple(ambient.reduce(p) for p in ideal2)
    self.first = ambient.quotient(self.ideal1)
    self.second = ambient.quotient(self.ideal2)
    self.common = ambient.quotient(self.ideal1 + self.ideal2)
    # dim A/(I_1 ∩ I_2) = dim A_1 + dim A_2 - dim A_0
    if self.first.dimension + self.second.dimension - self.common.dimension != ambient.dimension:
      raise ValueError("ideals of a fiber product must intersect in zero")

  def _span(self, generators: Sequence[Poly]) -> list[list]:
    vectors = []
    for g in generators:
      for b in self.ambient.basis:
        vectors.append(self.ambient.coordinates(g * b))
    return vectors

  def glue_coefficient(self, c1: Poly, c2: Poly) -> Poly:
    # a ≡ c1 (I_1), a ≡ c2 (I_2)
    span1, span2 = self._span(self.ideal1), self._span(self.ideal2)
    columns = span1 + span2
    difference = self.ambient.coordinates(c2 - c1)
    if not columns:
      if any(difference):
        raise RestrictionMismatchError("coefficients disagree on the common quotient")
      return self.ambient.reduce(c1)
    rows = [[column[i] for column in columns] for i in range(self.ambient.dimension)]
    solution = solve(rows, difference, len(columns), self.ambient.field)
    if solution is None:
      raise RestrictionMismatchError("coefficients disagree on the common quotient")
    shift = [self.ambient.field.zero] * self.ambient.dimension
    for weight, column in zip(solution[:len(span1)], span1):
      for i in range(len(shift)):
        shift[i] += weight * column[i]
    return self.ambient.reduce(c1) + sum((b.scale(s) for s, b in zip(shift, self.ambient.basis) if s), self.ambient.ring.zero())


def glue_over_fiber_product(product: FiberProduct, lift1: EmbeddedLifting, lift2: EmbeddedLifting) -> EmbeddedLifting:
  if lift1.base != product.first or lift2.base != product.second:
    raise BaseMismatchError("liftings must live over the two factors of the fiber product")
  if lift1.reference != lift2.reference:
    raise RestrictionMismatchError("liftings of different singularities")
  if restrict(lift1, product.common).equations != restrict(lift2, product.common).equations:
    raise RestrictionMismatchError("liftings do not agree over the common quotient")
  ambient = product.ambient
  ring = ambient.family_ring(lift1.reference.ring)
  glued = []
  for f1, f2 in zip(lift1.equations, lift2.equations):
    groups1 = split_family(f1, ambient.nvars)
    groups2 = split_family(f2, ambient.nvars)
    groups = {}
    for x_mono in set(groups1) | set(groups2):
      c1 = Poly(ambient.ring, groups1.get(x_mono, {}))
      c2 = Poly(ambient.ring, groups2.get(x_mono, {}))
      value = product.glue_coefficient(c1, c2)
      if not value.is_zero:
        groups[x_mono] = value.terms
    glued.append(join_family(groups, ring))
  return EmbeddedLifting(ambient, glued, lift1.reference)


def automorphism_dimension(reference: Singularity, step: SmallExtensionStep) -> int | float:
  """持ち上げの自己同型のうち A 上で恒等なものの次元 dim 𝔮 · dim T^0。"""
  if step.dimension == 0:
    return 0
  t0 = tangent_module(reference, 0).dimension
  return INFINITE if t0 == INFINITE else step.dimension * t0
