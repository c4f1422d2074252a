"""原点の孤立完全交差特異点の不変量。商はすべて NEGDEGREVLEX で原点の局所環でとる。"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import logging
from typing import Sequence

from sympy.polys.matrices import DomainMatrix

from versal_kit.errors import (
  DegenerateEquationError,
  InvalidLevelError,
  NonIsolatedError,
  NotRegularSequenceError,
  RingMismatchError,
)
from versal_kit.linalg import truncated_quotient_dimension
from versal_kit.module_ext import PresentedModule, kernel_generators, subquotient
from versal_kit.poly_core import NEGDEGREVLEX, Poly, PolyRing
from versal_kit.standard_basis import (
  Ideal,
  QuotientBasis,
  Staircase,
  Submodule,
  Vector,
  module_member,
  module_staircase,
  quotient_staircase,
  syzygies,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Singularity:
  ring: PolyRing
  equations: tuple[Poly, ...]

  def __post_init__(self):
    equations = tuple(self.equations)
    object.__setattr__(self, "equations", equations)
    if not equations:
      raise DegenerateEquationError("a singularity needs at least one equation")
    for index, f in enumerate(equations):
      if f.ring != self.ring:
        raise RingMismatchError(f"equation {index + 1} lives in {f.ring}, expected {self.ring}")
      if f.is_zero:
        raise DegenerateEquationError(f"equation {index + 1} is zero")
      if f.constant_coefficient():
        raise ValueError(f"equation {index + 1} does not vanish at the origin")
    if len(equations) > self.ring.nvars:
      raise ValueError(f"{len(equations)} equations in {self.ring.nvars} variables cannot form a complete intersection")

  @property
  def codimension(self) -> int:
    return len(self.equations)

  @property
  def is_hypersurface(self) -> bool:
    return self.codimension == 1

  def ideal(self, order=NEGDEGREVLEX) -> Ideal:
    return Ideal(self.equations, order)

  def __str__(self) -> str:
    return ", ".join(str(f) for f in self.equations)


@dataclass(frozen=True)
class RegularSequenceCertificate:
  regular: bool
  syzygies_checked: int
  offending_syzygy: Vector | None = None


@dataclass(frozen=True)
class JacobianData:
  # matrix[j][i] = ∂F_j/∂x_i
  matrix: tuple[tuple[Poly, ...], ...]
  jacobian_ideal: Ideal

  @property
  def columns(self) -> tuple[Vector, ...]:
    # ∂/∂x_i の像 (長さ c のベクトル)
    if not self.matrix:
      return ()
    return tuple(tuple(row[i] for row in self.matrix) for i in range(len(self.matrix[0])))


@dataclass(frozen=True)
class TangentData:
  level: int
  presentation: PresentedModule
  dimension: int | float
  basis: tuple[Vector, ...] | None = None
  quotient: QuotientBasis | None = None
  witness: Vector | None = None
  certificate: RegularSequenceCertificate | None = None


def koszul_relations(equations: Sequence[Poly]) -> list[Vector]:
  ring = equations[0].ring
  c = len(equations)
  relations = []
  for i in range(c):
    for j in range(i + 1, c):
      column = [ring.zero()] * c
      column[i] = equations[j]
      column[j] = -equations[i]
      relations.append(tuple(column))
  return relations


@lru_cache(maxsize=256)
def certify_regular_sequence(s: Singularity) -> RegularSequenceCertificate:
  """シジジー加群の生成元がすべて原点の局所環で Koszul 関係式の組合せになることを確かめる。"""
  if s.is_hypersurface:
    return RegularSequenceCertificate(True, 0)
  koszul = Submodule(s.ring, s.codimension, tuple(koszul_relations(s.equations)), NEGDEGREVLEX)
  columns = syzygies(s.equations).columns
  for column in columns:
    if not module_member(column, koszul):
      logger.debug("syzygy outside the Koszul module: %s", [str(p) for p in column])
      return RegularSequenceCertificate(False, len(columns), column)
  return RegularSequenceCertificate(True, len(columns))


def _require_regular(s: Singularity) -> RegularSequenceCertificate:
  certificate = certify_regular_sequence(s)
  if not certificate.regular:
    raise NotRegularSequenceError("equations do not form a regular sequence", certificate.offending_syzygy)
  return certificate


def _determinant(rows: Sequence[Sequence[Poly]]) -> Poly:
  ring = rows[0][0].ring
  matrix = DomainMatrix([[entry.terms for entry in row] for row in rows], (len(rows), len(rows)), ring.sympy.to_domain())
  return ring.from_sympy(matrix.det())


def _column_subsets(n: int, c: int, start: int = 0) -> list[tuple[int, ...]]:
  if c == 0:
    return [()]
  return [(i,) + rest for i in range(start, n) for rest in _column_subsets(n, c - 1, i + 1)]


@lru_cache(maxsize=256)
def jacobian(s: Singularity) -> JacobianData:
  matrix = tuple(tuple(f.derivative(i) for i in range(s.ring.nvars)) for f in s.equations)
  # 超曲面なら (F, ∂F)、一般には F と c 次小行列式
  generators = list(s.equations)
  for subset in _column_subsets(s.ring.nvars, s.codimension):
    minor = _determinant([tuple(row[i] for i in subset) for row in matrix])
    if not minor.is_zero:
      generators.append(minor)
  return JacobianData(matrix, Ideal(tuple(generators), NEGDEGREVLEX))


def tangent_submodule(s: Singularity) -> Submodule:
  """F_i e_j と Jacobi 列が生成する R^c の部分加群 (局所順序)。"""
  ring, c = s.ring, s.codimension
  generators = [tuple(f if k == j else ring.zero() for k in range(c)) for f in s.equations for j in range(c)]
  generators += [column for column in jacobian(s).columns if any(not e.is_zero for e in column)]
  return Submodule(ring, c, tuple(generators), NEGDEGREVLEX)


@lru_cache(maxsize=256)
def _tangent_staircase(s: Singularity) -> Staircase:
  return module_staircase(tangent_submodule(s))


def certify_isolated(s: Singularity) -> bool:
  _require_regular(s)
  return _tangent_staircase(s).finite


def _require_hypersurface(s: Singularity, name: str):
  if not s.is_hypersurface:
    raise ValueError(f"the {name} algebra is defined for hypersurfaces; use tangent_module for complete intersections")


def tjurina_algebra(s: Singularity) -> tuple[Staircase, int]:
  _require_hypersurface(s, "Tjurina")
  staircase = quotient_staircase(jacobian(s).jacobian_ideal)
  if not staircase.finite:
    raise NonIsolatedError("non-isolated singular locus")
  return staircase, len(staircase)


def milnor_algebra(s: Singularity) -> tuple[Staircase, int]:
  _require_hypersurface(s, "Milnor")
  partials = [p for p in jacobian(s).matrix[0] if not p.is_zero] or [s.ring.zero()]
  staircase = quotient_staircase(Ideal(tuple(partials), NEGDEGREVLEX))
  if not staircase.finite:
    raise NonIsolatedError("non-isolated singular locus (Milnor algebra is infinite)")
  return staircase, len(staircase)


def _derivations(s: Singularity) -> TangentData:
  ring, n, c = s.ring, s.ring.nvars, s.codimension
  # Jac·a ∈ I·R^c となる a ∈ R^n を I·R^n で割る
  target = PresentedModule(ring, c, tuple(tuple(f if k == j else ring.zero() for k in range(c)) for f in s.equations for j in range(c)))
  kernel = kernel_generators(jacobian(s).columns, target)
  trivial = [tuple(f if k == j else ring.zero() for k in range(n)) for f in s.equations for j in range(n)]
  presentation = subquotient(kernel, trivial, n, ring)
  witness = None
  trivial_module = Submodule(ring, n, tuple(trivial))
  for vector in kernel:
    if not module_member(vector, trivial_module):
      witness = vector
      break
  dimension = presentation.dimension() if presentation.rank_free else 0
  logger.debug("T0: %d generators, dimension %s", presentation.rank_free, dimension)
  return TangentData(0, presentation, dimension, witness=witness)


@lru_cache(maxsize=256)
def tangent_module(s: Singularity, level: int) -> TangentData:
  if level not in (0, 1, 2):
    raise InvalidLevelError(f"tangent level must be 0, 1 or 2, got {level}")
  certificate = _require_regular(s)
  if level == 0:
    return _derivations(s)
  if level == 2:
    # I/I² が階数 c の自由加群なので T² = 0
    return TangentData(2, PresentedModule(s.ring, 0, ()), 0, basis=(), certificate=certificate)
  submodule = tangent_submodule(s)
  if not _tangent_staircase(s).finite:
    raise NonIsolatedError("non-isolated singular locus")
  quotient = QuotientBasis(submodule)
  basis = tuple(quotient.basis_vector(i) for i in range(quotient.dimension))
  presentation = PresentedModule(s.ring, s.codimension, submodule.generators)
  return TangentData(1, presentation, quotient.dimension, basis=basis, quotient=quotient, certificate=certificate)


def tangent_dimension_oracle(s: Singularity, degree: int) -> int:
  return truncated_quotient_dimension(tangent_submodule(s).generators, s.codimension, s.ring, degree)


def tjurina_number(s: Singularity) -> int:
  return tangent_module(s, 1).dimension
