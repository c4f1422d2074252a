"""孤立完全交差の半普遍変形。

族は G_j = F_j + Σ t_i G_i^{(j)} (G_i は T¹ の階段の代表元)。1 次より先は
Λ_n = κ[t]/m^{n+1} の小拡大の列に沿って次数ごとに確かめる。
"""
from __future__ import annotations

from dataclasses import dataclass, field
import logging
from typing import Sequence

from versal_kit.deformation import (
  ArtinianAlgebra,
  EmbeddedLifting,
  FlatnessCertificate,
  SmallExtensionStep,
  base_change,
  check_flatness,
  check_flatness_filtered,
  e_class,
  embed,
  make_truncation,
  relation_residues,
  restrict,
  specialize,
  split_family,
)
from versal_kit.errors import (
  BaseMismatchError,
  FlatnessError,
  InternalConsistencyError,
  ObstructionError,
  ReductionMismatchError,
  VersalityError,
)
from versal_kit.poly_core import Poly, PolyRing, format_monomial, format_poly
from versal_kit.singularity import Singularity, jacobian, tangent_module
from versal_kit.linalg import solve
from versal_kit.standard_basis import Vector, lift_cofactors, local_lift_cofactors

logger = logging.getLogger(__name__)

PARAMETER_PREFIXES = ("t", "s", "u")


@dataclass(frozen=True)
class DeformationFamily:
  """base が None なら冪級数環 κ[[parameters]] 上の族。"""

  parameters: tuple[str, ...]
  members: tuple[Poly, ...]
  reference: Singularity
  base: ArtinianAlgebra | None = field(default=None, compare=False)

  def __post_init__(self):
    object.__setattr__(self, "parameters", tuple(self.parameters))
    object.__setattr__(self, "members", tuple(self.members))
    if self.base is not None and self.base.t_vars != self.parameters:
      raise BaseMismatchError(f"base parameters {self.base.t_vars} differ from {self.parameters}")
    ring = self.ring
    if len(self.members) != self.reference.codimension:
      raise ValueError(f"{len(self.members)} members for {self.reference.codimension} equations")
    for index, (g, f) in enumerate(zip(self.members, self.reference.equations)):
      if g.ring != ring:
        raise BaseMismatchError(f"member {index + 1} lives in {g.ring}, expected {ring}")
      if specialize(g, self.reference.ring) != f:
        raise ReductionMismatchError(f"member {index + 1} does not reduce to {f}")

  @property
  def ring(self) -> PolyRing:
    clash = set(self.parameters) & set(self.reference.ring.variables)
    if clash:
      raise ValueError(f"parameter names clash with variables: {sorted(clash)}")
    return self.reference.ring.extend(self.parameters)

  def base_at_order(self, n: int) -> ArtinianAlgebra:
    if self.base is None:
      return make_truncation(len(self.parameters), n, self.reference.ring.field, self.parameters)
    return self.base.truncate(n)

  def at_order(self, n: int) -> "DeformationFamily":
    base = self.base_at_order(n)
    return DeformationFamily(self.parameters, tuple(base.reduce_family(g) for g in self.members), self.reference, base)

  def lifting(self, n: int | None = None) -> EmbeddedLifting:
    if n is None and self.base is None:
      raise ValueError("a power-series family needs a truncation order")
    base = self.base if n is None else self.base_at_order(n)
    return EmbeddedLifting(base, self.members, self.reference)

  def render_members(self) -> list[str]:
    return [render_member(g, self.reference.ring, self.parameters) for g in self.members]


def render_member(g: Poly, x_ring: PolyRing, parameters: Sequence[str]) -> str:
  """F + t1 + t2*x の形で表示する。t の係数が多項式なら t3*(x + y)。"""
  t_ring = PolyRing(tuple(parameters), x_ring.field)
  groups: dict[tuple, dict[tuple, object]] = {}
  for x_mono, coeffs in split_family(g, len(parameters)).items():
    for t_mono, c in coeffs.items():
      groups.setdefault(t_mono, {})[x_mono] = c
  pieces: list[tuple[bool, str]] = []
  zero_t = (0,) * len(parameters)
  if zero_t in groups:
    pieces.append((False, format_poly(Poly(x_ring, groups.pop(zero_t)))))
  field_ = x_ring.field
  for t_mono in sorted(groups, key=lambda m: (sum(m), tuple(-e for e in m))):
    coefficient = Poly(x_ring, groups[t_mono])
    t_text = format_monomial(t_ring, t_mono)
    if len(coefficient.terms) == 1:
      ((x_mono, c),) = coefficient.terms.items()
      negative = field_.is_negative(c)
      magnitude = -c if negative else c
      body = "*".join(part for part in (t_text, format_monomial(x_ring, x_mono)) if part)
      scalar = field_.format(magnitude)
      pieces.append((negative, body if scalar == "1" else f"{scalar}*{body}"))
    else:
      pieces.append((False, f"{t_text}*({format_poly(coefficient)})"))
  text = ""
  for index, (negative, body) in enumerate(pieces):
    if index == 0:
      text = f"-{body}" if negative else body
    else:
      text += f" - {body}" if negative else f" + {body}"
  return text or "0"


@dataclass(frozen=True)
class KodairaSpencerMatrix:
  # τ × r。列 j は ∂G/∂t_j の T¹ 座標
  matrix: tuple[tuple, ...]
  row_basis: tuple[Vector, ...]
  parameters: tuple[str, ...]

  @property
  def shape(self) -> tuple[int, int]:
    return len(self.row_basis), len(self.parameters)

  def is_identity(self) -> bool:
    rows, cols = self.shape
    if rows != cols:
      return False
    return all((value == 1) if i == j else (not value) for i, row in enumerate(self.matrix) for j, value in enumerate(row))


@dataclass(frozen=True)
class VersalResult:
  tau: int
  basis: tuple[Vector, ...]
  family: DeformationFamily
  ks: KodairaSpencerMatrix
  base_relations: tuple[Poly, ...] = ()


def parameter_names(s: Singularity, count: int) -> tuple[str, ...]:
  for prefix in PARAMETER_PREFIXES:
    names = tuple(f"{prefix}{i + 1}" for i in range(count))
    if not set(names) & set(s.ring.variables):
      return names
  raise ValueError("no free parameter prefix among " + ", ".join(PARAMETER_PREFIXES))


def miniversal(s: Singularity) -> VersalResult:
  tangent = tangent_module(s, 1)
  parameters = parameter_names(s, tangent.dimension)
  ring = s.ring.extend(parameters)
  members = []
  for j, f in enumerate(s.equations):
    g = embed(f, ring)
    for name, representative in zip(parameters, tangent.basis):
      if not representative[j].is_zero:
        g = g + ring.gen(name) * embed(representative[j], ring)
    members.append(g)
  family = DeformationFamily(parameters, tuple(members), s)
  ks = kodaira_spencer(family)
  if not ks.is_identity():
    raise InternalConsistencyError("Kodaira-Spencer matrix of the miniversal family is not the identity")
  logger.debug("miniversal family with %d parameters", tangent.dimension)
  return VersalResult(tangent.dimension, tangent.basis, family, ks)


def first_order_step(base: ArtinianAlgebra) -> SmallExtensionStep:
  total = base.truncate(1)
  return SmallExtensionStep(total, total.maximal_ideal_power(1))


def kodaira_spencer(family: DeformationFamily) -> KodairaSpencerMatrix:
  """e(X_1, X_0^{A_1}) の座標を並べた行列。"""
  s = family.reference
  tangent = tangent_module(s, 1)
  step = first_order_step(family.base_at_order(1))
  lift = family.at_order(1).lifting()
  certificate = check_flatness(lift, step)
  if not certificate.flat:
    raise FlatnessError("family is not flat to first order")
  classes = e_class(lift, EmbeddedLifting.trivial(s, step.total), step)
  matrix = tuple(tuple(classes[k][i] for k in range(step.dimension)) for i in range(tangent.dimension))
  return KodairaSpencerMatrix(matrix, tangent.basis, tuple(str(q) for q in step.q_basis))


@dataclass(frozen=True)
class LiftResult:
  family: DeformationFamily
  certificates: tuple[FlatnessCertificate, ...]
  # corrections[k][i]: q_k ⊗ δ_{k,i} を i 番目の式に加えた
  corrections: tuple[tuple[Poly, ...], ...] = ()

  @property
  def corrected(self) -> bool:
    return any(not p.is_zero for row in self.corrections for p in row)


def _solve_corrections(lift: EmbeddedLifting, step: SmallExtensionStep) -> tuple[tuple[Poly, ...], ...]:
  # 各 k について Σ_i ā_i δ_{k,i} + s_k(a) ∈ I_0 を満たす δ_k を全ての関係式 a でまとめて解く
  s = lift.reference
  ring, c = s.ring, s.codimension
  residues = relation_residues(lift, step)
  rows = [tuple(specialize(a, ring) for a in column) for column, _ in residues]
  count = len(rows)
  generators = [tuple(row[i] for row in rows) for i in range(c)]
  generators += [tuple(f if l == m else ring.zero() for l in range(count)) for f in s.equations for m in range(count)]
  corrections = []
  for k in range(step.dimension):
    target = tuple(-parts[k] for _, parts in residues)
    cofactors = lift_cofactors(target, generators, count, ring)
    if cofactors is None:
      raise ObstructionError("relations do not lift to the next order", target)
    corrections.append(tuple(cofactors[:c]))
  return tuple(corrections)


def lift_to_next_order(family: DeformationFamily, target_order: int) -> LiftResult:
  if target_order < 1:
    raise ValueError("target order must be at least 1")
  # 族は Λ_{n-1} 上。Λ_n = κ[t]/m^{n+1} へ持ち上げる
  base = make_truncation(len(family.parameters), target_order, family.reference.ring.field, family.parameters)
  lift = EmbeddedLifting(base, family.members, family.reference)
  certificates = check_flatness_filtered(lift)
  if all(cert.flat for cert in certificates):
    return LiftResult(DeformationFamily(family.parameters, lift.equations, family.reference, base), tuple(certificates))
  if not all(cert.flat for cert in certificates[:-1]):
    raise FlatnessError("family is not flat below the target order")
  step = base.filtration_steps()[-1]
  corrections = _solve_corrections(lift, step)
  members = []
  for i, g in enumerate(lift.equations):
    members.append(base.reduce_family(g + step.compose([row[i] for row in corrections], lift.ring)))
  corrected = EmbeddedLifting(base, members, family.reference)
  certificates = certificates[:-1] + [check_flatness(corrected, step)]
  if not certificates[-1].flat:
    raise InternalConsistencyError("corrected family is still not flat")
  logger.debug("order %d lift needed corrections", target_order)
  return LiftResult(DeformationFamily(family.parameters, corrected.equations, family.reference, base), tuple(certificates), corrections)


def lift_family(family: DeformationFamily, n: int) -> list[LiftResult]:
  results = []
  current = family
  for order in range(1, n + 1):
    result = lift_to_next_order(current, order)
    results.append(result)
    current = result.family
  return results


@dataclass(frozen=True)
class ObstructionReport:
  # (i, j) (i ≤ j) -> Obs の座標 (長さ dim T² = 0)
  values: dict
  lift: LiftResult
  t2_dimension: int = 0

  def is_zero(self) -> bool:
    return all(not any(v) for v in self.values.values())


def first_obstruction(s: Singularity) -> ObstructionReport:
  """V_1 を R_1 から R_2 へ持ち上げて Sym² T¹ -> Obs を読む。"""
  versal = miniversal(s)
  t2 = tangent_module(s, 2).dimension
  try:
    result = lift_to_next_order(versal.family.at_order(1), 2)
  except ObstructionError as exc:
    raise InternalConsistencyError(f"miniversal family does not lift to order 2: {exc}")
  tau = versal.tau
  values = {(i, j): (0,) * t2 for i in range(tau) for j in range(i, tau)}
  return ObstructionReport(values, result, t2)


@dataclass(frozen=True)
class VersalityStep:
  order: int
  class_before: tuple[tuple, ...]
  class_vanishes: bool
  # x_l ↦ x_l - Σ_k q_k θ_{k,l} / u
  coordinate_change: tuple[tuple[Poly, ...], ...]
  # f_j ↦ u f_j - Σ_k q_k Σ_i C_{k,i,j} f_i
  equation_change: tuple[tuple[tuple[Poly, ...], ...], ...]
  # 局所環でだけ揃うときの単元 u (u(0) = 1)。大域で揃えば 1
  unit: Poly


@dataclass(frozen=True)
class VersalityReport:
  order: int
  parameters: tuple[str, ...]
  substitution: dict
  steps: tuple[VersalityStep, ...]


def _scaled_reference(s: Singularity, unit: Poly) -> Singularity:
  if unit == 1:
    return s
  return Singularity(s.ring, tuple(unit * f for f in s.equations))


def _scaled(lift: EmbeddedLifting, unit: Poly, reference: Singularity) -> EmbeddedLifting:
  if unit == 1:
    return lift
  factor = embed(unit, lift.ring)
  return EmbeddedLifting(lift.base, [factor * g for g in lift.equations], reference)


def _taylor_parts(f: Poly, shifts: dict[str, Poly], depth: int) -> list[Poly]:
  """f(x + h) を h について 0..depth 次の斉次部分に分ける。"""
  ring = f.ring
  marker = next(name for name in (f"h{i}" for i in range(ring.nvars + 1)) if name not in ring.variables)
  aux = ring.extend((marker,))
  h = aux.gen(marker)
  images = {name: aux.gen(name) + h * embed(shift, aux) for name, shift in shifts.items()}
  expanded = embed(f, aux).substitute(images, aux)
  parts: list[dict] = [{} for _ in range(depth + 1)]
  for mono, coeff in expanded.terms.items():
    if mono[-1] <= depth:
      parts[mono[-1]][mono[:-1]] = coeff
  return [Poly(ring, part) for part in parts]


def _align(
  trial: EmbeddedLifting,
  step: SmallExtensionStep,
  theta: Sequence[Sequence[Poly]],
  change: Sequence[Sequence[Sequence[Poly]]],
  unit: Poly,
  depth: int,
  reference: Singularity,
) -> EmbeddedLifting:
  # 全体の底の上で座標変換と生成元の取り替えを施す。unit ≠ 1 なら分母 u^depth を払う
  ring = trial.ring
  qs = [embed(q, ring) for q in step.q_basis]
  shifts = {}
  for l, name in enumerate(trial.reference.ring.variables):
    shifts[name] = -sum((q * embed(row[l], ring) for q, row in zip(qs, theta)), ring.zero())
  if unit == 1:
    moved = [f.substitute({name: ring.gen(name) + shift for name, shift in shifts.items()}, ring) for f in trial.equations]
    factor = ring.one()
  else:
    factor = embed(unit, ring)
    powers = [factor ** k for k in range(depth + 1)]
    moved = []
    for f in trial.equations:
      parts = _taylor_parts(f, shifts, depth)
      moved.append(sum((part * powers[depth - k] for k, part in enumerate(parts)), ring.zero()))
  equations = []
  for j, f in enumerate(moved):
    delta = ring.zero()
    for q, block in zip(qs, change):
      for i, g in enumerate(moved):
        if not block[i][j].is_zero:
          delta = delta + q * embed(block[i][j], ring) * g
    equations.append(factor * f - delta)
  return EmbeddedLifting(trial.base, equations, reference)


def _parameter_shifts(before: tuple[tuple, ...], versal: VersalResult, unit: Poly, reference: Singularity, order: int) -> list[list]:
  # KS は単位行列。単元倍したときは U·G_i の T¹ 座標で解く
  if unit == 1:
    return [list(row) for row in before]
  quotient = tangent_module(reference, 1).quotient
  columns = [quotient.coordinates(tuple(unit * g for g in vector)) for vector in versal.basis]
  rows = [[column[r] for column in columns] for r in range(versal.tau)]
  field = reference.ring.field
  shifts = []
  for row in before:
    solution = solve(rows, list(row), versal.tau, field)
    if solution is None:
      raise VersalityError("class is not reached by the miniversal parameters", step=order)
    shifts.append(solution)
  return shifts


def _local_cofactors(raw: Sequence[Sequence[Poly]], reference: Singularity, count: int, order: int) -> tuple[Poly, list[tuple[Poly, ...]]]:
  """q_k ごとの切断を局所環で Jacobi 列と F_i e_j に持ち上げ、単元を一つにそろえる。"""
  ring, c = reference.ring, reference.codimension
  generators = list(jacobian(reference).columns)
  generators += [tuple(f if k == j else ring.zero() for k in range(c)) for f in reference.equations for j in range(c)]
  units, lifts = [], []
  for k in range(count):
    row = tuple(parts[k] for parts in raw)
    found = local_lift_cofactors(row, generators, c, ring)
    if found is None:
      raise VersalityError("normal section is not in the image of the tangent map", step=order)
    units.append(found[0])
    lifts.append(found[1])
  unit = ring.one()
  for u in units:
    unit = unit * u
  cofactors = []
  for k, lift in enumerate(lifts):
    others = ring.one()
    for m, u in enumerate(units):
      if m != k:
        others = others * u
    cofactors.append(tuple(others * e for e in lift))
  return unit, cofactors


def verify_versality_order(s: Singularity, n: int, trial: DeformationFamily) -> VersalityReport:
  """t ↦ φ(t) を次数ごとに決め、引き戻しと trial の e 類がどの段でも消えることを確かめる。"""
  if trial.base is None:
    raise ValueError("trial family must live over an Artinian base")
  if trial.reference != s:
    raise ReductionMismatchError("trial family deforms a different singularity")
  versal = miniversal(s)
  top = min(n, trial.base.order)
  base = trial.base.truncate(top)
  current = EmbeddedLifting(base, trial.members, s)
  if not all(cert.flat for cert in check_flatness_filtered(current)):
    raise VersalityError("trial family is not flat", step=0)
  c, nx = s.codimension, s.ring.nvars
  # current ≡ unit · (引き戻し)。reference は unit·F
  unit, reference = s.ring.one(), s
  phi = {name: base.ring.zero() for name in versal.family.parameters}
  steps = []
  for order in range(1, top + 1):
    partial = base.truncate(order)
    step = SmallExtensionStep(partial, partial.maximal_ideal_power(order))
    target = restrict(current, partial)

    def pulled() -> EmbeddedLifting:
      lift = versal.family.lifting(order)
      return base_change(lift, partial, {name: partial.reduce(value) for name, value in phi.items()})

    before = e_class(target, _scaled(pulled(), unit, reference), step)
    shifts = _parameter_shifts(before, versal, unit, reference, order)
    for i, name in enumerate(versal.family.parameters):
      shift = sum((q.scale(shifts[k][i]) for k, q in enumerate(step.q_basis) if shifts[k][i]), base.ring.zero())
      phi[name] = base.reduce(phi[name] + embed(shift, base.ring))
    plain = pulled()
    pullback = _scaled(plain, unit, reference)
    after = e_class(target, pullback, step)
    vanishes = all(not value for row in after for value in row)
    if not vanishes:
      raise VersalityError("e-class does not vanish after adjusting the parameters", step=order)
    # 正規形をとる前の差 (I_0 の元も含めて持ち上げる)
    raw = [step.decompose(partial.reduce_family(f - g), s.ring) for f, g in zip(target.equations, pullback.equations)]
    w, cofactors = _local_cofactors(raw, reference, step.dimension, order)
    theta = [tuple(row[:nx]) for row in cofactors]
    change = [tuple(tuple(row[nx + i * c + j] for j in range(c)) for i in range(c)) for row in cofactors]
    # q^{depth+1} = 0 となる深さ
    depth = base.order // order
    if w != 1:
      unit = unit * w ** (depth + 1)
      reference = _scaled_reference(s, unit)
    current = _align(current, step, theta, change, w, depth, reference)
    if restrict(current, partial).equations != _scaled(plain, unit, reference).equations:
      raise VersalityError("aligned trial does not match the pulled-back family", step=order)
    steps.append(VersalityStep(order, before, vanishes, tuple(theta), tuple(change), w))
    logger.debug("versality step %d: class %s, unit %s", order, before, w)
  return VersalityReport(top, versal.family.parameters, dict(phi), tuple(steps))
