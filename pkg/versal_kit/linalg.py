from __future__ import annotations

from typing import Sequence

from sympy.polys.matrices import DomainMatrix

from versal_kit.poly_core import Field, Poly, PolyRing, monomials_up_to


def _matrix(rows: Sequence[Sequence], ncols: int, field: Field) -> DomainMatrix:
  return DomainMatrix([list(row) for row in rows], (len(rows), ncols), field.domain)


def rank(rows: Sequence[Sequence], ncols: int, field: Field) -> int:
  if not rows or ncols == 0:
    return 0
  return _matrix(rows, ncols, field).rank()


# 行が核の基底をなす
def nullspace(rows: Sequence[Sequence], ncols: int, field: Field) -> list[list]:
  if ncols == 0:
    return []
  if not rows:
    return [[field.one if i == j else field.zero for j in range(ncols)] for i in range(ncols)]
  return _matrix(rows, ncols, field).nullspace().to_list()


# A x = b の解を一つ返す。解がなければ None
def solve(rows: Sequence[Sequence], rhs: Sequence, ncols: int, field: Field) -> list | None:
  if not rows:
    return [field.zero] * ncols
  augmented = [list(row) + [b] for row, b in zip(rows, rhs)]
  reduced, pivots = _matrix(augmented, ncols + 1, field).rref()
  if ncols in pivots:
    return None
  entries = reduced.to_list()
  solution = [field.zero] * ncols
  for row_index, column in enumerate(pivots):
    solution[column] = entries[row_index][ncols]
  return solution


# 張る空間の簡約階段基底 (行ベクトル) とピボット列
def echelon_basis(vectors: Sequence[Sequence], ncols: int, field: Field) -> tuple[list[list], tuple[int, ...]]:
  if not vectors or ncols == 0:
    return [], ()
  reduced, pivots = _matrix(vectors, ncols, field).rref()
  entries = reduced.to_list()
  return [entries[i] for i in range(len(pivots))], tuple(pivots)


def truncated_quotient_dimension(generators: Sequence[Sequence[Poly]], rank_: int, ring: PolyRing, max_degree: int) -> int:
  """dim κ[x]^k / (U + m^{D+1}) を切り捨てた倍元の Gauss 消去で求める。

  U の standard basis を一切使わない独立な検算用。m^{D+1} が局所化した U に
  含まれるほど D が大きければ、局所商の次元と一致する。
  """
  monomials = monomials_up_to(ring.nvars, max_degree)
  columns = {(pos, mono): i for i, (pos, mono) in enumerate((p, m) for p in range(rank_) for m in monomials)}
  field = ring.field
  rows = []
  for vector in generators:
    for shift in monomials:
      row = [field.zero] * len(columns)
      nonzero = False
      for pos, entry in enumerate(vector):
        for mono, coeff in entry.terms.items():
          moved = tuple(a + b for a, b in zip(mono, shift))
          if sum(moved) <= max_degree:
            row[columns[(pos, moved)]] += coeff
            nonzero = True
      if nonzero:
        rows.append(row)
  return len(columns) - rank(rows, len(columns), field)
