import pytest

from versal_kit.linalg import echelon_basis, nullspace, rank, solve, truncated_quotient_dimension
from versal_kit.parse import parse_polynomial
from versal_kit.poly_core import QQ_FIELD, Field

from tests.conftest import ADE_TABLE


def q(*values):
  return [QQ_FIELD(v) for v in values]


class TestExactLinearAlgebra:
  def test_rank(self):
    assert rank([q(1, 2), q(2, 4)], 2, QQ_FIELD) == 1
    assert rank([], 3, QQ_FIELD) == 0

  def test_nullspace(self):
    """x + y = 0 の核は 1 次元"""
    (vector,) = nullspace([q(1, 1)], 2, QQ_FIELD)
    assert vector[0] + vector[1] == 0
    assert any(vector)

  def test_nullspace_without_rows(self):
    assert len(nullspace([], 2, QQ_FIELD)) == 2

  def test_solve(self):
    assert solve([q(1, 1), q(1, -1)], q(2, 0), 2, QQ_FIELD) == q(1, 1)

  def test_inconsistent(self):
    assert solve([q(1, 1), q(1, 1)], q(0, 1), 2, QQ_FIELD) is None

  def test_echelon_basis(self):
    rows, pivots = echelon_basis([q(0, 2), q(0, 1)], 2, QQ_FIELD)
    assert rows == [q(0, 1)]
    assert pivots == (1,)

  def test_finite_field(self):
    """GF(2) では -1 = 1 なので (1, 1) と (1, -1) は従属"""
    f2 = Field(2)
    rows = [[f2(1), f2(1)], [f2(1), f2(-1)]]
    assert rank(rows, 2, f2) == 1


class TestTruncatedOracle:
  @pytest.mark.parametrize("name, text, tau", ADE_TABLE)
  def test_tjurina_dimension(self, ring_xy, name, text, tau):
    """Tjurina イデアルの切り捨て商の次元が τ に一致する"""
    f = parse_polynomial(text, ring_xy)
    generators = [(f,), (f.derivative(0),), (f.derivative(1),)]
    assert truncated_quotient_dimension(generators, 1, ring_xy, 10) == tau

  def test_monomial_ideal_low_degree(self, ring_xy):
    """(x^2, y) は次数 1 の切り捨てでも 2 次元"""
    x, y = ring_xy.gens()
    assert truncated_quotient_dimension([(x ** 2,), (y,)], 1, ring_xy, 1) == 2
