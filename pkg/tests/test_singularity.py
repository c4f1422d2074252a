import pytest

from versal_kit.errors import (
  DegenerateEquationError,
  InvalidLevelError,
  NonIsolatedError,
  NotRegularSequenceError,
  RingMismatchError,
)
from versal_kit.poly_core import Field, PolyRing
from versal_kit.singularity import (
  Singularity,
  certify_isolated,
  certify_regular_sequence,
  jacobian,
  koszul_relations,
  milnor_algebra,
  tangent_dimension_oracle,
  tangent_module,
  tjurina_algebra,
  tjurina_number,
)
from versal_kit.standard_basis import INFINITE

from tests.conftest import ADE_TABLE


class TestSingularity:
  def test_zero_equation(self, ring_xy):
    with pytest.raises(DegenerateEquationError):
      Singularity(ring_xy, (ring_xy.zero(),))

  def test_not_through_origin(self, ring_xy):
    x, _ = ring_xy.gens()
    with pytest.raises(ValueError):
      Singularity(ring_xy, (x + 1,))

  def test_too_many_equations(self, ring_x):
    x = ring_x.gen("x")
    with pytest.raises(ValueError):
      Singularity(ring_x, (x, x ** 2))

  def test_ring_mismatch(self, ring_x, ring_xy):
    with pytest.raises(RingMismatchError):
      Singularity(ring_xy, (ring_x.gen("x"),))

  def test_codimension(self, a2, space_curve):
    assert a2.is_hypersurface
    assert space_curve.codimension == 2
    assert str(a2) == "x^3 + y^2"


class TestJacobian:
  def test_matrix(self, a2, ring_xy):
    x, y = ring_xy.gens()
    assert jacobian(a2).matrix == ((x ** 2 * 3, y * 2),)

  def test_koszul_relations(self, space_curve):
    f1, f2 = space_curve.equations
    assert koszul_relations(space_curve.equations) == [(f2, -f1)]


class TestRegularSequence:
  def test_hypersurface(self, a2):
    assert certify_regular_sequence(a2).regular

  def test_icis(self, space_curve):
    certificate = certify_regular_sequence(space_curve)
    assert certificate.regular
    assert certificate.offending_syzygy is None

  def test_common_factor(self, make_singularity):
    """(xy, xz) は共通因子 x を持つので正則列でない"""
    s = make_singularity("x*y", "x*z", variables=("x", "y", "z"))
    certificate = certify_regular_sequence(s)
    assert not certificate.regular
    assert certificate.offending_syzygy is not None
    with pytest.raises(NotRegularSequenceError):
      tangent_module(s, 1)

  def test_regular_only_near_the_origin(self, make_singularity):
    """(x(y - 1), z(y - 1)) は y = 1 で共通因子を持つが、原点では y - 1 が単元なので正則列"""
    s = make_singularity("x*(y - 1)", "z*(y - 1)", variables=("x", "y", "z"))
    assert certify_regular_sequence(s).regular
    assert tangent_module(s, 1).dimension == 0


class TestADE:
  @pytest.mark.parametrize("name, text, tau", ADE_TABLE)
  def test_tjurina_matches_oracle(self, make_singularity, name, text, tau):
    """Tjurina 代数の次元が切り捨て Gauss 消去の検算と一致する"""
    s = make_singularity(text)
    _, dimension = tjurina_algebra(s)
    assert dimension == tau
    assert tangent_dimension_oracle(s, 10) == tau

  @pytest.mark.parametrize("name, text, tau", ADE_TABLE)
  def test_two_paths_agree(self, make_singularity, name, text, tau):
    """T¹ の次元は Tjurina 代数の次元に等しい"""
    s = make_singularity(text)
    assert tangent_module(s, 1).dimension == tjurina_algebra(s)[1]
    assert tjurina_number(s) == tau

  @pytest.mark.parametrize("name, text, tau", ADE_TABLE)
  def test_quasi_homogeneous_milnor(self, make_singularity, name, text, tau):
    s = make_singularity(text)
    assert milnor_algebra(s)[1] == tau

  @pytest.mark.parametrize("name, text, tau", ADE_TABLE)
  def test_unobstructed(self, make_singularity, name, text, tau):
    assert tangent_module(make_singularity(text), 2).dimension == 0


class TestTangentModules:
  def test_a2_basis(self, a2, ring_xy):
    """A2 の T¹ の基底は 1, x"""
    x, _ = ring_xy.gens()
    data = tangent_module(a2, 1)
    assert data.basis == ((ring_xy.one(),), (x,))

  def test_t0_is_infinite(self, a2):
    """曲線の T⁰ は無限次元で、自明でない微分 (Euler 場など) を持つ"""
    data = tangent_module(a2, 0)
    assert data.dimension == INFINITE
    assert data.witness is not None

  def test_icis(self, space_curve):
    """グラフに埋め込んでも T¹ は A2 と同じ 2 次元"""
    assert tangent_module(space_curve, 1).dimension == 2
    assert tangent_module(space_curve, 2).dimension == 0
    assert tangent_dimension_oracle(space_curve, 6) == 2
    assert certify_isolated(space_curve)

  def test_two_quadrics(self, icis):
    """(x^2 + y^2 + z^2, xy) の T¹ は 5 次元で、独立な数え上げと一致する"""
    assert certify_regular_sequence(icis).regular
    assert tangent_module(icis, 1).dimension == 5
    assert tangent_dimension_oracle(icis, 10) == 5
    assert tangent_module(icis, 2).dimension == 0
    assert certify_isolated(icis)

  def test_not_quasi_homogeneous(self, make_singularity):
    """x^4 + y^5 + x^2 y^3 では τ = 11 < μ = 12"""
    s = make_singularity("x^4 + y^5 + x^2*y^3")
    assert milnor_algebra(s)[1] == 12
    assert tjurina_algebra(s)[1] == 11
    assert tangent_dimension_oracle(s, 10) == 11

  def test_invalid_level(self, a2):
    with pytest.raises(InvalidLevelError):
      tangent_module(a2, 3)

  def test_milnor_requires_hypersurface(self, space_curve):
    with pytest.raises(ValueError):
      milnor_algebra(space_curve)


class TestNonIsolated:
  def test_double_line(self, make_singularity):
    s = make_singularity("x^2")
    assert not certify_isolated(s)
    with pytest.raises(NonIsolatedError, match="non-isolated singular locus"):
      tangent_module(s, 1)
    with pytest.raises(NonIsolatedError):
      tjurina_algebra(s)


class TestPositiveCharacteristic:
  def test_a2_in_char_five(self, make_singularity):
    assert tjurina_number(make_singularity("x^3 + y^2", field=Field(5))) == 2

  def test_a2_in_char_three(self, make_singularity):
    """標数 3 では ∂F/∂x = 0 なので Tjurina 代数は (x^3, y) で 3 次元、Milnor 代数は無限"""
    s = make_singularity("x^3 + y^2", field=Field(3))
    assert tjurina_algebra(s)[1] == 3
    with pytest.raises(NonIsolatedError):
      milnor_algebra(s)

  def test_field_is_part_of_the_ring(self):
    assert PolyRing(("x",), Field(5)) != PolyRing(("x",))
