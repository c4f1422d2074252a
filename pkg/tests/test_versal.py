import pytest

from versal_kit.deformation import embed, make_truncation
from versal_kit.errors import ReductionMismatchError
from versal_kit.singularity import Singularity, tangent_module
from versal_kit.versal import (
  DeformationFamily,
  first_obstruction,
  kodaira_spencer,
  lift_family,
  lift_to_next_order,
  miniversal,
  parameter_names,
  render_member,
  verify_versality_order,
)

from tests.conftest import ADE_TABLE


def one_parameter_family(reference, build, order=1, name="s"):
  """κ[s]/s^{order+1} 上の 1 パラメータ族"""
  base = make_truncation(1, order, reference.ring.field, (name,))
  ring = base.family_ring(reference.ring)
  gens = {n: ring.gen(n) for n in ring.variables}
  return DeformationFamily((name,), (base.reduce_family(build(gens)),), reference, base)


class TestMiniversal:
  def test_a2(self, a2):
    """A2 の半普遍族は x^3 + y^2 + t1 + t2*x"""
    versal = miniversal(a2)
    assert versal.tau == 2
    assert versal.family.parameters == ("t1", "t2")
    assert versal.family.render_members() == ["x^3 + y^2 + t1 + t2*x"]
    assert versal.ks.shape == (2, 2)
    assert versal.ks.is_identity()

  @pytest.mark.parametrize("name, text, tau", ADE_TABLE)
  def test_ade(self, make_singularity, name, text, tau):
    versal = miniversal(make_singularity(text))
    assert versal.tau == tau
    assert versal.ks.is_identity()

  def test_icis(self, space_curve):
    versal = miniversal(space_curve)
    assert versal.tau == 2
    assert len(versal.family.members) == 2
    assert versal.ks.is_identity()

  def test_parameter_names_avoid_variables(self, make_singularity):
    s = make_singularity("t1^3 + y^2", variables=("t1", "y"))
    assert parameter_names(s, 2) == ("s1", "s2")
    assert miniversal(s).family.parameters == ("s1", "s2")


class TestRenderMember:
  def test_signs_and_scalars(self, a2):
    ring = a2.ring.extend(("t1", "t2"))
    x, t1, t2 = ring.gen("x"), ring.gen("t1"), ring.gen("t2")
    g = embed(a2.equations[0], ring) - t1 + t2 * x * 2
    assert render_member(g, a2.ring, ("t1", "t2")) == "x^3 + y^2 - t1 + 2*t2*x"

  def test_polynomial_coefficient(self, a2):
    ring = a2.ring.extend(("t1",))
    x, y, t1 = ring.gen("x"), ring.gen("y"), ring.gen("t1")
    g = embed(a2.equations[0], ring) + t1 * (x + y)
    assert render_member(g, a2.ring, ("t1",)) == "x^3 + y^2 + t1*(x + y)"


class TestKodairaSpencer:
  def test_constant_direction(self, a2):
    """F + s の KS 行列は T¹ の基底 1 方向"""
    family = one_parameter_family(a2, lambda g: g["x"] ** 3 + g["y"] ** 2 + g["s"])
    ks = kodaira_spencer(family)
    assert ks.shape == (2, 1)
    assert ks.matrix == ((1,), (0,))
    assert not ks.is_identity()

  def test_trivial_direction(self, a2):
    """座標変換 x -> x + s の方向は T¹ で 0"""
    family = one_parameter_family(a2, lambda g: (g["x"] + g["s"]) ** 3 + g["y"] ** 2)
    assert kodaira_spencer(family).matrix == ((0,), (0,))


class TestLifting:
  def test_miniversal_lifts_without_corrections(self, a2):
    versal = miniversal(a2)
    results = lift_family(versal.family, 3)
    assert [r.family.base.order for r in results] == [1, 2, 3]
    assert not any(r.corrected for r in results)
    assert all(c.flat for r in results for c in r.certificates)
    assert results[-1].family.render_members() == ["x^3 + y^2 + t1 + t2*x"]

  def test_correction(self, ring_xy):
    """(x, x + t) は平坦でないので補正して持ち上げる"""
    x = ring_xy.gen("x")
    reference = Singularity(ring_xy, (x, x))
    ring = ring_xy.extend(("t",))
    family = DeformationFamily(("t",), (ring.gen("x"), ring.gen("x") + ring.gen("t")), reference)
    result = lift_to_next_order(family, 1)
    assert result.corrected
    assert result.certificates[-1].flat

  def test_invalid_order(self, a2):
    with pytest.raises(ValueError):
      lift_to_next_order(miniversal(a2).family, 0)

  def test_parameter_clash(self, a2):
    ring = a2.ring.extend(("s",))
    with pytest.raises(ValueError):
      DeformationFamily(("x",), (ring.gen("x"),), a2)


class TestObstruction:
  def test_a2_is_unobstructed(self, a2):
    report = first_obstruction(a2)
    assert report.is_zero()
    assert report.t2_dimension == tangent_module(a2, 2).dimension == 0
    assert len(report.values) == 3

  def test_icis(self, space_curve):
    assert first_obstruction(space_curve).is_zero()


class TestVersality:
  def test_miniversal_pulls_back_to_itself(self, a2):
    """trial が半普遍族なら 1 次の代入は KS の座標 t_i ↦ t_i"""
    versal = miniversal(a2)
    trial = versal.family.at_order(3)
    report = verify_versality_order(a2, 3, trial)
    assert report.order == 3
    assert [step.order for step in report.steps] == [1, 2, 3]
    assert all(step.class_vanishes for step in report.steps)
    t1, t2 = trial.base.ring.gens()
    assert report.substitution == {"t1": t1, "t2": t2}

  def test_constant_family(self, a2):
    """F + s は t1 = s, t2 = 0 で引き戻される"""
    trial = one_parameter_family(a2, lambda g: g["x"] ** 3 + g["y"] ** 2 + g["s"], order=3)
    report = verify_versality_order(a2, 3, trial)
    s = trial.base.ring.gen("s")
    assert report.substitution == {"t1": s, "t2": trial.base.ring.zero()}
    assert report.steps[0].class_before == ((1, 0),)

  def test_coordinate_change(self, a2):
    """(x + s)^3 + y^2 は座標変換で自明な族に揃う"""
    trial = one_parameter_family(a2, lambda g: (g["x"] + g["s"]) ** 3 + g["y"] ** 2, order=3)
    report = verify_versality_order(a2, 3, trial)
    assert len(report.steps) == 3
    assert all(step.class_vanishes for step in report.steps)
    assert report.steps[0].class_before == ((0, 0),)

  def test_order_capped_by_base(self, a2):
    trial = one_parameter_family(a2, lambda g: g["x"] ** 3 + g["y"] ** 2 + g["s"] * g["x"], order=1)
    assert verify_versality_order(a2, 5, trial).order == 1

  def test_needs_artinian_base(self, a2):
    with pytest.raises(ValueError):
      verify_versality_order(a2, 2, miniversal(a2).family)

  def test_other_singularity(self, a2, make_singularity):
    trial = one_parameter_family(a2, lambda g: g["x"] ** 3 + g["y"] ** 2 + g["s"])
    with pytest.raises(ReductionMismatchError):
      verify_versality_order(make_singularity("x^4 + y^2"), 1, trial)


def random_trial(reference, rng, order):
  """F + Σ_k s^k h_k、h_k は次数 3 以下の乱数係数の多項式"""
  shapes = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)]
  coefficients = [[rng.randint(-4, 4) for _ in shapes] for _ in range(order)]

  def build(g):
    total = embed(reference.equations[0], g["x"].ring)
    for k, row in enumerate(coefficients, start=1):
      h = sum((g["x"] ** a * g["y"] ** b * c for (a, b), c in zip(shapes, row) if c), g["x"] * 0)
      total = total + g["s"] ** k * h
    return total
  return one_parameter_family(reference, build, order=order)


class TestRandomTrials:
  @pytest.mark.parametrize("name, text, tau", ADE_TABLE)
  def test_first_order_substitution_is_the_ks_column(self, make_singularity, rng, name, text, tau):
    """κ[s]/(s^2) 上では t_i ↦ (KS の i 成分)·s"""
    s = make_singularity(text)
    for _ in range(50):
      trial = random_trial(s, rng, 1)
      column = [row[0] for row in kodaira_spencer(trial).matrix]
      report = verify_versality_order(s, 1, trial)
      e = trial.base.ring.gen("s")
      assert report.substitution == {f"t{i + 1}": e.scale(column[i]) for i in range(tau)}
      assert report.steps[0].class_vanishes

  @pytest.mark.parametrize("name, text, tau", ADE_TABLE)
  def test_second_order(self, make_singularity, rng, name, text, tau):
    """κ[s]/(s^3) 上でも両段で類が消え、s の係数は KS の列"""
    s = make_singularity(text)
    for _ in range(50):
      trial = random_trial(s, rng, 2)
      column = [row[0] for row in kodaira_spencer(trial).matrix]
      report = verify_versality_order(s, 2, trial)
      assert [step.order for step in report.steps] == [1, 2]
      assert all(step.class_vanishes for step in report.steps)
      assert [report.substitution[f"t{i + 1}"].coefficient((1,)) for i in range(tau)] == column


class TestLocalAlignment:
  def test_far_singular_point(self, a1_with_far_point):
    """(1, 0) にも特異点があると x は局所環でだけ Jacobi イデアルに入る"""
    trial = one_parameter_family(a1_with_far_point, lambda g: g["x"] ** 2 * (g["x"] - 1) ** 2 + g["y"] ** 2 + g["s"] * g["x"])
    report = verify_versality_order(a1_with_far_point, 1, trial)
    assert report.substitution == {"t1": trial.base.ring.zero()}
    assert report.steps[0].class_before == ((0,),)
    assert report.steps[0].class_vanishes
    unit = report.steps[0].unit
    assert unit != 1
    assert unit.constant_coefficient() == 1

  def test_far_singular_point_second_order(self, a1_with_far_point):
    trial = one_parameter_family(
      a1_with_far_point, lambda g: g["x"] ** 2 * (g["x"] - 1) ** 2 + g["y"] ** 2 + g["s"] * g["x"] + g["s"] ** 2, order=2
    )
    report = verify_versality_order(a1_with_far_point, 2, trial)
    assert len(report.steps) == 2
    assert all(step.class_vanishes for step in report.steps)
    assert report.substitution["t1"].coefficient((1,)) == 0

  def test_global_lift_keeps_the_unit_trivial(self, a2):
    trial = one_parameter_family(a2, lambda g: (g["x"] + g["s"]) ** 3 + g["y"] ** 2, order=2)
    report = verify_versality_order(a2, 2, trial)
    assert all(step.unit == 1 for step in report.steps)


class TestTwoQuadrics:
  def test_miniversal(self, icis):
    versal = miniversal(icis)
    assert versal.tau == 5
    assert len(versal.family.members) == 2
    assert versal.ks.is_identity()

  def test_lift_to_second_order(self, icis):
    """正則列なので Koszul 関係式だけで平坦性が決まる"""
    result = lift_to_next_order(miniversal(icis).family.at_order(1), 2)
    assert not result.corrected
    assert [c.method for c in result.certificates] == ["koszul", "koszul"]
    assert all(c.flat for c in result.certificates)

  def test_unobstructed(self, icis):
    report = first_obstruction(icis)
    assert report.is_zero()
    assert report.t2_dimension == 0
    assert len(report.values) == 15
