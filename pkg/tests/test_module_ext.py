import pytest

from versal_kit.errors import EndpointMismatchError
from versal_kit.module_ext import (
  Extension,
  ModuleHom,
  PresentedModule,
  baer_sum,
  boundary,
  certify_extension,
  direct_sum,
  ext_dimension,
  ext_module,
  extends_along,
  extensions_isomorphic,
  hom_space,
  is_extension_morphism,
  is_injective,
  is_isomorphism,
  is_split,
  is_surjective,
  opposite,
  pullback,
  pushforward,
  split_extension,
)
from versal_kit.poly_core import Field, PolyRing
from versal_kit.standard_basis import INFINITE


def residue_field(ring):
  return PresentedModule.cyclic(ring, ring.gens())


def square_zero(ring, name):
  """0 -> κ -> R/(m^2 の一部) -> κ -> 0。name 方向の 1 次の拡大"""
  others = [g for g in ring.gens() if g != ring.gen(name)]
  k = residue_field(ring)
  middle = PresentedModule.cyclic(ring, [ring.gen(name) ** 2] + others)
  iota = ModuleHom(k, middle, ((ring.gen(name),),))
  kappa = ModuleHom(middle, k, ((ring.one(),),))
  return Extension(middle, iota, kappa)


def cube_extension(ring):
  """0 -> R/(x) -x^2-> R/(x^3) -> R/(x^2) -> 0"""
  x = ring.gen("x")
  sub = PresentedModule.cyclic(ring, [x])
  middle = PresentedModule.cyclic(ring, [x ** 3])
  quotient = PresentedModule.cyclic(ring, [x ** 2])
  return Extension(middle, ModuleHom(sub, middle, ((x ** 2,),)), ModuleHom(middle, quotient, ((ring.one(),),)))


def line_family(ring):
  line = square_zero(ring, "x")
  k = line.sub
  return [line, split_extension(k, k), cube_extension(ring), baer_sum(line, line), opposite(line)]


def plane_family(ring):
  ex, ey = square_zero(ring, "x"), square_zero(ring, "y")
  k = ex.sub
  return [ex, ey, split_extension(k, k), baer_sum(ex, ey), baer_sum(ex, opposite(ey))]


@pytest.fixture
def line_extension(ring_x):
  return square_zero(ring_x, "x")


class TestPresentedModule:
  def test_dimension(self, ring_xy):
    assert residue_field(ring_xy).dimension() == 1
    assert PresentedModule.free(ring_xy, 1).dimension() == INFINITE

  def test_zero_columns_dropped(self, ring_x):
    module = PresentedModule(ring_x, 1, ((ring_x.zero(),), (ring_x.gen("x"),)))
    assert len(module.presentation) == 1

  def test_direct_sum(self, ring_x):
    k = residue_field(ring_x)
    assert direct_sum(k, k).dimension() == 2

  def test_relation_length(self, ring_x):
    with pytest.raises(ValueError):
      PresentedModule(ring_x, 2, ((ring_x.gen("x"),),))


class TestModuleHom:
  def test_relations_must_map_to_relations(self, ring_x):
    """κ -> R で 1 ↦ 1 は well-defined でない"""
    with pytest.raises(ValueError):
      ModuleHom(residue_field(ring_x), PresentedModule.free(ring_x, 1), ((ring_x.one(),),))

  def test_multiplication_by_x(self, ring_x):
    x = ring_x.gen("x")
    free = PresentedModule.free(ring_x, 1)
    times_x = ModuleHom(free, free, ((x,),))
    assert is_injective(times_x)
    assert not is_surjective(times_x)
    truncated = PresentedModule.cyclic(ring_x, [x ** 2])
    assert not is_injective(ModuleHom(truncated, truncated, ((x,),)))

  def test_identity(self, ring_x):
    k = residue_field(ring_x)
    identity = ModuleHom.identity(k)
    assert identity.compose(identity).equals(identity)
    assert is_isomorphism(identity)
    assert (identity - identity).is_zero()

  def test_compose_mismatch(self, ring_x):
    k = residue_field(ring_x)
    free = PresentedModule.free(ring_x, 1)
    with pytest.raises(EndpointMismatchError):
      ModuleHom.identity(k).compose(ModuleHom.identity(free))


class TestHomAndExt:
  def test_socle(self, ring_x):
    """Hom(κ, κ[x]/(x^2)) は 1 次元"""
    x = ring_x.gen("x")
    space = hom_space(residue_field(ring_x), PresentedModule.cyclic(ring_x, [x ** 2]))
    assert space.dimension == 1

  def test_hom_into_free(self, ring_x):
    free = PresentedModule.free(ring_x, 1)
    assert hom_space(residue_field(ring_x), free).dimension == 0
    assert hom_space(free, free).dimension == INFINITE

  def test_ext_over_line(self, ring_x):
    k = residue_field(ring_x)
    assert [ext_dimension(k, k, i) for i in range(3)] == [1, 1, 0]

  def test_ext_over_plane(self, ring_xy):
    """κ[x,y] 上で Ext^i(κ, κ) は 1, 2, 1 次元 (Koszul 複体)"""
    k = residue_field(ring_xy)
    assert [ext_dimension(k, k, i) for i in range(3)] == [1, 2, 1]

  def test_ext_of_hypersurface(self, ring_xy):
    """R/(f) は射影次元 1 なので Ext^2 は消える"""
    x, y = ring_xy.gens()
    module = PresentedModule.cyclic(ring_xy, [x ** 3 + y ** 2])
    assert ext_dimension(module, module, 2) == 0
    assert ext_dimension(module, module, 1) == INFINITE

  def test_bad_degree(self, ring_x):
    k = residue_field(ring_x)
    with pytest.raises(ValueError):
      ext_module(k, k, 3)


class TestExtensions:
  def test_certificate(self, line_extension):
    assert certify_extension(line_extension).valid
    k = line_extension.sub
    assert certify_extension(split_extension(k, k)).valid

  def test_split_and_nonsplit(self, line_extension):
    k = line_extension.sub
    assert is_split(line_extension) is None
    assert is_split(split_extension(k, k)) is not None

  def test_sum_with_opposite_splits(self, line_extension):
    total = baer_sum(line_extension, opposite(line_extension))
    assert certify_extension(total).valid
    assert is_split(total) is not None

  def test_split_is_neutral(self, line_extension):
    k = line_extension.sub
    total = baer_sum(split_extension(k, k), line_extension)
    assert extensions_isomorphic(total, line_extension) is not None

  def test_isomorphism_is_a_morphism(self, line_extension):
    phi = extensions_isomorphic(line_extension, line_extension)
    assert phi is not None
    assert is_extension_morphism(phi, line_extension, line_extension)

  def test_nonsplit_not_isomorphic_to_split(self, line_extension):
    k = line_extension.sub
    assert extensions_isomorphic(line_extension, split_extension(k, k)) is None

  def test_twice_is_nonsplit_in_char_zero(self, line_extension):
    assert is_split(baer_sum(line_extension, line_extension)) is None

  def test_twice_splits_in_char_two(self):
    """標数 2 では E + E が分裂する"""
    ring = PolyRing(("x",), Field(2))
    extension = square_zero(ring, "x")
    assert is_split(baer_sum(extension, extension)) is not None

  def test_commutative(self, ring_xy):
    ex, ey = square_zero(ring_xy, "x"), square_zero(ring_xy, "y")
    assert extensions_isomorphic(baer_sum(ex, ey), baer_sum(ey, ex)) is not None

  def test_directions_differ(self, ring_xy):
    """x 方向と y 方向の拡大は同型でない"""
    ex, ey = square_zero(ring_xy, "x"), square_zero(ring_xy, "y")
    assert extensions_isomorphic(ex, ey) is None

  def test_associative(self, line_extension):
    k = line_extension.sub
    e, s = line_extension, split_extension(k, k)
    left = baer_sum(baer_sum(e, s), e)
    right = baer_sum(e, baer_sum(s, e))
    assert extensions_isomorphic(left, right) is not None

  def test_endpoint_mismatch(self, ring_x, line_extension):
    free = PresentedModule.free(ring_x, 1)
    other = split_extension(free, free)
    with pytest.raises(EndpointMismatchError):
      baer_sum(line_extension, other)


class TestFunctoriality:
  def test_identity_pushforward(self, line_extension):
    pushed = pushforward(ModuleHom.identity(line_extension.sub), line_extension)
    assert certify_extension(pushed).valid
    assert extensions_isomorphic(pushed, line_extension) is not None

  def test_identity_pullback(self, line_extension):
    pulled = pullback(ModuleHom.identity(line_extension.quotient), line_extension)
    assert certify_extension(pulled).valid
    assert extensions_isomorphic(pulled, line_extension) is not None

  def test_pushforward_additive(self, line_extension):
    """(g + g)_* E ≅ g_* E + g_* E"""
    identity = ModuleHom.identity(line_extension.sub)
    doubled = pushforward(identity + identity, line_extension)
    assert extensions_isomorphic(doubled, baer_sum(line_extension, line_extension)) is not None

  def test_pullback_additive(self, line_extension):
    identity = ModuleHom.identity(line_extension.quotient)
    doubled = pullback(identity + identity, line_extension)
    assert extensions_isomorphic(doubled, baer_sum(line_extension, line_extension)) is not None

  def test_zero_maps_split(self, line_extension):
    k = line_extension.sub
    zero = ModuleHom.zero(k, k)
    assert is_split(pushforward(zero, line_extension)) is not None
    assert is_split(pullback(zero, line_extension)) is not None

  def test_boundary_vanishes_on_extendable_maps(self, line_extension):
    """g が E に延びるとき g_* E は分裂する"""
    k = line_extension.sub
    zero = ModuleHom.zero(k, k)
    assert extends_along(line_extension, zero) is not None
    assert is_split(boundary(line_extension, zero)) is not None

  def test_pushforward_mismatch(self, ring_x, line_extension):
    free = PresentedModule.free(ring_x, 1)
    with pytest.raises(EndpointMismatchError):
      pushforward(ModuleHom.identity(free), line_extension)


class TestInfiniteModules:
  def test_free_resolution_of_residue_field_does_not_split(self, ring_x):
    """0 -> R -x-> R -> κ -> 0 は分裂しない"""
    x = ring_x.gen("x")
    free = PresentedModule.free(ring_x, 1)
    k = residue_field(ring_x)
    extension = Extension(free, ModuleHom(free, free, ((x,),)), ModuleHom(free, k, ((ring_x.one(),),)))
    assert certify_extension(extension).valid
    assert is_split(extension) is None

  def test_split_over_free_module(self, ring_x):
    free = PresentedModule.free(ring_x, 1)
    k = residue_field(ring_x)
    retraction = is_split(split_extension(k, free))
    assert retraction is not None


class TestExtensionFamilies:
  def test_line(self, ring_x):
    family = line_family(ring_x)
    assert len(family) >= 4
    assert all(certify_extension(E).valid for E in family)

  def test_plane(self, ring_xy):
    family = plane_family(ring_xy)
    assert len(family) >= 4
    assert all(certify_extension(E).valid for E in family)

  def test_cube_does_not_split(self, ring_x):
    assert is_split(cube_extension(ring_x)) is None

  def test_plane_sums_are_distinct(self, ring_xy):
    ex, ey = square_zero(ring_xy, "x"), square_zero(ring_xy, "y")
    assert extensions_isomorphic(baer_sum(ex, ey), baer_sum(ex, opposite(ey))) is None
    assert is_split(baer_sum(ex, ey)) is None


class TestOpposite:
  def test_involution(self, ring_x, ring_xy):
    for E in line_family(ring_x) + plane_family(ring_xy):
      assert extensions_isomorphic(opposite(opposite(E)), E) is not None

  def test_is_pushforward_along_minus_identity(self, ring_x, ring_xy):
    """-E は (-id)_* E と同じ類"""
    for E in line_family(ring_x) + plane_family(ring_xy):
      minus = -ModuleHom.identity(E.sub)
      assert extensions_isomorphic(opposite(E), pushforward(minus, E)) is not None

  def test_differs_from_itself_in_char_zero(self, line_extension):
    assert extensions_isomorphic(opposite(line_extension), line_extension) is None


class TestAdditivity:
  @pytest.mark.parametrize("factor", [2, 3])
  def test_pushforward_distinct_maps(self, ring_x, ring_xy, factor):
    """(g1 + g2)_* E ≅ g1_* E + g2_* E"""
    for E in [square_zero(ring_x, "x"), square_zero(ring_xy, "y")]:
      g1 = ModuleHom.identity(E.sub)
      g2 = g1.scale(factor)
      left = pushforward(g1 + g2, E)
      right = baer_sum(pushforward(g1, E), pushforward(g2, E))
      assert extensions_isomorphic(left, right) is not None

  @pytest.mark.parametrize("factor", [2, 3])
  def test_pullback_distinct_maps(self, ring_x, ring_xy, factor):
    """(f1 + f2)^* E ≅ f1^* E + f2^* E"""
    for E in [square_zero(ring_x, "x"), square_zero(ring_xy, "y")]:
      f1 = ModuleHom.identity(E.quotient)
      f2 = f1.scale(factor)
      left = pullback(f1 + f2, E)
      right = baer_sum(pullback(f1, E), pullback(f2, E))
      assert extensions_isomorphic(left, right) is not None

  def test_scaled_pushforward_is_a_multiple(self, line_extension):
    """3_* E ≅ E + E + E"""
    tripled = pushforward(ModuleHom.identity(line_extension.sub).scale(3), line_extension)
    total = baer_sum(baer_sum(line_extension, line_extension), line_extension)
    assert extensions_isomorphic(tripled, total) is not None
