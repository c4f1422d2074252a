import random

import pytest

from versal_kit.parse import parse_polynomial
from versal_kit.poly_core import QQ_FIELD, Field, PolyRing
from versal_kit.settings import load_settings
from versal_kit.singularity import Singularity

# ADE 特異点 (名前, 式, τ)。すべて擬斉次なので μ = τ
ADE_TABLE = [
  ("A1", "x^2 + y^2", 1),
  ("A2", "x^3 + y^2", 2),
  ("A3", "x^4 + y^2", 3),
  ("A4", "x^5 + y^2", 4),
  ("A5", "x^6 + y^2", 5),
  ("A6", "x^7 + y^2", 6),
  ("A7", "x^8 + y^2", 7),
  ("A8", "x^9 + y^2", 8),
  ("D4", "x^2*y + y^3", 4),
  ("D5", "x^2*y + y^4", 5),
  ("D6", "x^2*y + y^5", 6),
  ("E6", "x^3 + y^4", 6),
  ("E7", "x^3 + x*y^3", 7),
  ("E8", "x^3 + y^5", 8),
]


@pytest.fixture
def ring_x():
  return PolyRing(("x",))


@pytest.fixture
def ring_xy():
  return PolyRing(("x", "y"))


@pytest.fixture
def ring_xyz():
  return PolyRing(("x", "y", "z"))


@pytest.fixture
def make_singularity():
  """式の文字列から Singularity を作る関数を返す"""
  def build(*equations: str, variables=("x", "y"), field: Field = QQ_FIELD) -> Singularity:
    ring = PolyRing(tuple(variables), field)
    return Singularity(ring, tuple(parse_polynomial(text, ring) for text in equations))
  return build


@pytest.fixture
def a2(make_singularity):
  return make_singularity("x^3 + y^2")


@pytest.fixture
def space_curve(make_singularity):
  # A2 を z = xy のグラフに埋め込んだ 2 式の ICIS。T¹ は A2 と同じ
  return make_singularity("x^3 + y^2", "z - x*y", variables=("x", "y", "z"))


@pytest.fixture
def rng():
  """VERSAL_KIT_SEED で固定した乱数"""
  return random.Random(load_settings().seed)


@pytest.fixture
def icis(make_singularity):
  # 2 つの 2 次式で切った空間曲線。τ = 5
  return make_singularity("x^2 + y^2 + z^2", "x*y", variables=("x", "y", "z"))


@pytest.fixture
def a1_with_far_point(make_singularity):
  # 原点は A1。(1, 0) にも特異点があるので大域的な計算では揃わない
  return make_singularity("x^2*(x - 1)^2 + y^2")
