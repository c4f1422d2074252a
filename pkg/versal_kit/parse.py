"""コマンドラインの入力ファイル。

1 行に 1 項目。`#` 以降はコメント、空行は読み飛ばす::

    vars: x, y, z
    field: Q | Fp <p> | Fp:<p>
    base: e1, e2        (族のパラメータ、省略可)
    order: 2            (族の底の切り捨て次数、省略可)
    x^3 + y^2 - 3/2*x*y
    ...

冪は `^`、積の `*` は省略可、係数は整数か `p/q`。ヘッダ行が先で、
残りの各行が 1 本の式 (`base:` があれば族の 1 本) になる。
"""
from __future__ import annotations

from dataclasses import dataclass
import os
import re
from tokenize import TokenError

import chardet
from sympy import Poly as SympyPoly, Symbol
from sympy.parsing.sympy_parser import (
  convert_xor,
  implicit_multiplication_application,
  parse_expr,
  standard_transformations,
)

from versal_kit.deformation import make_truncation, specialize
from versal_kit.errors import FieldSpecError, InputParseError
from versal_kit.poly_core import QQ_FIELD, Field, Poly, PolyRing
from versal_kit.singularity import Singularity
from versal_kit.versal import DeformationFamily

TRANSFORMATIONS = standard_transformations + (convert_xor, implicit_multiplication_application)
_HEADER = re.compile(r"^(vars|field|base|order)\s*:\s*(.*)$", re.IGNORECASE)
_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class InputSpec:
  source: str
  variables: tuple[str, ...]
  field: Field
  equations: tuple[Poly, ...]
  parameters: tuple[str, ...] = ()
  order: int | None = None

  @property
  def is_family(self) -> bool:
    return bool(self.parameters)

  def singularity(self) -> Singularity:
    ring = PolyRing(self.variables, self.field)
    if not self.is_family:
      return Singularity(ring, self.equations)
    return Singularity(ring, tuple(specialize(g, ring) for g in self.equations))

  def family(self, default_order: int = 1) -> DeformationFamily:
    if not self.is_family:
      raise InputParseError("input has no `base:` line, so it does not describe a family")
    reference = self.singularity()
    order = self.order if self.order is not None else default_order
    base = make_truncation(len(self.parameters), order, self.field, self.parameters)
    return DeformationFamily(self.parameters, tuple(base.reduce_family(g) for g in self.equations), reference, base)


def _names(text: str, line_number: int) -> tuple[str, ...]:
  names = tuple(part.strip() for part in text.split(",") if part.strip())
  if not names:
    raise InputParseError("expected a comma-separated list of names", line_number)
  for name in names:
    if not _NAME.match(name):
      raise InputParseError(f"invalid name {name!r}", line_number)
  if len(set(names)) != len(names):
    raise InputParseError("duplicate names", line_number)
  return names


def parse_polynomial(text: str, ring: PolyRing, line_number: int | None = None) -> Poly:
  """sympy で式を読み、ring の多項式に変換する。"""
  symbols = {name: Symbol(name) for name in ring.variables}
  try:
    expr = parse_expr(text, local_dict=dict(symbols), transformations=TRANSFORMATIONS, evaluate=True)
  except (SyntaxError, TypeError, ValueError, TokenError) as exc:
    raise InputParseError(f"cannot parse {text!r}: {exc}", line_number)
  unknown = sorted(str(s) for s in expr.free_symbols if str(s) not in symbols)
  if unknown:
    raise InputParseError(f"unknown symbols {', '.join(unknown)} in {text!r}", line_number)
  try:
    poly = SympyPoly(expr, *symbols.values()) if ring.variables else None
  except Exception as exc:
    raise InputParseError(f"{text!r} is not a polynomial: {exc}", line_number)
  terms = {}
  try:
    if poly is None:
      terms[()] = ring.field(expr)
    else:
      if not poly.domain.is_QQ and not poly.domain.is_ZZ:
        raise InputParseError(f"{text!r} must have rational coefficients", line_number)
      for mono, coeff in poly.terms():
        terms[tuple(int(e) for e in mono)] = ring.field(coeff)
  except FieldSpecError as exc:
    raise InputParseError(str(exc), line_number)
  return Poly(ring, terms)


def parse_text(text: str, source: str = "<input>", field_override: Field | None = None, default_field: Field = QQ_FIELD) -> InputSpec:
  headers: dict[str, tuple[str, int]] = {}
  equations: list[tuple[str, int]] = []
  for line_number, raw in enumerate(text.splitlines(), start=1):
    line = raw.split("#", 1)[0].strip()
    if not line:
      continue
    match = _HEADER.match(line)
    if match:
      key = match.group(1).lower()
      if equations:
        raise InputParseError(f"`{key}:` must come before the equations", line_number)
      if key in headers:
        raise InputParseError(f"duplicate `{key}:` line", line_number)
      headers[key] = (match.group(2).strip(), line_number)
      continue
    equations.append((line, line_number))

  if "vars" not in headers:
    raise InputParseError("missing `vars:` line", 1)
  variables = _names(*headers["vars"])
  field = default_field
  if "field" in headers:
    value, line_number = headers["field"]
    try:
      field = Field.from_spec(value)
    except FieldSpecError as exc:
      raise InputParseError(str(exc), line_number)
  if field_override is not None:
    field = field_override
  parameters: tuple[str, ...] = ()
  if "base" in headers:
    parameters = _names(*headers["base"])
    clash = set(parameters) & set(variables)
    if clash:
      raise InputParseError(f"parameter names clash with variables: {', '.join(sorted(clash))}", headers["base"][1])
  order = None
  if "order" in headers:
    value, line_number = headers["order"]
    if not value.isdigit():
      raise InputParseError(f"order must be a nonnegative integer, got {value!r}", line_number)
    order = int(value)
  if not equations:
    raise InputParseError("no equations given", max((n for _, n in headers.values()), default=1))

  ring = PolyRing(variables + parameters, field)
  polys = tuple(parse_polynomial(line, ring, line_number) for line, line_number in equations)
  if not parameters:
    x_ring = PolyRing(variables, field)
    polys = tuple(specialize(p, x_ring) for p in polys)
  spec = InputSpec(source, variables, field, polys, parameters, order)
  try:
    spec.singularity()
  except ValueError as exc:
    raise InputParseError(str(exc))
  return spec


def read_text(path: str) -> str:
  # 文字コードは chardet で判定する
  with open(path, "rb") as handle:
    data = handle.read()
  encoding = chardet.detect(data)["encoding"] or "utf-8"
  try:
    return data.decode(encoding)
  except (LookupError, UnicodeDecodeError):
    return data.decode("utf-8", errors="replace")


def parse_input(path: str, field_override: Field | None = None, default_field: Field = QQ_FIELD) -> InputSpec:
  return parse_text(read_text(path), os.path.basename(path), field_override, default_field)
