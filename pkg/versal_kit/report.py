"""CLI の結果を JSON とテキストに書き出す。値はすべて厳密 (体の元は int か "p/q")。"""
from __future__ import annotations

from dataclasses import dataclass, field
import json
import math
from typing import Any, Sequence

from rich.console import Console
from rich.table import Table

from versal_kit.deformation import FlatnessCertificate
from versal_kit.poly_core import Field, Poly, format_poly
from versal_kit.standard_basis import Vector
from versal_kit.versal import DeformationFamily, KodairaSpencerMatrix

SECTIONS = ("invariants", "family", "ks_matrix", "certificates")


def dimension_json(value: int | float) -> int | str:
  if value == math.inf:
    return "infinite"
  return int(value)


def vector_json(vector: Sequence[Poly]) -> list[str]:
  return [format_poly(p) for p in vector]


def matrix_json(matrix: Sequence[Sequence[Any]], field_: Field) -> list[list[int | str]]:
  return [[field_.to_json(value) for value in row] for row in matrix]


def family_json(family: DeformationFamily) -> dict:
  base = family.base
  return {
    "parameters": list(family.parameters),
    "members": family.render_members(),
    "base_relations": [format_poly(p) for p in base.relations] if base is not None else [],
  }


def ks_json(ks: KodairaSpencerMatrix, field_: Field) -> dict:
  return {
    "shape": list(ks.shape),
    "rows": [vector_json(v) for v in ks.row_basis],
    "columns": list(ks.parameters),
    "matrix": matrix_json(ks.matrix, field_),
  }


def flatness_json(certificate: FlatnessCertificate) -> dict:
  data = {
    "flat": certificate.flat,
    "method": certificate.method,
    "relations_checked": certificate.relations_checked,
  }
  if certificate.offending_syzygy is not None:
    data["offending_syzygy"] = vector_json(certificate.offending_syzygy)
  return data


def basis_json(basis: Sequence[Vector]) -> list[list[str]]:
  return [vector_json(v) for v in basis]


@dataclass
class Report:
  command: str
  input: dict
  defaults: dict
  invariants: dict = field(default_factory=dict)
  family: dict | None = None
  ks_matrix: dict | None = None
  certificates: dict = field(default_factory=dict)
  timings: dict = field(default_factory=dict)

  def to_dict(self) -> dict:
    return {
      "command": self.command,
      "input": self.input,
      "defaults": self.defaults,
      "invariants": self.invariants,
      "family": self.family,
      "ks_matrix": self.ks_matrix,
      "certificates": self.certificates,
      "timings": self.timings,
    }

  def to_json(self) -> str:
    return json.dumps(self.to_dict(), ensure_ascii=False, indent=2) + "\n"

  def write_json(self, path: str):
    with open(path, "w", encoding="utf-8") as handle:
      handle.write(self.to_json())


def _cell(value: Any) -> str:
  if isinstance(value, str):
    return value
  return json.dumps(value, ensure_ascii=False)


def _rows(prefix: str, value: Any) -> list[tuple[str, str]]:
  # 辞書は "a.b" のキーに平らにする
  if isinstance(value, dict) and value:
    rows = []
    for key, item in value.items():
      rows += _rows(f"{prefix}.{key}" if prefix else str(key), item)
    return rows
  return [(prefix, _cell(value))]


def render_text(report: Report, console: Console):
  console.print(f"[bold]versal-kit {report.command}[/bold]  {report.input.get('file', '')}")
  for name in ("input", "defaults") + SECTIONS + ("timings",):
    value = getattr(report, name)
    if value is None or value == {}:
      continue
    table = Table(title=name, show_header=False, title_justify="left")
    table.add_column("key", style="cyan")
    table.add_column("value")
    for key, cell in _rows("", value):
      table.add_row(key, cell)
    console.print(table)
