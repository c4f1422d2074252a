import argparse
from dataclasses import dataclass
import sys
import time

from rich.console import Console
from rich.progress import track

from versal_kit.console import configure_logging, error_message, info_message
from versal_kit.deformation import check_flatness_filtered
from versal_kit.errors import (
  BaseMismatchError,
  DegenerateEquationError,
  EndpointMismatchError,
  InfiniteQuotientError,
  InputError,
  InternalConsistencyError,
  InvalidLevelError,
  MathematicalRejection,
  ReductionMismatchError,
  RestrictionMismatchError,
  RingMismatchError,
)
from versal_kit.module_ext import PresentedModule, ext_dimension
from versal_kit.parse import InputSpec, parse_input
from versal_kit.poly_core import Field, format_poly
from versal_kit.report import (
  Report,
  basis_json,
  dimension_json,
  family_json,
  flatness_json,
  ks_json,
  matrix_json,
  render_text,
  vector_json,
)
from versal_kit.settings import Settings, load_settings
from versal_kit.singularity import (
  certify_isolated,
  certify_regular_sequence,
  milnor_algebra,
  tangent_dimension_oracle,
  tangent_module,
  tjurina_algebra,
)
from versal_kit.versal import (
  first_obstruction,
  kodaira_spencer,
  lift_to_next_order,
  miniversal,
  render_member,
  verify_versality_order,
)

COMMANDS = ("invariants", "miniversal", "ks", "lift", "verify", "ext")
ORDERING = "negdegrevlex"
CONTRACT_ERRORS = (
  RingMismatchError,
  EndpointMismatchError,
  ReductionMismatchError,
  BaseMismatchError,
  RestrictionMismatchError,
  InvalidLevelError,
  DegenerateEquationError,
  InfiniteQuotientError,
)


@dataclass(frozen=True)
class JobSpec:
  command: str
  input_path: str
  field: Field
  field_given: bool
  order: int
  oracle_degree: int
  json_path: str | None = None


def build_parser() -> argparse.ArgumentParser:
  parser = argparse.ArgumentParser(prog="versal-kit", description="Deformation invariants of isolated complete intersections.")
  parser.add_argument("command", choices=COMMANDS)
  parser.add_argument("input", help="input file (vars:, field:, optional base:/order:, one equation per line)")
  parser.add_argument("--field", help="Q or Fp:<prime> (overrides the input file)")
  parser.add_argument("--order", type=int, help="lift / versality-check order")
  parser.add_argument("--json", dest="json_path", help="write the structured report to this path")
  return parser


def make_job(args: argparse.Namespace, settings: Settings) -> JobSpec:
  # CLI の引数 > 環境変数 > 既定値
  field = Field.from_spec(args.field or settings.field)
  order = args.order if args.order is not None else settings.order
  if order < 1:
    raise InputError(f"order must be at least 1, got {order}")
  return JobSpec(args.command, args.input, field, args.field is not None, order, settings.oracle_degree, args.json_path)


def _input_echo(spec: InputSpec) -> dict:
  echo = {"file": spec.source, "vars": list(spec.variables), "field": spec.field.spec}
  if spec.is_family:
    s = spec.singularity()
    echo["base"] = list(spec.parameters)
    echo["order"] = spec.order
    echo["equations"] = [render_member(g, s.ring, spec.parameters) for g in spec.equations]
  else:
    echo["equations"] = [format_poly(p) for p in spec.equations]
  return echo


def _defaults(job: JobSpec, spec: InputSpec) -> dict:
  return {"field": spec.field.spec, "ordering": ORDERING, "order": job.order, "oracle_degree": job.oracle_degree}


def run_invariants(job: JobSpec, spec: InputSpec, report: Report):
  s = spec.singularity()
  regular = certify_regular_sequence(s)
  t1 = tangent_module(s, 1)
  t0 = tangent_module(s, 0)
  t2 = tangent_module(s, 2)
  oracle = tangent_dimension_oracle(s, job.oracle_degree)
  report.invariants = {
    "codimension": s.codimension,
    "hypersurface": s.is_hypersurface,
    "tjurina": t1.dimension,
    "milnor": milnor_algebra(s)[1] if s.is_hypersurface else None,
    "t0": {"dimension": dimension_json(t0.dimension)},
    "t1": {"dimension": t1.dimension, "basis": basis_json(t1.basis)},
    "t2": {"dimension": t2.dimension},
  }
  report.certificates = {
    "regular_sequence": {"regular": regular.regular, "syzygies_checked": regular.syzygies_checked},
    "isolated": certify_isolated(s),
    "oracle": {"degree": job.oracle_degree, "t1_dimension": oracle, "agrees": oracle == t1.dimension},
    "first_obstruction_zero": first_obstruction(s).is_zero(),
  }
  if s.is_hypersurface:
    report.certificates["tjurina_algebra_dimension"] = tjurina_algebra(s)[1]


def run_miniversal(job: JobSpec, spec: InputSpec, report: Report):
  s = spec.singularity()
  versal = miniversal(s)
  report.invariants = {"tau": versal.tau, "parameters": list(versal.family.parameters), "basis": basis_json(versal.basis)}
  report.family = family_json(versal.family)
  report.ks_matrix = ks_json(versal.ks, s.ring.field)
  report.certificates = {
    "ks_identity": versal.ks.is_identity(),
    "flatness": [flatness_json(c) for c in check_flatness_filtered(versal.family.lifting(1))],
  }


def run_ks(job: JobSpec, spec: InputSpec, report: Report):
  family = spec.family(default_order=1)
  ks = kodaira_spencer(family)
  rows, cols = ks.shape
  report.family = family_json(family)
  report.ks_matrix = ks_json(ks, spec.field)
  report.invariants = {"tau": rows, "parameter_count": cols}


def run_lift(job: JobSpec, spec: InputSpec, report: Report):
  s = spec.singularity()
  versal = miniversal(s)
  current = versal.family
  orders = []
  # 次数ごとに持ち上げる
  for order in track(range(1, job.order + 1), description="lifting...", console=Console(stderr=True), transient=True):
    result = lift_to_next_order(current, order)
    current = result.family
    orders.append({
      "order": order,
      "corrected": result.corrected,
      "flatness": [flatness_json(c) for c in result.certificates],
    })
  report.invariants = {"tau": versal.tau, "order": job.order}
  report.family = family_json(current)
  report.certificates = {"orders": orders}


def run_verify(job: JobSpec, spec: InputSpec, report: Report):
  s = spec.singularity()
  trial = spec.family(default_order=job.order)
  result = verify_versality_order(s, job.order, trial)
  field_ = spec.field
  report.family = family_json(trial)
  report.invariants = {
    "order": result.order,
    "substitution": {name: format_poly(value) for name, value in result.substitution.items()},
  }
  report.certificates = {
    "steps": [
      {
        "order": step.order,
        "class": matrix_json(step.class_before, field_),
        "vanishes": step.class_vanishes,
        "coordinate_change": [vector_json(row) for row in step.coordinate_change],
        "unit": format_poly(step.unit),
      }
      for step in result.steps
    ],
  }


def run_ext(job: JobSpec, spec: InputSpec, report: Report):
  s = spec.singularity()
  module = PresentedModule.cyclic(s.ring, s.equations)
  report.invariants = {"ext": {str(i): dimension_json(ext_dimension(module, module, i)) for i in range(3)}}


RUNNERS = {
  "invariants": run_invariants,
  "miniversal": run_miniversal,
  "ks": run_ks,
  "lift": run_lift,
  "verify": run_verify,
  "ext": run_ext,
}


def run(argv: list[str] | None = None, out: Console | None = None) -> int:
  """終了コード: 0 成功 / 1 数学的に却下 / 2 入力・IO エラー。"""
  args = build_parser().parse_args(argv)
  out = out or Console()
  started = time.perf_counter()
  try:
    settings = load_settings()
    configure_logging(settings.log_level)
    job = make_job(args, settings)
    spec = parse_input(job.input_path, job.field if job.field_given else None, job.field)
    report = Report(job.command, _input_echo(spec), _defaults(job, spec))
    RUNNERS[job.command](job, spec, report)
  except MathematicalRejection as exc:
    error_message(str(exc))
    return 1
  except InternalConsistencyError as exc:
    error_message(f"internal consistency check failed: {exc}")
    return 1
  except (InputError, OSError) as exc:
    error_message(str(exc))
    return 2
  except CONTRACT_ERRORS as exc:
    # 入力どうしが食い違うと API の前提条件違反になる
    error_message(str(exc))
    return 2
  report.timings = {"total_seconds": round(time.perf_counter() - started, 6)}
  render_text(report, out)
  if job.json_path:
    try:
      report.write_json(job.json_path)
    except OSError as exc:
      error_message(f"cannot write {job.json_path}: {exc}")
      return 2
    info_message(f"wrote {job.json_path}")
  return 0


def main():
  sys.exit(run())


if __name__ == "__main__":
  main()
