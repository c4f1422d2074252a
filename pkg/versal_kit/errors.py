# 例外の階層。CLI はこの分類で終了コードを決める。


# 数学的に受け付けられない入力 (終了コード 1)
class MathematicalRejection(ValueError):
  pass


class NonIsolatedError(MathematicalRejection):
  pass


class NotRegularSequenceError(MathematicalRejection):
  def __init__(self, message: str, syzygy=None):
    super().__init__(message)
    self.syzygy = syzygy


class FlatnessError(MathematicalRejection):
  pass


class ObstructionError(MathematicalRejection):
  def __init__(self, message: str, obstruction=None):
    super().__init__(message)
    self.obstruction = obstruction


class VersalityError(MathematicalRejection):
  def __init__(self, message: str, step: int | None = None):
    super().__init__(message)
    self.step = step


# 入力ファイル・引数の誤り (終了コード 2)
class InputError(ValueError):
  pass


class InputParseError(InputError):
  def __init__(self, message: str, line_number: int | None = None):
    if line_number is not None:
      message = f"line {line_number}: {message}"
    super().__init__(message)
    self.line_number = line_number


class FieldSpecError(InputError):
  pass


class SettingsError(InputError):
  pass


# API の前提条件違反
class RingMismatchError(ValueError):
  pass


class EndpointMismatchError(ValueError):
  pass


class ReductionMismatchError(ValueError):
  pass


class BaseMismatchError(ValueError):
  pass


class RestrictionMismatchError(ValueError):
  pass


class InvalidLevelError(ValueError):
  pass


class DegenerateEquationError(ValueError):
  pass


class InfiniteQuotientError(ValueError):
  pass


# 理論上起こりえない失敗
class InternalConsistencyError(RuntimeError):
  pass
