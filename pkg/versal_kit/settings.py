from dataclasses import dataclass
import os
from dotenv import load_dotenv

from versal_kit.errors import SettingsError

DEFAULT_FIELD = "Q"
DEFAULT_ORDER = 3
DEFAULT_SEED = 0
DEFAULT_LOG_LEVEL = "WARNING"
DEFAULT_ORACLE_DEGREE = 10


@dataclass(frozen=True)
class Settings:
  field: str
  order: int
  seed: int
  log_level: str
  oracle_degree: int


def _int_env(name: str, default: int) -> int:
  value = os.getenv(name)
  if value is None or value.strip() == "":
    return default
  try:
    return int(value)
  except ValueError:
    raise SettingsError(f"environment variable {name} must be an integer, got {value!r}")


# 環境変数の読み込み (config/.env があればそちらも読む)
def load_settings(env_path: str = "./config/.env") -> Settings:
  load_dotenv(env_path)
  return Settings(
    field=os.getenv("VERSAL_KIT_FIELD") or DEFAULT_FIELD,
    order=_int_env("VERSAL_KIT_ORDER", DEFAULT_ORDER),
    seed=_int_env("VERSAL_KIT_SEED", DEFAULT_SEED),
    log_level=(os.getenv("VERSAL_KIT_LOG_LEVEL") or DEFAULT_LOG_LEVEL).upper(),
    oracle_degree=_int_env("VERSAL_KIT_ORACLE_DEGREE", DEFAULT_ORACLE_DEGREE),
  )
