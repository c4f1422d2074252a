import logging
from rich.console import Console
from rich.logging import RichHandler

# 診断メッセージは stderr に出す。レポート本体は stdout。
console = Console(stderr=True)

_configured = False


def configure_logging(level: str = "WARNING") -> logging.Logger:
  global _configured
  logger = logging.getLogger("versal_kit")
  if not _configured:
    handler = RichHandler(console=console, show_path=False, rich_tracebacks=False)
    handler.setFormatter(logging.Formatter("%(message)s"))
    logger.addHandler(handler)
    logger.propagate = False
    _configured = True
  logger.setLevel(level)
  return logger


def error_message(message: str) -> None:
  console.print(f"[bold red]❌ {message}[/bold red]")


def info_message(message: str) -> None:
  console.print(f"[green]✔[/green] {message}")
