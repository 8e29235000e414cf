import logging
from contextlib import contextmanager
from pathlib import Path

from runner.settings import BASE_DIR, SETTINGS

LOG_PATH = BASE_DIR / SETTINGS["log_path"]
LOG_PATH.parent.mkdir(parents=True, exist_ok=True)

LOG_MAX_BYTES = SETTINGS["log_max_size_mb"] * 1024 * 1024
LOG_CLEANUP_BYTES = SETTINGS["log_cleanup_mb"] * 1024 * 1024

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"

# pacchetti del laboratorio: i logger di modulo propagano fino a questi
LAB_PACKAGES = ("qcore", "arrowlab", "collision", "fluctuation", "runner")


def rotate_log_if_needed(path: Path = LOG_PATH, max_bytes: int = LOG_MAX_BYTES, cleanup_bytes: int = LOG_CLEANUP_BYTES):
    """Rotazione FIFO: oltre max_bytes scarta dalla testa almeno cleanup_bytes, a righe intere."""
    if not path.exists() or path.stat().st_size < max_bytes:
        return
    data = path.read_bytes()
    cut = data.find(b"\n", max(cleanup_bytes - 1, 0))
    path.write_bytes(b"" if cut < 0 else data[cut + 1:])


def get_logger(name: str) -> logging.Logger:
    rotate_log_if_needed()

    logger = logging.getLogger(name)
    if logger.handlers:
        return logger

    level = logging.DEBUG if SETTINGS.get("app_env", "dev") == "dev" else logging.INFO
    logger.setLevel(level)

    fmt = logging.Formatter(LOG_FORMAT)

    # File handler
    fh = logging.FileHandler(str(LOG_PATH), encoding="utf-8")
    fh.setFormatter(fmt)
    logger.addHandler(fh)

    # Console handler
    ch = logging.StreamHandler()
    ch.setFormatter(fmt)
    ch.setLevel(logging.INFO)
    logger.addHandler(ch)

    return logger


def run_log_path(result_path) -> Path:
    """<risultato>.log accanto al file dei risultati."""
    path = Path(result_path)
    return path.with_name(path.name + ".log")


@contextmanager
def run_log(result_path):
    """Copia i messaggi INFO+ di un singolo esperimento in <risultato>.log."""
    path = run_log_path(result_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handler = logging.FileHandler(str(path), mode="w", encoding="utf-8")
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    handler.setLevel(logging.INFO)
    packages = [logging.getLogger(name) for name in LAB_PACKAGES]
    for package in packages:
        package.addHandler(handler)
    try:
        yield path
    finally:
        for package in packages:
            package.removeHandler(handler)
        handler.close()
