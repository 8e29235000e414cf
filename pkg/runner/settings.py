import sys
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(BASE_DIR))

import yaml

CONFIG_PATH = BASE_DIR / "config.yaml"

DEFAULTS = {
    "app_env": "dev",
    "log_path": "logs/app.log",
    "log_max_size_mb": 10,
    "log_cleanup_mb": 5,
    "output_dir": "data/outputs",
    "joint_dim_cap": 4096,
}


def load_settings(path: Path = CONFIG_PATH) -> dict:
    """Impostazioni applicative da config.yaml; i valori mancanti prendono i default."""
    settings = dict(DEFAULTS)
    if path.exists():
        with open(path, "r") as f:
            loaded = yaml.safe_load(f) or {}
        settings.update(loaded)
    return settings


# Carica config
SETTINGS = load_settings()

VERSION = "1.0.0"
