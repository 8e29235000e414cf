import sys
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(BASE_DIR))

import argparse
import time

from qcore.exceptions import ArrowLabError, ConfigError
from qcore.sampling import RNG_ALGORITHM
from runner.config import build_config, parse_config_text
from runner.experiments import EXPERIMENTS
from runner.log_manager import get_logger, run_log
from runner.models import ResultRecord
from runner.output import write_result
from runner.settings import SETTINGS, VERSION

logger = get_logger("runner.main")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2

DESCRIPTIONS = {
    "balance": "bilancio entropico su prodotti casuali e unitari di Haar",
    "near-product": "stato vicino al prodotto e unitario che lo decorrela",
    "decorrelate": "demo classica con correlazione perfetta",
    "search": "ricerca numerica di unitari che abbassano l'entropia locale",
    "schrodinger": "censimento delle frecce relative di S e R",
    "sweep": "mappa di fase in accoppiamento debole",
    "collide": "traiettorie del collision model e inversione",
    "crooks": "relazione di Crooks sul protocollo a due misure",
    "jarzynski": "uguaglianza di Jarzynski",
    "symmetry": "simmetria delle probabilità condizionate di misura",
    "heatflow": "temperature effettive e verso del calore",
    "damping": "calore dissipato verso lo stato di Gibbs finale",
}

COMMON = {"seed", "trials", "workers", "format", "out", "beta", "dims"}

# flag -> (tipo, nargs, sottocomandi che lo accettano)
EXPERIMENT_FLAGS = {
    "epsilon": (float, None, {"near-product", "search", "schrodinger"}),
    "epsilons": (float, "+", {"near-product"}),
    "theta": (float, None, {"collide"}),
    "collisions": (int, None, {"collide"}),
    "restarts": (int, None, {"search"}),
    "max_iterations": (int, None, {"search"}),
    "tolerance": (float, None, {"search"}),
    "step": (float, None, {"search"}),
    "states": (str, None, {"search"}),
    "delta": (float, "+", {"search"}),
    "couplings": (float, "+", {"sweep"}),
    "sweep_epsilons": (float, "+", {"sweep"}),
    "times": (float, "+", {"sweep"}),
    "interaction": (str, None, {"sweep"}),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError("argomenti", message)


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="arrowlab", description="Laboratorio numerico sulla freccia del tempo termodinamica")
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    sub = parser.add_subparsers(dest="experiment", required=True, parser_class=_Parser)

    for name, description in DESCRIPTIONS.items():
        p = sub.add_parser(name, help=description, description=description)
        p.add_argument("--config", default=None, help="file YAML chiave: valore con le impostazioni dell'esperimento")
        p.add_argument("--seed", type=int, default=None, help="seme (u64), default 0")
        p.add_argument("--trials", type=int, default=None, help="numero di trial, default 100")
        p.add_argument("--workers", type=int, default=None, help="thread di lavoro, default 1")
        p.add_argument("--format", choices=["csv", "json"], default=None, help="default csv")
        p.add_argument("--out", default=None, help=f"default {SETTINGS['output_dir']}/<esperimento>.<formato>")
        p.add_argument("--beta", type=float, default=None, help="temperatura inversa, default 1.0")
        p.add_argument("--dims", default=None, help="dimensioni dS x dR, default 2x2")
        for key, (kind, nargs, commands) in EXPERIMENT_FLAGS.items():
            if name in commands:
                p.add_argument(_flag(key), dest=key, type=kind, nargs=nargs, default=None)
    return parser


def resolve_config(args: argparse.Namespace):
    """Default < file --config < flag espliciti."""
    values = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError("config", f"file non trovato: {path}")
        values.update(parse_config_text(path.read_text(encoding="utf-8")))
    for key in COMMON | set(EXPERIMENT_FLAGS):
        value = getattr(args, key, None)
        if value is not None:
            values[key] = value
    values["experiment"] = args.experiment
    return build_config(values)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = resolve_config(args)
    except ConfigError as e:
        logger.error(f"Configurazione non valida: {e}")
        return EXIT_USAGE
    except SystemExit as e:
        # --help / --version
        return int(e.code or 0)

    out = config.out or str(BASE_DIR / SETTINGS["output_dir"] / f"{config.experiment}.{config.format}")
    with run_log(out):
        return _run(config, out)


def _run(config, out: str) -> int:
    logger.info(f"Avvio {config.experiment} (seed={config.seed}, trials={config.trials}, workers={config.workers})")
    started = time.perf_counter()
    try:
        outcome = EXPERIMENTS[config.experiment](config)
    except ArrowLabError as e:
        logger.error(f"{config.experiment} interrotto: {e}")
        return EXIT_USAGE
    duration = time.perf_counter() - started

    record = ResultRecord(
        experiment=config.experiment,
        config=config.model_dump(),
        seed=config.seed,
        rows=outcome.rows,
        summary=outcome.summary,
        failures=outcome.failures,
        tolerances=config.tolerances.model_dump(),
        library_version=VERSION,
        rng_algorithm=RNG_ALGORITHM,
        duration_sec=duration,
    )
    write_result(record, out, config.format)

    if not record.passed:
        for failure in record.failures:
            logger.warning(f"Invariante violato: {failure}")
        logger.error(f"{config.experiment}: {len(record.failures)} violazioni in {duration:.2f}s")
        return EXIT_FAILED
    logger.info(f"{config.experiment} completato in {duration:.2f}s")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
