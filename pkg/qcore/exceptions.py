# ---------- Errori del laboratorio ----------


class ArrowLabError(Exception):
    """Radice di tutti gli errori sollevati dai pacchetti del laboratorio."""


class InvalidStateError(ArrowLabError, ValueError):
    """Matrice che viola un invariante (hermitianità, traccia, positività, unitarietà)."""


class DimensionMismatchError(ArrowLabError, ValueError):
    pass


class SupportError(ArrowLabError, ValueError):
    """Supporto di rho non contenuto in quello di sigma: entropia relativa infinita."""


class PreconditionError(ArrowLabError, ValueError):
    """Operazione chiamata fuori dal suo dominio (es. stato prodotto all'ottimizzatore)."""


class UndefinedTemperatureError(ArrowLabError, ArithmeticError):
    """Temperatura effettiva non definita: variazione di entropia nulla."""


class JointDimensionError(ArrowLabError, ValueError):
    """Stato congiunto sistema + ancille oltre il limite configurato."""


class ConfigError(ArrowLabError, ValueError):
    """Configurazione non valida; `key` nomina il parametro colpevole."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")
