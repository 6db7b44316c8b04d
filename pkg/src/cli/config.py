from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Dict, Optional

from src.utils.constants import DEFAULT_FORMAT, DEFAULT_GEN, DEFAULT_ORDER, DEFAULT_PREC
from src.utils.exceptions import ConfigError

FORMATS = ("text", "json", "csv")
FILE_KEYS = {"prec": int, "order": int, "gen": int, "format": str}


def read_config_file(path) -> Dict[str, object]:
    """key=value lines; blank lines and lines starting with # are skipped."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file {path} does not exist")
    values = {}
    for number, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected key=value, got '{line}'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in FILE_KEYS:
            raise ConfigError(f"{path}:{number}: unknown key '{key}'")
        try:
            values[key] = FILE_KEYS[key](raw)
        except ValueError as e:
            raise ConfigError(f"{path}:{number}: bad value for {key}: {e}")
    return values


@dataclass
class RunConfig:
    prec: int = DEFAULT_PREC
    order: int = DEFAULT_ORDER
    gen: int = DEFAULT_GEN
    format: str = DEFAULT_FORMAT
    deterministic: bool = False
    out: Optional[str] = None
    params: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ConfigError(f"Output format must be one of {FORMATS}, got '{self.format}'")
        if self.prec < 16:
            raise ConfigError(f"Precision must be at least 16 bits, got {self.prec}")
        if self.order < 1 or self.gen < 1:
            raise ConfigError("Order and generation depth must be positive")

    @classmethod
    def resolve(cls, flags: Dict[str, object], config_path=None) -> "RunConfig":
        """Flag > config file > environment (through the constants) > default."""
        values = read_config_file(config_path) if config_path else {}
        for key in FILE_KEYS:
            if flags.get(key) is not None:
                values[key] = flags[key]
        known = {f.name for f in fields(cls)}
        extra = {k: v for k, v in flags.items() if k not in known and k != "config"}
        return cls(deterministic=bool(flags.get("deterministic")), out=flags.get("out"), params=extra, **values)

    def to_dict(self) -> Dict:
        return {
            "prec": self.prec,
            "order": self.order,
            "gen": self.gen,
            "format": self.format,
            "params": {k: str(v) for k, v in sorted(self.params.items()) if v is not None},
        }
