"""Generation options: parsing, dependency classification, matrix enumeration.

Options arrive as ``key=value`` lines (comments start with ``#``).  Ten
options are supported; three of them (regUnrollAHB, regAsync, regBusClock)
drive the bus interface shape directly, the rest steer the kernel, safety,
reset and timing subsystems.  The dependent/independent classification is
data (OPTION_TABLE), so adding an option with a dependency automatically
constrains matrix enumeration.
"""

from __future__ import annotations

import enum
import hashlib
import itertools
from dataclasses import dataclass, field, replace

from .specmodel import RegisterMap


class ResetKind(enum.Enum):
    ASYNC_ACTIVE_LOW = "AsyncActiveLow"
    SYNC_ACTIVE_LOW = "SyncActiveLow"


class ReadbackPath(enum.Enum):
    REGISTERED = "Registered"
    COMBINATIONAL = "Combinational"


class ErrDefault(enum.Enum):
    BUS_ERROR = "BusError"
    IGNORE = "Ignore"


@dataclass(frozen=True)
class GenConfig:
    reg_unroll_ahb: bool = False
    reg_async: bool = False
    reg_bus_clock: tuple[str, ...] = ()
    reg_sff: tuple[str, ...] = ()
    reg_fifo_depth: int = 4
    reg_base_name: str = "regblock"
    reg_ro_write_err: bool = True
    reg_err_default: ErrDefault = ErrDefault.BUS_ERROR
    reg_reset_kind: ResetKind = ResetKind.ASYNC_ACTIVE_LOW
    reg_readback_path: ReadbackPath = ReadbackPath.REGISTERED

    def digest(self) -> str:
        return hashlib.sha256(render_config(self).encode()).hexdigest()[:12]


@dataclass(frozen=True)
class ValidatedConfig:
    """A GenConfig checked against a concrete RegisterMap."""

    cfg: GenConfig
    map_name: str

    def __getattr__(self, name):
        return getattr(self.cfg, name)


class OptionKind(enum.Enum):
    INDEPENDENT = "Independent"
    DEPENDENT = "Dependent"


def _always(value) -> bool:
    return True


def _nonempty(value) -> bool:
    return bool(value)


def _is_combinational(value) -> bool:
    return value is ReadbackPath.COMBINATIONAL


@dataclass(frozen=True)
class OptionDescriptor:
    name: str
    kind: OptionKind
    # (option name, required value); only meaningful for Dependent options.
    depends_on: tuple[str, object] | None = None
    conflicts: tuple[tuple[str, object], ...] = ()
    # Dependent options whose unmet dependency merely makes the value inert
    # (e.g. a FIFO depth with no FIFO) set enforce=False.
    enforce: bool = True
    # Dependencies/conflicts only apply to values that engage the option
    # (a nonempty register list, a non-default enum choice, ...).
    engaged: object = _always


OPTION_TABLE: tuple[OptionDescriptor, ...] = (
    OptionDescriptor("regUnrollAHB", OptionKind.INDEPENDENT),
    OptionDescriptor("regAsync", OptionKind.INDEPENDENT),
    OptionDescriptor("regBusClock", OptionKind.DEPENDENT,
                     depends_on=("regAsync", True), engaged=_nonempty),
    OptionDescriptor("regSff", OptionKind.INDEPENDENT),
    OptionDescriptor("regFifoDepth", OptionKind.DEPENDENT,
                     depends_on=("regAsync", True), enforce=False),
    OptionDescriptor("regBaseName", OptionKind.INDEPENDENT),
    OptionDescriptor("regRoWriteErr", OptionKind.INDEPENDENT),
    OptionDescriptor("regErrDefault", OptionKind.INDEPENDENT),
    OptionDescriptor("regResetKind", OptionKind.INDEPENDENT),
    # Combinational readback cannot safely cross clock domains.
    OptionDescriptor("regReadbackPath", OptionKind.INDEPENDENT,
                     conflicts=(("regAsync", True),), engaged=_is_combinational),
)

# key -> GenConfig attribute
_KEY_TO_FIELD = {
    "regUnrollAHB": "reg_unroll_ahb",
    "regAsync": "reg_async",
    "regBusClock": "reg_bus_clock",
    "regSff": "reg_sff",
    "regFifoDepth": "reg_fifo_depth",
    "regBaseName": "reg_base_name",
    "regRoWriteErr": "reg_ro_write_err",
    "regErrDefault": "reg_err_default",
    "regResetKind": "reg_reset_kind",
    "regReadbackPath": "reg_readback_path",
}
_FIELD_TO_KEY = {v: k for k, v in _KEY_TO_FIELD.items()}


class ConfigParseError(Exception):
    pass


@dataclass(frozen=True)
class ConfigError:
    option: str
    message: str
    descriptor: OptionDescriptor | None = None

    def render(self) -> str:
        return f"{self.option}: {self.message}"


def _parse_bool(key: str, text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ConfigParseError(f"{key}: expected a boolean, got {text!r}")


def _parse_value(key: str, text: str):
    text = text.strip()
    if key in ("regUnrollAHB", "regAsync", "regRoWriteErr"):
        return _parse_bool(key, text)
    if key in ("regBusClock", "regSff"):
        return tuple(part.strip() for part in text.split(",") if part.strip())
    if key == "regFifoDepth":
        try:
            return int(text, 0)
        except ValueError:
            raise ConfigParseError(f"{key}: expected an integer, got {text!r}") from None
    if key == "regBaseName":
        if not text.isidentifier():
            raise ConfigParseError(f"{key}: {text!r} is not a valid identifier")
        return text
    enum_map = {
        "regErrDefault": ErrDefault,
        "regResetKind": ResetKind,
        "regReadbackPath": ReadbackPath,
    }
    enum_cls = enum_map[key]
    for member in enum_cls:
        if member.value == text:
            return member
    allowed = ", ".join(m.value for m in enum_cls)
    raise ConfigParseError(f"{key}: expected one of {allowed}, got {text!r}")


def parse_config(text: str) -> GenConfig:
    """Parse ``key=value`` option lines; unknown or duplicate keys are errors."""
    values: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"line {lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _KEY_TO_FIELD:
            raise ConfigParseError(f"line {lineno}: unknown option {key!r}")
        if key in values:
            raise ConfigParseError(f"line {lineno}: duplicate option {key!r}")
        values[key] = _parse_value(key, value)

    fields = {_KEY_TO_FIELD[k]: v for k, v in values.items()}
    return GenConfig(**fields)


def render_config(cfg: GenConfig) -> str:
    """Inverse of parse_config (identity round-trip, canonical key order)."""
    lines = []
    for key, attr in _KEY_TO_FIELD.items():
        value = getattr(cfg, attr)
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, tuple):
            text = ",".join(value)
        elif isinstance(value, enum.Enum):
            text = value.value
        else:
            text = str(value)
        lines.append(f"{key}={text}")
    return "\n".join(lines) + "\n"


def _option_value(cfg: GenConfig, option: str):
    return getattr(cfg, _KEY_TO_FIELD[option])


_ALLOWED_FIFO_DEPTHS = (2, 4, 8)


def classify_and_validate(
    cfg: GenConfig, m: RegisterMap,
    table: tuple[OptionDescriptor, ...] = OPTION_TABLE,
) -> ValidatedConfig | list[ConfigError]:
    """Check option dependencies/conflicts and register-name references.

    Returns the config tagged valid, or every violated rule with the
    descriptor that defines it.
    """
    errors: list[ConfigError] = []

    for desc in table:
        if desc.name not in _KEY_TO_FIELD:
            # Synthetic descriptors (tests) may target absent options.
            continue
        value = _option_value(cfg, desc.name)
        if not desc.engaged(value):
            continue
        if desc.depends_on and desc.enforce:
            dep_name, dep_value = desc.depends_on
            if _option_value(cfg, dep_name) != dep_value:
                errors.append(ConfigError(
                    desc.name,
                    f"requires {dep_name}={dep_value} (got {_option_value(cfg, dep_name)})",
                    desc))
        for other, other_value in desc.conflicts:
            if _option_value(cfg, other) == other_value:
                errors.append(ConfigError(
                    desc.name,
                    f"conflicts with {other}={other_value}",
                    desc))

    known = set(m.register_names())
    for attr, label in (("reg_bus_clock", "regBusClock"), ("reg_sff", "regSff")):
        for reg_name in getattr(cfg, attr):
            if reg_name not in known:
                errors.append(ConfigError(label, f"unknown register {reg_name!r}"))

    if not 2 <= cfg.reg_fifo_depth <= 8:
        errors.append(ConfigError("regFifoDepth",
                                  f"depth must lie in 2..8, got {cfg.reg_fifo_depth}"))
    elif cfg.reg_fifo_depth not in _ALLOWED_FIFO_DEPTHS:
        errors.append(ConfigError(
            "regFifoDepth",
            f"depth must be a power of two ({_ALLOWED_FIFO_DEPTHS}), got {cfg.reg_fifo_depth}"))

    if errors:
        return errors
    return ValidatedConfig(cfg, m.name)


@dataclass(frozen=True)
class ConfigMatrix:
    axes: dict[str, tuple]
    generated: tuple[GenConfig, ...]
    rejected: int = 0


def enumerate_matrix(
    axes: dict[str, list], m: RegisterMap,
    table: tuple[OptionDescriptor, ...] = OPTION_TABLE,
) -> ConfigMatrix:
    """Cartesian product over option axes, filtered by classify_and_validate.

    Enumeration order is deterministic: axes sorted by option name, values
    kept in the given order.
    """
    for key in axes:
        if key not in _KEY_TO_FIELD:
            raise ConfigParseError(f"unknown option in axes: {key!r}")

    names = sorted(axes)
    generated: list[GenConfig] = []
    rejected = 0
    seen: set[GenConfig] = set()
    for combo in itertools.product(*(axes[name] for name in names)):
        fields = {_KEY_TO_FIELD[name]: value for name, value in zip(names, combo)}
        cfg = replace(GenConfig(), **fields)
        if cfg in seen:
            continue
        seen.add(cfg)
        result = classify_and_validate(cfg, m, table)
        if isinstance(result, ValidatedConfig):
            generated.append(cfg)
        else:
            rejected += 1
    axes_t = {name: tuple(axes[name]) for name in names}
    return ConfigMatrix(axes_t, tuple(generated), rejected)


def parse_matrix_file(text: str) -> dict[str, list]:
    """Matrix file format: config keys with comma-separated value lists."""
    axes: dict[str, list] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"line {lineno}: expected key=value1,value2,...")
        key, _, values = line.partition("=")
        key = key.strip()
        if key not in _KEY_TO_FIELD:
            raise ConfigParseError(f"line {lineno}: unknown option {key!r}")
        if key in axes:
            raise ConfigParseError(f"line {lineno}: duplicate option {key!r}")
        if key in ("regBusClock", "regSff"):
            # List-valued options separate alternatives with ';' so ',' can
            # stay inside one list, e.g. "regBusClock=;CTRL,STATUS".
            axes[key] = [_parse_value(key, alt) for alt in values.split(";")]
        else:
            axes[key] = [_parse_value(key, alt) for alt in values.split(",")]
    return axes
