"""Register map model: XML parsing, validation and address decode.

The register map is the single source of truth for both design elaboration
and property generation.  It is a three-level tree: a root node with bus
geometry, registers with byte offsets, and bitfields with access policies.

XML schema (attribute defaults in brackets):

    <regmap name data_width addr_width base>
      <register name offset [err_type=BusError]>
        <bitfield name lsb size [reset=0] sw [hw=None] [protect=""]/>
      </register>
    </regmap>

``sw`` is one of RO/RW/W1C/RC, ``hw`` one of None/Read/ReadWrite and
``protect`` a space-separated list of protection signal names.
"""

from __future__ import annotations

import enum
import hashlib
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field


class SwAccess(enum.Enum):
    RO = "RO"
    RW = "RW"
    W1C = "W1C"
    RC = "RC"


class HwAccess(enum.Enum):
    NONE = "None"
    READ = "Read"
    READ_WRITE = "ReadWrite"


class ErrType(enum.Enum):
    BUS_ERROR = "BusError"
    IGNORE = "Ignore"


class ViolationKind(enum.Enum):
    OVERLAP = "Overlap"
    MISALIGNED = "Misaligned"
    OUT_OF_RANGE = "OutOfRange"
    DUPLICATE_NAME = "DuplicateName"
    BAD_RESET_VALUE = "BadResetValue"
    MEANINGLESS_PROTECTION = "MeaninglessProtection"


@dataclass(frozen=True)
class SpecViolation:
    kind: ViolationKind
    location: str  # dotted element path, e.g. regmap.CTRL.EN
    message: str

    def render(self) -> str:
        return f"{self.location}: {self.kind.value}: {self.message}"


class RegmapParseError(Exception):
    """Raised for malformed XML (not schema violations)."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)


@dataclass(frozen=True)
class BitfieldSpec:
    name: str
    lsb: int
    size: int
    reset_value: int
    sw_access: SwAccess
    hw_access: HwAccess = HwAccess.NONE
    protections: tuple[str, ...] = ()

    @property
    def msb(self) -> int:
        return self.lsb + self.size - 1

    @property
    def mask(self) -> int:
        return ((1 << self.size) - 1) << self.lsb

    def sw_writable(self) -> bool:
        """True when a software write can change the field (RW or W1C)."""
        return self.sw_access in (SwAccess.RW, SwAccess.W1C)


@dataclass(frozen=True)
class RegisterSpec:
    name: str
    offset: int
    bitfields: tuple[BitfieldSpec, ...]
    err_type: ErrType = ErrType.BUS_ERROR

    def bitfield(self, name: str) -> BitfieldSpec:
        for bf in self.bitfields:
            if bf.name == name:
                return bf
        raise KeyError(name)

    def sw_writable(self) -> bool:
        return any(bf.sw_writable() for bf in self.bitfields)

    def reset_word(self) -> int:
        word = 0
        for bf in self.bitfields:
            word |= bf.reset_value << bf.lsb
        return word


@dataclass(frozen=True)
class RegisterMap:
    name: str
    data_width: int
    addr_width: int
    base_address: int
    registers: tuple[RegisterSpec, ...]

    @property
    def bytes_per_word(self) -> int:
        return self.data_width // 8

    def register(self, name: str) -> RegisterSpec:
        for reg in self.registers:
            if reg.name == name:
                return reg
        raise KeyError(name)

    def register_names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.registers)

    def word_index(self, reg: RegisterSpec) -> int:
        return reg.offset // self.bytes_per_word

    def digest(self) -> str:
        """Stable content hash used in generated file headers."""
        return hashlib.sha256(serialize_register_map(self).encode()).hexdigest()[:12]


@dataclass(frozen=True)
class DecodeTable:
    """Word index -> register name, as seen after address slicing."""

    entries: dict[int, str] = field(default_factory=dict)

    def index_of(self, reg_name: str) -> int:
        for idx, name in self.entries.items():
            if name == reg_name:
                return idx
        raise KeyError(reg_name)

    def mapped_indices(self) -> tuple[int, ...]:
        return tuple(sorted(self.entries))


_INT_PREFIXES = ("0x", "0X", "0b", "0B", "0o", "0O")


def _parse_int(text: str) -> int:
    text = text.strip()
    return int(text, 0) if text.startswith(_INT_PREFIXES) else int(text)


def _enum_value(enum_cls, text: str):
    for member in enum_cls:
        if member.value == text:
            return member
    allowed = ", ".join(m.value for m in enum_cls)
    raise ValueError(f"expected one of {allowed}, got {text!r}")


def parse_register_map(xml_text: str) -> RegisterMap | list[SpecViolation]:
    """Parse XML into a RegisterMap, or return every schema violation found.

    Malformed XML raises :class:`RegmapParseError`; schema/invariant
    violations are collected exhaustively and returned as a list.
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        line, column = exc.position if exc.position else (None, None)
        raise RegmapParseError(str(exc.msg if hasattr(exc, "msg") else exc), line, column) from exc

    violations: list[SpecViolation] = []

    def bad(kind: ViolationKind, location: str, message: str) -> None:
        violations.append(SpecViolation(kind, location, message))

    if root.tag != "regmap":
        raise RegmapParseError(f"root element must be <regmap>, got <{root.tag}>")

    map_loc = "regmap"
    name = root.get("name", "")
    if not name:
        bad(ViolationKind.DUPLICATE_NAME, map_loc, "regmap requires a name attribute")
        name = "unnamed"

    try:
        data_width = _parse_int(root.get("data_width", "32"))
    except ValueError:
        bad(ViolationKind.OUT_OF_RANGE, map_loc, "data_width is not an integer")
        data_width = 32
    if data_width not in (8, 16, 32):
        bad(ViolationKind.OUT_OF_RANGE, map_loc, f"data_width must be 8, 16 or 32, got {data_width}")
        data_width = 32

    try:
        addr_width = _parse_int(root.get("addr_width", "8"))
    except ValueError:
        bad(ViolationKind.OUT_OF_RANGE, map_loc, "addr_width is not an integer")
        addr_width = 8
    if not 4 <= addr_width <= 16:
        bad(ViolationKind.OUT_OF_RANGE, map_loc, f"addr_width must lie in 4..16, got {addr_width}")
        addr_width = max(4, min(16, addr_width))

    try:
        base_address = _parse_int(root.get("base", "0"))
    except ValueError:
        bad(ViolationKind.OUT_OF_RANGE, map_loc, "base is not an integer")
        base_address = 0

    registers: list[RegisterSpec] = []
    for reg_el in root:
        if reg_el.tag != "register":
            bad(ViolationKind.OUT_OF_RANGE, map_loc, f"unexpected element <{reg_el.tag}> under regmap")
            continue
        reg_name = reg_el.get("name", "")
        reg_loc = f"regmap.{reg_name or '?'}"
        if not reg_name:
            bad(ViolationKind.DUPLICATE_NAME, reg_loc, "register requires a name attribute")
            continue
        try:
            offset = _parse_int(reg_el.get("offset", ""))
        except ValueError:
            bad(ViolationKind.OUT_OF_RANGE, reg_loc, "register offset missing or not an integer")
            offset = 0
        try:
            err_type = _enum_value(ErrType, reg_el.get("err_type", ErrType.BUS_ERROR.value))
        except ValueError as exc:
            bad(ViolationKind.OUT_OF_RANGE, reg_loc, f"err_type: {exc}")
            err_type = ErrType.BUS_ERROR

        bitfields: list[BitfieldSpec] = []
        for bf_el in reg_el:
            if bf_el.tag != "bitfield":
                bad(ViolationKind.OUT_OF_RANGE, reg_loc, f"unexpected element <{bf_el.tag}> under register")
                continue
            bf_name = bf_el.get("name", "")
            bf_loc = f"{reg_loc}.{bf_name or '?'}"
            if not bf_name:
                bad(ViolationKind.DUPLICATE_NAME, bf_loc, "bitfield requires a name attribute")
                continue
            try:
                lsb = _parse_int(bf_el.get("lsb", ""))
                size = _parse_int(bf_el.get("size", ""))
            except ValueError:
                bad(ViolationKind.OUT_OF_RANGE, bf_loc, "lsb/size missing or not integers")
                continue
            try:
                reset_value = _parse_int(bf_el.get("reset", "0"))
            except ValueError:
                bad(ViolationKind.BAD_RESET_VALUE, bf_loc, "reset is not an integer")
                reset_value = 0
            try:
                sw = _enum_value(SwAccess, bf_el.get("sw", ""))
            except ValueError as exc:
                bad(ViolationKind.OUT_OF_RANGE, bf_loc, f"sw: {exc}")
                continue
            try:
                hw = _enum_value(HwAccess, bf_el.get("hw", HwAccess.NONE.value))
            except ValueError as exc:
                bad(ViolationKind.OUT_OF_RANGE, bf_loc, f"hw: {exc}")
                hw = HwAccess.NONE
            protections = tuple(bf_el.get("protect", "").split())
            bitfields.append(BitfieldSpec(bf_name, lsb, size, reset_value, sw, hw, protections))

        registers.append(RegisterSpec(reg_name, offset, tuple(bitfields), err_type))

    regmap = RegisterMap(name, data_width, addr_width, base_address, tuple(registers))
    violations.extend(validate_map(regmap))
    if violations:
        return violations
    return regmap


def validate_map(m: RegisterMap) -> list[SpecViolation]:
    """Check every map/register/bitfield invariant; returns violations in
    document order (empty list means the map is valid)."""
    violations: list[SpecViolation] = []

    def bad(kind: ViolationKind, location: str, message: str) -> None:
        violations.append(SpecViolation(kind, location, message))

    bpw = m.bytes_per_word
    seen_names: dict[str, str] = {}
    seen_offsets: dict[int, str] = {}

    for reg in m.registers:
        loc = f"regmap.{reg.name}"
        if reg.name in seen_names:
            bad(ViolationKind.DUPLICATE_NAME, loc, f"register name {reg.name} already used")
        seen_names[reg.name] = loc

        if reg.offset % bpw != 0:
            bad(ViolationKind.MISALIGNED, loc,
                f"offset 0x{reg.offset:X} not aligned to {bpw}-byte words")
        if reg.offset >= (1 << m.addr_width) or reg.offset < 0:
            bad(ViolationKind.OUT_OF_RANGE, loc,
                f"offset 0x{reg.offset:X} outside {m.addr_width}-bit address space")
        if reg.offset in seen_offsets:
            bad(ViolationKind.OVERLAP, loc,
                f"offset 0x{reg.offset:X} already used by {seen_offsets[reg.offset]}")
        else:
            seen_offsets[reg.offset] = reg.name

        seen_bf: set[str] = set()
        occupied = 0
        for bf in reg.bitfields:
            bf_loc = f"{loc}.{bf.name}"
            if bf.name in seen_bf:
                bad(ViolationKind.DUPLICATE_NAME, bf_loc, f"bitfield name {bf.name} already used in {reg.name}")
            seen_bf.add(bf.name)

            if bf.size < 1:
                bad(ViolationKind.OUT_OF_RANGE, bf_loc, f"size must be >= 1, got {bf.size}")
                continue
            if bf.lsb < 0 or bf.lsb + bf.size > m.data_width:
                bad(ViolationKind.OUT_OF_RANGE, bf_loc,
                    f"bits [{bf.lsb}:{bf.msb}] exceed data width {m.data_width}")
            elif occupied & bf.mask:
                bad(ViolationKind.OVERLAP, bf_loc, "bit range overlaps an earlier bitfield")
            occupied |= bf.mask

            if not 0 <= bf.reset_value < (1 << bf.size):
                bad(ViolationKind.BAD_RESET_VALUE, bf_loc,
                    f"reset 0x{bf.reset_value:X} does not fit in {bf.size} bits")
            if bf.sw_access == SwAccess.RO and bf.protections:
                bad(ViolationKind.MEANINGLESS_PROTECTION, bf_loc,
                    "protection on a read-only field has no effect")

    return violations


def build_decode_table(m: RegisterMap) -> DecodeTable:
    """Word-index decode table; callers must validate the map first."""
    problems = validate_map(m)
    if problems:
        raise ValueError(f"cannot build decode table for invalid map: {problems[0].render()}")
    entries = {m.word_index(reg): reg.name for reg in m.registers}
    return DecodeTable(entries)


def serialize_register_map(m: RegisterMap) -> str:
    """Render a map back to canonical XML (round-trips through parse)."""
    lines = [
        f'<regmap name="{m.name}" data_width="{m.data_width}" '
        f'addr_width="{m.addr_width}" base="0x{m.base_address:X}">'
    ]
    for reg in m.registers:
        lines.append(
            f'  <register name="{reg.name}" offset="0x{reg.offset:X}" err_type="{reg.err_type.value}">'
        )
        for bf in reg.bitfields:
            attrs = (
                f'name="{bf.name}" lsb="{bf.lsb}" size="{bf.size}" '
                f'reset="0x{bf.reset_value:X}" sw="{bf.sw_access.value}" hw="{bf.hw_access.value}"'
            )
            if bf.protections:
                attrs += f' protect="{" ".join(bf.protections)}"'
            lines.append(f"    <bitfield {attrs}/>")
        lines.append("  </register>")
    lines.append("</regmap>")
    return "\n".join(lines) + "\n"


def render_violation_report(violations: list[SpecViolation]) -> str:
    """Line-oriented ``PATH: KIND: MESSAGE`` report."""
    return "\n".join(v.render() for v in violations) + ("\n" if violations else "")
