"""Transaction-level reference model derived purely from the register map
and options (never from the design IR).

This is the independent side of the dual-route check: the explorer drives
the elaborated design cycle by cycle, and its observed architectural state
and bus responses must match this model on every transaction sequence.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .genconfig import ErrDefault, GenConfig, ValidatedConfig
from .specmodel import ErrType, HwAccess, RegisterMap, SwAccess


class Resp(enum.Enum):
    OKAY = "OKAY"
    ERROR = "ERROR"


@dataclass(frozen=True)
class ExtWrite:
    offset: int
    data: int
    prots: tuple[tuple[str, int], ...] = ()  # (signal, value); unspecified = 1


@dataclass(frozen=True)
class ExtRead:
    offset: int
    prots: tuple[tuple[str, int], ...] = ()


@dataclass(frozen=True)
class IntWrite:
    field: str  # "REG.BF"
    data: int


@dataclass(frozen=True)
class Idle:
    ticks: int = 1


Transaction = ExtWrite | ExtRead | IntWrite | Idle


@dataclass(frozen=True)
class TxnResponse:
    resp: Resp | None       # None for transactions without a bus response
    rdata: int | None = None


@dataclass
class ArchState:
    fields: dict[tuple[str, str], int]

    def copy(self) -> "ArchState":
        return ArchState(dict(self.fields))


def reset_arch_state(m: RegisterMap) -> ArchState:
    return ArchState({(r.name, bf.name): bf.reset_value
                      for r in m.registers for bf in r.bitfields})


def _prot_value(prots, name: str) -> int:
    for n, v in prots:
        if n == name:
            return v
    return 1


def _compose(m: RegisterMap, state: ArchState, reg) -> int:
    word = 0
    for bf in reg.bitfields:
        word |= state.fields[(reg.name, bf.name)] << bf.lsb
    return word


def apply_transaction(m: RegisterMap, cfg: GenConfig, state: ArchState,
                      txn: Transaction) -> tuple[ArchState, TxnResponse]:
    """Spec-semantics update rules for one transaction."""
    new = state.copy()

    if isinstance(txn, Idle):
        return new, TxnResponse(None)

    if isinstance(txn, IntWrite):
        reg_name, bf_name = txn.field.split(".")
        bf = m.register(reg_name).bitfield(bf_name)
        if bf.hw_access != HwAccess.READ_WRITE:
            raise ValueError(f"{txn.field} is not internally writable")
        new.fields[(reg_name, bf_name)] = txn.data & ((1 << bf.size) - 1)
        return new, TxnResponse(None)

    # external access: decode by word index
    index = txn.offset // m.bytes_per_word
    target = None
    for reg in m.registers:
        if m.word_index(reg) == index:
            target = reg
            break

    if target is None:
        if cfg.reg_err_default == ErrDefault.BUS_ERROR:
            return new, TxnResponse(Resp.ERROR)
        return new, TxnResponse(Resp.OKAY, 0 if isinstance(txn, ExtRead) else None)

    if isinstance(txn, ExtRead):
        rdata = _compose(m, new, target)
        for bf in target.bitfields:
            if bf.sw_access == SwAccess.RC:
                new.fields[(target.name, bf.name)] = 0
        return new, TxnResponse(Resp.OKAY, rdata)

    # ExtWrite
    writable = [bf for bf in target.bitfields if bf.sw_writable()]
    if not writable:
        if cfg.reg_ro_write_err and target.err_type == ErrType.BUS_ERROR:
            return new, TxnResponse(Resp.ERROR)
        return new, TxnResponse(Resp.OKAY)

    prot_fail = any(
        not all(_prot_value(txn.prots, p) for p in bf.protections)
        for bf in target.bitfields if bf.protections)
    if prot_fail:
        if target.err_type == ErrType.BUS_ERROR:
            return new, TxnResponse(Resp.ERROR)
        return new, TxnResponse(Resp.OKAY)  # silent drop, state unchanged

    for bf in target.bitfields:
        slice_val = (txn.data >> bf.lsb) & ((1 << bf.size) - 1)
        key = (target.name, bf.name)
        if bf.sw_access == SwAccess.RW:
            new.fields[key] = slice_val
        elif bf.sw_access == SwAccess.W1C:
            new.fields[key] = new.fields[key] & ~slice_val & ((1 << bf.size) - 1)
        # RO and RC fields ignore software writes
    return new, TxnResponse(Resp.OKAY)


def reference_outcome(m: RegisterMap, cfg: GenConfig | ValidatedConfig,
                      txns: list[Transaction]) -> tuple[ArchState, list[TxnResponse]]:
    """Run a transaction list from reset; returns final architectural state
    and the per-transaction bus responses."""
    if isinstance(cfg, ValidatedConfig):
        cfg = cfg.cfg
    state = reset_arch_state(m)
    responses = []
    for txn in txns:
        state, resp = apply_transaction(m, cfg, state, txn)
        responses.append(resp)
    return state, responses
