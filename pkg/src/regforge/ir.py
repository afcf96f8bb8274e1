"""Cycle-accurate netlist-level design IR.

Every signal is driven exactly once: by a port (inputs), a combinational
assign, or a sequential element.  Instances (AsyncFifo, SffCell,
SffController) are structural markers: their internals are elaborated into
ordinary signals/seq elements so simulation, coverage and mutation see
through them, but CDC checking and connectivity properties use the
instance boundaries.  ``meta`` back-links every node to the spec object or
infrastructure role it came from.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

from . import expr as E
from .expr import Expr


class PortDir(enum.Enum):
    IN = "input"
    OUT = "output"


class Grouping(enum.Enum):
    UNROLLED = "Unrolled"
    ROLLED = "RolledBundleMember"


BUS_CLK = "bus_clk"
REG_CLK = "reg_clk"


@dataclass(frozen=True)
class ClockDomain:
    name: str


@dataclass(frozen=True)
class Port:
    name: str
    direction: PortDir
    width: int
    # Rolled AHB ports carry the bundle name (e.g. sx_ahb_lite_slave).
    grouping: Grouping = Grouping.UNROLLED
    bundle: str = ""
    domain: str = BUS_CLK


@dataclass(frozen=True)
class Signal:
    name: str
    width: int
    clock_domain: str
    block: str = "top"  # owning module for HDL emission


@dataclass(frozen=True)
class SeqElement:
    q: str                      # driven signal name
    next: Expr
    enable: Expr                # 1-bit; constant 1 when always updating
    clock_domain: str
    reset_value: int
    width: int
    block: str = "top"
    # Two-stage synchronizer flops are flagged so the CDC checker can
    # whitelist their crossing.
    sync_stage: bool = False


@dataclass(frozen=True)
class CombAssign:
    target: str
    rhs: Expr
    block: str = "top"


class InstanceKind(enum.Enum):
    ASYNC_FIFO = "AsyncFifo"
    SFF_CELL = "SffCell"
    SFF_CONTROLLER = "SffController"


@dataclass(frozen=True)
class Instance:
    name: str
    kind: InstanceKind
    params: dict[str, int]
    # port name inside the instance -> top-level signal name
    conns: dict[str, str]
    block: str = "top"
    # Signals elaborated as this instance's internals (for CDC whitelisting
    # and per-module emission).
    owned_signals: tuple[str, ...] = ()


@dataclass(frozen=True)
class Meta:
    """Back-link from an IR node to its origin."""
    kind: str        # "bitfield" | "register" | "infra" | "option"
    path: str        # e.g. CTRL.EN, or an infra role like fsm/decode


@dataclass
class DesignIR:
    name: str
    ports: list[Port]
    signals: list[Signal]
    seq_elements: list[SeqElement]
    comb_assigns: list[CombAssign]
    instances: list[Instance]
    domains: list[ClockDomain]
    meta: dict[str, Meta]
    # digests stitched into every emitted artifact header
    spec_digest: str = ""
    config_digest: str = ""
    reset_kind: str = "AsyncActiveLow"

    def signal(self, name: str) -> Signal:
        return self._signal_index[name]

    @property
    def _signal_index(self) -> dict[str, Signal]:
        idx = getattr(self, "_sig_idx_cache", None)
        if idx is None or len(idx) != len(self.signals):
            idx = {s.name: s for s in self.signals}
            object.__setattr__(self, "_sig_idx_cache", idx)
        return idx

    def input_ports(self) -> list[Port]:
        return [p for p in self.ports if p.direction is PortDir.IN]

    def output_ports(self) -> list[Port]:
        return [p for p in self.ports if p.direction is PortDir.OUT]

    def seq_by_name(self, q: str) -> SeqElement:
        for s in self.seq_elements:
            if s.q == q:
                return s
        raise KeyError(q)

    def domain_names(self) -> set[str]:
        return {d.name for d in self.domains}


class IrError(Exception):
    pass


def check_ir(ir: DesignIR) -> None:
    """Well-formedness: single driver per signal, width-consistent drivers,
    acyclic combinational assigns, declared clock domains, total meta."""
    declared = {s.name for s in ir.signals}
    drivers: dict[str, str] = {}

    def drive(name: str, what: str) -> None:
        if name not in declared:
            raise IrError(f"{what} drives undeclared signal {name}")
        if name in drivers:
            raise IrError(f"signal {name} driven twice ({drivers[name]} and {what})")
        drivers[name] = what

    for p in ir.ports:
        if p.direction is PortDir.IN:
            drive(p.name, f"input port {p.name}")
    for s in ir.seq_elements:
        drive(s.q, f"seq element {s.q}")
        if s.next.width != s.width or ir.signal(s.q).width != s.width:
            raise IrError(f"seq element {s.q}: width mismatch")
        if s.enable.width != 1:
            raise IrError(f"seq element {s.q}: enable must be 1 bit")
        if s.clock_domain not in ir.domain_names():
            raise IrError(f"seq element {s.q}: unknown clock domain {s.clock_domain}")
    for c in ir.comb_assigns:
        drive(c.target, f"comb assign {c.target}")
        if c.rhs.width != ir.signal(c.target).width:
            raise IrError(f"comb assign {c.target}: width mismatch "
                          f"({c.rhs.width} vs {ir.signal(c.target).width})")

    undriven = declared - set(drivers)
    if undriven:
        raise IrError(f"undriven signals: {sorted(undriven)}")

    for s in ir.seq_elements:
        for name in E.refs(s.next) | E.refs(s.enable):
            if name not in declared:
                raise IrError(f"seq element {s.q} references undeclared {name}")
    for c in ir.comb_assigns:
        for name in E.refs(c.rhs):
            if name not in declared:
                raise IrError(f"comb assign {c.target} references undeclared {name}")

    topo_order(ir)  # raises on combinational cycles

    for s in ir.seq_elements:
        if s.q not in ir.meta:
            raise IrError(f"seq element {s.q} has no meta back-link")


def topo_order(ir: DesignIR) -> list[CombAssign]:
    """Topologically sorted comb assigns (inputs/seq outputs are sources).

    Raises IrError on a combinational cycle.
    """
    by_target = {c.target: c for c in ir.comb_assigns}
    order: list[CombAssign] = []
    state: dict[str, int] = {}  # 0 visiting, 1 done

    def visit(target: str, chain: tuple[str, ...]) -> None:
        if target not in by_target:
            return
        mark = state.get(target)
        if mark == 1:
            return
        if mark == 0:
            cycle = " -> ".join(chain[chain.index(target):] + (target,))
            raise IrError(f"combinational cycle: {cycle}")
        state[target] = 0
        for name in E.refs(by_target[target].rhs):
            visit(name, chain + (target,))
        state[target] = 1
        order.append(by_target[target])

    for c in ir.comb_assigns:
        visit(c.target, ())
    return order


def rebuild_with(ir: DesignIR, *, seq_elements=None, comb_assigns=None,
                 instances=None, signals=None) -> DesignIR:
    """Shallow functional update used by the mutation engine."""
    return DesignIR(
        name=ir.name,
        ports=list(ir.ports),
        signals=list(signals if signals is not None else ir.signals),
        seq_elements=list(seq_elements if seq_elements is not None else ir.seq_elements),
        comb_assigns=list(comb_assigns if comb_assigns is not None else ir.comb_assigns),
        instances=list(instances if instances is not None else ir.instances),
        domains=list(ir.domains),
        meta=dict(ir.meta),
        spec_digest=ir.spec_digest,
        config_digest=ir.config_digest,
        reset_kind=ir.reset_kind,
    )
