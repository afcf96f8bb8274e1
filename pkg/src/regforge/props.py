"""Property derivation: from register map + options + design IR to a
deterministic list of checkable properties.

Six property classes are generated per the rule table below; each property
is a clocked implication between two cycle-predicate sequences plus an
optional structural payload (safety-IP connectivity/parameter checks are
netlist facts, not temporal behavior).

Rule table (spec attributes -> classes):

* register            -> 1 BusProtocol decode property
* readable bitfield   -> 1 ExternalRW read (folds the post-reset value check)
* sw-writable field   -> 1 ExternalRW write
* protected field     -> 1 AccessViolation per protection signal
* fully-RO register   -> 1 AccessViolation (RO write) when regRoWriteErr
* hw-accessible field -> InternalRW read (+ write when hw can write)
* every stored field  -> 1 DummyWrite stability property
* SFF register field  -> SafetyIntegration connectivity + parameter
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from . import expr as E
from .expr import Expr
from .elaborate import field_q, hw_port
from .genconfig import GenConfig, ValidatedConfig
from .ir import BUS_CLK, REG_CLK, DesignIR, Grouping, InstanceKind, PortDir
from .specmodel import (DecodeTable, ErrType, HwAccess, RegisterMap, SwAccess,
                        build_decode_table)


class PropClass(enum.Enum):
    BUS_PROTOCOL = "BusProtocol"
    EXTERNAL_RW = "ExternalRW"
    ACCESS_VIOLATION = "AccessViolation"
    INTERNAL_RW = "InternalRW"
    DUMMY_WRITE = "DummyWrite"
    SAFETY_INTEGRATION = "SafetyIntegration"


# (delay, predicate) with delays relative to the previous element; the
# first delay of the antecedent anchors at the attempt cycle, the first
# delay of the consequent is relative to the antecedent end (0 = overlap).
CycleSeq = tuple[tuple[int, Expr], ...]


class ViewKind(enum.Enum):
    SVA = "Sva"
    INTERCHANGE = "Interchange"


@dataclass(frozen=True)
class StructuralCheck:
    kind: str                  # "connectivity" | "parameter"
    instance: str
    port: str = ""             # connectivity: instance port that must drive it
    signal: str = ""           # connectivity: expected driver signal
    param: str = ""            # parameter: parameter name
    expected: int = 0          # parameter: expected value


@dataclass(frozen=True)
class PropertyIR:
    id: str
    klass: PropClass
    scope: str                 # register or bitfield path
    clock: str                 # clock domain name
    disable: str               # reset predicate, rendered into the SVA view
    antecedent: CycleSeq
    consequent: CycleSeq
    max_latency: int
    # first consequent element floats within [its delay, max_latency]
    eventually: bool = False
    structural: StructuralCheck | None = None

    def signals(self) -> set[str]:
        out: set[str] = set()
        for _, pred in self.antecedent + self.consequent:
            out |= E.refs(pred)
        return out


class PropertyDriftError(Exception):
    """A property references a signal absent from the bound design."""


def _t(pred: Expr) -> CycleSeq:
    return ((0, pred),)


def generate_properties(m: RegisterMap, vcfg: ValidatedConfig, ir: DesignIR,
                        decode: DecodeTable | None = None) -> list[PropertyIR]:
    cfg: GenConfig = vcfg.cfg
    if decode is None:
        decode = build_decode_table(m)
    dw = m.data_width
    shift = {1: 0, 2: 1, 4: 2}[m.bytes_per_word]
    iw = m.addr_width - shift

    max_latency_async = 2 + 4 * cfg.reg_fifo_depth
    props: list[PropertyIR] = []

    accept = E.ref("accept", 1)
    hwrite = E.ref("hwrite_i", 1)
    word_index = E.ref("word_index", iw)
    hready = E.ref("hready_o", 1)
    hresp = E.ref("hresp_o", 1)
    hrdata = E.ref("hrdata_o", dw)
    init_done = E.ref("init_done_q", 1)
    no_viol = E.not_(E.ref("acc_viol_any", 1))
    true1 = E.const(1, 1)

    def implies(c: Expr, p: Expr) -> Expr:
        return E.mux(c, p, true1)

    def is_async_path(reg) -> bool:
        return cfg.reg_async and reg.name not in cfg.reg_bus_clock

    for reg in m.registers:
        idx = decode.index_of(reg.name)
        at_reg = E.eq(word_index, E.const(idx, iw))
        async_path = is_async_path(reg)
        dom = REG_CLK if async_path else BUS_CLK
        writable = [bf for bf in reg.bitfields if bf.sw_writable()]
        fully_ro = not writable

        if async_path:
            wr_sel = E.ref(f"k_wr_sel_{reg.name.lower()}", 1)
            rd_sel = E.ref(f"k_rd_sel_{reg.name.lower()}", 1)
            wdata = E.ref("k_wdata", dw)
            rd_word = E.ref("k_rd_word", dw)
            k_init = E.ref("k_init_done_q", 1)
        else:
            wr_sel = E.ref(f"wr_sel_{reg.name.lower()}", 1)
            rd_sel = E.ref(f"rd_sel_{reg.name.lower()}", 1)
            wdata = E.ref("rai_wdata", dw)
            rd_word = hrdata
            k_init = init_done

        # ------------------------------------------------- 1. bus protocol
        ant = _t(E.all_of(accept, at_reg, no_viol))
        if async_path:
            cons: CycleSeq = ((1, E.and_(hready, E.not_(hresp))),)
            props.append(PropertyIR(
                f"bus_protocol.{reg.name}", PropClass.BUS_PROTOCOL, reg.name,
                BUS_CLK, "!rst_ni", ant, cons, max_latency_async, eventually=True))
        else:
            cons = ((1, E.all_of(E.eq(E.ref("rai_addr", iw), E.const(idx, iw)),
                                 E.mux(E.past(hwrite), wr_sel, rd_sel))),)
            props.append(PropertyIR(
                f"bus_protocol.{reg.name}", PropClass.BUS_PROTOCOL, reg.name,
                BUS_CLK, "!rst_ni", ant, cons, 2))

        # --------------------------------------- 2. RO-register violation
        if fully_ro and cfg.reg_ro_write_err:
            ant = _t(E.all_of(accept, at_reg, hwrite))
            if reg.err_type == ErrType.BUS_ERROR:
                cons = ((1, E.and_(hresp, E.not_(hready))), (1, E.and_(hresp, hready)))
            else:
                cons = ((1, E.not_(hresp)),)
            props.append(PropertyIR(
                f"access_viol.{reg.name}", PropClass.ACCESS_VIOLATION, reg.name,
                BUS_CLK, "!rst_ni", ant, cons, 2))

        for bf in reg.bitfields:
            scope = f"{reg.name}.{bf.name}"
            f = E.ref(field_q(reg.name, bf.name), bf.size)
            wslice = E.slice_(wdata, bf.lsb, bf.size)
            maxlat = max_latency_async if async_path else 2

            # --------------------------------------- 3. external write
            if bf.sw_writable():
                if bf.sw_access == SwAccess.RW:
                    expect = E.past(wslice)
                else:  # W1C
                    expect = E.and_(E.past(f), E.not_(E.past(wslice)))
                props.append(PropertyIR(
                    f"ext_write.{scope}", PropClass.EXTERNAL_RW, scope, dom,
                    "!rst_ni", _t(wr_sel), ((1, E.eq(f, expect)),), maxlat))

            # ---------------------------------------- 4. external read
            if cfg.reg_readback_path.value == "Registered" and not async_path:
                read_expect = E.past(f)
            else:
                read_expect = f
            read_ok = implies(rd_sel, E.eq(E.slice_(rd_word, bf.lsb, bf.size),
                                           read_expect))
            reset_ok = implies(E.not_(k_init), E.eq_const(f, bf.reset_value))
            cons = [(0, E.and_(reset_ok, read_ok))]
            if bf.sw_access == SwAccess.RC:
                cons.append((1, implies(E.past(rd_sel), E.eq_const(f, 0))))
            props.append(PropertyIR(
                f"ext_read.{scope}", PropClass.EXTERNAL_RW, scope, dom,
                "!rst_ni", _t(E.or_(rd_sel, E.not_(k_init))), tuple(cons), maxlat))

            # ------------------------------------- 5. access violations
            for prot in bf.protections:
                ant = _t(E.all_of(accept, at_reg, hwrite, E.not_(E.ref(f"{prot}_i", 1))))
                if reg.err_type == ErrType.BUS_ERROR:
                    cons = ((1, E.and_(hresp, E.not_(hready))),
                            (1, E.and_(hresp, hready)))
                else:
                    unchanged = E.eq(f, E.past(f)) if not async_path else true1
                    cons = ((1, E.and_(E.not_(hresp), unchanged)),)
                props.append(PropertyIR(
                    f"access_viol.{scope}.{prot}", PropClass.ACCESS_VIOLATION,
                    scope, BUS_CLK, "!rst_ni", ant, cons, 2))

            # ----------------------------------------- 6. internal r/w
            if bf.hw_access in (HwAccess.READ, HwAccess.READ_WRITE):
                port_o = E.ref(hw_port(reg.name, bf.name, "_o"), bf.size)
                props.append(PropertyIR(
                    f"int_read.{scope}", PropClass.INTERNAL_RW, scope, dom,
                    "!rst_ni", _t(true1), _t(E.eq(port_o, f)), 0))
            if bf.hw_access == HwAccess.READ_WRITE:
                en = E.ref(hw_port(reg.name, bf.name, "_en_i"), 1)
                d = E.ref(hw_port(reg.name, bf.name, "_i"), bf.size)
                sw_strobe = None
                if bf.sw_writable():
                    sw_strobe = wr_sel
                elif bf.sw_access == SwAccess.RC:
                    sw_strobe = rd_sel
                ant_expr = E.and_(en, E.not_(sw_strobe)) if sw_strobe is not None else en
                props.append(PropertyIR(
                    f"int_write.{scope}", PropClass.INTERNAL_RW, scope, dom,
                    "!rst_ni", _t(ant_expr), ((1, E.eq(f, E.past(d))),), maxlat))

            # ------------------------------------------- 7. dummy write
            causes = []
            if bf.sw_writable():
                causes.append(wr_sel)
            if bf.sw_access == SwAccess.RC:
                causes.append(rd_sel)
            if bf.hw_access == HwAccess.READ_WRITE:
                causes.append(E.ref(hw_port(reg.name, bf.name, "_en_i"), 1))
            ant = _t(E.not_(E.any_of(*causes)) if causes else true1)
            props.append(PropertyIR(
                f"dummy_write.{scope}", PropClass.DUMMY_WRITE, scope, dom,
                "!rst_ni", ant, ((1, E.eq(f, E.past(f))),), maxlat))

    # ------------------------------------------------ 8. safety integration
    cell_index = 0
    for reg in m.registers:
        if reg.name not in cfg.reg_sff:
            continue
        dom = REG_CLK if is_async_path(reg) else BUS_CLK
        for bf in reg.bitfields:
            scope = f"{reg.name}.{bf.name}"
            k = cell_index
            cell_index += 1
            alarm_in = E.ref(f"sff_ctrl_alarm_in_{k}", 1)
            exp = E.ref(f"sff_exp_{k}_q", 1)
            cell = f"u_sff_{reg.name.lower()}_{bf.name.lower()}"
            props.append(PropertyIR(
                f"sff_conn.{scope}", PropClass.SAFETY_INTEGRATION, scope, dom,
                "!rst_ni", _t(true1), _t(E.eq(alarm_in, exp)), 0,
                structural=StructuralCheck(
                    "connectivity", instance=cell, port=f"alarm_in_{k}",
                    signal=f"sff_alarm_{reg.name.lower()}_{bf.name.lower()}_q")))
            props.append(PropertyIR(
                f"sff_param.{scope}", PropClass.SAFETY_INTEGRATION, scope, dom,
                "!rst_ni", _t(true1), _t(true1), 0,
                structural=StructuralCheck(
                    "parameter", instance=cell, param="WIDTH", expected=bf.size)))

    _check_drift(props, ir)
    return props


def _check_drift(props: list[PropertyIR], ir: DesignIR) -> None:
    known = {s.name for s in ir.signals}
    for p in props:
        missing = p.signals() - known
        if missing:
            raise PropertyDriftError(
                f"property {p.id} references signals absent from the design: "
                f"{sorted(missing)}")


# ---------------------------------------------------------------- binding

@dataclass(frozen=True)
class BoundProperty:
    prop: PropertyIR
    name_map: dict[str, str]    # IR signal -> rendered hierarchical name
    clock_name: str
    reset_name: str


def _block_prefix(block: str) -> str:
    if block in ("top",):
        return ""
    if block.startswith("u_"):
        return f"{block}."
    return f"u_{block}."


def bind_signals(p: PropertyIR, ir: DesignIR, vcfg: ValidatedConfig | GenConfig) -> BoundProperty:
    """Resolve symbolic references to concrete hierarchical names honoring
    the rolled/unrolled port style."""
    cfg = vcfg.cfg if isinstance(vcfg, ValidatedConfig) else vcfg
    sig_index = {s.name: s for s in ir.signals}
    port_index = {q.name: q for q in ir.ports}
    name_map: dict[str, str] = {}
    for name in sorted(p.signals()):
        sig = sig_index.get(name)
        if sig is None:
            raise PropertyDriftError(f"property {p.id}: unresolved signal {name}")
        port = port_index.get(name)
        if port is not None and port.grouping is Grouping.ROLLED:
            stem = name[:-2] if name.endswith(("_i", "_o")) else name
            name_map[name] = f"{port.bundle}.{stem}"
        elif port is not None:
            name_map[name] = name
        else:
            name_map[name] = f"{_block_prefix(sig.block)}{name}"
    clock = "clk_i" if p.clock == BUS_CLK else "reg_clk_i"
    return BoundProperty(p, name_map, clock, "rst_ni")
