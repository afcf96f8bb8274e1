"""Elaborate a RegisterMap + validated config into the design IR.

Block structure mirrors the generated RTL: an AHB-Lite slave bus interface
(FSM + access control + synchronization), a register kernel holding one
storage element per bitfield, and optional safety/synchronization
instances (SFF cells + controller, dual-clock FIFOs).

Timing model (bus side):

* address phase: ``accept = hsel & htrans[1] & hready``; decode, protection
  and error checks all happen here, so the FSM outputs stay functions of
  state (no same-cycle error responses).
* data phase (next cycle): write data is sampled, RAI strobes fire, read
  data is on the bus.  Errors spend two cycles (hresp=1 with hready 0 then
  1).  In async mode, accesses targeting kernel-clock registers stretch
  the data phase (hready low) until the response crosses back.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import expr as E
from .expr import Expr
from .genconfig import GenConfig, ReadbackPath, ErrDefault, ResetKind, ValidatedConfig
from .ir import (BUS_CLK, REG_CLK, ClockDomain, CombAssign, DesignIR, Grouping,
                 Instance, InstanceKind, Meta, Port, PortDir, SeqElement, Signal,
                 check_ir)
from .specmodel import (ErrType, HwAccess, RegisterMap, RegisterSpec, SwAccess,
                        build_decode_table)

# Bus FSM encodings (fsm_q).
FSM_NORM = 0
FSM_ERR1 = 1
FSM_ERR2 = 2
FSM_WAIT = 3
FSM_RESP = 4


def field_q(reg: str, bf: str) -> str:
    return f"f_{reg.lower()}_{bf.lower()}_q"


def hw_port(reg: str, bf: str, suffix: str) -> str:
    return f"reg_{reg.lower()}_{bf.lower()}{suffix}"


class _Builder:
    def __init__(self, name: str):
        self.name = name
        self.ports: list[Port] = []
        self.signals: list[Signal] = []
        self.seqs: list[SeqElement] = []
        self.combs: list[CombAssign] = []
        self.instances: list[Instance] = []
        self.meta: dict[str, Meta] = {}

    def port(self, name: str, direction: PortDir, width: int,
             grouping=Grouping.UNROLLED, bundle: str = "", domain: str = BUS_CLK) -> Expr:
        self.ports.append(Port(name, direction, width, grouping, bundle, domain))
        self.signals.append(Signal(name, width, domain, block="top"))
        return E.ref(name, width)

    def sig(self, name: str, width: int, domain: str, block: str) -> Expr:
        self.signals.append(Signal(name, width, domain, block))
        return E.ref(name, width)

    def comb(self, name: str, rhs: Expr, domain: str, block: str) -> Expr:
        r = self.sig(name, rhs.width, domain, block)
        self.combs.append(CombAssign(name, rhs, block))
        return r

    def seq(self, name: str, nxt: Expr, enable: Expr, domain: str, reset: int,
            block: str, meta: Meta, sync_stage: bool = False) -> Expr:
        r = self.sig(name, nxt.width, domain, block)
        self.seqs.append(SeqElement(name, nxt, enable, domain, reset, nxt.width,
                                    block, sync_stage))
        self.meta[name] = meta
        return r


def _increment(x: Expr) -> Expr:
    """Ripple-carry +1 built from the base operator set."""
    bits = []
    carry = E.const(1, 1)
    for i in range(x.width):
        bit = E.slice_(x, i, 1)
        bits.append(E.xor(bit, carry))
        carry = E.and_(bit, carry)
    return E.concat(*bits)


def _bin2gray(x: Expr) -> Expr:
    if x.width == 1:
        return x
    shifted = E.concat(E.slice_(x, 1, x.width - 1), E.const(0, 1))
    return E.xor(x, shifted)


def _compose_word(reg: RegisterSpec, data_width: int, value_of) -> Expr:
    """Assemble a register read word from per-field expressions, gaps zero."""
    parts: list[Expr] = []
    pos = 0
    for bf in sorted(reg.bitfields, key=lambda f: f.lsb):
        if bf.lsb > pos:
            parts.append(E.const(0, bf.lsb - pos))
        parts.append(value_of(bf))
        pos = bf.lsb + bf.size
    if pos < data_width:
        parts.append(E.const(0, data_width - pos))
    return E.concat(*parts)


@dataclass(frozen=True)
class _FifoHandles:
    push: str       # write-enable signal name (writer domain)
    wdata: str      # write-data signal name
    pop: str        # read-enable signal name (reader domain)
    rdata: Expr     # read-data expression (reader domain)
    empty: Expr
    full: Expr


def _build_fifo(b: _Builder, name: str, width: int, depth: int,
                wr_domain: str, rd_domain: str) -> _FifoHandles:
    """Gray-pointer dual-clock FIFO, fully elaborated (no black box)."""
    blk = f"u_{name}"
    pb = depth.bit_length()  # log2(depth) + 1 wrap bit (depth is pow2)
    idx_w = pb - 1
    meta = Meta("infra", f"sync.{name}")

    push = b.sig(f"{name}_push", 1, wr_domain, blk)
    wdata = b.sig(f"{name}_wdata", width, wr_domain, blk)
    pop = b.sig(f"{name}_pop", 1, rd_domain, blk)

    wbin = E.ref(f"{name}_wbin_q", pb)
    wgray = E.ref(f"{name}_wgray_q", pb)
    b.seq(f"{name}_wbin_q", _increment(wbin), push, wr_domain, 0, blk, meta)
    b.seq(f"{name}_wgray_q", _bin2gray(_increment(wbin)), push, wr_domain, 0, blk, meta)

    rbin = E.ref(f"{name}_rbin_q", pb)
    rgray = E.ref(f"{name}_rgray_q", pb)
    b.seq(f"{name}_rbin_q", _increment(rbin), pop, rd_domain, 0, blk, meta)
    b.seq(f"{name}_rgray_q", _bin2gray(_increment(rbin)), pop, rd_domain, 0, blk, meta)

    # two-stage pointer synchronizers, one per direction
    ws1 = b.seq(f"{name}_wgray_rs1_q", wgray, E.const(1, 1), rd_domain, 0, blk, meta,
                sync_stage=True)
    ws2 = b.seq(f"{name}_wgray_rs2_q", ws1, E.const(1, 1), rd_domain, 0, blk, meta,
                sync_stage=True)
    rs1 = b.seq(f"{name}_rgray_ws1_q", rgray, E.const(1, 1), wr_domain, 0, blk, meta,
                sync_stage=True)
    rs2 = b.seq(f"{name}_rgray_ws2_q", rs1, E.const(1, 1), wr_domain, 0, blk, meta,
                sync_stage=True)

    empty = b.comb(f"{name}_empty", E.eq(rgray, ws2), rd_domain, blk)
    full_cmp = E.xor(rs2, E.const(0b11 << (pb - 2), pb))
    full = b.comb(f"{name}_full", E.eq(wgray, full_cmp), wr_domain, blk)

    widx = E.slice_(wbin, 0, idx_w) if idx_w else None
    ridx = E.slice_(rbin, 0, idx_w) if idx_w else None
    slots = []
    for s in range(depth):
        sel = E.eq(widx, E.const(s, idx_w)) if idx_w else E.const(1, 1)
        slot = b.seq(f"{name}_mem{s}_q", E.ref(f"{name}_wdata", width),
                     E.and_(E.ref(f"{name}_push", 1), sel), wr_domain, 0, blk, meta)
        slots.append(slot)

    rdata = slots[0]
    for s in range(1, depth):
        rdata = E.mux(E.eq(ridx, E.const(s, idx_w)), slots[s], rdata)
    rdata_sig = b.comb(f"{name}_rdata", rdata, rd_domain, blk)

    owned = tuple(sig.name for sig in b.signals if sig.block == blk)
    b.instances.append(Instance(
        blk, InstanceKind.ASYNC_FIFO,
        params={"WIDTH": width, "DEPTH": depth},
        conns={"push": push.name, "wdata": wdata.name, "pop": pop.name,
               "rdata": rdata_sig.name},
        block="top", owned_signals=owned))
    return _FifoHandles(push.name, wdata.name, pop.name, rdata_sig, empty, full)


def elaborate(m: RegisterMap, vcfg: ValidatedConfig) -> DesignIR:
    """RegisterMap + ValidatedConfig -> DesignIR. Deterministic."""
    cfg: GenConfig = vcfg.cfg if isinstance(vcfg, ValidatedConfig) else vcfg
    if not isinstance(vcfg, ValidatedConfig):
        raise TypeError("elaborate requires a ValidatedConfig (run classify_and_validate)")

    dw = m.data_width
    aw = m.addr_width
    shift = {1: 0, 2: 1, 4: 2}[m.bytes_per_word]
    iw = aw - shift
    decode = build_decode_table(m)

    b = _Builder(cfg.reg_base_name)
    infra = lambda tag: Meta("infra", tag)

    domains = [ClockDomain(BUS_CLK)]
    if cfg.reg_async:
        domains.append(ClockDomain(REG_CLK))

    def reg_domain(reg: RegisterSpec) -> str:
        if cfg.reg_async and reg.name not in cfg.reg_bus_clock:
            return REG_CLK
        return BUS_CLK

    async_regs = [r for r in m.registers if reg_domain(r) == REG_CLK]
    sync_regs = [r for r in m.registers if reg_domain(r) == BUS_CLK]

    # ---------------------------------------------------------------- ports
    ahb = dict(grouping=Grouping.ROLLED if not cfg.reg_unroll_ahb else Grouping.UNROLLED,
               bundle="" if cfg.reg_unroll_ahb else "sx_ahb_lite_slave")
    hsel = b.port("hsel_i", PortDir.IN, 1, **ahb)
    haddr = b.port("haddr_i", PortDir.IN, aw, **ahb)
    htrans = b.port("htrans_i", PortDir.IN, 2, **ahb)
    hwrite = b.port("hwrite_i", PortDir.IN, 1, **ahb)
    hwdata = b.port("hwdata_i", PortDir.IN, dw, **ahb)
    b.port("hrdata_o", PortDir.OUT, dw, **ahb)
    b.port("hready_o", PortDir.OUT, 1, **ahb)
    b.port("hresp_o", PortDir.OUT, 1, **ahb)

    prot_names = sorted({p for r in m.registers for bf in r.bitfields for p in bf.protections})
    prots = {p: b.port(f"{p}_i", PortDir.IN, 1) for p in prot_names}

    for reg in m.registers:
        dom = reg_domain(reg)
        for bf in reg.bitfields:
            if bf.hw_access in (HwAccess.READ, HwAccess.READ_WRITE):
                b.port(hw_port(reg.name, bf.name, "_o"), PortDir.OUT, bf.size, domain=dom)
            if bf.hw_access == HwAccess.READ_WRITE:
                b.port(hw_port(reg.name, bf.name, "_en_i"), PortDir.IN, 1, domain=dom)
                b.port(hw_port(reg.name, bf.name, "_i"), PortDir.IN, bf.size, domain=dom)

    sff_cells: list[tuple[RegisterSpec, object]] = []
    for reg in m.registers:
        if reg.name in cfg.reg_sff:
            for bf in reg.bitfields:
                sff_cells.append((reg, bf))
    if sff_cells:
        sff_domain = reg_domain(sff_cells[0][0])
        b.port("sff_test_i", PortDir.IN, 1, domain=sff_domain)
        b.port("sff_alarm_o", PortDir.OUT, 1, domain=sff_domain)

    # ------------------------------------------------------- address phase
    BI = "bus_if"
    fsm_w = 3 if cfg.reg_async else 2
    fsm = E.ref("fsm_q", fsm_w)
    fc = lambda v: E.const(v, fsm_w)

    if cfg.reg_async:
        hready_rhs = E.not_(E.any_of(E.eq(fsm, fc(FSM_ERR1)), E.eq(fsm, fc(FSM_WAIT))))
    else:
        hready_rhs = E.not_(E.eq(fsm, fc(FSM_ERR1)))
    b.combs.append(CombAssign("hready_o", hready_rhs, BI))
    b.combs.append(CombAssign(
        "hresp_o", E.any_of(E.eq(fsm, fc(FSM_ERR1)), E.eq(fsm, fc(FSM_ERR2))), BI))

    word_index = b.comb("word_index", E.slice_(haddr, shift, iw) if shift else haddr,
                        BUS_CLK, BI)
    accept = b.comb("accept",
                    E.all_of(hsel, E.slice_(htrans, 1, 1), E.ref("hready_o", 1)),
                    BUS_CLK, BI)

    dec = {}
    for reg in m.registers:
        idx = decode.index_of(reg.name)
        dec[reg.name] = b.comb(f"dec_{reg.name.lower()}",
                               E.eq(word_index, E.const(idx, iw)), BUS_CLK, BI)
    dec_mapped = b.comb("dec_mapped", E.any_of(*dec.values()), BUS_CLK, BI)

    prot_ok: dict[tuple[str, str], Expr] = {}
    for reg in m.registers:
        for bf in reg.bitfields:
            if bf.protections:
                prot_ok[(reg.name, bf.name)] = b.comb(
                    f"prot_ok_{reg.name.lower()}_{bf.name.lower()}",
                    E.all_of(*[prots[p] for p in bf.protections]), BUS_CLK, BI)

    err_terms: list[Expr] = []
    silent_terms: list[Expr] = []
    wr_ok_terms: list[Expr] = []
    for reg in m.registers:
        protected = [bf for bf in reg.bitfields if bf.protections]
        writable = [bf for bf in reg.bitfields if bf.sw_writable()]
        fail = E.any_of(*[E.not_(prot_ok[(reg.name, bf.name)]) for bf in protected]) \
            if protected else None
        wr_here = E.and_(dec[reg.name], hwrite)
        if writable:
            ok = wr_here
            if fail is not None:
                ok = E.and_(ok, E.not_(fail))
            wr_ok_terms.append(ok)
            if fail is not None:
                viol = E.and_(wr_here, fail)
                (err_terms if reg.err_type == ErrType.BUS_ERROR else silent_terms).append(viol)
        else:
            # register with no software-writable field: write is an RO violation
            if cfg.reg_ro_write_err and reg.err_type == ErrType.BUS_ERROR:
                err_terms.append(wr_here)
            else:
                silent_terms.append(wr_here)
    unmapped = E.not_(dec_mapped)
    if cfg.reg_err_default == ErrDefault.BUS_ERROR:
        err_terms.append(unmapped)
    else:
        silent_terms.append(unmapped)

    acc_err = b.comb("acc_err", E.any_of(*err_terms), BUS_CLK, BI)
    acc_viol_any = b.comb("acc_viol_any",
                          E.any_of(acc_err, *silent_terms), BUS_CLK, BI)
    wr_effective = b.comb("wr_effective", E.any_of(*wr_ok_terms), BUS_CLK, BI)
    rd_effective = b.comb("rd_effective",
                          E.all_of(E.not_(hwrite), dec_mapped, E.not_(acc_err)),
                          BUS_CLK, BI)

    if cfg.reg_async and async_regs:
        async_hit = b.comb(
            "async_hit",
            E.any_of(*[dec[r.name] for r in async_regs]), BUS_CLK, BI)
    else:
        async_hit = None

    # ------------------------------------------------------ data-phase regs
    go_sync = E.and_(accept, E.not_(E.ref("acc_err", 1)))
    if async_hit is not None:
        # only effective accesses cross to the kernel clock; silent drops
        # respond on the bus side like any sync-path access
        go_async = b.comb("go_async",
                          E.all_of(accept, E.not_(E.ref("acc_err", 1)), async_hit,
                                   E.any_of(wr_effective, rd_effective)),
                          BUS_CLK, BI)
        go_sync = E.all_of(accept, E.not_(E.ref("acc_err", 1)),
                           E.not_(E.ref("go_async", 1)))
    else:
        go_async = None

    dphase = b.seq("dphase_q", go_sync, E.const(1, 1), BUS_CLK, 0, BI, infra("bus_fsm"))
    addr_q = b.seq("addr_q", word_index, accept, BUS_CLK, 0, BI, infra("bus_fsm"))
    wr_q = b.seq("wr_q", hwrite, accept, BUS_CLK, 0, BI, infra("bus_fsm"))
    async_mask = E.not_(async_hit) if async_hit is not None else E.const(1, 1)
    wr_pend = b.seq("wr_en_pend_q", E.all_of(wr_effective, async_mask),
                    accept, BUS_CLK, 0, BI, infra("bus_fsm"))
    rd_pend = b.seq("rd_en_pend_q", E.all_of(rd_effective, async_mask),
                    accept, BUS_CLK, 0, BI, infra("bus_fsm"))
    b.seq("init_done_q", E.const(1, 1), E.const(1, 1), BUS_CLK, 0, BI,
          infra("bus_fsm"))
    if cfg.reg_async:
        b.seq("k_init_done_q", E.const(1, 1), E.const(1, 1), REG_CLK, 0, "reg_kernel",
              infra("bus_fsm"))

    # ----------------------------------------------------------------- FSM
    err_entry = E.and_(accept, E.ref("acc_err", 1))
    if cfg.reg_async:
        req = _build_fifo(b, "req_fifo", iw + 1 + dw, cfg.reg_fifo_depth, BUS_CLK, REG_CLK)
        resp = _build_fifo(b, "resp_fifo", dw, cfg.reg_fifo_depth, REG_CLK, BUS_CLK)
        async_pend = b.seq("async_pend_q", go_async if go_async is not None else E.const(0, 1),
                           E.const(1, 1), BUS_CLK, 0, BI, infra("bus_fsm"))
        b.combs.append(CombAssign(
            resp.pop, E.all_of(E.eq(fsm, fc(FSM_WAIT)), E.not_(resp.empty)), BI))
        resp_pop = E.ref(resp.pop, 1)
        fsm_next = E.mux(
            err_entry, fc(FSM_ERR1),
            E.mux(go_async if go_async is not None else E.const(0, 1), fc(FSM_WAIT),
                  E.mux(E.eq(fsm, fc(FSM_ERR1)), fc(FSM_ERR2),
                        E.mux(resp_pop, fc(FSM_RESP),
                              E.mux(E.eq(fsm, fc(FSM_WAIT)), fc(FSM_WAIT),
                                    fc(FSM_NORM))))))
    else:
        req = resp = None
        async_pend = None
        fsm_next = E.mux(err_entry, fc(FSM_ERR1),
                         E.mux(E.eq(fsm, fc(FSM_ERR1)), fc(FSM_ERR2), fc(FSM_NORM)))
    b.seq("fsm_q", fsm_next, E.const(1, 1), BUS_CLK, FSM_NORM, BI, infra("bus_fsm"))

    # ---------------------------------------------------------- RAI strobes
    rai_wr_en = b.comb("rai_wr_en", E.and_(dphase, wr_pend), BUS_CLK, BI)
    rai_rd_en = b.comb("rai_rd_en", E.and_(dphase, rd_pend), BUS_CLK, BI)
    rai_addr = b.comb("rai_addr", addr_q, BUS_CLK, BI)
    rai_wdata = b.comb("rai_wdata", hwdata, BUS_CLK, BI)
    b.comb("rai_err", E.eq(fsm, fc(FSM_ERR1)), BUS_CLK, BI)

    wr_sel = {}
    rd_sel = {}
    for reg in sync_regs:
        idx = decode.index_of(reg.name)
        hit = E.eq(E.ref("rai_addr", iw), E.const(idx, iw))
        wr_sel[reg.name] = b.comb(f"wr_sel_{reg.name.lower()}",
                                  E.and_(rai_wr_en, hit), BUS_CLK, BI)
        rd_sel[reg.name] = b.comb(f"rd_sel_{reg.name.lower()}",
                                  E.and_(rai_rd_en, hit), BUS_CLK, BI)

    # ------------------------------------------------------- kernel (async)
    k_wr_sel = {}
    k_rd_sel = {}
    if cfg.reg_async:
        KD = REG_CLK
        k_pop = b.comb("k_pop", E.not_(req.empty), KD, "reg_kernel")
        b.combs.append(CombAssign(req.pop, E.ref("k_pop", 1), "reg_kernel"))
        entry = req.rdata
        k_addr = b.comb("k_addr", E.slice_(entry, 0, iw), KD, "reg_kernel")
        k_wr = b.comb("k_wr", E.slice_(entry, iw, 1), KD, "reg_kernel")
        k_wdata = b.comb("k_wdata", E.slice_(entry, iw + 1, dw), KD, "reg_kernel")
        for reg in async_regs:
            idx = decode.index_of(reg.name)
            hit = E.eq(E.ref("k_addr", iw), E.const(idx, iw))
            k_wr_sel[reg.name] = b.comb(
                f"k_wr_sel_{reg.name.lower()}",
                E.all_of(E.ref("k_pop", 1), E.ref("k_wr", 1), hit), KD, "reg_kernel")
            k_rd_sel[reg.name] = b.comb(
                f"k_rd_sel_{reg.name.lower()}",
                E.all_of(E.ref("k_pop", 1), E.not_(E.ref("k_wr", 1)), hit), KD, "reg_kernel")
        # request-side push wiring
        b.combs.append(CombAssign(req.push, E.ref("async_pend_q", 1), BI))
        b.combs.append(CombAssign(
            req.wdata, E.concat(E.ref("rai_addr", iw), wr_q, E.ref("rai_wdata", dw)), BI))

    # ---------------------------------------------------------- reg kernel
    RK = "reg_kernel"
    for reg in m.registers:
        dom = reg_domain(reg)
        is_async = reg in async_regs
        sw_wr = (k_wr_sel if is_async else wr_sel).get(reg.name)
        sw_rd = (k_rd_sel if is_async else rd_sel).get(reg.name)
        wdata = E.ref("k_wdata", dw) if is_async else E.ref("rai_wdata", dw)

        for bf in reg.bitfields:
            q = E.ref(field_q(reg.name, bf.name), bf.size)
            wslice = E.slice_(wdata, bf.lsb, bf.size)

            sw_strobe = None
            sw_value = None
            if bf.sw_access == SwAccess.RW:
                sw_strobe, sw_value = sw_wr, wslice
            elif bf.sw_access == SwAccess.W1C:
                sw_strobe, sw_value = sw_wr, E.and_(q, E.not_(wslice))
            elif bf.sw_access == SwAccess.RC:
                sw_strobe, sw_value = sw_rd, E.const(0, bf.size)

            hw_en = E.ref(hw_port(reg.name, bf.name, "_en_i"), 1) \
                if bf.hw_access == HwAccess.READ_WRITE else None
            hw_d = E.ref(hw_port(reg.name, bf.name, "_i"), bf.size) \
                if bf.hw_access == HwAccess.READ_WRITE else None

            if sw_strobe is not None and hw_en is not None:
                enable = E.or_(sw_strobe, hw_en)
                nxt = E.mux(sw_strobe, sw_value, hw_d)  # software access wins
            elif sw_strobe is not None:
                enable, nxt = sw_strobe, sw_value
            elif hw_en is not None:
                enable, nxt = hw_en, hw_d
            else:
                enable, nxt = E.const(0, 1), q  # constant field (kept, waivable)

            b.seq(field_q(reg.name, bf.name), nxt, enable, dom, bf.reset_value,
                  RK, Meta("bitfield", f"{reg.name}.{bf.name}"))

            if bf.hw_access in (HwAccess.READ, HwAccess.READ_WRITE):
                b.combs.append(CombAssign(hw_port(reg.name, bf.name, "_o"), q, RK))

    # ------------------------------------------------------------ readback
    def compose(reg: RegisterSpec) -> Expr:
        return _compose_word(reg, dw,
                             lambda bf: E.ref(field_q(reg.name, bf.name), bf.size))

    rd_word = E.const(0, dw)
    for reg in reversed(sync_regs):
        rd_word = E.mux(dec[reg.name], compose(reg), rd_word)
    rd_word = b.comb("rd_word", rd_word, BUS_CLK, BI)

    if cfg.reg_async:
        k_word = E.const(0, dw)
        for reg in reversed(async_regs):
            idx = decode.index_of(reg.name)
            k_word = E.mux(E.eq(E.ref("k_addr", iw), E.const(idx, iw)),
                           compose(reg), k_word)
        k_rd_word = b.comb("k_rd_word", k_word, REG_CLK, RK)
        b.combs.append(CombAssign(resp.push, E.ref("k_pop", 1), RK))
        b.combs.append(CombAssign(resp.wdata, k_rd_word, RK))

    if cfg.reg_readback_path == ReadbackPath.REGISTERED:
        if cfg.reg_async:
            # two sources: sync-path accept (register compose) or async resp pop
            rdata_next = E.mux(E.ref(resp.pop, 1), resp.rdata, rd_word)
            rdata_en = E.any_of(E.and_(accept, rd_effective), E.ref(resp.pop, 1))
        else:
            rdata_next = rd_word
            rdata_en = E.and_(accept, rd_effective)
        rdata_q = b.seq("rdata_q", rdata_next, rdata_en, BUS_CLK, 0, BI,
                        infra("readback"))
        b.combs.append(CombAssign("hrdata_o", rdata_q, BI))
    else:
        # combinational: live register word selected by the data-phase address
        live = E.const(0, dw)
        for reg in reversed(sync_regs):
            idx = decode.index_of(reg.name)
            live = E.mux(E.eq(E.ref("rai_addr", iw), E.const(idx, iw)),
                         compose(reg), live)
        b.comb("rd_word_live", live, BUS_CLK, BI)
        b.combs.append(CombAssign("hrdata_o", E.ref("rd_word_live", dw), BI))

    # ----------------------------------------------------------------- SFF
    if sff_cells:
        SD = reg_domain(sff_cells[0][0])
        SC = "u_sff_ctrl"
        n = len(sff_cells)
        cnt_w = max(1, (n - 1).bit_length())
        cnt = E.ref("sff_cnt_q", cnt_w)
        wrap = E.eq(cnt, E.const(n - 1, cnt_w))
        b.seq("sff_cnt_q", E.mux(wrap, E.const(0, cnt_w), _increment(cnt)),
              E.ref("sff_test_i", 1), SD, 0, SC, infra("safety.controller"))

        alarm_wires = []
        for k, (reg, bf) in enumerate(sff_cells):
            cell_blk = f"u_sff_{reg.name.lower()}_{bf.name.lower()}"
            force = b.comb(f"sff_force_{k}",
                           E.and_(E.ref("sff_test_i", 1),
                                  E.eq(cnt, E.const(k, cnt_w))), SD, SC)
            alarm = b.seq(f"sff_alarm_{reg.name.lower()}_{bf.name.lower()}_q",
                          force, E.const(1, 1), SD, 0, cell_blk,
                          Meta("infra", f"safety.{reg.name}.{bf.name}"))
            exp = b.seq(f"sff_exp_{k}_q", force, E.const(1, 1), SD, 0, SC,
                        infra("safety.controller"))
            alarm_in = b.comb(f"sff_ctrl_alarm_in_{k}", alarm, SD, SC)
            alarm_wires.append(alarm_in)
            b.instances.append(Instance(
                cell_blk, InstanceKind.SFF_CELL,
                params={"WIDTH": bf.size},
                conns={"q": field_q(reg.name, bf.name), "alarm": alarm.name,
                       "force": force.name},
                block="top", owned_signals=(alarm.name,)))
        b.combs.append(CombAssign("sff_alarm_o", E.any_of(*alarm_wires), SC))
        b.instances.append(Instance(
            SC, InstanceKind.SFF_CONTROLLER,
            params={"CELLS": n},
            conns={f"alarm_in_{k}": f"sff_ctrl_alarm_in_{k}" for k in range(n)},
            block="top",
            owned_signals=tuple(s.name for s in b.signals if s.block == SC)))

    ir = DesignIR(
        name=cfg.reg_base_name,
        ports=b.ports,
        signals=b.signals,
        seq_elements=b.seqs,
        comb_assigns=b.combs,
        instances=b.instances,
        domains=domains,
        meta=b.meta,
        spec_digest=m.digest(),
        config_digest=cfg.digest(),
        reset_kind=cfg.reg_reset_kind.value,
    )
    check_ir(ir)
    return ir
