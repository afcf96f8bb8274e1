"""Cycle-accurate simulation of the design IR.

Two execution engines over the same compiled form:

* scalar: dict-based, used for counterexample replay and small tests;
* batch: numpy arrays with one lane per explored trace, used by the
  exhaustive checker (the lane count is the BFS frontier x alphabet).

Semantics are two-phase per clock-domain tick: all combinational signals
are evaluated in topological order from the pre-tick state, then every
sequential element of the ticked domain whose enable is true loads its
next value.  Other domains hold.  Primary inputs not re-driven on a tick
keep their previously driven value (they are part of the simulation
state, which keeps cross-domain sampling well defined).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import expr as E
from .expr import Expr
from .ir import DesignIR, PortDir, topo_order

U64 = np.uint64


class SimContractError(Exception):
    pass


@dataclass
class SimState:
    values: dict[str, int]          # seq elements + held primary inputs
    cycles: dict[str, int] = field(default_factory=dict)

    def copy(self) -> "SimState":
        return SimState(dict(self.values), dict(self.cycles))


def _eval_batch(e: Expr, env: dict[str, np.ndarray]) -> np.ndarray:
    op = e.op
    if op == "CONST":
        return np.uint64(e.value)
    if op == "REF":
        return env[e.name]
    if op == "NOT":
        return ~_eval_batch(e.args[0], env) & U64(E.mask(e.width))
    if op == "AND":
        return _eval_batch(e.args[0], env) & _eval_batch(e.args[1], env)
    if op == "OR":
        return _eval_batch(e.args[0], env) | _eval_batch(e.args[1], env)
    if op == "XOR":
        return _eval_batch(e.args[0], env) ^ _eval_batch(e.args[1], env)
    if op == "EQ":
        return (_eval_batch(e.args[0], env) == _eval_batch(e.args[1], env)).astype(U64)
    if op == "MUX":
        sel = _eval_batch(e.args[0], env)
        return np.where(sel.astype(bool),
                        _eval_batch(e.args[1], env), _eval_batch(e.args[2], env))
    if op == "SLICE":
        return (_eval_batch(e.args[0], env) >> U64(e.lsb)) & U64(E.mask(e.width))
    if op == "CONCAT":
        out = np.uint64(0)
        shift = 0
        for part in e.args:
            out = out | (_eval_batch(part, env) << U64(shift))
            shift += part.width
        return out
    if op == "PAST":
        raise ValueError("PAST is property-only; not valid in design IR")
    raise ValueError(f"unknown op {op}")


class CompiledSim:
    """Topologically ordered evaluator for one DesignIR."""

    def __init__(self, ir: DesignIR):
        self.ir = ir
        self.comb = topo_order(ir)
        self.inputs = [p for p in ir.ports if p.direction is PortDir.IN]
        self.inputs_by_domain: dict[str, list] = {}
        for p in self.inputs:
            self.inputs_by_domain.setdefault(p.domain, []).append(p)
        self.seqs_by_domain: dict[str, list] = {}
        for s in ir.seq_elements:
            self.seqs_by_domain.setdefault(s.clock_domain, []).append(s)
        self.state_names = [s.q for s in ir.seq_elements] + [p.name for p in self.inputs]
        self.widths = {s.name: s.width for s in ir.signals}
        # packing layout over the full state vector
        self.offsets: dict[str, int] = {}
        off = 0
        for name in self.state_names:
            self.offsets[name] = off
            off += self.widths[name]
        self.state_bits = off

    # ------------------------------------------------------------- scalar
    def reset_state(self) -> SimState:
        values = {s.q: s.reset_value for s in self.ir.seq_elements}
        for p in self.inputs:
            values[p.name] = 0
        return SimState(values, {d.name: 0 for d in self.ir.domains})

    def eval_scalar(self, state: SimState) -> dict[str, int]:
        env = dict(state.values)
        for c in self.comb:
            env[c.target] = E.evaluate(c.rhs, env)
        return env

    def step_scalar(self, state: SimState, inputs: dict[str, int], domain: str) -> SimState:
        driven = {p.name for p in self.inputs_by_domain.get(domain, [])}
        missing = driven - set(inputs)
        if missing:
            raise SimContractError(f"tick of {domain} must drive inputs {sorted(missing)}")
        new = state.copy()
        for name, value in inputs.items():
            if name not in self.widths or name not in new.values:
                raise SimContractError(f"unknown primary input {name}")
            if not 0 <= value < (1 << self.widths[name]):
                raise SimContractError(f"input {name} value {value} exceeds width")
            new.values[name] = value
        env = self.eval_scalar(new)
        updates: dict[str, int] = {}
        for s in self.seqs_by_domain.get(domain, []):
            if E.evaluate(s.enable, env):
                updates[s.q] = E.evaluate(s.next, env)
        new.values.update(updates)
        new.cycles[domain] = new.cycles.get(domain, 0) + 1
        return new

    # -------------------------------------------------------------- batch
    def eval_batch(self, env: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
        """Extend a state+input array env with every combinational signal."""
        for c in self.comb:
            env[c.target] = _eval_batch(c.rhs, env)
        return env

    def step_batch(self, env: dict[str, np.ndarray], domain: str) -> dict[str, np.ndarray]:
        """Given a fully evaluated env, produce post-tick state arrays."""
        out: dict[str, np.ndarray] = {}
        for s in self.ir.seq_elements:
            if s.clock_domain != domain:
                out[s.q] = env[s.q]
                continue
            en = _eval_batch(s.enable, env)
            nxt = _eval_batch(s.next, env)
            out[s.q] = np.where(en.astype(bool), nxt, env[s.q])
        for p in self.inputs:
            out[p.name] = env[p.name]
        return out

    # ------------------------------------------------------------ packing
    def pack_scalar(self, state: SimState) -> int:
        key = 0
        for name in self.state_names:
            key |= state.values[name] << self.offsets[name]
        return key

    def unpack_scalar(self, key: int) -> SimState:
        values = {}
        for name in self.state_names:
            values[name] = (key >> self.offsets[name]) & E.mask(self.widths[name])
        return SimState(values, {d.name: 0 for d in self.ir.domains})

    def pack_batch(self, arrays: dict[str, np.ndarray]) -> np.ndarray:
        """Pack state arrays to uint64 keys (requires state_bits <= 64)."""
        if self.state_bits > 64:
            raise SimContractError(f"state too wide to pack ({self.state_bits} bits)")
        first = next(iter(arrays.values()))
        key = np.zeros_like(first, dtype=U64)
        for name in self.state_names:
            key |= arrays[name].astype(U64) << U64(self.offsets[name])
        return key

    def unpack_batch(self, keys: np.ndarray) -> dict[str, np.ndarray]:
        out = {}
        for name in self.state_names:
            out[name] = (keys >> U64(self.offsets[name])) & U64(E.mask(self.widths[name]))
        return out


def step(ir: DesignIR, state: SimState, inputs: dict[str, int], event: str) -> SimState:
    """One clock tick of ``event`` domain (public entry; compiles per call,
    prefer CompiledSim for loops)."""
    return CompiledSim(ir).step_scalar(state, inputs, event)
