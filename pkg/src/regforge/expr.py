"""Width-checked expression trees shared by the design IR and properties.

Operators: AND OR NOT XOR EQ MUX SLICE CONCAT CONST REF, plus PAST as a
property-only wrapper meaning "value one clock tick earlier".  Values are
unsigned integers masked to the node width.  Bitwise operators require
equal operand widths; EQ yields one bit; MUX selects with a 1-bit chooser;
CONCAT is little-endian (first argument holds the low bits).
"""

from __future__ import annotations

from dataclasses import dataclass


class WidthError(Exception):
    pass


@dataclass(frozen=True)
class Expr:
    op: str
    args: tuple = ()
    width: int = 1
    # REF: signal name. CONST: value. SLICE: (lsb,) with width giving size.
    name: str = ""
    value: int = 0
    lsb: int = 0

    def __str__(self) -> str:
        return render(self)


def const(value: int, width: int) -> Expr:
    if not 0 <= value < (1 << width):
        raise WidthError(f"constant {value} does not fit in {width} bits")
    return Expr("CONST", (), width, value=value)


def ref(name: str, width: int) -> Expr:
    return Expr("REF", (), width, name=name)


def _binary(op: str, a: Expr, b: Expr) -> Expr:
    if a.width != b.width:
        raise WidthError(f"{op} operand widths differ: {a.width} vs {b.width}")
    return Expr(op, (a, b), a.width)


def and_(a: Expr, b: Expr) -> Expr:
    return _binary("AND", a, b)


def or_(a: Expr, b: Expr) -> Expr:
    return _binary("OR", a, b)


def xor(a: Expr, b: Expr) -> Expr:
    return _binary("XOR", a, b)


def not_(a: Expr) -> Expr:
    return Expr("NOT", (a,), a.width)


def eq(a: Expr, b: Expr) -> Expr:
    if a.width != b.width:
        raise WidthError(f"EQ operand widths differ: {a.width} vs {b.width}")
    return Expr("EQ", (a, b), 1)


def mux(sel: Expr, if_true: Expr, if_false: Expr) -> Expr:
    if sel.width != 1:
        raise WidthError("MUX selector must be 1 bit")
    if if_true.width != if_false.width:
        raise WidthError(f"MUX arm widths differ: {if_true.width} vs {if_false.width}")
    return Expr("MUX", (sel, if_true, if_false), if_true.width)


def slice_(a: Expr, lsb: int, width: int) -> Expr:
    if lsb < 0 or lsb + width > a.width:
        raise WidthError(f"SLICE [{lsb}+:{width}] out of range for width {a.width}")
    return Expr("SLICE", (a,), width, lsb=lsb)


def concat(*parts: Expr) -> Expr:
    if not parts:
        raise WidthError("CONCAT needs at least one part")
    return Expr("CONCAT", tuple(parts), sum(p.width for p in parts))


def past(a: Expr) -> Expr:
    """Property-only: operand value one tick before the evaluation cycle."""
    return Expr("PAST", (a,), a.width)


def all_of(*terms: Expr) -> Expr:
    """AND-reduce 1-bit terms; empty product is constant 1."""
    out = None
    for term in terms:
        out = term if out is None else and_(out, term)
    return out if out is not None else const(1, 1)


def any_of(*terms: Expr) -> Expr:
    out = None
    for term in terms:
        out = term if out is None else or_(out, term)
    return out if out is not None else const(0, 1)


def eq_const(a: Expr, value: int) -> Expr:
    return eq(a, const(value, a.width))


def mask(width: int) -> int:
    return (1 << width) - 1


def evaluate(e: Expr, env, past_env=None) -> int:
    """Scalar evaluation. ``env`` maps signal name -> int; ``past_env`` is
    consulted inside PAST nodes (defaults to env)."""
    op = e.op
    if op == "CONST":
        return e.value
    if op == "REF":
        return env[e.name] & mask(e.width)
    if op == "PAST":
        return evaluate(e.args[0], past_env if past_env is not None else env, past_env)
    if op == "NOT":
        return ~evaluate(e.args[0], env, past_env) & mask(e.width)
    if op == "AND":
        return evaluate(e.args[0], env, past_env) & evaluate(e.args[1], env, past_env)
    if op == "OR":
        return evaluate(e.args[0], env, past_env) | evaluate(e.args[1], env, past_env)
    if op == "XOR":
        return evaluate(e.args[0], env, past_env) ^ evaluate(e.args[1], env, past_env)
    if op == "EQ":
        return int(evaluate(e.args[0], env, past_env) == evaluate(e.args[1], env, past_env))
    if op == "MUX":
        sel = evaluate(e.args[0], env, past_env)
        return evaluate(e.args[1] if sel else e.args[2], env, past_env)
    if op == "SLICE":
        return (evaluate(e.args[0], env, past_env) >> e.lsb) & mask(e.width)
    if op == "CONCAT":
        out = 0
        shift = 0
        for part in e.args:
            out |= evaluate(part, env, past_env) << shift
            shift += part.width
        return out
    raise ValueError(f"unknown op {op}")


def refs(e: Expr) -> set[str]:
    """All signal names referenced (including inside PAST)."""
    out: set[str] = set()
    stack = [e]
    while stack:
        node = stack.pop()
        if node.op == "REF":
            out.add(node.name)
        stack.extend(node.args)
    return out


def uses_past(e: Expr) -> bool:
    stack = [e]
    while stack:
        node = stack.pop()
        if node.op == "PAST":
            return True
        stack.extend(node.args)
    return False


_SV_OPS = {"AND": "&&", "OR": "||", "XOR": "^"}


def render(e: Expr, name_map=None) -> str:
    """Render to SystemVerilog-flavoured text (used by the SVA view and by
    debug printing).  ``name_map`` rewrites REF names (signal binding)."""

    def r(node: Expr) -> str:
        op = node.op
        if op == "CONST":
            return f"{node.width}'h{node.value:X}" if node.width > 1 else ("1'b1" if node.value else "1'b0")
        if op == "REF":
            text = name_map[node.name] if name_map else node.name
            return text
        if op == "PAST":
            return f"$past({r(node.args[0])})"
        if op == "NOT":
            inner = r(node.args[0])
            bang = "!" if node.width == 1 else "~"
            return f"{bang}({inner})" if " " in inner else f"{bang}{inner}"
        if op in _SV_OPS:
            sym = _SV_OPS[op] if node.width == 1 else ("&" if op == "AND" else "|" if op == "OR" else "^")
            return f"({r(node.args[0])} {sym} {r(node.args[1])})"
        if op == "EQ":
            return f"({r(node.args[0])} == {r(node.args[1])})"
        if op == "MUX":
            return f"({r(node.args[0])} ? {r(node.args[1])} : {r(node.args[2])})"
        if op == "SLICE":
            base = r(node.args[0])
            if node.width == 1:
                return f"{base}[{node.lsb}]"
            return f"{base}[{node.lsb + node.width - 1}:{node.lsb}]"
        if op == "CONCAT":
            # SV concat is big-endian: {high, ..., low}
            parts = [r(p) for p in reversed(node.args)]
            return "{" + ", ".join(parts) + "}"
        raise ValueError(f"unknown op {op}")

    return r(e)
