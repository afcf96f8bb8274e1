"""Property rendering: SVA text and a neutral JSON interchange view.

Both views render every property (no partial views) and are deterministic
byte-for-byte.  Structural safety checks render as elaboration-time
immediate assertions in SVA and as explicit records in the interchange
file.
"""

from __future__ import annotations

import json

from . import expr as E
from .props import BoundProperty, PropertyIR, ViewKind


def _sva_ident(prop_id: str) -> str:
    return prop_id.replace(".", "_")


def _seq_text(seq, name_map, first_prefix: str = "") -> str:
    parts = []
    for i, (delay, pred) in enumerate(seq):
        text = E.render(pred, name_map)
        if i == 0:
            parts.append(f"{first_prefix}{text}")
        else:
            parts.append(f"##{delay} {text}")
    return " ".join(parts)


def _render_sva_property(bp: BoundProperty) -> list[str]:
    p = bp.prop
    ident = _sva_ident(p.id)
    lines = [f"// {p.id}  [{p.klass.value}]  scope={p.scope}"]

    if p.structural is not None and p.structural.kind == "parameter":
        s = p.structural
        lines.append(f"initial a_{ident}: assert ({s.instance}.{s.param} == {s.expected});")
        lines.append("")
        return lines

    ant = _seq_text(p.antecedent, bp.name_map)
    first_delay = p.consequent[0][0]
    if p.eventually:
        arrow = f"|-> ##[{max(first_delay, 1)}:{p.max_latency}]"
    elif first_delay == 0:
        arrow = "|->"
    else:
        arrow = f"|-> ##{first_delay}"
    cons_head = E.render(p.consequent[0][1], bp.name_map)
    cons_tail = ""
    for delay, pred in p.consequent[1:]:
        cons_tail += f" ##{delay} {E.render(pred, bp.name_map)}"

    lines += [
        f"property p_{ident};",
        f"  @(posedge {bp.clock_name}) disable iff ({p.disable})",
        f"  {ant} {arrow} {cons_head}{cons_tail};",
        "endproperty",
        f"a_{ident}: assert property (p_{ident});",
        "",
    ]
    return lines


def _seq_json(seq, name_map) -> list:
    return [{"delay": d, "predicate": E.render(p, name_map)} for d, p in seq]


def emit_view(props: list[BoundProperty], view: ViewKind,
              spec_digest: str = "", config_digest: str = "") -> str:
    """Render all bound properties in the requested view."""
    if view is ViewKind.SVA:
        lines = [
            f"// generated property suite  spec={spec_digest} config={config_digest}",
            f"// {len(props)} properties",
            "",
        ]
        for bp in props:
            lines.extend(_render_sva_property(bp))
        return "\n".join(lines) + "\n"

    if view is ViewKind.INTERCHANGE:
        records = []
        for bp in props:
            p = bp.prop
            rec = {
                "id": p.id,
                "class": p.klass.value,
                "scope": p.scope,
                "clock": p.clock,
                "disable": p.disable,
                "antecedent": _seq_json(p.antecedent, bp.name_map),
                "consequent": _seq_json(p.consequent, bp.name_map),
                "max_latency": p.max_latency,
                "eventually": p.eventually,
            }
            if p.structural is not None:
                s = p.structural
                rec["structural"] = {
                    "kind": s.kind, "instance": s.instance, "port": s.port,
                    "signal": s.signal, "param": s.param, "expected": s.expected,
                }
            records.append(rec)
        doc = {
            "spec_digest": spec_digest,
            "config_digest": config_digest,
            "properties": records,
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    raise ValueError(f"unknown view {view}")
