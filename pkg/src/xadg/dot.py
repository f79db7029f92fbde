"""Minimal Graphviz DOT writer."""

from typing import Hashable, Iterable, Mapping


def _quote(s) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


def _attrs(attrs: Mapping) -> str:
    if not attrs:
        return ""
    return " [" + ", ".join(f"{k}={_quote(v)}" for k, v in attrs.items()) + "]"


def digraph(
    name: str,
    nodes: Iterable[tuple[Hashable, Mapping]],
    edges: Iterable[tuple[Hashable, Hashable, Mapping]],
    graph_attrs: Mapping | None = None,
) -> str:
    lines = [f"digraph {_quote(name)} {{"]
    for k, v in (graph_attrs or {}).items():
        lines.append(f"  {k}={_quote(v)};")
    for node, attrs in nodes:
        lines.append(f"  {_quote(node)}{_attrs(attrs)};")
    for a, b, attrs in edges:
        lines.append(f"  {_quote(a)} -> {_quote(b)}{_attrs(attrs)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
