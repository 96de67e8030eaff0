"""A small s-expression reader shared by the plan language and the rule loader.

Atoms are symbols (plain strings), keywords (strings starting with ``:``),
integers, floats, and the literals ``true`` / ``false``.  Every parsed node
carries the source line and column it started at so later passes can point
at the offending form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

Atom = Union[str, int, float, bool]


class SexprError(Exception):
    """Raised on malformed input, with 1-based line/column."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class SNode:
    """One parsed form: an atom or a tuple of child SNodes."""

    value: Union[Atom, tuple]
    line: int
    col: int

    @property
    def is_list(self) -> bool:
        return isinstance(self.value, tuple)

    def head(self) -> str | None:
        """Leading symbol of a list node, or None."""
        if self.is_list and self.value and isinstance(self.value[0].value, str):
            return self.value[0].value
        return None


_DELIMS = "()"
_COMMENT = ";"


def _tokens(text: str) -> Iterator[tuple[str, int, int]]:
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch.isspace():
            col += 1
            i += 1
        elif ch == _COMMENT:
            while i < n and text[i] != "\n":
                i += 1
        elif ch in _DELIMS:
            yield ch, line, col
            col += 1
            i += 1
        else:
            start, scol = i, col
            while i < n and not text[i].isspace() and text[i] not in _DELIMS and text[i] != _COMMENT:
                i += 1
                col += 1
            yield text[start:i], line, scol


def _atom(tok: str) -> Atom:
    if tok == "true":
        return True
    if tok == "false":
        return False
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        return float(tok)
    except ValueError:
        pass
    return tok


def parse(text: str) -> list[SNode]:
    """Parse all top-level forms in ``text``."""
    stack: list[tuple[list[SNode], int, int]] = []
    top: list[SNode] = []
    for tok, line, col in _tokens(text):
        if tok == "(":
            stack.append(([], line, col))
        elif tok == ")":
            if not stack:
                raise SexprError("unbalanced ')'", line, col)
            items, oline, ocol = stack.pop()
            node = SNode(tuple(items), oline, ocol)
            (stack[-1][0] if stack else top).append(node)
        else:
            node = SNode(_atom(tok), line, col)
            (stack[-1][0] if stack else top).append(node)
    if stack:
        _, oline, ocol = stack[-1]
        raise SexprError("unclosed '('", oline, ocol)
    return top


def parse_one(text: str) -> SNode:
    """Parse exactly one top-level form."""
    forms = parse(text)
    if len(forms) != 1:
        raise SexprError(f"expected exactly one form, found {len(forms)}", 1, 1)
    return forms[0]


def strip(node: SNode):
    """Drop positions: SNode tree -> plain atoms and tuples."""
    if node.is_list:
        return tuple(strip(c) for c in node.value)
    return node.value


def render(value, indent: int = 0, width: int = 72) -> str:
    """Render atoms/nested tuples or lists back to s-expression text.

    Short lists stay on one line; long ones break after the head with
    two-space indentation, which keeps plan files readable.
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, str)):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    parts = [render(v, indent + 2, width) for v in value]
    flat = "(" + " ".join(parts) + ")"
    if len(flat) + indent <= width and "\n" not in flat:
        return flat
    pad = " " * (indent + 2)
    if parts:
        body = ("\n" + pad).join(parts[1:])
        return f"({parts[0]}\n{pad}{body})" if body else f"({parts[0]})"
    return "()"
