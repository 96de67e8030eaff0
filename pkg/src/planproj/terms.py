"""Ground terms and shallow patterns for events, occasions, and rules.

A term is a tuple ('functor', arg, ...) whose args are atoms (str, int,
float, bool) or nested terms; a bare string is an atomic proposition.
Patterns are terms that may contain variables, written '?name'.
"""

from __future__ import annotations

from typing import Mapping, Union

Atom = Union[str, int, float, bool]
Term = Union[str, tuple]


def is_var(x) -> bool:
    return isinstance(x, str) and x.startswith("?")


def is_ground(t: Term) -> bool:
    if isinstance(t, tuple):
        return all(is_ground(a) for a in t)
    return not is_var(t)


def match(pattern: Term, term: Term, bindings: Mapping[str, object] | None = None) -> dict | None:
    """Structurally match ``pattern`` against a ground ``term``.

    Returns the extended bindings dict, or None.  The input bindings are
    never mutated.
    """
    b = dict(bindings) if bindings else {}
    return b if _match(pattern, term, b) else None


def _match(pattern, term, b: dict) -> bool:
    if is_var(pattern):
        if pattern in b:
            return b[pattern] == term
        b[pattern] = term
        return True
    if isinstance(pattern, tuple):
        if not isinstance(term, tuple) or len(pattern) != len(term):
            return False
        return all(_match(p, t, b) for p, t in zip(pattern, term))
    return pattern == term


def substitute(pattern: Term, bindings: Mapping[str, object]) -> Term:
    """Replace bound variables; unbound ones are left in place."""
    if is_var(pattern):
        return bindings.get(pattern, pattern)
    if isinstance(pattern, tuple):
        return tuple(substitute(p, bindings) for p in pattern)
    return pattern


def render(t: Term) -> str:
    """Canonical one-line text, e.g. ``(travel-mode office)``."""
    if isinstance(t, tuple):
        return "(" + " ".join(render(a) for a in t) + ")"
    if isinstance(t, bool):
        return "true" if t else "false"
    if isinstance(t, float):
        return repr(int(t)) if t.is_integer() else repr(t)
    return str(t)


def term_from_sexpr(value) -> Term:
    """Plain s-expression structure -> term (tuples stay tuples)."""
    if isinstance(value, tuple):
        return tuple(term_from_sexpr(v) for v in value)
    return value


def fluent_id_for_term(t: Term) -> str:
    """Flatten a proposition into the fluent name plans refer to.

    ('open', 'a113') becomes "open-a113"; a bare atom is its own name.
    The mapping is how timeline propositions surface to plan conditions.
    """
    if isinstance(t, tuple):
        return "-".join(fluent_id_for_term(a) for a in t)
    if isinstance(t, bool):
        return "true" if t else "false"
    if isinstance(t, float) and t.is_integer():
        return str(int(t))
    return str(t)
