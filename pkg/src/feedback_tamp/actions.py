"""Action schemas and the textual action language spoken with the planner.

Grammar (whitespace allowed between any two tokens)::

    action  := NAME "(" objects "," params ")"
    objects := "[" [ STRING { "," STRING } [","] ] "]"
    params  := "{" [ STRING ":" NUMBER { "," STRING ":" NUMBER } [","] ] "}"
    STRING  := single- or double-quoted text without the quote character
    NUMBER  := optionally signed decimal, exponent allowed

Example: ``place(['red_box'], {'x': 0.51, 'y': 0.02, 'theta': 0.00})``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping


class ActionError(ValueError):
    """Base class; the message is meant to be shown to the planner."""


class ParseError(ActionError):
    pass


class SchemaError(ActionError):
    pass


class ValidationError(ActionError):
    pass


class UnknownObject(KeyError):
    def __str__(self):
        return f"unknown object {self.args[0]!r}"


@dataclass(frozen=True)
class ActionSchema:
    name: str
    object_arity: int
    params: tuple[tuple[str, float, float], ...] = ()

    def __post_init__(self):
        names = [p[0] for p in self.params]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate parameter names in {self.name}")
        for pname, lo, hi in self.params:
            if not lo <= hi:
                raise ValueError(f"empty interval for {self.name}.{pname}")

    @property
    def param_names(self) -> tuple[str, ...]:
        return tuple(p[0] for p in self.params)

    def interval(self, pname: str) -> tuple[float, float]:
        for name, lo, hi in self.params:
            if name == pname:
                return lo, hi
        raise KeyError(pname)


PICK = ActionSchema("pick", 1)
# theta bounds are the literal prompt values, not +-pi
PLACE = ActionSchema("place", 1, (("x", 0.0, 1.0), ("y", -1.0, 1.0), ("theta", -3.14, 3.14)))

SCHEMAS: dict[str, ActionSchema] = {PICK.name: PICK, PLACE.name: PLACE}


def register_schema(schema: ActionSchema) -> None:
    SCHEMAS[schema.name] = schema


@dataclass(frozen=True)
class GroundAction:
    name: str
    objects: tuple[str, ...]
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))
        object.__setattr__(self, "params", MappingProxyType({k: float(v) for k, v in self.params.items()}))

    def __eq__(self, other):
        if not isinstance(other, GroundAction):
            return NotImplemented
        return (self.name, self.objects, dict(self.params)) == (other.name, other.objects, dict(other.params))

    def __hash__(self):
        return hash((self.name, self.objects, tuple(sorted(self.params.items()))))

    def __repr__(self):
        return f"GroundAction({format_action(self)})"

    @property
    def schema(self) -> ActionSchema:
        return SCHEMAS[self.name]

    @property
    def obj(self) -> str:
        return self.objects[0]


def make_action(name: str, objects, params: Mapping[str, float] | None = None) -> GroundAction:
    """Build a ground action and run the same checks the parser runs."""
    action = GroundAction(name, tuple(objects), dict(params or {}))
    validate(action)
    return action


def validate(action: GroundAction) -> None:
    schema = SCHEMAS.get(action.name)
    if schema is None:
        raise SchemaError(f"unknown action '{action.name}'; available actions: {', '.join(sorted(SCHEMAS))}")
    if len(action.objects) != schema.object_arity:
        raise ValidationError(
            f"{schema.name} takes {schema.object_arity} object(s), got {len(action.objects)}"
        )
    extra = set(action.params) - set(schema.param_names)
    if extra:
        raise ValidationError(f"{schema.name} got unexpected parameter(s): {', '.join(sorted(extra))}")
    for pname, lo, hi in schema.params:
        if pname not in action.params:
            raise ValidationError(f"{schema.name} is missing parameter '{pname}'")
        value = action.params[pname]
        if not math.isfinite(value) or not lo <= value <= hi:
            raise ValidationError(f"parameter '{pname}'={value} of {schema.name} is outside [{lo}, {hi}]")


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<number>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>'[^']*'|"[^"]*")
  | (?P<punct>[()\[\]{},:])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r} at position {pos} in {text!r}")
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("eof", "", len(self.text))

    def expect(self, kind, value=None):
        tok = self.peek()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value if value is not None else kind
            got = tok[1] or "end of input"
            raise ParseError(f"expected {want!r} but found {got!r} at position {tok[2]} in {self.text!r}")
        self.i += 1
        return tok[1]

    def accept(self, value) -> bool:
        if self.peek()[0] == "punct" and self.peek()[1] == value:
            self.i += 1
            return True
        return False

    def items(self, close, item):
        out = []
        while not self.accept(close):
            out.append(item())
            if not self.accept(","):
                self.expect("punct", close)
                break
        return out

    def string(self):
        return self.expect("string")[1:-1]

    def pair(self):
        key = self.string()
        self.expect("punct", ":")
        return key, float(self.expect("number"))

    def action(self):
        name = self.expect("name")
        self.expect("punct", "(")
        self.expect("punct", "[")
        objects = self.items("]", self.string)
        self.expect("punct", ",")
        self.expect("punct", "{")
        pairs = self.items("}", self.pair)
        self.accept(",")
        self.expect("punct", ")")
        self.expect("eof")
        params = {}
        for key, value in pairs:
            if key in params:
                raise ParseError(f"duplicate parameter '{key}' in {self.text!r}")
            params[key] = value
        return name, objects, params


def parse_action(text: str) -> GroundAction:
    name, objects, params = _Parser(text.strip()).action()
    action = GroundAction(name, tuple(objects), params)
    validate(action)
    return action


def _fmt(value: float) -> str:
    out = f"{value:.2f}"
    return "0.00" if out == "-0.00" else out


def format_action(a: GroundAction) -> str:
    objs = ", ".join(f"'{o}'" for o in a.objects)
    schema = SCHEMAS.get(a.name)
    order = list(schema.param_names) if schema else []
    order += sorted(k for k in a.params if k not in order)
    params = ", ".join(f"'{k}': {_fmt(a.params[k])}" for k in order if k in a.params)
    return f"{a.name}([{objs}], {{{params}}})"


def applicable(state, a: GroundAction) -> tuple[bool, str]:
    """Symbolic preconditions of pick/place against a world state."""
    obj = a.obj
    if obj not in state.objects:
        raise UnknownObject(obj)
    if a.name == "pick":
        if state.holding is not None:
            return False, "gripper occupied"
        if state.objects[obj].held:
            return False, f"{obj} is already held"
        return True, ""
    if a.name == "place":
        if state.holding != obj:
            return False, f"{obj} is not held"
        return True, ""
    raise SchemaError(f"no preconditions defined for '{a.name}'")
