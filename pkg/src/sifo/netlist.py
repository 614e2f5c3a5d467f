"""AND/XOR gate netlists: data model, ``.gcn`` text parser, validator, writer.

The ``.gcn`` grammar, one statement per line::

    IN <id> [<id> ...]        declare primary inputs (one line per input group)
    ZERO <id> [<id> ...]      declare constant-zero wires (public value 0)
    OUT <id> [<id> ...]       declare circuit outputs
    <a> AND <b> = <out>       AND gate
    <a> XOR <b> = <out>       XOR gate

Blank lines and ``#`` comments are ignored.  Gate ids are assigned 0, 1, 2, ...
in file order, and file order must already be a topological order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum


class Op(str, Enum):
    AND = "AND"
    XOR = "XOR"


@dataclass(frozen=True)
class Gate:
    id: int
    op: Op
    in0: int
    in1: int
    out: int


class NetlistError(ValueError):
    """Base class for netlist problems; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NetlistSyntaxError(NetlistError):
    pass


class SelfLoopError(NetlistError):
    pass


class DuplicateAssignmentError(NetlistError):
    pass


class UseBeforeDefinitionError(NetlistError):
    pass


class DuplicateInputError(NetlistError):
    pass


class UndeclaredOutputError(NetlistError):
    pass


@dataclass(frozen=True)
class Circuit:
    gates: tuple[Gate, ...]
    input_groups: tuple[tuple[int, ...], ...]
    outputs: tuple[int, ...]
    zeros: tuple[int, ...] = ()
    _inputs: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        flat = tuple(w for group in self.input_groups for w in group)
        object.__setattr__(self, "_inputs", flat)

    @property
    def inputs(self) -> tuple[int, ...]:
        return self._inputs

    @property
    def wire_count(self) -> int:
        # constant-zero wires are public and carry no memory location
        return len(self._inputs) + len(self.gates)

    @property
    def n_and(self) -> int:
        return sum(1 for g in self.gates if g.op is Op.AND)

    @property
    def n_xor(self) -> int:
        return len(self.gates) - self.n_and

    def fanout(self) -> dict[int, int]:
        """Number of gate input pins each wire drives (a wire used twice by one gate counts 2)."""
        counts = dict.fromkeys(self._inputs, 0)
        counts.update(dict.fromkeys(self.zeros, 0))
        for g in self.gates:
            counts.setdefault(g.out, 0)
        for g in self.gates:
            counts[g.in0] += 1
            counts[g.in1] += 1
        return counts

    def producers(self) -> dict[int, Gate]:
        return {g.out: g for g in self.gates}


def wire_count_check(c: Circuit) -> int:
    return len(c.inputs) + len(c.gates)


def validate(c: Circuit, lines: dict | None = None) -> None:
    """Raise a :class:`NetlistError` subclass on the first invariant violation.

    ``lines`` optionally maps ("in", wire) / ("zero", wire) / ("gate", gate_id) /
    ("out", wire) to source line numbers for error reporting.
    """
    lines = lines or {}
    defined: set[int] = set()
    for w in c.inputs:
        if w in defined:
            raise DuplicateInputError(f"wire {w} declared as input twice", lines.get(("in", w)))
        defined.add(w)
    for w in c.zeros:
        if w in defined:
            raise DuplicateInputError(f"wire {w} declared twice", lines.get(("zero", w)))
        defined.add(w)
    for g in c.gates:
        where = lines.get(("gate", g.id))
        if g.in0 == g.out or g.in1 == g.out:
            raise SelfLoopError(f"gate {g.id} reads its own output wire {g.out}", where)
        for w in (g.in0, g.in1):
            if w not in defined:
                raise UseBeforeDefinitionError(f"gate {g.id} reads wire {w} before it is defined", where)
        if g.out in defined:
            raise DuplicateAssignmentError(f"wire {g.out} is assigned more than once", where)
        defined.add(g.out)
    for w in c.outputs:
        if w not in defined:
            raise UndeclaredOutputError(f"output wire {w} is never defined", lines.get(("out", w)))


def _parse_ids(tokens, lineno):
    ids = []
    for tok in tokens:
        if not tok.isdigit():
            raise NetlistSyntaxError(f"expected a non-negative wire id, got {tok!r}", lineno)
        ids.append(int(tok))
    if not ids:
        raise NetlistSyntaxError("declaration lists no wire ids", lineno)
    return ids


def parse(text: str, infer_io: bool = False) -> Circuit:
    """Parse ``.gcn`` text into a validated :class:`Circuit`.

    With ``infer_io`` the IN/OUT declarations may be omitted: inputs become the
    wires that are read but never produced (ascending), outputs the gate outputs
    that are never read (in gate order).
    """
    groups: list[tuple[int, ...]] = []
    zeros: list[int] = []
    outputs: list[int] = []
    gates: list[Gate] = []
    lines: dict = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stmt = raw.split("#", 1)[0].strip()
        if not stmt:
            continue
        tokens = stmt.split()
        head = tokens[0]
        if head == "IN":
            ids = _parse_ids(tokens[1:], lineno)
            groups.append(tuple(ids))
            for w in ids:
                lines[("in", w)] = lineno
        elif head == "ZERO":
            ids = _parse_ids(tokens[1:], lineno)
            zeros.extend(ids)
            for w in ids:
                lines[("zero", w)] = lineno
        elif head == "OUT":
            ids = _parse_ids(tokens[1:], lineno)
            outputs.extend(ids)
            for w in ids:
                lines.setdefault(("out", w), lineno)
        else:
            if len(tokens) != 5 or tokens[1] not in ("AND", "XOR") or tokens[3] != "=":
                raise NetlistSyntaxError(f"cannot parse statement {stmt!r}", lineno)
            a, b, out = _parse_ids((tokens[0], tokens[2], tokens[4]), lineno)
            gid = len(gates)
            gates.append(Gate(gid, Op(tokens[1]), a, b, out))
            lines[("gate", gid)] = lineno

    if infer_io:
        produced = {g.out for g in gates}
        consumed = {w for g in gates for w in (g.in0, g.in1)}
        if not groups:
            groups = [tuple(sorted(consumed - produced - set(zeros)))] if gates else []
        if not outputs:
            outputs = [g.out for g in gates if g.out not in consumed]

    c = Circuit(tuple(gates), tuple(groups), tuple(outputs), tuple(zeros))
    validate(c, lines)
    return c


def write(c: Circuit) -> str:
    out = [f"IN {' '.join(map(str, group))}" for group in c.input_groups]
    if c.zeros:
        out.append(f"ZERO {' '.join(map(str, c.zeros))}")
    if c.outputs:
        out.append(f"OUT {' '.join(map(str, c.outputs))}")
    out.extend(f"{g.in0} {g.op.value} {g.in1} = {g.out}" for g in c.gates)
    return "\n".join(out) + "\n"


def to_json(c: Circuit) -> str:
    return json.dumps({
        "inputs": [list(g) for g in c.input_groups],
        "zeros": list(c.zeros),
        "outputs": list(c.outputs),
        "gates": [[g.op.value, g.in0, g.in1, g.out] for g in c.gates],
    })


def from_json(text: str) -> Circuit:
    d = json.loads(text)
    gates = tuple(Gate(i, Op(op), a, b, o) for i, (op, a, b, o) in enumerate(d["gates"]))
    c = Circuit(gates, tuple(tuple(g) for g in d["inputs"]), tuple(d["outputs"]), tuple(d.get("zeros", ())))
    validate(c)
    return c


def load(path) -> Circuit:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())
