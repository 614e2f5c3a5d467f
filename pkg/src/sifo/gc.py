"""Garbling and evaluation with free-XOR, 3-row reduction and point-and-permute.

Wire labels are plain Python ints holding 80 bits; the least significant bit
is the select bit.  Labels serialize as 10 bytes, most significant byte first.
"""

from __future__ import annotations

import hashlib
import json
import random
import struct
from dataclasses import dataclass

from .netlist import Circuit, Op, validate

LABEL_BITS = 80
LABEL_BYTES = LABEL_BITS // 8
LABEL_MASK = (1 << LABEL_BITS) - 1
ROWS_PER_AND = 3
CIPHERTEXT_BITS_PER_AND = ROWS_PER_AND * LABEL_BITS

MAGIC = b"SIFOGC1\0"


class InputMismatchError(ValueError):
    pass


class DecodeError(ValueError):
    pass


class ContainerError(ValueError):
    pass


def _rng(seed) -> random.Random:
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def new_delta(seed) -> int:
    """80 random bits with the select bit forced to 1."""
    return _rng(seed).getrandbits(LABEL_BITS) | 1


def select_bit(label: int) -> int:
    return label & 1


def label_bytes(label: int) -> bytes:
    return label.to_bytes(LABEL_BYTES, "big")


def hash_gate(k_a: int, k_b: int, g: int) -> int:
    """First 80 bits of SHA-1(k_a || k_b || g), g as 64-bit big-endian."""
    msg = k_a.to_bytes(LABEL_BYTES, "big") + k_b.to_bytes(LABEL_BYTES, "big") + g.to_bytes(8, "big")
    return int.from_bytes(hashlib.sha1(msg).digest()[:LABEL_BYTES], "big")


def garble_xor(label_a0: int, label_b0: int) -> int:
    return label_a0 ^ label_b0


def garble_and(g: int, label_i0: int, label_j0: int, delta: int) -> tuple[int, tuple[int, int, int]]:
    """Return the output 0-label and the three stored rows of AND gate ``g``.

    Rows are addressed by the select bits (s_i, s_j) of the active input
    labels; the (0, 0) row is never stored, its hash defines the output label.
    """
    p_i, p_j = label_i0 & 1, label_j0 & 1
    hashes = [0] * 4
    values = [0] * 4
    for s_i in (0, 1):
        for s_j in (0, 1):
            b_i, b_j = s_i ^ p_i, s_j ^ p_j
            k_i = label_i0 ^ delta if b_i else label_i0
            k_j = label_j0 ^ delta if b_j else label_j0
            hashes[2 * s_i + s_j] = hash_gate(k_i, k_j, g)
            values[2 * s_i + s_j] = b_i & b_j
    label_k0 = hashes[0] ^ delta if values[0] else hashes[0]
    rows = tuple(
        hashes[pos] ^ (label_k0 ^ delta if values[pos] else label_k0)
        for pos in (1, 2, 3)
    )
    return label_k0, rows


def evaluate_and(g: int, k_i: int, k_j: int, table) -> int:
    pos = 2 * (k_i & 1) + (k_j & 1)
    h = hash_gate(k_i, k_j, g)
    return h if pos == 0 else h ^ table[pos - 1]


@dataclass(frozen=True)
class GarbledCircuit:
    """Garbler-side result.

    ``input_labels`` and ``output_decode`` map wire -> (label0, label1);
    ``zero_labels`` holds the public active label of each constant-zero wire.
    """

    delta: int
    input_labels: dict[int, tuple[int, int]]
    zero_labels: dict[int, int]
    and_tables: dict[int, tuple[int, int, int]]
    output_decode: dict[int, tuple[int, int]]

    @property
    def ciphertext_bits(self) -> int:
        return len(self.and_tables) * CIPHERTEXT_BITS_PER_AND

    def to_bytes(self) -> bytes:
        parts = [MAGIC, struct.pack(">Q", len(self.and_tables))]
        for gid in sorted(self.and_tables):
            parts.append(struct.pack(">Q", gid))
            parts.extend(label_bytes(r) for r in self.and_tables[gid])
        parts.append(struct.pack(">Q", len(self.input_labels)))
        for w in sorted(self.input_labels):
            l0, l1 = self.input_labels[w]
            parts += [struct.pack(">Q", w), label_bytes(l0), label_bytes(l1)]
        parts.append(struct.pack(">Q", len(self.output_decode)))
        for w in sorted(self.output_decode):
            l0, l1 = self.output_decode[w]
            parts += [struct.pack(">Q", w), label_bytes(l0), label_bytes(l1)]
        parts.append(struct.pack(">Q", len(self.zero_labels)))
        for w in sorted(self.zero_labels):
            parts += [struct.pack(">Q", w), label_bytes(self.zero_labels[w])]
        parts.append(label_bytes(self.delta))
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data: bytes) -> "GarbledCircuit":
        if data[:8] != MAGIC:
            raise ContainerError("not a garbled-circuit container (bad magic)")
        pos = 8

        def take(n):
            nonlocal pos
            if pos + n > len(data):
                raise ContainerError("truncated garbled-circuit container")
            chunk = data[pos:pos + n]
            pos += n
            return chunk

        def u64():
            return struct.unpack(">Q", take(8))[0]

        def label():
            return int.from_bytes(take(LABEL_BYTES), "big")

        tables = {}
        for _ in range(u64()):
            gid = u64()
            tables[gid] = (label(), label(), label())
        inputs = {}
        for _ in range(u64()):
            w = u64()
            inputs[w] = (label(), label())
        decode = {}
        for _ in range(u64()):
            w = u64()
            decode[w] = (label(), label())
        zeros = {}
        for _ in range(u64()):
            w = u64()
            zeros[w] = label()
        delta = label()
        if pos != len(data):
            raise ContainerError("trailing bytes after garbled-circuit container")
        return cls(delta, inputs, zeros, tables, decode)

    def to_json(self) -> str:
        def hx(x):
            return label_bytes(x).hex()

        return json.dumps({
            "delta": hx(self.delta),
            "and_tables": {str(g): [hx(r) for r in rows] for g, rows in sorted(self.and_tables.items())},
            "input_labels": {str(w): [hx(a), hx(b)] for w, (a, b) in sorted(self.input_labels.items())},
            "zero_labels": {str(w): hx(v) for w, v in sorted(self.zero_labels.items())},
            "output_decode": {str(w): [hx(a), hx(b)] for w, (a, b) in sorted(self.output_decode.items())},
        }, indent=1)


def garble_circuit(c: Circuit, seed=0) -> GarbledCircuit:
    """Garble ``c``; the result is a pure function of (circuit, seed)."""
    validate(c)
    rng = _rng(seed)
    delta = new_delta(rng)
    label0: dict[int, int] = {}
    for w in sorted(set(c.inputs) | set(c.zeros)):
        label0[w] = rng.getrandbits(LABEL_BITS)
    tables = {}
    for g in c.gates:
        a, b = label0[g.in0], label0[g.in1]
        if g.op is Op.XOR:
            label0[g.out] = a ^ b
        else:
            label0[g.out], tables[g.id] = garble_and(g.id, a, b, delta)
    return GarbledCircuit(
        delta=delta,
        input_labels={w: (label0[w], label0[w] ^ delta) for w in c.inputs},
        zero_labels={w: label0[w] for w in c.zeros},
        and_tables=tables,
        output_decode={w: (label0[w], label0[w] ^ delta) for w in c.outputs},
    )


def encode_inputs(gc: GarbledCircuit, assignment: dict[int, int]) -> dict[int, int]:
    """Active labels for the given input bits, plus the constant-zero wires."""
    expected = set(gc.input_labels)
    given = set(assignment)
    if given != expected:
        missing = sorted(expected - given)
        extra = sorted(given - expected)
        raise InputMismatchError(f"input assignment mismatch: missing {missing[:8]}, extra {extra[:8]}")
    active = {w: gc.input_labels[w][1 if bit else 0] for w, bit in assignment.items()}
    active.update(gc.zero_labels)
    return active


def evaluate_circuit(c: Circuit, and_tables, active_inputs: dict[int, int]) -> dict[int, int]:
    """Evaluate gate by gate from active labels only; returns output labels."""
    missing = [w for w in (*c.inputs, *c.zeros) if w not in active_inputs]
    if missing:
        raise InputMismatchError(f"no active label for input wires {missing[:8]}")
    wires = dict(active_inputs)
    for g in c.gates:
        if g.op is Op.XOR:
            wires[g.out] = wires[g.in0] ^ wires[g.in1]
        else:
            wires[g.out] = evaluate_and(g.id, wires[g.in0], wires[g.in1], and_tables[g.id])
    return {w: wires[w] for w in c.outputs}


def decode_outputs(gc: GarbledCircuit, active_outputs: dict[int, int]) -> dict[int, int]:
    bits = {}
    for w, label in active_outputs.items():
        l0, l1 = gc.output_decode[w]
        if label == l0:
            bits[w] = 0
        elif label == l1:
            bits[w] = 1
        else:
            raise DecodeError(f"label on output wire {w} matches neither decode entry")
    return bits


def cleartext_evaluate(c: Circuit, assignment: dict[int, int]) -> dict[int, int]:
    if set(assignment) != set(c.inputs):
        raise InputMismatchError("assignment must cover exactly the primary inputs")
    wires = dict(assignment)
    wires.update(dict.fromkeys(c.zeros, 0))
    for g in c.gates:
        if g.op is Op.XOR:
            wires[g.out] = wires[g.in0] ^ wires[g.in1]
        else:
            wires[g.out] = wires[g.in0] & wires[g.in1]
    return {w: wires[w] for w in c.outputs}


def round_trip(c: Circuit, gc: GarbledCircuit, assignment: dict[int, int]) -> dict[int, int]:
    """Encode, evaluate and decode one assignment against a garbling."""
    active = encode_inputs(gc, assignment)
    return decode_outputs(gc, evaluate_circuit(c, gc.and_tables, active))
