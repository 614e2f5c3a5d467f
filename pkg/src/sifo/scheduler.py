"""Host-side pipeline: levelization, batching onto overlay cells, memory
placement policies, wire statistics and packed register addresses.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from enum import Enum

from .netlist import Circuit, Op

LABEL_BITS = 80
ADDR_BITS = 20
ADDR_LIMIT = 1 << ADDR_BITS
FIELD_BITS = ADDR_BITS + 1
FIELD_MASK = (1 << FIELD_BITS) - 1

# label slots: 6.75 Mbit and 13 Mbit of BRAM at 80 bits per label (1 Mbit = 1024 * 1000 bits)
MFU_DEFAULT_SLOTS = 86_400
DIRECT_DEFAULT_SLOTS = 166_400


class Policy(str, Enum):
    ALL_DDR = "all_ddr"
    DIRECTLY_USED = "directly_used"
    MOST_FREQUENTLY_USED = "most_frequently_used"

    @classmethod
    def parse(cls, text: str) -> "Policy":
        key = text.strip().lower().replace("-", "_")
        aliases = {"mfu": cls.MOST_FREQUENTLY_USED, "direct": cls.DIRECTLY_USED, "ddr": cls.ALL_DDR}
        if key in aliases:
            return aliases[key]
        return cls(key)


class AddressOverflowError(ValueError):
    pass


@dataclass(frozen=True)
class Layering:
    layer_of: dict[int, int]
    depth: int
    full_depth: int

    def layers(self, c: Circuit) -> list[list[int]]:
        """Gate ids per layer, index 0 is layer 1."""
        out: list[list[int]] = [[] for _ in range(self.full_depth)]
        for g in c.gates:
            out[self.layer_of[g.id] - 1].append(g.id)
        return out


def extract_layers(c: Circuit) -> Layering:
    """As-soon-as-possible levelization.

    ``depth`` only counts gates that reach a declared output; dead gates still
    get a layer.
    """
    wire_layer: dict[int, int] = {}
    layer_of: dict[int, int] = {}
    for g in c.gates:
        lv = 1 + max(wire_layer.get(g.in0, 0), wire_layer.get(g.in1, 0))
        layer_of[g.id] = lv
        wire_layer[g.out] = lv
    full_depth = max(layer_of.values(), default=0)

    producers = c.producers()
    live: set[int] = set()
    stack = [w for w in c.outputs if w in producers]
    while stack:
        g = producers[stack.pop()]
        if g.id in live:
            continue
        live.add(g.id)
        for w in (g.in0, g.in1):
            if w in producers:
                stack.append(w)
    depth = max((layer_of[i] for i in live), default=0)
    return Layering(layer_of, depth, full_depth)


@dataclass(frozen=True)
class LayerPlan:
    layer: int
    xor_stream: tuple[tuple[int, int], ...]          # (gate id, XOR cell)
    and_batches: tuple[tuple[tuple[int, int], ...], ...]  # batches of (gate id, AND cell)


@dataclass(frozen=True)
class Schedule:
    n_and: int
    n_xor: int
    layers: tuple[LayerPlan, ...]

    def gate_ids(self):
        for plan in self.layers:
            for gid, _ in plan.xor_stream:
                yield gid
            for batch in plan.and_batches:
                for gid, _ in batch:
                    yield gid

    @property
    def n_and_batches(self) -> int:
        return sum(len(p.and_batches) for p in self.layers)

    def to_json(self) -> str:
        return json.dumps({
            "n_and": self.n_and,
            "n_xor": self.n_xor,
            "layers": [
                {"layer": p.layer, "xor": [list(x) for x in p.xor_stream],
                 "and_batches": [[list(x) for x in b] for b in p.and_batches]}
                for p in self.layers
            ],
        })


def make_schedule(c: Circuit, layering: Layering, n_and: int, n_xor: int) -> Schedule:
    if n_and < 1 or n_xor < 1:
        raise ValueError("need at least one AND cell and one XOR cell")
    ops = {g.id: g.op for g in c.gates}
    plans = []
    for idx, gids in enumerate(layering.layers(c), start=1):
        xors = [gid for gid in gids if ops[gid] is Op.XOR]
        ands = [gid for gid in gids if ops[gid] is Op.AND]
        stream = tuple((gid, i % n_xor) for i, gid in enumerate(xors))
        batches = tuple(
            tuple((gid, i) for i, gid in enumerate(ands[s:s + n_and]))
            for s in range(0, len(ands), n_and)
        )
        plans.append(LayerPlan(idx, stream, batches))
    return Schedule(n_and, n_xor, tuple(plans))


def reprogram_count(c: Circuit, n_and: int = 10) -> int:
    if n_and < 1:
        raise ValueError("n_and must be >= 1")
    return -(-c.n_and // n_and)


@dataclass(frozen=True)
class Placement:
    bram: bool
    addr: int


@dataclass
class MemoryMap:
    placement: dict[int, Placement]
    bram_capacity_labels: int
    policy: Policy
    peak_live_slots: int = 0

    @property
    def bram_wires(self) -> list[int]:
        return sorted(w for w, p in self.placement.items() if p.bram)

    def to_json(self) -> str:
        return json.dumps({
            "policy": self.policy.value,
            "bram_capacity_labels": self.bram_capacity_labels,
            "placement": {str(w): ["bram" if p.bram else "ddr", p.addr] for w, p in sorted(self.placement.items())},
        })


def _all_wires(c: Circuit) -> list[int]:
    return [*c.inputs, *c.zeros, *(g.out for g in c.gates)]


def allocate_all_ddr(c: Circuit) -> MemoryMap:
    return MemoryMap({w: Placement(False, w) for w in _all_wires(c)}, 0, Policy.ALL_DDR)


def _consumers(c: Circuit) -> dict[int, list[int]]:
    users: dict[int, list[int]] = {w: [] for w in _all_wires(c)}
    for g in c.gates:
        users[g.in0].append(g.id)
        users[g.in1].append(g.id)
    return users


def adjacent_one_to_one(c: Circuit, layering: Layering) -> list[int]:
    """Gate-output wires read exactly once, by a gate in the next layer."""
    users = _consumers(c)
    lo = layering.layer_of
    out = []
    for g in c.gates:
        u = users[g.out]
        if len(u) == 1 and lo[u[0]] == lo[g.id] + 1:
            out.append(g.out)
    return out


def allocate_directly_used(c: Circuit, layering: Layering,
                           bram_capacity_labels: int = DIRECT_DEFAULT_SLOTS) -> MemoryMap:
    """Ping-pong BRAM for wires consumed once in the adjacent layer.

    Wires produced in an odd layer use the first half of BRAM, even layers the
    second; a layer's eligible wires beyond half the capacity spill to DDR.
    """
    half = bram_capacity_labels // 2
    placement = {w: Placement(False, w) for w in _all_wires(c)}
    producer_layer = {g.out: layering.layer_of[g.id] for g in c.gates}
    per_layer: dict[int, list[int]] = {}
    for w in adjacent_one_to_one(c, layering):
        per_layer.setdefault(producer_layer[w], []).append(w)
    used = {}
    for lv, wires in per_layer.items():
        wires.sort()
        base = (lv % 2) * half
        for i, w in enumerate(wires[:half]):
            placement[w] = Placement(True, base + i)
        used[lv] = min(len(wires), half)
    peak = max((used.get(lv, 0) + used.get(lv - 1, 0) for lv in used), default=0)
    return MemoryMap(placement, bram_capacity_labels, Policy.DIRECTLY_USED, peak)


def access_counts(c: Circuit) -> dict[int, int]:
    """Reads plus the single write of every wire."""
    counts = {w: 1 for w in _all_wires(c)}
    for g in c.gates:
        counts[g.in0] += 1
        counts[g.in1] += 1
    return counts


def allocate_mfu(c: Circuit, bram_capacity_labels: int = MFU_DEFAULT_SLOTS) -> MemoryMap:
    counts = access_counts(c)
    ranked = sorted(counts, key=lambda w: (-counts[w], w))
    placement = {w: Placement(False, w) for w in ranked}
    for slot, w in enumerate(ranked[:bram_capacity_labels]):
        placement[w] = Placement(True, slot)
    peak = min(len(ranked), bram_capacity_labels)
    return MemoryMap(placement, bram_capacity_labels, Policy.MOST_FREQUENTLY_USED, peak)


def allocate(c: Circuit, layering: Layering, policy: Policy, capacity: int | None = None) -> MemoryMap:
    policy = Policy.parse(policy) if isinstance(policy, str) else policy
    if policy is Policy.ALL_DDR:
        return allocate_all_ddr(c)
    if policy is Policy.DIRECTLY_USED:
        return allocate_directly_used(c, layering, DIRECT_DEFAULT_SLOTS if capacity is None else capacity)
    return allocate_mfu(c, MFU_DEFAULT_SLOTS if capacity is None else capacity)


@dataclass(frozen=True)
class WireStats:
    total: int
    one_to_one: int          # A: gate outputs read exactly once
    adjacent_gates: int      # B
    nonadjacent_gates: int   # C
    max_per_layer: int       # D
    adjacent_wires: int      # 1-to-1 wires read in the next layer
    depth: int

    @property
    def wires_per_layer(self) -> float:
        return self.total / self.depth if self.depth else 0.0


def wire_stats(c: Circuit, layering: Layering) -> WireStats:
    users = _consumers(c)
    lo = layering.layer_of
    producer = {g.out: g.id for g in c.gates}
    one_to_one = {w for w, g in producer.items() if len(users[w]) == 1}
    per_layer: dict[int, int] = {}
    for w in one_to_one:
        per_layer[lo[producer[w]]] = per_layer.get(lo[producer[w]], 0) + 1
    adjacent = {w for w in one_to_one if lo[users[w][0]] == lo[producer[w]] + 1}
    b_gates = c_gates = 0
    for g in c.gates:
        ins = {g.in0, g.in1} & one_to_one
        if ins & adjacent:
            b_gates += 1
        if ins - adjacent:
            c_gates += 1
    return WireStats(
        total=c.wire_count,
        one_to_one=len(one_to_one),
        adjacent_gates=b_gates,
        nonadjacent_gates=c_gates,
        max_per_layer=max(per_layer.values(), default=0),
        adjacent_wires=len(adjacent),
        depth=layering.depth,
    )


def _field(p: Placement) -> int:
    if not 0 <= p.addr < ADDR_LIMIT:
        raise AddressOverflowError(f"address {p.addr} does not fit in {ADDR_BITS} bits")
    return (int(p.bram) << ADDR_BITS) | p.addr


def pack_addresses(in0: Placement, in1: Placement, out: Placement) -> tuple[int, int]:
    """Three (flag, 20-bit address) fields packed into two 32-bit registers."""
    word = (_field(out) << (2 * FIELD_BITS)) | (_field(in1) << FIELD_BITS) | _field(in0)
    return word & 0xFFFFFFFF, word >> 32


def unpack_addresses(reg0: int, reg1: int) -> tuple[Placement, Placement, Placement]:
    word = (reg1 << 32) | reg0
    fields = [(word >> (i * FIELD_BITS)) & FIELD_MASK for i in range(3)]
    return tuple(Placement(bool(f >> ADDR_BITS), f & (ADDR_LIMIT - 1)) for f in fields)


# ---------------------------------------------------------------------------
# Binary trace: the host->overlay register stream.
#
#   header  "SIFOTR1\0", u8 packed, u8 reserved, u16 n_and, u16 n_xor, u64 records
#   record  u8 kind (0 XOR, 1 AND), u8 flags, u16 cell, then either
#           packed:   u32 reg0, u32 reg1
#           unpacked: 3 x u32 (bit 31 = BRAM flag, low 31 bits = address)
#   flags   bit0 = last gate of an AND batch, bit1 = last gate of a layer
# ---------------------------------------------------------------------------

TRACE_MAGIC = b"SIFOTR1\0"
KIND_XOR, KIND_AND = 0, 1
END_BATCH, END_LAYER = 1, 2


@dataclass(slots=True)
class TraceOp:
    kind: int
    cell: int
    in0: Placement
    in1: Placement
    out: Placement
    flags: int = 0


def trace_ops(c: Circuit, schedule: Schedule, memmap: MemoryMap) -> list[TraceOp]:
    gates = c.gates
    pl = memmap.placement
    ops = []
    for plan in schedule.layers:
        layer_ops = []
        for gid, cell in plan.xor_stream:
            g = gates[gid]
            layer_ops.append(TraceOp(KIND_XOR, cell, pl[g.in0], pl[g.in1], pl[g.out]))
        for batch in plan.and_batches:
            for gid, cell in batch:
                g = gates[gid]
                layer_ops.append(TraceOp(KIND_AND, cell, pl[g.in0], pl[g.in1], pl[g.out]))
            layer_ops[-1].flags |= END_BATCH
        if layer_ops:
            layer_ops[-1].flags |= END_LAYER
        ops.extend(layer_ops)
    return ops


def _unpacked_word(p: Placement) -> int:
    if not 0 <= p.addr < (1 << 31):
        raise AddressOverflowError(f"address {p.addr} does not fit in 31 bits")
    return (int(p.bram) << 31) | p.addr


def encode_trace(ops: list[TraceOp], n_and: int, n_xor: int, packed: bool) -> bytes:
    out = [TRACE_MAGIC, struct.pack(">BBHHQ", int(packed), 0, n_and, n_xor, len(ops))]
    for op in ops:
        head = struct.pack(">BBH", op.kind, op.flags, op.cell)
        if packed:
            body = struct.pack(">II", *pack_addresses(op.in0, op.in1, op.out))
        else:
            body = struct.pack(">III", *map(_unpacked_word, (op.in0, op.in1, op.out)))
        out.append(head + body)
    return b"".join(out)


def decode_trace(data: bytes) -> tuple[list[TraceOp], int, int, bool]:
    if data[:8] != TRACE_MAGIC:
        raise ValueError("not a schedule trace (bad magic)")
    packed, _, n_and, n_xor, count = struct.unpack_from(">BBHHQ", data, 8)
    pos = 8 + 14
    size = 12 if packed else 16
    if len(data) != pos + count * size:
        raise ValueError("trace length does not match its record count")
    ops = []
    for _ in range(count):
        kind, flags, cell = struct.unpack_from(">BBH", data, pos)
        if packed:
            r0, r1 = struct.unpack_from(">II", data, pos + 4)
            a, b, o = unpack_addresses(r0, r1)
        else:
            words = struct.unpack_from(">III", data, pos + 4)
            a, b, o = (Placement(bool(w >> 31), w & 0x7FFFFFFF) for w in words)
        ops.append(TraceOp(kind, cell, a, b, o, flags))
        pos += size
    return ops, n_and, n_xor, bool(packed)

