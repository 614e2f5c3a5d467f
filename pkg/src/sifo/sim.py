"""Deterministic timing model of the garbling overlay.

The model walks the host->overlay register stream (see ``scheduler.TraceOp``)
layer by layer.  Per gate the dispatcher reads both inputs, runs the cell,
then writes the output; BRAM accesses cost ``bram_access_cycles`` local
cycles, every DDR access is an independent ``ddr_latency_ns`` transaction on
the earliest-free of ``ddr_ports`` ports.  All times are in nanoseconds.
"""

from __future__ import annotations

import csv
import heapq
import io
import json
from collections import deque
from dataclasses import asdict, dataclass, field, replace

from .netlist import Circuit
from .scheduler import (
    END_BATCH,
    END_LAYER,
    KIND_AND,
    Layering,
    MemoryMap,
    Policy,
    Schedule,
    TraceOp,
    allocate,
    extract_layers,
    make_schedule,
    trace_ops,
)


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class TimingParams:
    local_clock_hz: float = 200e6
    main_clock_hz: float = 300e6  # interface clock; DDR cost is given directly in ns
    gand_latency_cycles: int = 82
    gxor_latency_cycles: int = 1
    bram_access_cycles: int = 1
    ddr_latency_ns: float = 180.0
    reg_write_ns: float = 50.0
    ddr_word_bits: int = 512
    ddr_ports: int = 2
    n_and_cells: int = 10
    n_xor_cells: int = 10

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not value > 0:
                raise ConfigurationError(f"timing parameter {name} must be positive, got {value}")
        if self.ddr_word_bits < 80:
            raise ConfigurationError("a DDR word must hold at least one 80-bit label")

    @property
    def local_period_ns(self) -> float:
        return 1e9 / self.local_clock_hz

    @property
    def labels_per_ddr_word(self) -> int:
        return self.ddr_word_bits // 80

    def with_cells(self, n_and: int, n_xor: int) -> "TimingParams":
        return replace(self, n_and_cells=n_and, n_xor_cells=n_xor)


@dataclass(frozen=True)
class SimOptions:
    overlap_comm_compute: bool = False
    xor_nosync: bool = False
    packed_addresses: bool = False
    policy: Policy = Policy.ALL_DDR


@dataclass
class SimReport:
    total_ns: float = 0.0
    pcie_ns: float = 0.0
    compute_ns: float = 0.0
    mem_read_bram: int = 0
    mem_read_ddr: int = 0
    mem_write_bram: int = 0
    mem_write_ddr: int = 0
    n_gates: int = 0
    n_and_batches: int = 0
    xor_nosync_active: bool = False
    peak_live_bram_slots: int = 0
    layers: list = field(default_factory=list)

    @property
    def ddr_accesses(self) -> int:
        return self.mem_read_ddr + self.mem_write_ddr

    def summary(self) -> dict:
        d = asdict(self)
        d.pop("layers")
        d["ddr_accesses"] = self.ddr_accesses
        return d

    def to_json(self, layers: bool = True) -> str:
        d = self.summary()
        if layers:
            d["layers"] = self.layers
        return json.dumps(d, indent=1, sort_keys=True)

    def to_table(self) -> str:
        rows = [(k, v) for k, v in self.summary().items()]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k:<{width}}  {v}" for k, v in rows) + "\n"


def _peak_live_slots(ops: list[TraceOp]) -> int:
    """Max over layers of BRAM slots holding a value that is still to be read."""
    start: dict[int, int] = {}
    end: dict[int, int] = {}
    intervals = []
    layer = 1
    for op in ops:
        for p in (op.in0, op.in1):
            if p.bram:
                if p.addr not in start:
                    start[p.addr] = 0
                    end[p.addr] = 0
                end[p.addr] = max(end[p.addr], layer)
        o = op.out
        if o.bram:
            if o.addr in start:
                intervals.append((start[o.addr], end[o.addr]))
            start[o.addr] = end[o.addr] = layer
        if op.flags & END_LAYER:
            layer += 1
    intervals.extend((start[s], end[s]) for s in start)
    if not intervals:
        return 0
    delta = [0] * (layer + 2)
    for s, e in intervals:
        delta[s] += 1
        delta[e + 1] -= 1
    peak = live = 0
    for d in delta:
        live += d
        peak = max(peak, live)
    return peak


def _split_layers(ops: list[TraceOp]):
    layer: list[TraceOp] = []
    for op in ops:
        layer.append(op)
        if op.flags & END_LAYER:
            yield layer
            layer = []
    if layer:
        raise ConfigurationError("trace does not end on a layer boundary")


_START, _WRITE, _DONE = 0, 1, 2
# host send conditions
_WAIT_ALL, _WAIT_CELL, _WAIT_NONE = 0, 1, 2


def _host_program(xors, ands, overlap: bool, nosync: bool, n_and: int, n_xor: int):
    """Issue order for one layer as (op, wait condition, group id or None).

    A group's gates become visible to the overlay only once the whole group
    has crossed the link; ungrouped gates start as soon as they arrive.
    """
    items = []
    group = 0
    if nosync:
        g = None if overlap else group
        for k, op in enumerate(xors):
            items.append((op, _WAIT_ALL if k == 0 else _WAIT_NONE, g))
        group += 1
    else:
        for s in range(0, len(xors), n_xor):
            for k, op in enumerate(xors[s:s + n_xor]):
                items.append((op, _WAIT_ALL if k == 0 else _WAIT_NONE, None if overlap else group))
            group += 1
    if overlap:
        for op in ands:
            items.append((op, _WAIT_CELL, None))
    else:
        k = 0
        for op in ands:
            items.append((op, _WAIT_ALL if k == 0 else _WAIT_NONE, group))
            k += 1
            if op.flags & END_BATCH or k == n_and:
                group += 1
                k = 0
    if items:
        op, _, g = items[0]
        items[0] = (op, _WAIT_ALL, g)
    return items


def simulate_ops(ops: list[TraceOp], params: TimingParams, options: SimOptions) -> SimReport:
    """Run the timing model over a register stream.

    The host walks each layer in order: the XOR stream first, then the AND
    gates.  Without ``xor_nosync`` every XOR waits for the previous gate to
    finish.  Without overlap, AND batches are sent whole and the host waits
    for a batch to finish before sending the next; with overlap a gate is sent
    as soon as its cell is idle and starts on arrival.  DDR requests are served
    first-come first-served in simulated time on the earliest-free port.
    """
    period = params.local_period_ns
    bram_ns = params.bram_access_cycles * period
    ddr_ns = params.ddr_latency_ns
    and_ns = params.gand_latency_cycles * period
    xor_ns = params.gxor_latency_cycles * period
    link_ns = (2 if options.packed_addresses else 3) * params.reg_write_ns
    # streaming XORs without a handshake is only safe if the link is the slower side
    nosync = options.xor_nosync and link_ns >= xor_ns
    overlap = options.overlap_comm_compute

    ports = [0.0] * params.ddr_ports
    nports = range(len(ports))
    rep = SimReport(xor_nosync_active=nosync)
    link = 0.0
    prev_end = 0.0

    for index, layer in enumerate(_split_layers(ops), start=1):
        xors = [op for op in layer if op.kind != KIND_AND]
        ands = [op for op in layer if op.kind == KIND_AND]
        for op in xors:
            if op.cell >= params.n_xor_cells:
                raise ConfigurationError(f"XOR cell {op.cell} exceeds the {params.n_xor_cells} configured cells")
        n_batches = 0
        for k, op in enumerate(ands):
            if op.cell >= params.n_and_cells:
                raise ConfigurationError(f"AND cell {op.cell} exceeds the {params.n_and_cells} configured cells")
            if op.flags & END_BATCH or k == len(ands) - 1:
                n_batches += 1

        items = _host_program(xors, ands, overlap, nosync, params.n_and_cells, params.n_xor_cells)
        group_size: dict[int, int] = {}
        for _, _, g in items:
            if g is not None:
                group_size[g] = group_size.get(g, 0) + 1
        group_sent: dict[int, list] = {}

        link = max(link, prev_end)
        layer_link_start = link
        end = prev_end
        heap: list = []
        seq = 0
        queues: dict = {}
        busy: set = set()
        outstanding = 0
        h = 0

        def start_on_cell(op, t):
            nonlocal seq
            key = (op.kind, op.cell)
            q = queues.setdefault(key, deque())
            if key in busy or q:
                q.append((t, op))
            else:
                busy.add(key)
                heapq.heappush(heap, (t, seq, _START, op))
                seq += 1

        def host(now):
            nonlocal link, h, outstanding
            while h < len(items):
                op, cond, g = items[h]
                if cond == _WAIT_ALL and outstanding:
                    return
                if cond == _WAIT_CELL:
                    key = (op.kind, op.cell)
                    if key in busy or queues.get(key):
                        return
                link = max(link, now) + link_ns
                outstanding += 1
                h += 1
                if g is None:
                    start_on_cell(op, link)
                else:
                    sent = group_sent.setdefault(g, [])
                    sent.append(op)
                    if len(sent) == group_size[g]:
                        for member in sent:
                            start_on_cell(member, link)

        host(prev_end)
        while heap:
            t, _, typ, op = heapq.heappop(heap)
            if typ == _START:
                r = t
                for p in (op.in0, op.in1):
                    if p.bram:
                        rep.mem_read_bram += 1
                        if t + bram_ns > r:
                            r = t + bram_ns
                    else:
                        rep.mem_read_ddr += 1
                        j = min(nports, key=ports.__getitem__)
                        done = max(t, ports[j]) + ddr_ns
                        ports[j] = done
                        if done > r:
                            r = done
                lat = and_ns if op.kind == KIND_AND else xor_ns
                rep.compute_ns += lat
                heapq.heappush(heap, (r + lat, seq, _WRITE, op))
                seq += 1
            elif typ == _WRITE:
                if op.out.bram:
                    rep.mem_write_bram += 1
                    done = t + bram_ns
                else:
                    rep.mem_write_ddr += 1
                    j = min(nports, key=ports.__getitem__)
                    done = max(t, ports[j]) + ddr_ns
                    ports[j] = done
                heapq.heappush(heap, (done, seq, _DONE, op))
                seq += 1
            else:
                if t > end:
                    end = t
                outstanding -= 1
                key = (op.kind, op.cell)
                q = queues[key]
                if q:
                    arr, nxt = q.popleft()
                    heapq.heappush(heap, (max(arr, t), seq, _START, nxt))
                    seq += 1
                else:
                    busy.discard(key)
                host(t)
        if h != len(items):
            raise ConfigurationError(f"layer {index}: host stalled with gates unsent")

        rep.n_and_batches += n_batches
        rep.layers.append({
            "layer": index, "start_ns": layer_link_start, "end_ns": end,
            "n_and": len(ands), "n_xor": len(xors), "and_batches": n_batches,
        })
        prev_end = end

    rep.n_gates = len(ops)
    rep.pcie_ns = len(ops) * link_ns
    rep.total_ns = prev_end
    rep.peak_live_bram_slots = _peak_live_slots(ops)
    return rep


def simulate(c: Circuit, schedule: Schedule, memmap: MemoryMap,
             params: TimingParams, options: SimOptions) -> SimReport:
    scheduled = sorted(schedule.gate_ids())
    if scheduled != list(range(len(c.gates))):
        raise ConfigurationError("schedule does not cover every gate exactly once")
    if schedule.n_and > params.n_and_cells or schedule.n_xor > params.n_xor_cells:
        raise ConfigurationError("schedule uses more cells than the timing parameters provide")
    wires = {*c.inputs, *c.zeros, *(g.out for g in c.gates)}
    if not wires <= memmap.placement.keys():
        raise ConfigurationError("memory map does not place every wire")
    return simulate_ops(trace_ops(c, schedule, memmap), params, options)


def run(c: Circuit, params: TimingParams | None = None, options: SimOptions | None = None,
        layering: Layering | None = None, capacity: int | None = None) -> SimReport:
    """Levelize, schedule, allocate per ``options.policy`` and simulate."""
    params = params or TimingParams()
    options = options or SimOptions()
    layering = layering or extract_layers(c)
    schedule = make_schedule(c, layering, params.n_and_cells, params.n_xor_cells)
    memmap = allocate(c, layering, options.policy, capacity)
    return simulate(c, schedule, memmap, params, options)


POLICIES = (Policy.ALL_DDR, Policy.DIRECTLY_USED, Policy.MOST_FREQUENTLY_USED)


def compare_policies(c: Circuit, params: TimingParams | None = None,
                     options: SimOptions | None = None) -> list[dict]:
    options = options or SimOptions()
    layering = extract_layers(c)
    rows = []
    for policy in POLICIES:
        rep = run(c, params, replace(options, policy=policy), layering)
        rows.append({
            "policy": policy.value, "total_ns": rep.total_ns,
            "ddr_reads": rep.mem_read_ddr, "ddr_writes": rep.mem_write_ddr,
            "ddr_accesses": rep.ddr_accesses, "peak_live_bram_slots": rep.peak_live_bram_slots,
        })
    return rows


def sweep_cells(c: Circuit, params: TimingParams | None, cell_counts,
                options: SimOptions | None = None) -> list[dict]:
    cell_counts = list(cell_counts)
    if not cell_counts:
        raise ValueError("cell_counts must not be empty")
    params = params or TimingParams()
    layering = extract_layers(c)
    rows = []
    prev = None
    for entry in cell_counts:
        n_and, n_xor = entry if isinstance(entry, tuple) else (entry, entry)
        rep = run(c, params.with_cells(n_and, n_xor), options, layering)
        rows.append({
            "n_and": n_and, "n_xor": n_xor, "total_ns": rep.total_ns,
            "pcie_ns": rep.pcie_ns, "and_batches": rep.n_and_batches,
            "speedup_vs_prev": (prev / rep.total_ns) if prev and rep.total_ns else 1.0,
        })
        prev = rep.total_ns
    return rows


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()
