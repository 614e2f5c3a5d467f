"""Circuit statistics tables, reference comparison and bandwidth arithmetic."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from importlib import resources

from .netlist import Circuit
from .scheduler import Layering, WireStats, extract_layers, reprogram_count, wire_stats

BITS_PER_AND = 240  # three stored 80-bit rows


class UndefinedRatioError(ValueError):
    pass


@dataclass(frozen=True)
class GateStats:
    layers: int
    inputs: int
    outputs: int
    ands: int
    xors: int
    gates: int
    reprogram10: int


def gate_stats(c: Circuit, layering: Layering | None = None) -> GateStats:
    layering = layering or extract_layers(c)
    return GateStats(
        layers=layering.depth,
        inputs=len(c.inputs),
        outputs=len(c.outputs),
        ands=c.n_and,
        xors=c.n_xor,
        gates=len(c.gates),
        reprogram10=reprogram_count(c, 10),
    )


def wire_percent(stats: WireStats) -> dict[str, float]:
    if stats.total <= 0:
        raise UndefinedRatioError("wire percentages are undefined for a circuit without wires")
    if stats.one_to_one == 0:
        percent_b = math.nan
    else:
        percent_b = 100.0 * stats.adjacent_wires / stats.one_to_one
    return {
        "percent_a": 100.0 * stats.one_to_one / stats.total,
        "percent_b": percent_b,
        "percent_c": 100.0 * stats.adjacent_wires / stats.total,
    }


def wire_info_row(stats: WireStats) -> dict:
    return {
        "wires": stats.total,
        "a_wires": stats.one_to_one,
        "b_gates": stats.adjacent_gates,
        "c_gates": stats.nonadjacent_gates,
        "max_d": stats.max_per_layer,
        "wires_per_layer": stats.wires_per_layer,
    }


@dataclass(frozen=True)
class BandwidthEstimate:
    gates_per_second: float
    bits_per_second: float
    bits_per_and: int = BITS_PER_AND

    @property
    def mbit_per_second(self) -> float:
        return self.bits_per_second / 1e6


def bandwidth(n_ands: int, garble_time_s: float) -> BandwidthEstimate:
    """Evaluator-bound traffic for ``n_ands`` garbled in ``garble_time_s`` seconds."""
    if not garble_time_s > 0:
        raise ValueError("garble time must be positive")
    rate = n_ands / garble_time_s
    return BandwidthEstimate(rate, rate * BITS_PER_AND)


@lru_cache(maxsize=1)
def reference_values() -> dict:
    text = resources.files(__package__).joinpath("reference_values.json").read_text(encoding="utf-8")
    return json.loads(text)


def _status(row: dict, column: str) -> str:
    st = row.get("status", {})
    return st.get(column, st.get("*", "informational"))


def _matches(computed, published, decimals=None) -> bool:
    if isinstance(published, float) or isinstance(computed, float):
        # compare at the precision the reference was printed with
        if decimals is None:
            decimals = len(repr(float(published)).split(".")[1])
        return abs(round(computed, decimals) - published) <= 0.01
    return computed == published


def compare(table: str, name: str, computed: dict) -> list[dict]:
    """Side-by-side rows of computed vs reference values for one benchmark."""
    ref = reference_values()[table]
    row = ref["rows"].get(name)
    if row is None:
        return []
    decimals = ref.get("decimals")
    out = []
    for i, col in enumerate(ref["columns"]):
        published = row["values"][i]
        value = computed[col]
        out.append({
            "problem": name,
            "column": col,
            "computed": value,
            "reference": published,
            "match": _matches(value, published, decimals[i] if decimals else None),
            "status": _status(row, col),
        })
    return out


def benchmark_report(name: str, c: Circuit, layering: Layering | None = None) -> dict:
    layering = layering or extract_layers(c)
    gs = gate_stats(c, layering)
    ws = wire_stats(c, layering)
    wp = wire_percent(ws)
    return {
        "problem": name,
        "gate_info": asdict(gs),
        "wire_info": wire_info_row(ws),
        "wire_percent": wp,
        "comparison": (compare("gate_info", name, asdict(gs))
                       + compare("wire_info", name, wire_info_row(ws))
                       + compare("wire_percent", name, wp)),
    }


def bandwidth_rows() -> list[dict]:
    rows = []
    for ref in reference_values()["bandwidth"]:
        est = bandwidth(ref["ands"], ref["time_us"] * 1e-6)
        tol = ref["tolerance_rel"]
        rows.append({
            "problem": ref["problem"],
            "ands": ref["ands"],
            "time_us": ref["time_us"],
            "gates_per_second": est.gates_per_second,
            "mbit_per_second": est.mbit_per_second,
            "ref_gates_per_second": ref["gates_per_second"],
            "ref_mbit_per_second": ref["mbit_per_second"],
            "match": (abs(est.gates_per_second / ref["gates_per_second"] - 1) <= tol
                      and abs(est.mbit_per_second / ref["mbit_per_second"] - 1) <= tol),
            "status": ref["status"],
        })
    return rows


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.2f}"
    return str(v)


def text_table(rows: list[dict], columns: list[str] | None = None) -> str:
    if not rows:
        return ""
    columns = columns or list(rows[0])
    cells = [[_fmt(r[c]) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(v.rjust(w) if i else v.ljust(w) for i, (v, w) in enumerate(zip(row, widths)))
              for row in cells]
    return "\n".join(lines) + "\n"


def csv_table(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()
