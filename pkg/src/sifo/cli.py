"""Command-line entry point.

Exit status: 0 success, 1 verification failure, 2 usage or parse error,
3 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import random
import secrets
import sys
from pathlib import Path

from . import analysis, gc, genlib, netlist, plots, scheduler, sim

DEFAULT_SEED = 20240601
EXHAUSTIVE_LIMIT = 20

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- helpers

def _source(args):
    """Return (circuit, ProblemSpec or None, display name)."""
    has_spec = args.kind is not None
    if has_spec and args.netlist:
        raise UsageError("give either --kind/--width/--dim or --netlist, not both")
    if not has_spec and not args.netlist:
        if args.width is not None or args.dim is not None:
            raise UsageError("--width/--dim need --kind")
        raise UsageError("an input is required: --kind ... or --netlist FILE")
    if args.netlist:
        if args.width is not None or args.dim is not None:
            raise UsageError("give either --kind/--width/--dim or --netlist, not both")
        path = Path(args.netlist)
        if path.suffix == ".json":
            c = netlist.from_json(path.read_text(encoding="utf-8"))
        else:
            c = netlist.load(path)
        return c, None, path.stem
    if args.width is None:
        raise UsageError("--kind needs --width")
    try:
        spec = genlib.parse_kind_spec(args.kind, args.width, args.dim)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return spec.build(), spec, spec.name


def _seed(text):
    if text == "random":
        return secrets.randbits(64)
    try:
        return int(text, 0)
    except ValueError:
        raise UsageError(f"--seed expects an integer or 'random', got {text!r}") from None


def _int_pair(text, flag):
    parts = text.split(",")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise UsageError(f"{flag} expects integers, got {text!r}") from None
    if len(vals) == 1:
        vals = vals * 2
    if len(vals) != 2 or min(vals) < 1:
        raise UsageError(f"{flag} expects N or A,X with positive counts")
    return tuple(vals)


def _params(args) -> sim.TimingParams:
    n_and, n_xor = _int_pair(args.cells, "--cells")
    overrides = {
        "ddr_latency_ns": args.ddr_latency_ns,
        "reg_write_ns": args.reg_write_ns,
        "gand_latency_cycles": args.gand_cycles,
        "local_clock_hz": args.local_clock_hz,
        "ddr_ports": args.ddr_ports,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return sim.TimingParams(n_and_cells=n_and, n_xor_cells=n_xor, **overrides)


def _options(args) -> sim.SimOptions:
    try:
        policy = scheduler.Policy.parse(args.policy)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return sim.SimOptions(
        overlap_comm_compute=args.overlap,
        xor_nosync=args.xor_nosync,
        packed_addresses=args.packed,
        policy=policy,
    )


def _emit(text: str, out):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _config(args, **extra) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func", "print_config")}
    cfg.update(extra)
    return cfg


def _render(rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(rows, indent=1) + "\n"
    if fmt == "csv":
        return analysis.csv_table(rows)
    return analysis.text_table(rows)


# ---------------------------------------------------------------- commands

def cmd_gen(args) -> int:
    c, _, _ = _source(args)
    text = netlist.to_json(c) + "\n" if args.format == "json" else netlist.write(c)
    _emit(text, args.output)
    return EXIT_OK


def cmd_garble(args) -> int:
    c, _, name = _source(args)
    g = gc.garble_circuit(c, args.seed)
    data = g.to_bytes()
    if args.output:
        Path(args.output).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        return EXIT_OK
    info = {"problem": name, "and_tables": len(g.and_tables), "ciphertext_bits": g.ciphertext_bits,
            "bytes": len(data), "sha256": hashlib.sha256(data).hexdigest()}
    if args.format == "json":
        print(json.dumps(info))
    else:
        print(analysis.text_table([info]), end="")
    return EXIT_OK


def _assignments(c, spec, trials, rng):
    """Yield (assignment, operands or None); exhaustive for small input counts."""
    n = len(c.inputs)
    if n <= EXHAUSTIVE_LIMIT:
        for bits in itertools.product((0, 1), repeat=n):
            assignment = dict(zip(c.inputs, bits))
            yield assignment, _operands(spec, c, assignment)
        return
    for _ in range(trials):
        if spec is not None:
            ops = spec.random_operands(rng)
            yield spec.encode(c, ops), ops
        else:
            yield {w: rng.getrandbits(1) for w in c.inputs}, None


def _operands(spec, c, assignment):
    if spec is None:
        return None
    bits = [assignment[w] for w in c.inputs]
    w = spec.width
    return [sum(b << i for i, b in enumerate(bits[k:k + w])) for k in range(0, len(bits), w)]


def cmd_verify(args) -> int:
    c, spec, name = _source(args)
    if args.garbled:
        try:
            g = gc.GarbledCircuit.from_bytes(Path(args.garbled).read_bytes())
        except gc.ContainerError as exc:
            print(f"verify: {exc}", file=sys.stderr)
            return EXIT_FAIL
    else:
        g = gc.garble_circuit(c, args.seed)
    rng = random.Random(args.seed)
    passed = total = 0
    first_error = None
    for assignment, ops in _assignments(c, spec, args.trials, rng):
        total += 1
        expect = gc.cleartext_evaluate(c, assignment)
        try:
            got = gc.round_trip(c, g, assignment)
        except (gc.DecodeError, gc.InputMismatchError, KeyError) as exc:
            first_error = first_error or f"{type(exc).__name__}: {exc}"
            continue
        ok = got == expect
        if ok and spec is not None and len(c.inputs) == spec.width * spec.n_operands:
            ok = spec.decode(c, got) == spec.reference(ops)
        passed += ok
    mode = "exhaustive" if len(c.inputs) <= EXHAUSTIVE_LIMIT else "random"
    result = {"problem": name, "mode": mode, "passed": passed, "total": total}
    if args.format == "json":
        print(json.dumps(result))
    else:
        print(f"{name}: {passed}/{total} pass ({mode})")
    if first_error:
        print(f"verify: {first_error}", file=sys.stderr)
    return EXIT_OK if passed == total else EXIT_FAIL


def cmd_stats(args) -> int:
    c, spec, name = _source(args)
    rep = analysis.benchmark_report(name, c)
    if args.format == "json":
        _emit(json.dumps(rep, indent=1) + "\n", args.output)
        return EXIT_OK
    gate = {"problem": name, **rep["gate_info"]}
    wire = {"problem": name, **rep["wire_info"]}
    pct = {"problem": name, **rep["wire_percent"]}
    if args.format == "csv":
        text = "\n".join(analysis.csv_table(r) for r in ([gate], [wire], [pct], rep["comparison"]) if r)
    else:
        parts = ["Gate information\n" + analysis.text_table([gate]),
                 "Wire information\n" + analysis.text_table([wire]),
                 "Wire percent\n" + analysis.text_table([pct])]
        if rep["comparison"]:
            parts.append("Reference comparison\n" + analysis.text_table(rep["comparison"]))
        text = "\n".join(parts)
    _emit(text, args.output)
    return EXIT_OK


def cmd_schedule(args) -> int:
    c, _, name = _source(args)
    params = _params(args)
    opts = _options(args)
    layering = scheduler.extract_layers(c)
    sched = scheduler.make_schedule(c, layering, params.n_and_cells, params.n_xor_cells)
    memmap = scheduler.allocate(c, layering, opts.policy, args.capacity)
    if args.format == "json":
        doc = {"problem": name, "schedule": json.loads(sched.to_json()),
               "memory_map": json.loads(memmap.to_json())}
        _emit(json.dumps(doc) + "\n", args.output)
    else:
        rows = [{"layer": p.layer, "xors": len(p.xor_stream), "and_batches": len(p.and_batches),
                 "ands": sum(len(b) for b in p.and_batches)} for p in sched.layers]
        _emit(_render(rows, args.format), args.output)
    if args.trace:
        ops = scheduler.trace_ops(c, sched, memmap)
        Path(args.trace).write_bytes(
            scheduler.encode_trace(ops, params.n_and_cells, params.n_xor_cells, opts.packed_addresses))
    return EXIT_OK


def cmd_simulate(args) -> int:
    c, _, name = _source(args)
    params = _params(args)
    opts = _options(args)
    figdir = Path(args.figures) if args.figures else None
    if args.sweep_cells:
        # "5,10,15" or "5:5,10:10" (AND:XOR)
        counts = [_int_pair(part.replace(":", ","), "--sweep-cells") for part in args.sweep_cells.split(",")]
        rows = sim.sweep_cells(c, params, counts, opts)
        fmt = "csv" if args.format == "table" else args.format
        _emit(_render(rows, fmt), args.output)
        if figdir:
            plots.plot_sweep(rows, figdir / "sweep.png", name)
        return EXIT_OK
    if args.compare_policies:
        rows = sim.compare_policies(c, params, opts)
        _emit(_render(rows, args.format), args.output)
        if figdir:
            plots.plot_policies(rows, figdir / "policies.png", name)
        return EXIT_OK
    layering = scheduler.extract_layers(c)
    sched = scheduler.make_schedule(c, layering, params.n_and_cells, params.n_xor_cells)
    memmap = scheduler.allocate(c, layering, opts.policy, args.capacity)
    rep = sim.simulate(c, sched, memmap, params, opts)
    if args.trace:
        ops = scheduler.trace_ops(c, sched, memmap)
        Path(args.trace).write_bytes(
            scheduler.encode_trace(ops, params.n_and_cells, params.n_xor_cells, opts.packed_addresses))
    if args.format == "json":
        _emit(rep.to_json(layers=args.layers) + "\n", args.output)
    elif args.format == "csv":
        _emit(analysis.csv_table([rep.summary()]), args.output)
    else:
        _emit(rep.to_table(), args.output)
    if figdir:
        sizes = [(sum(len(b) for b in p.and_batches), len(p.xor_stream)) for p in sched.layers]
        plots.plot_layer_profile(sizes, figdir / "layers.png", name)
    return EXIT_OK


def _selected_benchmarks(args):
    specs = list(genlib.BENCHMARKS)
    if args.max_gates is not None:
        specs = [s for s in specs if _estimated_gates(s) <= args.max_gates]
    return specs


def _estimated_gates(spec) -> int:
    ref = analysis.reference_values()["gate_info"]["rows"].get(spec.name)
    return ref["values"][5] if ref else 0


def cmd_report(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gate_rows, wire_rows, pct_rows, cmp_rows = [], [], [], []
    for spec in _selected_benchmarks(args):
        c = spec.build()
        rep = analysis.benchmark_report(spec.name, c)
        gate_rows.append({"problem": spec.name, **rep["gate_info"]})
        wire_rows.append({"problem": spec.name, **rep["wire_info"]})
        pct_rows.append({"problem": spec.name, **rep["wire_percent"]})
        cmp_rows.extend(rep["comparison"])
    bw_rows = analysis.bandwidth_rows()
    tables = {"gate_info": gate_rows, "wire_info": wire_rows, "wire_percent": pct_rows,
              "comparison": cmp_rows, "bandwidth": bw_rows}
    for key, rows in tables.items():
        (out / f"{key}.csv").write_text(analysis.csv_table(rows), encoding="utf-8")

    sim_spec = genlib.parse_kind_spec(args.sim_kind, args.sim_width, args.sim_dim)
    c = sim_spec.build()
    params = _params(args)
    opts = _options(args)
    sweep = sim.sweep_cells(c, params, [(5, 5), (10, 10), (15, 15)], opts)
    policies = sim.compare_policies(c, params, opts)
    (out / "sweep.csv").write_text(analysis.csv_table(sweep), encoding="utf-8")
    (out / "policies.csv").write_text(analysis.csv_table(policies), encoding="utf-8")
    layering = scheduler.extract_layers(c)
    sizes = [(sum(1 for gid in layer if c.gates[gid].op is netlist.Op.AND),
              sum(1 for gid in layer if c.gates[gid].op is netlist.Op.XOR))
             for layer in layering.layers(c)]
    figs = [plots.plot_sweep(sweep, out / "sweep.png", sim_spec.name),
            plots.plot_policies(policies, out / "policies.png", sim_spec.name),
            plots.plot_layer_profile(sizes, out / "layers.png", sim_spec.name)]

    n_exact = sum(1 for r in cmp_rows if r["status"] == "exact")
    n_exact_ok = sum(1 for r in cmp_rows if r["status"] == "exact" and r["match"])
    if args.format == "json":
        print(json.dumps({**tables, "sweep": sweep, "policies": policies,
                          "figures": [str(p) for p in figs]}, indent=1))
    else:
        render = analysis.csv_table if args.format == "csv" else analysis.text_table
        for key, rows in (*tables.items(), ("sweep", sweep), ("policies", policies)):
            print(f"== {key}")
            print(render(rows))
        print(f"exact reference values matched: {n_exact_ok}/{n_exact}")
        print("figures: " + ", ".join(str(p) for p in figs))
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_source(p):
    p.add_argument("--kind", help="adder, hamming, mult, sorter or matmul")
    p.add_argument("--width", type=int, help="bits per operand")
    p.add_argument("--dim", type=int, help="element count (sorter) or matrix dimension (matmul)")
    p.add_argument("--netlist", help=".gcn or .json netlist file")


def _add_sim(p):
    p.add_argument("--cells", default="10,10", help="AND,XOR cell counts (default 10,10)")
    p.add_argument("--policy", default="all-ddr", help="all-ddr, directly-used or mfu")
    p.add_argument("--capacity", type=int, help="BRAM slots for the chosen policy")
    p.add_argument("--overlap", action="store_true", help="overlap host writes with compute")
    p.add_argument("--xor-nosync", action="store_true", help="stream XORs without batch sync")
    p.add_argument("--packed", action="store_true", help="pack three addresses into two registers")
    p.add_argument("--ddr-latency-ns", type=float)
    p.add_argument("--reg-write-ns", type=float)
    p.add_argument("--gand-cycles", type=int)
    p.add_argument("--local-clock-hz", type=float)
    p.add_argument("--ddr-ports", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sifo", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", default=str(DEFAULT_SEED), help="integer or 'random'")
    common.add_argument("--format", choices=("table", "csv", "json"), default="table")
    common.add_argument("-o", "--output", help="write the main output here instead of stdout")
    common.add_argument("--print-config", action="store_true", help="dump the effective config to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="emit a generated netlist")
    _add_source(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("garble", parents=[common], help="garble a circuit into a binary container")
    _add_source(p)
    p.set_defaults(func=cmd_garble)

    p = sub.add_parser("verify", parents=[common], help="garbled round trip against the cleartext oracle")
    _add_source(p)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--garbled", help="evaluate this container instead of garbling afresh")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("stats", parents=[common], help="gate and wire statistics")
    _add_source(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("schedule", parents=[common], help="layer/batch schedule and memory map")
    _add_source(p)
    _add_sim(p)
    p.add_argument("--trace", help="write the encoded register trace here")
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("simulate", parents=[common], help="overlay timing model")
    _add_source(p)
    _add_sim(p)
    p.add_argument("--sweep-cells", help="comma list of cell counts, e.g. 5,10,15")
    p.add_argument("--compare-policies", action="store_true")
    p.add_argument("--trace", help="write the encoded register trace here")
    p.add_argument("--layers", action="store_true", help="include per-layer timing in JSON output")
    p.add_argument("--figures", help="directory for figures")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("report", parents=[common], help="benchmark tables, CSVs and figures")
    _add_sim(p)
    p.add_argument("--out-dir", default="report")
    p.add_argument("--max-gates", type=int, help="skip benchmarks larger than this")
    p.add_argument("--sim-kind", default="mult")
    p.add_argument("--sim-width", type=int, default=8)
    p.add_argument("--sim-dim", type=int)
    p.set_defaults(func=cmd_report, policy="directly-used", overlap=True)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.seed = _seed(args.seed)
        if args.print_config:
            print(json.dumps(_config(args), default=str, sort_keys=True), file=sys.stderr)
        return args.func(args)
    except UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except netlist.NetlistError as exc:
        print(f"{parser.prog}: parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, sim.ConfigurationError, scheduler.AddressOverflowError, ValueError) as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"{parser.prog}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
