"""Shared hypothesis strategies."""

from hypothesis import strategies as st

from sifo.netlist import Circuit, Gate, Op


@st.composite
def random_circuits(draw):
    n_in = draw(st.integers(1, 6))
    wires = list(range(n_in))
    gates = []
    for gid in range(draw(st.integers(0, 25))):
        a = draw(st.sampled_from(wires))
        b = draw(st.sampled_from(wires))
        out = len(wires)
        gates.append(Gate(gid, draw(st.sampled_from([Op.AND, Op.XOR])), a, b, out))
        wires.append(out)
    outs = draw(st.lists(st.sampled_from(wires), max_size=4, unique=True))
    return Circuit(tuple(gates), (tuple(range(n_in)),), tuple(outs))
