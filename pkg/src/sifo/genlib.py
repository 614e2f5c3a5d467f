"""Deterministic generators for the benchmark circuits.

All operands are little-endian bit vectors (bit 0 first).  Every generator
allocates wires in the same fixed order, so output is a pure function of its
parameters.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .netlist import Circuit, Gate, Op

KINDS = ("adder", "hamming", "mult", "sorter", "matmul")
_ALIASES = {"hd": "hamming", "multiplier": "mult", "sort": "sorter", "m_mult": "matmul"}


class Builder:
    def __init__(self):
        self._next = 0
        self._groups: list[tuple[int, ...]] = []
        self._gates: list[Gate] = []
        self._zero: int | None = None

    def inputs(self, n: int) -> list[int]:
        ids = list(range(self._next, self._next + n))
        self._next += n
        self._groups.append(tuple(ids))
        return ids

    def extend_group(self, n: int) -> list[int]:
        """Append ``n`` more inputs to the most recent input group."""
        ids = list(range(self._next, self._next + n))
        self._next += n
        self._groups[-1] = self._groups[-1] + tuple(ids)
        return ids

    @property
    def zero(self) -> int:
        if self._zero is None:
            self._zero = self._next
            self._next += 1
        return self._zero

    def _gate(self, op, a, b):
        out = self._next
        self._next += 1
        self._gates.append(Gate(len(self._gates), op, a, b, out))
        return out

    def AND(self, a, b):
        return self._gate(Op.AND, a, b)

    def XOR(self, a, b):
        return self._gate(Op.XOR, a, b)

    def full_adder(self, a, b, c):
        """One AND, four XOR; returns (sum, carry)."""
        t1 = self.XOR(a, c)
        t2 = self.XOR(b, c)
        u = self.AND(t1, t2)
        carry = self.XOR(c, u)
        s = self.XOR(t1, b)
        return s, carry

    def ripple_add(self, xs, ys, carry=None, out_width=None):
        """Add two bit vectors.  The result has ``out_width`` bits (default
        max(len) + 1); when the final carry is not needed the top cell skips it.
        """
        n = max(len(xs), len(ys))
        if out_width is None:
            out_width = n + 1
        xs = list(xs) + [self.zero] * (n - len(xs))
        ys = list(ys) + [self.zero] * (n - len(ys))
        c = self.zero if carry is None else carry
        sums = []
        for i in range(min(n, out_width)):
            if i == n - 1 and out_width <= n:
                t1 = self.XOR(xs[i], c)
                sums.append(self.XOR(t1, ys[i]))
            else:
                s, c = self.full_adder(xs[i], ys[i], c)
                sums.append(s)
        if out_width > n:
            sums.append(c)
        return sums

    def greater_than(self, xs, ys):
        """1 iff xs > ys (unsigned); one AND per bit."""
        c = self.zero
        for x, y in zip(xs, ys):
            c = self.XOR(x, self.AND(self.XOR(x, c), self.XOR(y, c)))
        return c

    def mux(self, s, x, y):
        """x if s else y."""
        return self.XOR(y, self.AND(s, self.XOR(x, y)))

    def multiply(self, xs, ys):
        """Shift-add array multiplier with a full 2n-bit product."""
        n = len(xs)
        acc = [self.AND(xs[j], ys[0]) for j in range(n)]
        for i in range(1, len(ys)):
            row = [self.AND(xs[j], ys[i]) for j in range(n)]
            hi = acc[i:i + n]
            hi += [self.zero] * (n - len(hi))
            c = self.zero
            sums = []
            for j in range(n):
                s, c = self.full_adder(hi[j], row[j], c)
                sums.append(s)
            acc = acc[:i] + sums + [c]
        return acc

    def build(self, outputs) -> Circuit:
        zeros = () if self._zero is None else (self._zero,)
        return Circuit(tuple(self._gates), tuple(self._groups), tuple(outputs), zeros)


def gen_adder(n: int) -> Circuit:
    if n < 1:
        raise ValueError("adder width must be >= 1")
    b = Builder()
    xs, ys = b.inputs(n), b.inputs(n)
    c = b.zero
    sums = []
    for i in range(n):
        s, c = b.full_adder(xs[i], ys[i], c)
        sums.append(s)
    # final carry gates stay in the netlist but are not outputs
    return b.build(sums)


def gen_multiplier(n: int) -> Circuit:
    if n < 2:
        raise ValueError("multiplier width must be >= 2")
    b = Builder()
    xs, ys = b.inputs(n), b.inputs(n)
    return b.build(b.multiply(xs, ys))


def popcount_width(n: int) -> int:
    return max(1, n.bit_length())


def gen_hamming(n: int) -> Circuit:
    if n < 1:
        raise ValueError("hamming width must be >= 1")
    b = Builder()
    xs, ys = b.inputs(n), b.inputs(n)
    terms = [[b.XOR(x, y)] for x, y in zip(xs, ys)]
    # pairwise adder tree; every partial sum is widened by one bit
    while len(terms) > 1:
        nxt = []
        for i in range(0, len(terms) - 1, 2):
            nxt.append(b.ripple_add(terms[i], terms[i + 1]))
        if len(terms) % 2:
            nxt.append(terms[-1])
        terms = nxt
    bits = terms[0]
    width = popcount_width(n)
    bits = bits[:width] + [b.zero] * (width - len(bits))
    return b.build(bits)


def batcher_pairs(count: int) -> list[tuple[int, int]]:
    """Compare-exchange pairs of Batcher's odd-even merge sort, any ``count``."""
    pairs = []
    p = 1
    while p < count:
        k = p
        while k >= 1:
            j = k % p
            while j + k < count:
                for i in range(min(k, count - j - k)):
                    if (i + j) // (2 * p) == (i + j + k) // (2 * p):
                        pairs.append((i + j, i + j + k))
                j += 2 * k
            k //= 2
        p *= 2
    return pairs


def gen_sorter(count: int, width: int) -> Circuit:
    if count < 2 or width < 1:
        raise ValueError("sorter needs count >= 2 and width >= 1")
    b = Builder()
    half = count // 2
    first = b.inputs(half * width)
    second = b.inputs((count - half) * width)
    flat = first + second
    elems = [flat[i * width:(i + 1) * width] for i in range(count)]
    for i, j in batcher_pairs(count):
        x, y = elems[i], elems[j]
        gt = b.greater_than(x, y)
        lo = [b.mux(gt, yb, xb) for xb, yb in zip(x, y)]
        hi = [b.mux(gt, xb, yb) for xb, yb in zip(x, y)]
        elems[i], elems[j] = lo, hi
    return b.build([w for e in elems for w in e])


def matmul_out_width(dim: int, width: int) -> int:
    return 2 * width + (dim - 1).bit_length()


def gen_matmul(dim: int, width: int) -> Circuit:
    if dim < 1 or width < 1:
        raise ValueError("matmul needs dim >= 1 and width >= 1")
    if dim == 1 and width < 2:
        raise ValueError("1x1 matmul reduces to a multiplier, which needs width >= 2")
    b = Builder()
    a_bits = b.inputs(dim * dim * width)
    b_bits = b.inputs(dim * dim * width)
    A = [[a_bits[(i * dim + k) * width:(i * dim + k + 1) * width] for k in range(dim)] for i in range(dim)]
    B = [[b_bits[(k * dim + j) * width:(k * dim + j + 1) * width] for j in range(dim)] for k in range(dim)]
    out_width = matmul_out_width(dim, width)
    top = (1 << width) - 1
    outs = []
    for i in range(dim):
        for j in range(dim):
            acc = b.multiply(A[i][0], B[0][j])
            for k in range(1, dim):
                prod = b.multiply(A[i][k], B[k][j])
                need = ((k + 1) * top * top).bit_length()
                acc = b.ripple_add(acc, prod, out_width=max(need, len(acc)))
            acc = acc[:out_width] + [b.zero] * (out_width - len(acc))
            outs.extend(acc)
    return b.build(outs)


def _bits(value, width):
    return [(value >> i) & 1 for i in range(width)]


def _int(bits):
    return sum(bit << i for i, bit in enumerate(bits))


@dataclass(frozen=True)
class ProblemSpec:
    """A benchmark instance plus its integer-level oracle.

    ``width`` is bits per operand; ``dim`` is the element count for sorters
    and the matrix dimension for matmul (ignored elsewhere).
    """

    kind: str
    width: int
    dim: int = 1

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in KINDS:
            raise ValueError(f"unknown problem kind {self.kind!r}; choose from {', '.join(KINDS)}")
        object.__setattr__(self, "kind", kind)
        if self.width < 1 or self.dim < 1:
            raise ValueError("width and dim must be >= 1")

    @property
    def name(self) -> str:
        if self.kind == "adder":
            return f"{self.width}-bit adder"
        if self.kind == "hamming":
            return f"{self.width}-bit HD"
        if self.kind == "mult":
            return f"{self.width}-bit mult"
        if self.kind == "sorter":
            return f"{self.dim} {self.width}-bit sorting"
        return f"{self.dim}x{self.dim} {self.width}-bit m_mult"

    def build(self) -> Circuit:
        if self.kind == "adder":
            return gen_adder(self.width)
        if self.kind == "hamming":
            return gen_hamming(self.width)
        if self.kind == "mult":
            return gen_multiplier(self.width)
        if self.kind == "sorter":
            return gen_sorter(self.dim, self.width)
        return gen_matmul(self.dim, self.width)

    @property
    def n_operands(self) -> int:
        if self.kind == "sorter":
            return self.dim
        if self.kind == "matmul":
            return 2 * self.dim * self.dim
        return 2

    def random_operands(self, rng: random.Random) -> list[int]:
        return [rng.getrandbits(self.width) for _ in range(self.n_operands)]

    def encode(self, circuit: Circuit, operands) -> dict[int, int]:
        """Map operand integers onto the circuit's input wires."""
        bits = [bit for v in operands for bit in _bits(v, self.width)]
        return dict(zip(circuit.inputs, bits))

    def decode(self, circuit: Circuit, out_bits: dict[int, int]):
        bits = [out_bits[w] for w in circuit.outputs]
        if self.kind in ("adder", "hamming", "mult"):
            return _int(bits)
        step = self.width if self.kind == "sorter" else matmul_out_width(self.dim, self.width)
        return [_int(bits[i:i + step]) for i in range(0, len(bits), step)]

    def reference(self, operands):
        """Integer result the circuit must compute."""
        if self.kind == "adder":
            a, b = operands
            return (a + b) % (1 << self.width)
        if self.kind == "hamming":
            a, b = operands
            return bin(a ^ b).count("1")
        if self.kind == "mult":
            a, b = operands
            return a * b
        if self.kind == "sorter":
            return sorted(operands)
        n = self.dim
        A, B = operands[:n * n], operands[n * n:]
        return [sum(A[i * n + k] * B[k * n + j] for k in range(n)) for i in range(n) for j in range(n)]


def parse_kind_spec(kind: str, width: int, dim: int | None = None) -> ProblemSpec:
    kind = _ALIASES.get(kind, kind)
    if dim is None:
        dim = 10 if kind == "sorter" else 1
    return ProblemSpec(kind, width, dim)


# The benchmark rows the reports iterate over, in table order.
BENCHMARKS = (
    ProblemSpec("adder", 6),
    ProblemSpec("hamming", 10),
    ProblemSpec("hamming", 30),
    ProblemSpec("hamming", 50),
    ProblemSpec("mult", 8),
    ProblemSpec("mult", 16),
    ProblemSpec("mult", 32),
    ProblemSpec("mult", 64),
    ProblemSpec("sorter", 4, 10),
    ProblemSpec("matmul", 4, 5),
    ProblemSpec("matmul", 4, 10),
    ProblemSpec("matmul", 8, 5),
    ProblemSpec("matmul", 8, 10),
    ProblemSpec("matmul", 4, 20),
)
