import itertools
import random

import pytest

from sifo import genlib
from sifo.gc import cleartext_evaluate
from sifo.genlib import ProblemSpec, batcher_pairs


def _check_all(spec, operand_sets):
    c = spec.build()
    for ops in operand_sets:
        out = cleartext_evaluate(c, spec.encode(c, ops))
        assert spec.decode(c, out) == spec.reference(ops), ops


@pytest.mark.parametrize("n", [1, 2, 3, 4, 6])
def test_adder_exhaustive(n):
    vals = range(1 << n)
    _check_all(ProblemSpec("adder", n), ([a, b] for a in vals for b in vals))


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_multiplier_exhaustive(n):
    vals = range(1 << n)
    _check_all(ProblemSpec("mult", n), ([a, b] for a in vals for b in vals))


@pytest.mark.parametrize("n", [1, 3, 5, 8])
def test_hamming_exhaustive(n):
    vals = range(1 << n)
    _check_all(ProblemSpec("hamming", n), ([a, b] for a in vals for b in vals))


@pytest.mark.parametrize("count,width", [(2, 2), (3, 2), (4, 2), (5, 1), (6, 1)])
def test_sorter_exhaustive(count, width):
    vals = range(1 << width)
    _check_all(ProblemSpec("sorter", width, count), (list(p) for p in itertools.product(vals, repeat=count)))


@pytest.mark.parametrize("count", list(range(1, 13)))
def test_batcher_zero_one_principle(count):
    pairs = batcher_pairs(count)
    for bits in itertools.product((0, 1), repeat=count):
        v = list(bits)
        for i, j in pairs:
            if v[i] > v[j]:
                v[i], v[j] = v[j], v[i]
        assert v == sorted(v)


def test_random_larger_instances():
    rng = random.Random(7)
    for spec in [ProblemSpec("sorter", 4, 10), ProblemSpec("matmul", 2, 2), ProblemSpec("matmul", 3, 3),
                 ProblemSpec("hamming", 30), ProblemSpec("mult", 16)]:
        _check_all(spec, [spec.random_operands(rng) for _ in range(30)])


def test_matmul_dim1_is_multiplier():
    a = ProblemSpec("matmul", 4, 1).build()
    b = ProblemSpec("mult", 4).build()
    assert (a.n_and, a.n_xor) == (b.n_and, b.n_xor)


@pytest.mark.parametrize("n", [2, 4, 8, 16, 32, 64])
def test_multiplier_and_formula(n):
    assert genlib.gen_multiplier(n).n_and == n * n + n * (n - 1)


@pytest.mark.parametrize("n", [1, 4, 6, 12])
def test_adder_gate_formula(n):
    c = genlib.gen_adder(n)
    assert (c.n_and, c.n_xor) == (n, 4 * n)


def test_generators_are_deterministic():
    for spec in genlib.BENCHMARKS[:9]:
        assert spec.build() == spec.build()


def test_names_and_aliases():
    assert [s.name for s in genlib.BENCHMARKS][:2] == ["6-bit adder", "10-bit HD"]
    assert ProblemSpec("m_mult", 4, 5).name == "5x5 4-bit m_mult"
    assert genlib.parse_kind_spec("sort", 4).name == "10 4-bit sorting"
    with pytest.raises(ValueError):
        ProblemSpec("divider", 4)
    with pytest.raises(ValueError):
        genlib.gen_adder(0)
