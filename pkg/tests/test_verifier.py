import numpy as np
import pytest

from helpers import differ, mutations, random_inputs, random_program, spec_of_program
from hesynth.kernels import build_kernel, poly_of_program
from hesynth.poly import Poly
from hesynth.quill import ProgramBuilder, RingParams, eval_program
from hesynth.verifier import (
    Counterexample,
    Ok,
    VerificationError,
    check_on_examples,
    counterexample_from_polys,
    verify,
)
from hesynth.kernels import random_example

T = 65537


def test_self_verification_and_cross_check():
    rng = np.random.default_rng(5)
    for _ in range(20):
        p = random_program(rng)
        spec = spec_of_program(p)
        assert isinstance(verify(p, spec), Ok)
        inputs = random_inputs(rng, p, 10_000)
        got = eval_program(p, inputs).slots
        assert np.array_equal(got, spec.eval_polys(inputs))


def test_mutations_caught_with_valid_counterexample():
    rng = np.random.default_rng(11)
    caught = 0
    for _ in range(10):
        p = random_program(rng)
        spec = spec_of_program(p)
        for q in mutations(p):
            res = verify(q, spec)
            if poly_of_program(q) == poly_of_program(p):
                assert isinstance(res, Ok)
                continue
            assert isinstance(res, Counterexample)
            assert differ(p, q, res.inputs)
            out = eval_program(q, res.inputs).slots
            assert out[res.slot] != res.expected[res.slot]
            caught += 1
    assert caught > 50


def test_gx_against_gy_fails():
    from conftest import gx_separable_program
    from hesynth.suite import kernel_and_sketch

    gx, _ = kernel_and_sketch("gx")
    gy, _ = kernel_and_sketch("gy")
    p = gx_separable_program(gx)
    assert verify(p, gx)
    cex = verify(p, gy)
    assert not cex
    img = cex.inputs["img"]
    assert gx.eval_polys({"img": img})[cex.slot] != gy.eval_polys({"img": img})[cex.slot]


def test_only_masked_slots_matter():
    spec = build_kernel("dot_product", n=4, N=8)
    b = ProgramBuilder(spec.params, spec.ct_inputs)
    m = b.mul("a", "b")
    s = b.add(m, b.ref(m, 2))
    b.add(s, b.ref(s, 1))
    assert verify(b.build(), spec)


def test_binary_domain_respected():
    # on 0/1 inputs x*x == x, so this hamming variant is correct only on the binary domain
    spec = build_kernel("hamming")
    b = ProgramBuilder(spec.params, spec.ct_inputs)
    d = b.sub("x", "y")
    m = b.mul(d, d)
    s = b.add(m, b.ref(m, 2))
    b.add(s, b.ref(s, 1))
    assert verify(b.build(), spec)


def test_signature_mismatch():
    spec = build_kernel("dot_product", n=4, N=8)
    b = ProgramBuilder(RingParams(16, T), spec.ct_inputs)
    b.mul("a", "b")
    with pytest.raises(VerificationError):
        verify(b.build(), spec)


def test_counterexample_from_polys_grid_fallback():
    # x0^2 - x0 vanishes on every 0/1 point; the grid/uniform stage must find a witness
    x0 = Poly.var(0, T)
    pt = counterexample_from_polys(x0 * x0, x0, np.random.default_rng(0))
    assert (pt[0] * pt[0] - pt[0]) % T != 0


def test_counterexample_identical_polys():
    x0 = Poly.var(0, T)
    with pytest.raises(VerificationError):
        counterexample_from_polys(x0, x0)


def test_degree_guard():
    small = 5
    x0 = Poly.var(0, small)
    with pytest.raises(VerificationError):
        counterexample_from_polys(x0 ** 5, Poly.zero(small))


def test_check_on_examples():
    spec = build_kernel("dot_product", n=4, N=8)
    b = ProgramBuilder(spec.params, spec.ct_inputs)
    b.mul("a", "b")
    ex = [random_example(spec, s) for s in range(3)]
    assert check_on_examples(b.build(), ex, spec.mask) is ex[0]
