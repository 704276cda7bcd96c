import os
import re
from pathlib import Path

import numpy as np
import pytest

from conftest import gx_separable_program
from helpers import random_inputs, random_program
from hesynth.codegen import (
    CodegenError,
    Template,
    emit_backend_source,
    emit_json_ir,
    explicate_rotations,
    insert_relinearization,
    lower,
    parse_json_ir,
    write_artifacts,
)
from hesynth.quill import Op, ProgramBuilder, eval_program, instruction_count, rotation_pairs
from hesynth.suite import kernel_and_sketch
from hesynth.verifier import verify

GOLDEN = Path(__file__).parent / "golden"
UPDATE = os.environ.get("UPDATE_GOLDEN") == "1"


def dot_product_program():
    spec, _ = kernel_and_sketch("dot_product")
    b = ProgramBuilder(spec.params, spec.ct_inputs)
    m = b.mul("a", "b")
    s = b.add(m, b.ref(m, 4))
    s = b.add(s, b.ref(s, 2))
    b.add(s, b.ref(s, 1))
    return spec, b.build()


def factored_polynomial_program():
    """``(a*x + b) * x + c``: one ciphertext product instead of two."""
    spec, _ = kernel_and_sketch("polynomial_regression")
    b = ProgramBuilder(spec.params, spec.ct_inputs, dict(spec.pt_consts))
    v = b.mul_pt("x", "a")
    v = b.add_pt(v, "b")
    v = b.mul(v, "x")
    b.add_pt(v, "c")
    return spec, b.build()


def gx_program():
    spec, _ = kernel_and_sketch("gx")
    return spec, gx_separable_program(spec)


KERNELS = {"gx": gx_program, "dot_product": dot_product_program, "polynomial_regression": factored_polynomial_program}


def check_golden(name: str, text: str):
    path = GOLDEN / name
    if UPDATE:
        path.write_text(text)
    assert path.read_text() == text


@pytest.mark.parametrize("name", sorted(KERNELS))
def test_golden_files(name):
    spec, p = KERNELS[name]()
    assert verify(p, spec)
    low = lower(p)
    check_golden(f"{name}.ir.json", emit_json_ir(low, name))
    check_golden(f"{name}.gen.cpp", emit_backend_source(low, name))


@pytest.mark.parametrize("name", sorted(KERNELS))
def test_json_ir_round_trip(name):
    _, p = KERNELS[name]()
    low = lower(p)
    text = emit_json_ir(low, name)
    assert parse_json_ir(text) == low
    assert emit_json_ir(parse_json_ir(text), name) == text


def test_gx_explicated():
    _, p = gx_program()
    e = explicate_rotations(p)
    assert len(e.body) == 7
    assert sum(ins.op is Op.ROTATE for ins in e.body) == 4
    assert instruction_count(e) == instruction_count(p)
    src = emit_backend_source(lower(p), "gx")
    calls = re.findall(r"evaluator\.(\w+)\(", src)
    assert len(calls) == 7 and "relinearize" not in calls
    meta = __import__("json").loads(emit_json_ir(lower(p)))["meta"]
    assert meta["mdepth"] == 0 and meta["total"] == 7


def test_rotation_free_program_unchanged():
    _, p = factored_polynomial_program()
    assert explicate_rotations(p) == p


def test_cse_single_rotate():
    spec, _ = kernel_and_sketch("dot_product")
    b = ProgramBuilder(spec.params, spec.ct_inputs)
    c = b.add("a", b.ref("b", 1))
    b.mul(c, b.ref("b", 1))
    p = b.build()
    e = explicate_rotations(p)
    assert sum(ins.op is Op.ROTATE for ins in e.body) == 1 == len(rotation_pairs(p))


def test_rotation_emitted_before_first_use():
    _, p = gx_program()
    e = explicate_rotations(p)
    for k, ins in enumerate(e.body):
        for o in ins.operands():
            assert not isinstance(o.src, int) or o.src < k
            if ins.op is not Op.ROTATE:
                assert o.rot == 0


def test_relinearization_markers():
    _, p = dot_product_program()
    r = insert_relinearization(explicate_rotations(p))
    muls = [k for k, ins in enumerate(r.body) if ins.op is Op.MUL_CT_CT]
    relins = [k for k, ins in enumerate(r.body) if ins.op is Op.RELINEARIZE]
    assert len(muls) == len(relins) == 1
    for m, k in zip(muls, relins):
        assert k == m + 1 and r.body[k].lhs.src == m
    _, q = gx_program()
    assert not any(ins.op is Op.RELINEARIZE for ins in lower(q).body)


def test_two_products_two_markers():
    spec, _ = kernel_and_sketch("roberts_cross")
    b = ProgramBuilder(spec.params, spec.ct_inputs)
    d1 = b.sub("img", b.ref("img", 5))
    d2 = b.sub(b.ref("img", 4), b.ref("img", 1))
    b.add(b.mul(d1, d1), b.mul(d2, d2))
    low = lower(b.build())
    ops = [ins.op for ins in low.body]
    assert ops.count(Op.RELINEARIZE) == 2
    for k, op in enumerate(ops):
        if op is Op.RELINEARIZE:
            assert ops[k - 1] is Op.MUL_CT_CT


def test_lowering_preserves_semantics_on_random_programs():
    rng = np.random.default_rng(3)
    for _ in range(25):
        p = random_program(rng, max_len=6)
        low = lower(p)
        inputs = random_inputs(rng, p, 1000)
        assert np.array_equal(eval_program(p, inputs).slots, eval_program(low, inputs).slots)
        assert instruction_count(explicate_rotations(p)) == instruction_count(p)


def test_empty_program_source():
    from hesynth.quill import Program, RingParams

    p = Program(RingParams(8, 65537), ("x",))
    src = emit_backend_source(p, "identity")
    assert "evaluator." not in src and "result = x;" in src


def test_single_add_source():
    spec, _ = kernel_and_sketch("dot_product")
    b = ProgramBuilder(spec.params, spec.ct_inputs)
    b.add("a", "b")
    src = emit_backend_source(b.build(), "k")
    assert re.findall(r"evaluator\.(\w+)\(", src) == ["add"]


def test_missing_template_entry():
    _, p = dot_product_program()
    tpl = Template()
    del tpl.parts["Relinearize"]
    with pytest.raises(CodegenError):
        emit_backend_source(lower(p), "dot", tpl)


def test_unlowered_program_rejected():
    _, p = gx_program()
    with pytest.raises(CodegenError):
        emit_backend_source(p, "gx")


def test_emission_is_deterministic(tmp_path):
    _, p = gx_program()
    a = write_artifacts(p, "gx", tmp_path / "a")
    b = write_artifacts(p, "gx", tmp_path / "b")
    for k in ("ir", "source"):
        assert Path(a[k]).read_bytes() == Path(b[k]).read_bytes()
