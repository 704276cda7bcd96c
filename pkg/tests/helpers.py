"""Test utilities shared by several modules."""

import numpy as np

from hesynth.kernels import Read, lift_reference, vector_layout
from hesynth.quill import Instruction, Op, Operand, Program, PtValue, RingParams

T = 65537
ARITH = [Op.ADD_CT_CT, Op.SUB_CT_CT, Op.MUL_CT_CT, Op.ADD_CT_PT, Op.SUB_CT_PT, Op.MUL_CT_PT]


def random_program(rng, N=8, n_inputs=2, max_len=6, t=T) -> Program:
    params = RingParams(N, t)
    inputs = [f"v{i}" for i in range(n_inputs)]
    pts = {"p0": PtValue(rng.integers(0, t, size=N)), "p1": PtValue.broadcast(int(rng.integers(2, 9)), params)}
    body = []
    L = int(rng.integers(1, max_len + 1))
    for k in range(L):
        srcs = inputs + list(range(k))

        def operand():
            return Operand(srcs[int(rng.integers(len(srcs)))], int(rng.integers(N)))

        op = ARITH[int(rng.integers(len(ARITH)))]
        rhs = sorted(pts)[int(rng.integers(2))] if op.is_pt else operand()
        body.append(Instruction(op, operand(), rhs))
    return Program(params, tuple(inputs), tuple(sorted(pts.items())), tuple(body))


def expr_of_program(p: Program) -> list:
    """Slot expressions of ``p`` built from reference-language nodes, one per output slot."""
    N = p.params.N
    env = {ct: [Read(ct, (s,)) for s in range(N)] for ct in p.ct_inputs}
    pts = {n: list(v.slots) for n, v in p.pt_consts}
    for k, ins in enumerate(p.body):
        a = env[ins.lhs.src]
        a = a[ins.lhs.rot:] + a[:ins.lhs.rot]
        if ins.op.is_unary:
            env[k] = a
            continue
        if ins.op.is_pt:
            b = pts[ins.rhs]
        else:
            b = env[ins.rhs.src]
            b = b[ins.rhs.rot:] + b[:ins.rhs.rot]
        f = {"add": lambda x, y: x + y, "sub": lambda x, y: x - y, "mul": lambda x, y: x * y}[ins.op.kind]
        env[k] = [f(x, y) for x, y in zip(a, b)]
    return env[p.result]


def spec_of_program(p: Program, name="self"):
    """A kernel whose reference is the program's own computation, lifted independently."""
    N = p.params.N
    tensors = {ct: vector_layout(ct, N) for ct in p.ct_inputs}
    ref = {(s,): e for s, e in enumerate(expr_of_program(p))}
    return lift_reference(name, p.params, p.ct_inputs, tensors, vector_layout(p.ct_inputs[0], N), ref,
                          dict(p.pt_consts))


def random_inputs(rng, p: Program, batch: int):
    return {ct: rng.integers(0, p.params.t, size=(batch, p.params.N)) for ct in p.ct_inputs}


def mutations(p: Program):
    """Every single-instruction change of opcode (within its arity), source or rotation."""
    N = p.params.N
    for k, ins in enumerate(p.body):
        srcs = list(p.ct_inputs) + list(range(k))
        variants = []
        for op in ARITH:
            if op is not ins.op and op.is_pt == ins.op.is_pt:
                variants.append(Instruction(op, ins.lhs, ins.rhs))
        variants.append(Instruction(ins.op, Operand(ins.lhs.src, (ins.lhs.rot + 1) % N), ins.rhs))
        alt = [s for s in srcs if s != ins.lhs.src]
        if alt:
            variants.append(Instruction(ins.op, Operand(alt[0], ins.lhs.rot), ins.rhs))
        for v in variants:
            body = list(p.body)
            body[k] = v
            yield Program(p.params, p.ct_inputs, p.pt_consts, tuple(body), p.result)


def differ(p: Program, q: Program, inputs) -> bool:
    from hesynth.quill import eval_program

    return not np.array_equal(eval_program(p, inputs).slots, eval_program(q, inputs).slots)
