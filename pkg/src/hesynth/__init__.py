"""Synthesizing compiler for vectorized BFV-style homomorphic encryption kernels."""

from hesynth.quill import (
    CostModel,
    CtValue,
    Instruction,
    Op,
    Operand,
    Program,
    ProgramBuilder,
    PtValue,
    RingParams,
    estimated_latency,
    eval_instruction,
    eval_program,
    instruction_count,
    mdepth,
    rotate_slots,
)
from hesynth.poly import Poly
from hesynth.kernels import KernelSpec, build_kernel, lift_reference, poly_of_program, random_example
from hesynth.sketch import Sketch, make_sketch, pow2_domain, sliding_window_domain
from hesynth.verifier import verify
from hesynth.search import SearchConfig, find_completion
from hesynth.engine import SynthConfig, cost_fn, optimize, synthesize, synthesize_initial

__version__ = "0.1.0"
