"""Hand-written comparison kernels.

Every baseline follows the same recipe: rotate each window or reduction
element into alignment first, then combine in a balanced tree so the
dependence chain stays short.  Multiplying by two is replaced with an
addition.  Baselines are ordinary programs and are verified like any
synthesized kernel before they are used in a comparison.
"""

from __future__ import annotations

from typing import Callable

from hesynth.engine import Pipeline, compose_programs
from hesynth.kernels import KernelSpec
from hesynth.quill import Operand, Program, ProgramBuilder
from hesynth.verifier import Counterexample, verify


class BaselineError(RuntimeError):
    pass


def _balanced(b: ProgramBuilder, terms: list, combine: Callable) -> object:
    """Pairwise reduction of ``terms``; returns the root (an operand or value index)."""
    level = list(terms)
    while len(level) > 1:
        nxt = [combine(level[i], level[i + 1]) for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0]


def _builder(spec: KernelSpec) -> ProgramBuilder:
    return ProgramBuilder(spec.params, spec.ct_inputs, dict(spec.pt_consts))


def _tree_sum(b: ProgramBuilder, v, n: int) -> int:
    """Sum of slots ``0..n-1`` of ``v`` into slot 0 by halving rotations."""
    span = 1
    while span < n:
        span *= 2
    while span > 1:
        span //= 2
        v = b.add(v, b.ref(v, span))
    return v


def window_filter(spec: KernelSpec) -> Program:
    """Weighted window sum with weights in {-2, -1, 0, 1, 2} (box blur, Gx, Gy)."""
    b = _builder(spec)
    stride, anchor = spec.meta["stride"], spec.meta["anchor"]
    ct = spec.ct_inputs[0]
    plus, minus = [], []
    for kh, row in enumerate(spec.meta["weights"]):
        for kw, w in enumerate(row):
            if w:
                off = (kh - anchor) * stride + (kw - anchor)
                (plus if w > 0 else minus).append((abs(w), off))
    if any(w > 2 for w, _ in plus + minus):
        raise BaselineError("window baseline supports weights up to 2 in magnitude")
    terms = []
    # pair each positive tap with a negative tap of the same weight
    for w, off in plus:
        match = next((m for m in minus if m[0] == w), None)
        if match is not None:
            minus.remove(match)
            v = b.sub(b.ref(ct, off), b.ref(ct, match[1]))
        else:
            v = b.ref(ct, off)
        terms.append((w, v))
    # doubled taps join the tree last so their extra addition is off the longest chain
    terms.sort(key=lambda wv: wv[0])
    doubled = [b.add(v, v) if w == 2 else v for w, v in terms]
    acc = _balanced(b, doubled, b.add)
    for w, off in minus:
        acc = b.sub(acc, b.ref(ct, off))
        if w == 2:
            acc = b.sub(acc, b.ref(ct, off))
    if isinstance(acc, Operand):
        raise BaselineError("single-tap windows need no arithmetic and have no baseline")
    return b.build()


def _reduction(spec: KernelSpec, elem: Callable) -> Program:
    b = _builder(spec)
    v = elem(b)
    _tree_sum(b, v, spec.meta["sizes"]["n"])
    return b.build()


def dot_product(spec: KernelSpec) -> Program:
    return _reduction(spec, lambda b: b.mul("a", "b"))


def squared_difference(spec: KernelSpec) -> Program:
    """Hamming (0/1 inputs) and squared L2 distance share one baseline."""

    def elem(b):
        d = b.sub("x", "y")
        return b.mul(d, d)

    return _reduction(spec, elem)


def linear_regression(spec: KernelSpec) -> Program:
    b = _builder(spec)
    v = b.mul_pt("x", "w")
    v = _tree_sum(b, v, spec.meta["sizes"]["n"])
    b.add_pt(v, "b")
    return b.build()


def polynomial_regression(spec: KernelSpec) -> Program:
    """``a*x^2 + b*x + c`` evaluated term by term (two independent branches)."""
    b = _builder(spec)
    sq = b.mul("x", "x")
    ax2 = b.mul_pt(sq, "a")
    bx = b.mul_pt("x", "b")
    s = b.add(ax2, bx)
    b.add_pt(s, "c")
    return b.build()


def roberts_cross(spec: KernelSpec) -> Program:
    b = _builder(spec)
    S = spec.meta["stride"]
    d1 = b.sub("img", b.ref("img", S + 1))
    d2 = b.sub(b.ref("img", S), b.ref("img", 1))
    b.add(b.mul(d1, d1), b.mul(d2, d2))
    return b.build()


# pipeline glue stages


def _square(spec):
    b = _builder(spec)
    b.mul("a", "a")
    return b.build()


def _product(spec):
    b = _builder(spec)
    b.mul("a", "b")
    return b.build()


def _square_sum(spec):
    b = _builder(spec)
    b.add(b.mul("a", "a"), b.mul("b", "b"))
    return b.build()


def _det(spec):
    b = _builder(spec)
    b.sub(b.mul("a", "b"), b.mul("c", "c"))
    return b.build()


def _trace_sq(spec):
    b = _builder(spec)
    s = b.add("a", "b")
    b.mul_pt(b.mul(s, s), "k")
    return b.build()


def _difference(spec):
    b = _builder(spec)
    b.sub("a", "b")
    return b.build()


BASELINES: dict = {
    "box_blur": window_filter,
    "gx": window_filter,
    "gy": window_filter,
    "dot_product": dot_product,
    "hamming": squared_difference,
    "l2_distance": squared_difference,
    "linear_regression": linear_regression,
    "polynomial_regression": polynomial_regression,
    "roberts_cross": roberts_cross,
    "square": _square,
    "product": _product,
    "square_sum": _square_sum,
    "det": _det,
    "trace_sq": _trace_sq,
    "difference": _difference,
}


def baseline(spec: KernelSpec, check: bool = True) -> Program:
    """Baseline program for ``spec`` (looked up by kernel name), verified unless ``check`` is off."""
    try:
        build = BASELINES[spec.name]
    except KeyError:
        raise BaselineError(f"no baseline for kernel {spec.name!r}") from None
    p = build(spec)
    if check:
        v = verify(p, spec)
        if isinstance(v, Counterexample):
            raise BaselineError(f"baseline for {spec.name} fails verification at slot {v.slot}")
    return p


def pipeline_baseline(pipe: Pipeline, seed: int = 0) -> Program:
    """Stage baselines spliced into one program (with the same masking glue) and verified end to end."""
    programs = {s.name: baseline(s.spec) for s in pipe.stages}
    composed, _, _ = compose_programs(pipe, programs, seed)
    return composed
