"""Default sketches for the benchmark kernels and the Sobel / Harris pipelines."""

from __future__ import annotations

from dataclasses import replace
from typing import Mapping

from hesynth.kernels import Const, KernelSpec, build_box_blur, build_elementwise, build_gradient, build_kernel
from hesynth.quill import PtValue
from hesynth.sketch import Sketch, sketch_from_dict
from hesynth.engine import Pipeline, Stage

ADD_R = {"op": "AddCtCt", "lhs": "ct-r", "rhs": "ct-r"}
SUB_R = {"op": "SubCtCt", "lhs": "ct-r", "rhs": "ct-r"}
ADD = {"op": "AddCtCt", "lhs": "ct", "rhs": "ct"}
SUB = {"op": "SubCtCt", "lhs": "ct", "rhs": "ct"}
MUL = {"op": "MulCtCt", "lhs": "ct", "rhs": "ct"}


def _pt(op: str, name: str) -> dict:
    return {"op": op, "lhs": "ct", "rhs": {"pt": name}}


def default_sketch_dict(name: str, spec: KernelSpec) -> dict:
    """Sketch (JSON form) used for a benchmark kernel when the config gives none."""
    stride = spec.meta.get("stride")
    if name == "box_blur":
        return {"components": [ADD_R], "domain": "full"}
    if name == "dot_product":
        return {"components": [MUL, ADD_R], "domain": "pow2"}
    if name == "hamming":
        return {"components": [SUB, MUL, ADD_R], "domain": "full"}
    if name == "l2_distance":
        return {"components": [SUB, MUL, ADD_R], "domain": "pow2"}
    if name in ("gx", "gy"):
        return {"components": [ADD_R, SUB_R, _pt("MulCtPt", "two")], "domain": f"window 3 3 {stride}"}
    if name == "linear_regression":
        return {"components": [_pt("MulCtPt", "w"), ADD_R, _pt("AddCtPt", "b")], "domain": "pow2"}
    if name == "polynomial_regression":
        return {"components": [_pt("MulCtPt", "a"), _pt("MulCtPt", "b"), _pt("AddCtPt", "b"),
                               _pt("AddCtPt", "c"), MUL, ADD], "domain": "none"}
    if name == "roberts_cross":
        return {"components": [SUB_R, MUL, ADD], "domain": f"window 2 2 {stride}"}
    raise KeyError(f"no default sketch for {name!r}")


def kernel_pt_consts(name: str, spec: KernelSpec) -> dict:
    """Plaintext constants offered to the sketch (the kernel's own plus helpers)."""
    pts = dict(spec.pt_consts)
    if name in ("gx", "gy"):
        pts["two"] = PtValue.broadcast(2, spec.params)
    return pts


def with_pt_consts(spec: KernelSpec, pts: Mapping[str, PtValue]) -> KernelSpec:
    return replace(spec, pt_consts=tuple(sorted(pts.items())))


def kernel_and_sketch(name: str, sizes: Mapping | None = None, sketch: Mapping | None = None) -> tuple:
    """Build a benchmark spec and its sketch (``sketch`` overrides the default)."""
    spec = build_kernel(name, **dict(sizes or {}))
    spec = with_pt_consts(spec, kernel_pt_consts(name, spec))
    d = dict(sketch) if sketch else default_sketch_dict(name, spec)
    d.setdefault("L", 1)
    return spec, sketch_from_dict(d, spec.ct_inputs, spec.params, spec.pt)


# ----------------------------------------------------------------- pipelines

ELEMENTWISE = {"components": [ADD, SUB, MUL], "domain": "none"}


def _stage(name: str, spec: KernelSpec, sketch_d: Mapping, bind: Mapping) -> Stage:
    d = dict(sketch_d)
    d.setdefault("L", 1)
    return Stage(name, spec, sketch_from_dict(d, spec.ct_inputs, spec.params, spec.pt), dict(bind))


def _gradient_stage(which: str, height: int, width: int, N: int | None) -> Stage:
    spec = build_gradient(which, height=height, width=width, N=N)
    spec = with_pt_consts(spec, {"two": PtValue.broadcast(2, spec.params)})
    return _stage(which, spec, default_sketch_dict(which, spec), {"img": "img"})


def sobel_pipeline(height: int = 3, width: int = 3, N: int | None = None) -> Pipeline:
    """Gradient magnitude (squared): Gx^2 + Gy^2."""
    gx = _gradient_stage("gx", height, width, N)
    gy = _gradient_stage("gy", height, width, N)
    N = gx.spec.N
    comb = build_elementwise("square_sum", ["a", "b"], lambda a, b: a * a + b * b, height, width, 1, N)
    return Pipeline("sobel", ("img",), (gx, gy, _stage("combine", comb, ELEMENTWISE, {"a": "gx", "b": "gy"})),
                    "combine")


def harris_pipeline(height: int = 3, width: int = 3, k: int = 3, N: int | None = None) -> Pipeline:
    """Harris response ``det(M) - k * trace(M)^2`` with ``M`` summed over 2x2 windows.

    ``k`` is an integer plaintext (the usual fractional constant scaled into
    the integer ring).
    """
    gx = _gradient_stage("gx", height, width, N)
    gy = _gradient_stage("gy", height, width, N)
    N = gx.spec.N
    square = build_elementwise("square", ["a"], lambda a: a * a, height, width, 1, N)
    product = build_elementwise("product", ["a", "b"], lambda a, b: a * b, height, width, 1, N)
    blur = build_box_blur(height=height, width=width, window=2, pad=1, N=N)
    blur_sk = {"components": [ADD_R], "domain": "full"}
    det = build_elementwise("det", ["a", "b", "c"], lambda a, b, c: a * b - c * c, height, width, 1, N)
    trace = build_elementwise("trace_sq", ["a", "b"], lambda a, b: Const(k) * (a + b) * (a + b),
                              height, width, 1, N, pt_consts={"k": k})
    diff = build_elementwise("difference", ["a", "b"], lambda a, b: a - b, height, width, 1, N)
    trace_sk = {"components": [ADD, MUL, _pt("MulCtPt", "k")], "domain": "none"}
    stages = (
        gx, gy,
        _stage("ixx", square, ELEMENTWISE, {"a": "gx"}),
        _stage("iyy", square, ELEMENTWISE, {"a": "gy"}),
        _stage("ixy", product, ELEMENTWISE, {"a": "gx", "b": "gy"}),
        _stage("sxx", blur, blur_sk, {"img": "ixx"}),
        _stage("syy", blur, blur_sk, {"img": "iyy"}),
        _stage("sxy", blur, blur_sk, {"img": "ixy"}),
        _stage("det", det, ELEMENTWISE, {"a": "sxx", "b": "syy", "c": "sxy"}),
        _stage("trace_sq", trace, trace_sk, {"a": "sxx", "b": "syy"}),
        _stage("response", diff, ELEMENTWISE, {"a": "det", "b": "trace_sq"}),
    )
    return Pipeline("harris", ("img",), stages, "response")


PIPELINES = {"sobel": sobel_pipeline, "harris": harris_pipeline}
