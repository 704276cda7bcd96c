"""Kernel specifications: reference computations lifted to per-slot polynomials.

A reference is a small pure expression language (reads of logical tensor
elements, integer constants, add/sub/mul).  Builders unroll their loops into
one expression per output element; :func:`lift_reference` packs the tensors
into ciphertext slots and turns every output element into a canonical
polynomial over the input slots it reads.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from hesynth.poly import Poly
from hesynth.quill import Op, Program, PtValue, RingParams, StructuralError, rotate_slots


class LiftError(ValueError):
    """The reference uses a construct that has no HE equivalent."""


class SpecError(ValueError):
    """Inconsistent kernel specification or unsupported size."""


# ---------------------------------------------------------------- expressions


class Expr:
    def __add__(self, other): return BinOp("add", self, _expr(other))
    def __radd__(self, other): return BinOp("add", _expr(other), self)
    def __sub__(self, other): return BinOp("sub", self, _expr(other))
    def __rsub__(self, other): return BinOp("sub", _expr(other), self)
    def __mul__(self, other): return BinOp("mul", self, _expr(other))
    def __rmul__(self, other): return BinOp("mul", _expr(other), self)
    def __truediv__(self, other): return Unsupported("div", (self, _expr(other)))
    def __lt__(self, other): return Unsupported("lt", (self, _expr(other)))
    def __gt__(self, other): return Unsupported("gt", (self, _expr(other)))


def _expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, np.integer)):
        return Const(int(x))
    raise LiftError(f"cannot use {type(x).__name__} in a reference expression")


@dataclass(frozen=True, eq=False)
class Read(Expr):
    tensor: str
    index: tuple


@dataclass(frozen=True, eq=False)
class Const(Expr):
    value: int


@dataclass(frozen=True, eq=False)
class BinOp(Expr):
    op: str
    a: Expr
    b: Expr


@dataclass(frozen=True, eq=False)
class Unsupported(Expr):
    """Division, comparison or data-dependent selection; rejected by lifting."""

    op: str
    args: tuple


def select(cond: Expr, a, b) -> Expr:
    return Unsupported("select", (cond, _expr(a), _expr(b)))


def expr_to_json(e: Expr):
    if isinstance(e, Read):
        return ["read", e.tensor, list(e.index)]
    if isinstance(e, Const):
        return ["const", e.value]
    if isinstance(e, BinOp):
        return [e.op, expr_to_json(e.a), expr_to_json(e.b)]
    if isinstance(e, Unsupported):
        return [e.op] + [expr_to_json(a) for a in e.args]
    raise TypeError(e)


def expr_from_json(d) -> Expr:
    tag = d[0]
    if tag == "read":
        return Read(d[1], tuple(d[2]))
    if tag == "const":
        return Const(int(d[1]))
    if tag in ("add", "sub", "mul"):
        return BinOp(tag, expr_from_json(d[1]), expr_from_json(d[2]))
    return Unsupported(tag, tuple(expr_from_json(a) for a in d[1:]))


# -------------------------------------------------------------------- layouts


@dataclass(frozen=True)
class TensorLayout:
    """Affine row-major packing of one logical tensor into a ciphertext.

    ``slot(idx) = offset + sum(idx[k] * strides[k])``.  Slots outside the
    image of the packing are zero padding.
    """

    ciphertext: str
    shape: tuple
    strides: tuple
    offset: int = 0
    domain: str = "full"  # or "binary"

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(self.shape))
        object.__setattr__(self, "strides", tuple(self.strides))
        if len(self.shape) != len(self.strides):
            raise SpecError("layout shape and strides differ in rank")
        if self.domain not in ("full", "binary"):
            raise SpecError(f"unknown input domain {self.domain!r}")

    def in_bounds(self, idx: Sequence[int]) -> bool:
        return len(idx) == len(self.shape) and all(0 <= i < n for i, n in zip(idx, self.shape))

    def slot(self, idx: Sequence[int]) -> int:
        return self.offset + sum(i * s for i, s in zip(idx, self.strides))

    def indices(self) -> list:
        return list(itertools.product(*(range(n) for n in self.shape)))

    def slots(self) -> list:
        return [self.slot(i) for i in self.indices()]

    def check(self, N: int) -> None:
        s = self.slots()
        if len(set(s)) != len(s):
            raise SpecError(f"layout of {self.ciphertext!r} is not injective")
        if s and (min(s) < 0 or max(s) >= N):
            raise SpecError(f"tensor packed into {self.ciphertext!r} exceeds the {N} available slots")

    def to_dict(self) -> dict:
        return {"ciphertext": self.ciphertext, "shape": list(self.shape), "strides": list(self.strides),
                "offset": self.offset, "domain": self.domain}

    @classmethod
    def from_dict(cls, d: Mapping) -> "TensorLayout":
        return cls(d["ciphertext"], tuple(d["shape"]), tuple(d["strides"]), int(d.get("offset", 0)),
                   d.get("domain", "full"))


def vector_layout(ct: str, n: int, offset: int = 0, domain: str = "full") -> TensorLayout:
    return TensorLayout(ct, (n,), (1,), offset, domain)


def image_layout(ct: str, height: int, width: int, stride: int, offset: int = 0) -> TensorLayout:
    return TensorLayout(ct, (height, width), (stride, 1), offset)


def scalar_layout(ct: str, slot: int = 0) -> TensorLayout:
    return TensorLayout(ct, (), (), slot)


# ---------------------------------------------------------------------- specs


@dataclass(frozen=True)
class Example:
    inputs: Mapping[str, np.ndarray]
    expected: np.ndarray  # full N-vector; only masked slots are meaningful


@dataclass(frozen=True, eq=False)
class KernelSpec:
    name: str
    params: RingParams
    ct_inputs: tuple
    tensors: Mapping[str, TensorLayout]
    pt_consts: tuple
    output: TensorLayout
    reference: Mapping[tuple, Expr]
    out_polys: tuple  # length N, None on unmasked slots
    mask: tuple
    meta: Mapping = field(default_factory=dict)

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def t(self) -> int:
        return self.params.t

    @property
    def pt(self) -> dict:
        return dict(self.pt_consts)

    def var(self, ct: str, slot: int) -> int:
        return self.ct_inputs.index(ct) * self.N + slot

    def var_name(self, v: int) -> str:
        ct, slot = divmod(v, self.N)
        return f"{self.ct_inputs[ct]}[{slot}]"

    def input_slots(self, ct: str) -> list:
        """Slots of ``ct`` that carry tensor data (everything else is zero padding)."""
        return sorted(s for lay in self.tensors.values() if lay.ciphertext == ct for s in lay.slots())

    def binary_slots(self, ct: str) -> list:
        return sorted(s for lay in self.tensors.values()
                      if lay.ciphertext == ct and lay.domain == "binary" for s in lay.slots())

    def symbolic_inputs(self) -> dict:
        """Per ciphertext, the N slot polynomials: a variable per data slot, 0 on padding."""
        out = {}
        for ct in self.ct_inputs:
            vec = [Poly.zero(self.t)] * self.N
            for s in self.input_slots(ct):
                vec[s] = Poly.var(self.var(ct, s), self.t)
            out[ct] = vec
        return out

    def masked_polys(self) -> dict:
        return {s: self.out_polys[s] for s in self.mask}

    def max_degree(self) -> int:
        return max(self.out_polys[s].degree() for s in self.mask)

    def eval_polys(self, inputs: Mapping[str, np.ndarray]) -> np.ndarray:
        """Expected output slots for concrete (possibly batched) inputs; unmasked slots are 0."""
        first = np.asarray(inputs[self.ct_inputs[0]])
        out = np.zeros(first.shape, dtype=np.int64)
        point = {}
        for ct in self.ct_inputs:
            arr = np.asarray(inputs[ct], dtype=np.int64)
            for s in self.input_slots(ct):
                point[self.var(ct, s)] = arr[..., s]
        for s in self.mask:
            out[..., s] = self.out_polys[s].evaluate(point)
        return out

    def pack(self, tensors: Mapping[str, np.ndarray]) -> dict:
        """Pack logical tensors into ciphertext slot vectors (padding = 0)."""
        vecs = {ct: np.zeros(self.N, dtype=np.int64) for ct in self.ct_inputs}
        for name, lay in self.tensors.items():
            arr = np.asarray(tensors[name], dtype=np.int64)
            for idx in lay.indices():
                vecs[lay.ciphertext][lay.slot(idx)] = arr[idx] % self.t
        return vecs

    def unpack_output(self, slots: np.ndarray) -> np.ndarray:
        out = np.zeros(self.output.shape, dtype=np.int64)
        for idx in self.output.indices():
            out[idx] = slots[self.output.slot(idx)]
        return out

    def eval_reference(self, tensors: Mapping[str, np.ndarray]) -> np.ndarray:
        """Evaluate the reference AST directly on logical tensors."""
        t = self.t

        def ev(e: Expr) -> int:
            if isinstance(e, Const):
                return e.value % t
            if isinstance(e, Read):
                lay = self.tensors[e.tensor]
                if not lay.in_bounds(e.index):
                    return 0
                return int(np.asarray(tensors[e.tensor])[tuple(e.index)]) % t
            if isinstance(e, BinOp):
                a, b = ev(e.a), ev(e.b)
                return {"add": a + b, "sub": a - b, "mul": a * b}[e.op] % t
            raise LiftError(f"unsupported construct {e!r}")

        out = np.zeros(self.output.shape, dtype=np.int64)
        for idx, e in self.reference.items():
            out[idx] = ev(e)
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "ring": self.params.to_dict(),
            "ct_inputs": list(self.ct_inputs),
            "layouts": {k: v.to_dict() for k, v in self.tensors.items()},
            "pt_consts": {n: list(v.slots) for n, v in self.pt_consts},
            "output": self.output.to_dict(),
            "mask": list(self.mask),
            "reference": [[list(idx), expr_to_json(e)] for idx, e in self.reference.items()],
            "meta": dict(self.meta),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: Mapping) -> "KernelSpec":
        params = RingParams(int(d["ring"]["N"]), int(d["ring"]["t"]))
        return lift_reference(
            name=d["name"],
            params=params,
            ct_inputs=d["ct_inputs"],
            tensors={k: TensorLayout.from_dict(v) for k, v in d["layouts"].items()},
            output=TensorLayout.from_dict(d["output"]),
            reference={tuple(idx): expr_from_json(e) for idx, e in d["reference"]},
            pt_consts={n: PtValue(v) for n, v in d.get("pt_consts", {}).items()},
            meta=d.get("meta", {}),
        )

    @classmethod
    def from_json(cls, text: str) -> "KernelSpec":
        return cls.from_dict(json.loads(text))


def lift_reference(name: str, params: RingParams, ct_inputs: Sequence[str],
                   tensors: Mapping[str, TensorLayout], output: TensorLayout,
                   reference: Mapping[tuple, Expr], pt_consts: Mapping[str, PtValue] | None = None,
                   meta: Mapping | None = None) -> KernelSpec:
    """Symbolically evaluate ``reference`` into one canonical polynomial per output slot.

    Reads outside a tensor's bounds evaluate to the zero padding value.
    """
    ct_inputs = tuple(ct_inputs)
    N, t = params.N, params.t
    for tname, lay in tensors.items():
        if lay.ciphertext not in ct_inputs:
            raise SpecError(f"tensor {tname!r} packed into undeclared ciphertext {lay.ciphertext!r}")
        lay.check(N)
    for ct in ct_inputs:
        s = [x for lay in tensors.values() if lay.ciphertext == ct for x in lay.slots()]
        if len(set(s)) != len(s):
            raise SpecError(f"tensors overlap inside ciphertext {ct!r}")
    output.check(N)
    if not reference:
        raise SpecError("reference computes no outputs")

    def var(ct, slot):
        return ct_inputs.index(ct) * N + slot

    def lift(e: Expr) -> Poly:
        if isinstance(e, Const):
            return Poly.const(e.value, t)
        if isinstance(e, Read):
            if e.tensor not in tensors:
                raise LiftError(f"read of undeclared tensor {e.tensor!r}")
            lay = tensors[e.tensor]
            if len(e.index) != len(lay.shape):
                raise LiftError(f"index {e.index} has wrong rank for tensor {e.tensor!r}")
            if not lay.in_bounds(e.index):
                return Poly.zero(t)
            return Poly.var(var(lay.ciphertext, lay.slot(e.index)), t)
        if isinstance(e, BinOp):
            a, b = lift(e.a), lift(e.b)
            if e.op == "add":
                return a + b
            if e.op == "sub":
                return a - b
            if e.op == "mul":
                return a * b
            raise LiftError(f"unsupported operator {e.op!r}")
        if isinstance(e, Unsupported):
            raise LiftError(f"reference uses {e.op!r}, which has no HE counterpart "
                            "(no division, comparison or data-dependent control flow)")
        raise LiftError(f"unknown expression node {e!r}")

    polys: list = [None] * N
    for idx, e in reference.items():
        idx = tuple(idx)
        if not output.in_bounds(idx):
            raise SpecError(f"reference output index {idx} outside output shape {output.shape}")
        polys[output.slot(idx)] = lift(e)
    mask = tuple(sorted(output.slot(idx) for idx in reference))
    pts = tuple(sorted((pt_consts or {}).items()))
    for pname, v in pts:
        if len(v.slots) != N:
            raise SpecError(f"plaintext {pname!r} needs {N} slots")
    return KernelSpec(name, params, ct_inputs, dict(tensors), pts, output,
                      {tuple(k): v for k, v in reference.items()}, tuple(polys), mask, dict(meta or {}))


# ------------------------------------------------------------------- examples


def random_example(spec: KernelSpec, seed) -> Example:
    """Uniform random inputs on data slots (0/1 on binary tensors), zeros on padding."""
    rng = np.random.default_rng(seed)
    inputs = {}
    for ct in spec.ct_inputs:
        v = np.zeros(spec.N, dtype=np.int64)
        data = spec.input_slots(ct)
        v[data] = rng.integers(0, spec.t, size=len(data))
        binary = spec.binary_slots(ct)
        if binary:
            v[binary] = rng.integers(0, 2, size=len(binary))
        inputs[ct] = v
    return Example(inputs, spec.eval_polys(inputs))


def example_from_assignment(spec: KernelSpec, assignment: Mapping[int, int]) -> Example:
    inputs = {ct: np.zeros(spec.N, dtype=np.int64) for ct in spec.ct_inputs}
    for v, x in assignment.items():
        ct, slot = divmod(v, spec.N)
        inputs[spec.ct_inputs[ct]][slot] = x % spec.t
    return Example(inputs, spec.eval_polys(inputs))


# ------------------------------------------------------- symbolic evaluation


def poly_of_program(p: Program, params: RingParams | None = None,
                    inputs: Mapping[str, Sequence[Poly]] | None = None) -> list:
    """Symbolically evaluate ``p``: one canonical polynomial per output slot.

    By default every slot of ciphertext input ``k`` is the variable
    ``k * N + slot``; pass ``inputs`` to bind slots to other polynomials
    (e.g. zero padding from a spec's layout).
    """
    params = params or p.params
    if params != p.params:
        raise StructuralError("program and spec use different ring parameters")
    N, t = params.N, params.t
    if inputs is None:
        inputs = {ct: [Poly.var(k * N + s, t) for s in range(N)] for k, ct in enumerate(p.ct_inputs)}
    env: dict = {}
    for ct in p.ct_inputs:
        if ct not in inputs:
            raise StructuralError(f"no symbolic binding for input {ct!r}")
        env[ct] = list(inputs[ct])
    pts = {n: [Poly.const(x, t) for x in v.slots] for n, v in p.pt_consts}

    def fetch(o):
        vec = env[o.src]
        r = o.rot % N
        return vec[r:] + vec[:r] if r else vec

    for k, ins in enumerate(p.body):
        a = fetch(ins.lhs)
        if ins.op.is_unary:
            env[k] = a
            continue
        b = pts[ins.rhs] if ins.op.is_pt else fetch(ins.rhs)
        kind = ins.op.kind
        if kind == "add":
            env[k] = [x + y for x, y in zip(a, b)]
        elif kind == "sub":
            env[k] = [x - y for x, y in zip(a, b)]
        else:
            env[k] = [x * y for x, y in zip(a, b)]
    return list(env[p.result])


# ------------------------------------------------------------------ builders

BINARY_FILTERS = {
    "gx": ((-1, 0, 1), (-2, 0, 2), (-1, 0, 1)),
    "gy": ((-1, -2, -1), (0, 0, 0), (1, 2, 1)),
}


def _pow2_at_least(n: int) -> int:
    return 1 << max(1, (n - 1).bit_length())


def _ring(N: int | None, needed: int, t: int) -> RingParams:
    N = N or _pow2_at_least(needed)
    if needed > N:
        raise SpecError(f"kernel needs {needed} slots but only N={N} are available")
    try:
        return RingParams(N, t)
    except ValueError as e:
        raise SpecError(str(e)) from e


def _padded_image(height, width, pad_before, pad_after, N, t, ct="img"):
    stride = width + pad_before + pad_after
    rows = height + pad_before + pad_after
    params = _ring(N, rows * stride, t)
    return params, image_layout(ct, height, width, stride, pad_before * stride + pad_before)


def _window_kernel(name, weights, height, width, pad_before, pad_after, N, t, meta):
    """Correlation of an image with a small integer filter anchored at ``-pad_before``."""
    params, lay = _padded_image(height, width, pad_before, pad_after, N, t)
    ref = {}
    for h, w in lay.indices():
        acc = None
        for kh, row in enumerate(weights):
            for kw, c in enumerate(row):
                if c == 0:
                    continue
                term = Read("img", (h + kh - pad_before, w + kw - pad_before))
                if c != 1:
                    term = Const(c) * term
                acc = term if acc is None else acc + term
        ref[(h, w)] = acc
    out = TensorLayout("img", lay.shape, lay.strides, lay.offset)
    meta = dict(meta, stride=lay.strides[0], window=(len(weights), len(weights[0])), anchor=pad_before,
                weights=[list(r) for r in weights])
    return lift_reference(name, params, ["img"], {"img": lay}, out, ref, meta=meta)


def build_box_blur(height=3, width=7, window=2, pad=None, N=None, t=65537):
    """Unnormalized window sum; the window is anchored at its top-left pixel by default."""
    if window < 1:
        raise SpecError("window must be positive")
    before, after = (0, window - 1) if pad is None else (pad, pad)
    weights = tuple((1,) * window for _ in range(window))
    if pad is not None and pad < window - 1:
        raise SpecError("padding too small for the window")
    return _window_kernel("box_blur", weights, height, width, before, after, N, t,
                          {"kind": "image", "sizes": dict(height=height, width=width, window=window, pad=pad)})


def build_gradient(which="gx", height=3, width=3, N=None, t=65537):
    return _window_kernel(which, BINARY_FILTERS[which], height, width, 1, 1, N, t,
                          {"kind": "image", "sizes": dict(height=height, width=width)})


def build_roberts_cross(height=3, width=3, N=None, t=65537):
    params, lay = _padded_image(height, width, 0, 1, N, t)
    ref = {}
    for h, w in lay.indices():
        d1 = Read("img", (h, w)) - Read("img", (h + 1, w + 1))
        d2 = Read("img", (h + 1, w)) - Read("img", (h, w + 1))
        ref[(h, w)] = d1 * d1 + d2 * d2
    out = TensorLayout("img", lay.shape, lay.strides, lay.offset)
    return lift_reference("roberts_cross", params, ["img"], {"img": lay}, out, ref,
                          meta={"kind": "image", "stride": lay.strides[0], "window": (2, 2), "anchor": 0,
                                "sizes": dict(height=height, width=width)})


def _reduction(name, n, N, t, ct_names, term, pt_consts=None, domain="full", extra=None, meta=None):
    params = _ring(N, n, t)
    tensors = {ct: vector_layout(ct, n, domain=domain) for ct in ct_names}
    acc = None
    for i in range(n):
        e = term(i)
        acc = e if acc is None else acc + e
    if extra is not None:
        acc = acc + extra
    out = scalar_layout(ct_names[0])
    pts = {k: v(params) for k, v in (pt_consts or {}).items()}
    return lift_reference(name, params, ct_names, tensors, out, {(): acc}, pts,
                          meta=dict(meta or {}, kind="reduction", sizes=dict(n=n)))


def build_dot_product(n=8, N=None, t=65537):
    return _reduction("dot_product", n, N or _pow2_at_least(2 * n), t, ["a", "b"],
                      lambda i: Read("a", (i,)) * Read("b", (i,)))


def build_hamming(n=4, N=None, t=65537):
    """Sum of (x_i - y_i)^2, which is the Hamming distance on 0/1 vectors."""

    def term(i):
        d = Read("x", (i,)) - Read("y", (i,))
        return d * d

    return _reduction("hamming", n, N or _pow2_at_least(2 * n), t, ["x", "y"], term, domain="binary")


def build_l2_distance(n=4, N=None, t=65537):
    """Squared Euclidean distance."""

    def term(i):
        d = Read("x", (i,)) - Read("y", (i,))
        return d * d

    return _reduction("l2_distance", n, N or _pow2_at_least(2 * n), t, ["x", "y"], term)


def _coef_vector(values, params):
    v = [0] * params.N
    for i, c in enumerate(values):
        v[i] = c % params.t
    return PtValue(v)


def build_linear_regression(n=2, weights=None, bias=5, N=None, t=65537):
    """Single prediction ``sum_i w_i x_i + b`` with plaintext model parameters."""
    weights = tuple(weights or range(3, 3 + n))
    if len(weights) != n:
        raise SpecError("need one weight per feature")
    return _reduction(
        "linear_regression", n, N or _pow2_at_least(2 * n), t, ["x"],
        lambda i: Const(weights[i]) * Read("x", (i,)),
        pt_consts={"w": lambda p: _coef_vector(weights, p), "b": lambda p: PtValue.broadcast(bias, p)},
        extra=Const(bias),
        meta={"weights": list(weights), "bias": bias},
    )


def build_polynomial_regression(n=8, a=3, b=5, c=7, N=None, t=65537):
    """Element-wise ``a*x^2 + b*x + c`` over a packed batch with plaintext coefficients."""
    params = _ring(N, n, t)
    lay = vector_layout("x", n)
    ref = {(i,): Const(a) * Read("x", (i,)) * Read("x", (i,)) + Const(b) * Read("x", (i,)) + Const(c)
           for i in range(n)}
    pts = {k: PtValue.broadcast(v, params) for k, v in (("a", a), ("b", b), ("c", c))}
    return lift_reference("polynomial_regression", params, ["x"], {"x": lay}, vector_layout("x", n), ref, pts,
                          meta={"kind": "elementwise", "sizes": dict(n=n), "coefficients": [a, b, c]})


def build_elementwise(name: str, inputs: Sequence[str], fn: Callable, height=3, width=3, pad=1,
                      N=None, t=65537, pt_consts: Mapping[str, int] | None = None):
    """Pixel-wise combination of images sharing one padded layout (pipeline glue stages).

    ``fn`` receives one :class:`Read` per input and returns the output expression.
    """
    params, lay0 = _padded_image(height, width, pad, pad, N, t)
    tensors = {ct: TensorLayout(ct, lay0.shape, lay0.strides, lay0.offset) for ct in inputs}
    ref = {idx: fn(*[Read(ct, idx) for ct in inputs]) for idx in lay0.indices()}
    out = TensorLayout(inputs[0], lay0.shape, lay0.strides, lay0.offset)
    pts = {k: PtValue.broadcast(v, params) for k, v in (pt_consts or {}).items()}
    return lift_reference(name, params, list(inputs), tensors, out, ref, pts,
                          meta={"kind": "elementwise", "stride": lay0.strides[0],
                                "sizes": dict(height=height, width=width, pad=pad)})


BENCHMARKS = {
    "box_blur": build_box_blur,
    "dot_product": build_dot_product,
    "hamming": build_hamming,
    "l2_distance": build_l2_distance,
    "linear_regression": build_linear_regression,
    "polynomial_regression": build_polynomial_regression,
    "gx": lambda **kw: build_gradient("gx", **kw),
    "gy": lambda **kw: build_gradient("gy", **kw),
    "roberts_cross": build_roberts_cross,
}


def build_kernel(name: str, **sizes) -> KernelSpec:
    """Build one of the benchmark kernels at the given (or default) sizes."""
    if name not in BENCHMARKS:
        raise SpecError(f"unknown kernel {name!r}; expected one of {sorted(BENCHMARKS)}")
    try:
        return BENCHMARKS[name](**sizes)
    except TypeError as e:
        raise SpecError(f"bad size parameters for {name}: {e}") from e
