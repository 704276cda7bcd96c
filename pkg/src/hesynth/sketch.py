"""Local-rotate sketches: templates of arithmetic components with operand holes.

Each component offers a set of *choices* (an opcode plus one hole kind per
operand).  A ciphertext hole names any earlier value; a rotation hole also
picks a left-rotation amount from a restricted domain.  Because rotations are
operand modifiers, a rotation of a rotation cannot be expressed; it would be
redundant anyway since ``rot(rot(c, a), b) == rot(c, a + b)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

from hesynth.quill import Instruction, Op, Operand, Program, PtValue, RingParams

# fixed enumeration order of opcodes inside one component
OP_ORDER = (Op.ADD_CT_CT, Op.SUB_CT_CT, Op.MUL_CT_PT, Op.ADD_CT_PT, Op.SUB_CT_PT, Op.MUL_CT_CT, Op.ROTATE)


class SketchError(ValueError):
    pass


@dataclass(frozen=True)
class RotationDomain:
    """Allowed left-rotation amounts, always including 0."""

    amounts: tuple
    N: int

    def __post_init__(self):
        amounts = tuple(sorted({int(a) % self.N for a in self.amounts} | {0}))
        object.__setattr__(self, "amounts", amounts)
        for a in self.amounts:
            if not 0 <= a < self.N:
                raise SketchError(f"rotation {a} outside [0, {self.N})")

    def __contains__(self, x: int) -> bool:
        return x in self.amounts

    def __len__(self) -> int:
        return len(self.amounts)

    def __le__(self, other: "RotationDomain") -> bool:
        return self.N == other.N and set(self.amounts) <= set(other.amounts)

    @classmethod
    def full(cls, N: int) -> "RotationDomain":
        return cls(tuple(range(N)), N)

    @classmethod
    def none(cls, N: int) -> "RotationDomain":
        return cls((0,), N)


def pow2_domain(N: int) -> RotationDomain:
    """``{0, 1, 2, 4, ..., N/2}``."""
    if N < 2 or N & (N - 1):
        raise SketchError("pow2 domain needs a power-of-two slot count")
    return RotationDomain(tuple(1 << k for k in range(N.bit_length() - 1)), N)


def window_offsets(h: int, w: int) -> tuple:
    """Row and column offsets of an ``h x w`` window around its anchor.

    Odd windows are centred; even windows are anchored at their top-left element.
    """
    rows = range(-((h - 1) // 2), h - (h - 1) // 2)
    cols = range(-((w - 1) // 2), w - (w - 1) // 2)
    return tuple(rows), tuple(cols)


def sliding_window_domain(h: int, w: int, stride: int, N: int,
                          image_shape: Sequence[int] | None = None) -> RotationDomain:
    """Rotations that align any element of an ``h x w`` window with its anchor."""
    if h < 1 or w < 1:
        raise SketchError("window dimensions must be positive")
    if w > stride:
        raise SketchError(f"window width {w} exceeds the row stride {stride}")
    if image_shape is not None and (h > image_shape[0] or w > image_shape[1]):
        raise SketchError(f"{h}x{w} window exceeds the {image_shape[0]}x{image_shape[1]} image")
    if h * stride > N:
        raise SketchError(f"{h}x{w} window with stride {stride} does not fit in {N} slots")
    rows, cols = window_offsets(h, w)
    return RotationDomain(tuple(r * stride + c for r in rows for c in cols), N)


def parse_domain(text: str, N: int) -> RotationDomain:
    """``"full"``, ``"pow2"``, ``"none"`` or ``"window H W STRIDE"``."""
    parts = str(text).split()
    if parts == ["full"]:
        return RotationDomain.full(N)
    if parts == ["pow2"]:
        return pow2_domain(N)
    if parts == ["none"]:
        return RotationDomain.none(N)
    if len(parts) == 4 and parts[0] == "window":
        try:
            h, w, stride = (int(x) for x in parts[1:])
        except ValueError as e:
            raise SketchError(f"bad window domain {text!r}") from e
        return sliding_window_domain(h, w, stride, N)
    raise SketchError(f"unknown rotation domain {text!r}")


# ------------------------------------------------------------------ holes


@dataclass(frozen=True)
class CtHole:
    """Any earlier ciphertext value, unrotated."""

    def domain(self, N: int) -> RotationDomain:
        return RotationDomain.none(N)

    def to_json(self):
        return "ct"


@dataclass(frozen=True)
class CtRotHole:
    """Any earlier ciphertext value, rotated by an amount from ``rotations``."""

    rotations: RotationDomain

    def domain(self, N: int) -> RotationDomain:
        return self.rotations

    def to_json(self):
        return "ct-r"


@dataclass(frozen=True)
class PtRef:
    name: str

    def to_json(self):
        return {"pt": self.name}


HoleKind = Union[CtHole, CtRotHole]


@dataclass(frozen=True)
class Choice:
    op: Op
    lhs: HoleKind
    rhs: Union[HoleKind, PtRef, None] = None

    def __post_init__(self):
        if self.op is Op.RELINEARIZE:
            raise SketchError("relinearization is inserted by codegen, not synthesized")
        if self.op.is_pt != isinstance(self.rhs, PtRef):
            raise SketchError(f"{self.op.value} must pair a plaintext opcode with a plaintext reference")
        if self.op.is_unary != (self.rhs is None):
            raise SketchError(f"{self.op.value} has the wrong number of operands")
        if not isinstance(self.lhs, (CtHole, CtRotHole)):
            raise SketchError("first operand must be a ciphertext hole")

    def to_json(self) -> dict:
        d = {"op": self.op.value, "lhs": self.lhs.to_json()}
        if self.rhs is not None:
            d["rhs"] = self.rhs.to_json()
        return d


@dataclass(frozen=True)
class ComponentTemplate:
    choices: tuple

    def __post_init__(self):
        ch = tuple(sorted(self.choices, key=lambda c: OP_ORDER.index(c.op)))
        if not ch:
            raise SketchError("a component needs at least one opcode")
        object.__setattr__(self, "choices", ch)

    @property
    def opcodes(self) -> tuple:
        return tuple(c.op for c in self.choices)


@dataclass(frozen=True)
class Sketch:
    params: RingParams
    ct_inputs: tuple
    components: tuple
    pt_consts: tuple = ()
    explicit_rotations: bool = False
    meta: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.components) < 1:
            raise SketchError("a sketch needs at least one component")
        names = {n for n, _ in self.pt_consts}
        for comp in self.components:
            for c in comp.choices:
                if isinstance(c.rhs, PtRef) and c.rhs.name not in names:
                    raise SketchError(f"undeclared plaintext {c.rhs.name!r}")
                for k in (c.lhs, c.rhs):
                    if isinstance(k, CtRotHole) and k.rotations.N != self.params.N:
                        raise SketchError("rotation domain built for a different slot count")

    @property
    def L(self) -> int:
        return len(self.components)

    def with_length(self, L: int) -> "Sketch":
        """Same component template repeated ``L`` times."""
        if L < 1:
            raise SketchError("L must be at least 1")
        return Sketch(self.params, self.ct_inputs, (self.components[0],) * L, self.pt_consts,
                      self.explicit_rotations, self.meta)

    def to_dict(self) -> dict:
        comp = self.components[0]
        domains = sorted({k.rotations.amounts for c in comp.choices for k in (c.lhs, c.rhs)
                          if isinstance(k, CtRotHole)})
        return {
            "L": self.L,
            "components": [c.to_json() for c in comp.choices],
            "rotations": [list(d) for d in domains],
            "explicit_rotations": self.explicit_rotations,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def _hole(kind, domain: RotationDomain):
    if isinstance(kind, (CtHole, CtRotHole, PtRef)):
        return kind
    if kind == "ct":
        return CtHole()
    if kind == "ct-r":
        return CtRotHole(domain)
    if isinstance(kind, Mapping) and "pt" in kind:
        return PtRef(str(kind["pt"]))
    if isinstance(kind, str) and kind.startswith("pt:"):
        return PtRef(kind[3:])
    raise SketchError(f"unknown operand hole {kind!r}")


def make_sketch(choices: Sequence, L: int, ct_inputs: Sequence[str], params: RingParams,
                domain: RotationDomain | None = None, pt_consts: Mapping[str, PtValue] | None = None,
                explicit_rotations: bool = False) -> Sketch:
    """Build a sketch of ``L`` identical components.

    ``choices`` holds ``(op, lhs_kind, rhs_kind)`` triples where a kind is
    ``"ct"``, ``"ct-r"``, ``{"pt": name}`` or a hole object.  ``"ct-r"``
    holes use ``domain`` (the full domain by default).  With
    ``explicit_rotations`` every rotation hole becomes a plain ciphertext
    hole and each component may instead be a standalone ``Rotate``.
    """
    if L < 1:
        raise SketchError("L must be at least 1")
    if not choices:
        raise SketchError("empty opcode set")
    domain = domain or RotationDomain.full(params.N)
    if domain.N != params.N:
        raise SketchError("rotation domain built for a different slot count")
    built = []
    for ch in choices:
        if isinstance(ch, Choice):
            built.append(ch)
            continue
        op, *kinds = ch
        op = Op(op)
        lhs = _hole(kinds[0] if kinds else "ct", domain)
        rhs = _hole(kinds[1], domain) if len(kinds) > 1 and kinds[1] is not None else None
        built.append(Choice(op, lhs, rhs))
    if explicit_rotations:
        doms = [k.rotations for c in built for k in (c.lhs, c.rhs) if isinstance(k, CtRotHole)]
        rot_dom = RotationDomain(tuple(a for d in doms for a in d.amounts), params.N) if doms else domain
        built = [Choice(c.op, CtHole(), CtHole() if isinstance(c.rhs, CtRotHole) else c.rhs)
                 if c.op is not Op.ROTATE else c for c in built]
        if not any(c.op is Op.ROTATE for c in built):
            built.append(Choice(Op.ROTATE, CtRotHole(rot_dom)))
    comp = ComponentTemplate(tuple(built))
    return Sketch(params, tuple(ct_inputs), (comp,) * L, tuple(sorted((pt_consts or {}).items())),
                  explicit_rotations)


def sketch_from_dict(d: Mapping, ct_inputs: Sequence[str], params: RingParams,
                     pt_consts: Mapping[str, PtValue] | None = None) -> Sketch:
    """Decode the JSON sketch format; inputs and plaintexts come from the kernel."""
    try:
        domain = parse_domain(d.get("domain", "full"), params.N)
        choices = [(c["op"], c.get("lhs", "ct"), c.get("rhs")) for c in d["components"]]
        return make_sketch(choices, int(d.get("L", 1)), ct_inputs, params, domain, pt_consts,
                           bool(d.get("explicit_rotations", False)))
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, SketchError):
            raise
        raise SketchError(f"malformed sketch: {e}") from e


# ------------------------------------------------------------ assignments


@dataclass(frozen=True)
class Fill:
    """One component's filled holes: the chosen alternative and its operands."""

    choice: int
    lhs: Operand
    rhs: Union[Operand, str, None] = None


@dataclass(frozen=True)
class HoleAssignment:
    fills: tuple

    def __len__(self):
        return len(self.fills)


def instantiate(sketch: Sketch, a: HoleAssignment) -> Program:
    """Fill the sketch's holes; the result is the last component.

    An assignment may fill fewer than ``L`` components (the synthesizer is
    free to ignore trailing ones).
    """
    if not 1 <= len(a.fills) <= sketch.L:
        raise SketchError(f"assignment has {len(a.fills)} components, sketch allows 1..{sketch.L}")
    N = sketch.params.N
    body = []
    for j, (comp, f) in enumerate(zip(sketch.components, a.fills)):
        if not 0 <= f.choice < len(comp.choices):
            raise SketchError(f"component {j}: opcode choice {f.choice} not offered")
        ch = comp.choices[f.choice]
        for kind, o in ((ch.lhs, f.lhs), (ch.rhs, f.rhs)):
            if isinstance(kind, (CtHole, CtRotHole)):
                if not isinstance(o, Operand):
                    raise SketchError(f"component {j}: missing ciphertext operand")
                if isinstance(o.src, int) and not 0 <= o.src < j:
                    raise SketchError(f"component {j}: operand refers to value {o.src} (SSA violation)")
                if isinstance(o.src, str) and o.src not in sketch.ct_inputs:
                    raise SketchError(f"component {j}: unknown input {o.src!r}")
                if o.rot % N not in kind.domain(N):
                    raise SketchError(f"component {j}: rotation {o.rot} outside the hole's domain")
            elif isinstance(kind, PtRef):
                if o != kind.name:
                    raise SketchError(f"component {j}: plaintext must be {kind.name!r}")
        rhs = f.rhs if isinstance(f.rhs, str) or f.rhs is None else Operand(f.rhs.src, f.rhs.rot % N)
        body.append(Instruction(ch.op, Operand(f.lhs.src, f.lhs.rot % N), rhs))
    return Program(sketch.params, sketch.ct_inputs, sketch.pt_consts, tuple(body), len(body) - 1)


def assignment_of_program(sketch: Sketch, p: Program) -> HoleAssignment:
    """Inverse of :func:`instantiate` for programs that fit the sketch."""
    fills = []
    for j, ins in enumerate(p.body):
        comp = sketch.components[min(j, sketch.L - 1)]
        for k, ch in enumerate(comp.choices):
            if ch.op is not ins.op:
                continue
            ok = True
            for kind, o in ((ch.lhs, ins.lhs), (ch.rhs, ins.rhs)):
                if isinstance(kind, (CtHole, CtRotHole)) and o.rot not in kind.domain(p.params.N):
                    ok = False
            if ok:
                fills.append(Fill(k, ins.lhs, ins.rhs))
                break
        else:
            raise SketchError(f"instruction {j} does not fit the sketch")
    return HoleAssignment(tuple(fills))
