"""Behavioral model of the BFV SIMD instruction set.

Ciphertexts are plain slot vectors mod ``t`` that carry a multiplicative
depth counter.  Programs are straight-line SSA lists in *local rotate* form:
each ciphertext operand may carry a left-rotation amount instead of the
rotation being a separate instruction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence, Union

import numpy as np

MAX_SLOTS = 4096
MAX_MODULUS = 2**31


class StructuralError(ValueError):
    """A program or value violates the IR's structural rules."""


class ProgramParseError(ValueError):
    """A serialized program could not be decoded."""


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class RingParams:
    N: int = 16
    t: int = 65537

    def __post_init__(self):
        if self.N < 2 or self.N & (self.N - 1) or self.N > MAX_SLOTS:
            raise ValueError(f"slot count must be a power of two in [2, {MAX_SLOTS}], got {self.N}")
        if not (2 < self.t < MAX_MODULUS) or not _is_prime(self.t):
            raise ValueError(f"plaintext modulus must be an odd prime below 2**31, got {self.t}")

    def to_dict(self) -> dict:
        return {"N": self.N, "t": self.t}


class Op(str, Enum):
    ADD_CT_CT = "AddCtCt"
    SUB_CT_CT = "SubCtCt"
    MUL_CT_CT = "MulCtCt"
    ADD_CT_PT = "AddCtPt"
    SUB_CT_PT = "SubCtPt"
    MUL_CT_PT = "MulCtPt"
    # only present after codegen lowering
    ROTATE = "Rotate"
    RELINEARIZE = "Relinearize"

    @property
    def is_pt(self) -> bool:
        return self in (Op.ADD_CT_PT, Op.SUB_CT_PT, Op.MUL_CT_PT)

    @property
    def is_unary(self) -> bool:
        return self in (Op.ROTATE, Op.RELINEARIZE)

    @property
    def is_arith(self) -> bool:
        return not self.is_unary

    @property
    def commutative(self) -> bool:
        return self in (Op.ADD_CT_CT, Op.MUL_CT_CT)

    @property
    def kind(self) -> str:
        """'add', 'sub' or 'mul' for arithmetic opcodes."""
        return {"Add": "add", "Sub": "sub", "Mul": "mul"}.get(self.value[:3], self.value.lower())


ARITH_OPS = (Op.ADD_CT_CT, Op.SUB_CT_CT, Op.MUL_CT_CT, Op.ADD_CT_PT, Op.SUB_CT_PT, Op.MUL_CT_PT)

Ref = Union[str, int]


def _apply(kind: str, a, b, t: int):
    if kind == "add":
        return (a + b) % t
    if kind == "sub":
        return (a - b) % t
    return (a * b) % t


def rotate_slots(v, x: int):
    """Left-rotate the last axis of ``v`` by ``x``: ``out[i] = v[(i + x) mod N]``."""
    v = np.asarray(v)
    n = v.shape[-1]
    x %= n
    if x == 0:
        return v
    return np.roll(v, -x, axis=-1)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.int64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class CtValue:
    """Behavioral ciphertext.

    ``slots`` has shape ``(..., N)``; leading axes batch independent inputs
    through the same program.
    """

    slots: np.ndarray
    depth: int
    params: RingParams

    def __post_init__(self):
        arr = np.asarray(self.slots, dtype=np.int64)
        if arr.ndim == 0 or arr.shape[-1] != self.params.N:
            raise StructuralError(f"ciphertext must have {self.params.N} slots, got shape {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() >= self.params.t):
            raise StructuralError("ciphertext slots must lie in [0, t)")
        if self.depth < 0:
            raise StructuralError("multiplicative depth must be non-negative")
        object.__setattr__(self, "slots", _readonly(arr))

    @classmethod
    def fresh(cls, slots, params: RingParams) -> "CtValue":
        return cls(np.asarray(slots, dtype=np.int64) % params.t, 0, params)

    def __eq__(self, other):
        if not isinstance(other, CtValue):
            return NotImplemented
        return (self.params == other.params and self.depth == other.depth
                and self.slots.shape == other.slots.shape and bool(np.all(self.slots == other.slots)))

    def __repr__(self):
        return f"CtValue(slots={self.slots.tolist()}, depth={self.depth})"


@dataclass(frozen=True)
class PtValue:
    slots: tuple

    def __post_init__(self):
        object.__setattr__(self, "slots", tuple(int(s) for s in self.slots))

    def array(self) -> np.ndarray:
        return np.asarray(self.slots, dtype=np.int64)

    @classmethod
    def broadcast(cls, value: int, params: RingParams) -> "PtValue":
        return cls((value % params.t,) * params.N)


@dataclass(frozen=True)
class Operand:
    """A ciphertext operand: an input name or an instruction index, plus a left rotation."""

    src: Ref
    rot: int = 0

    def key(self) -> tuple:
        # inputs sort before instruction results
        if isinstance(self.src, str):
            return (0, self.src, self.rot)
        return (1, self.src, self.rot)

    def to_json(self) -> dict:
        return {"src": self.src, "rot": self.rot}


@dataclass(frozen=True)
class Instruction:
    op: Op
    lhs: Operand
    rhs: Union[Operand, str, None] = None

    def operands(self) -> tuple:
        """Ciphertext operands of this instruction."""
        if isinstance(self.rhs, Operand):
            return (self.lhs, self.rhs)
        return (self.lhs,)

    def to_json(self) -> dict:
        d = {"op": self.op.value, "lhs": self.lhs.to_json()}
        if isinstance(self.rhs, Operand):
            d["rhs"] = self.rhs.to_json()
        elif isinstance(self.rhs, str):
            d["rhs"] = {"pt": self.rhs}
        return d


@dataclass(frozen=True)
class Program:
    params: RingParams
    ct_inputs: tuple
    pt_consts: tuple = ()
    body: tuple = ()
    result: Ref = None

    def __post_init__(self):
        object.__setattr__(self, "ct_inputs", tuple(self.ct_inputs))
        pts = self.pt_consts.items() if isinstance(self.pt_consts, Mapping) else self.pt_consts
        pts = tuple((name, v if isinstance(v, PtValue) else PtValue(v)) for name, v in pts)
        object.__setattr__(self, "pt_consts", pts)
        object.__setattr__(self, "body", tuple(self.body))
        if self.result is None:
            if self.body:
                object.__setattr__(self, "result", len(self.body) - 1)
            elif len(self.ct_inputs) == 1:
                object.__setattr__(self, "result", self.ct_inputs[0])
            else:
                raise StructuralError("empty program needs an explicit result")
        self.validate()

    @property
    def pt(self) -> dict:
        return dict(self.pt_consts)

    def validate(self) -> None:
        N = self.params.N
        names = set(self.ct_inputs)
        if len(names) != len(self.ct_inputs):
            raise StructuralError("duplicate ciphertext input names")
        pt_names = [n for n, _ in self.pt_consts]
        if len(set(pt_names)) != len(pt_names) or names & set(pt_names):
            raise StructuralError("plaintext names must be unique and distinct from ciphertext inputs")
        for _, v in self.pt_consts:
            if len(v.slots) != N or any(not 0 <= s < self.params.t for s in v.slots):
                raise StructuralError(f"plaintext constants need {N} slots in [0, t)")
        for k, ins in enumerate(self.body):
            if not isinstance(ins.op, Op):
                raise StructuralError(f"instruction {k}: unknown opcode {ins.op!r}")
            for o in ins.operands():
                self._check_ref(o.src, k)
                if not 0 <= o.rot < N:
                    raise StructuralError(f"instruction {k}: rotation {o.rot} outside [0, {N})")
            if ins.op.is_pt:
                if ins.rhs not in pt_names:
                    raise StructuralError(f"instruction {k}: undeclared plaintext {ins.rhs!r}")
            elif ins.op.is_unary:
                if ins.rhs is not None:
                    raise StructuralError(f"instruction {k}: {ins.op.value} takes one operand")
                if ins.op is Op.RELINEARIZE and ins.lhs.rot:
                    raise StructuralError(f"instruction {k}: relinearize operand cannot be rotated")
            elif not isinstance(ins.rhs, Operand):
                raise StructuralError(f"instruction {k}: {ins.op.value} needs two ciphertext operands")
        self._check_ref(self.result, len(self.body))

    def _check_ref(self, src: Ref, before: int) -> None:
        if isinstance(src, str):
            if src not in self.ct_inputs:
                raise StructuralError(f"unbound ciphertext reference {src!r}")
        elif isinstance(src, (int, np.integer)) and not isinstance(src, bool):
            if not 0 <= src < before:
                raise StructuralError(f"reference to value {src} is not defined before use {before}")
        else:
            raise StructuralError(f"bad reference {src!r}")

    def mul_count(self) -> int:
        return sum(1 for ins in self.body if ins.op in (Op.MUL_CT_CT, Op.MUL_CT_PT))

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "ct_inputs": list(self.ct_inputs),
            "pt_consts": {n: list(v.slots) for n, v in self.pt_consts},
            "body": [ins.to_json() for ins in self.body],
            "result": self.result,
        }

    def to_json(self, **extra) -> str:
        d = self.to_dict()
        d.update(extra)
        return json.dumps(d, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: Mapping) -> "Program":
        try:
            params = RingParams(int(d["params"]["N"]), int(d["params"]["t"]))
            N = params.N

            def operand(o):
                src = o["src"]
                if not isinstance(src, (str, int)) or isinstance(src, bool):
                    raise ProgramParseError(f"bad operand source {src!r}")
                return Operand(src, int(o.get("rot", 0)) % N)

            body = []
            for ins in d["body"]:
                op = Op(ins["op"])
                rhs = ins.get("rhs")
                if rhs is None:
                    rhs_v = None
                elif "pt" in rhs:
                    rhs_v = str(rhs["pt"])
                else:
                    rhs_v = operand(rhs)
                body.append(Instruction(op, operand(ins["lhs"]), rhs_v))
            return cls(params, tuple(d["ct_inputs"]),
                       tuple((n, PtValue(v)) for n, v in sorted(d.get("pt_consts", {}).items())),
                       tuple(body), d.get("result"))
        except ProgramParseError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise ProgramParseError(f"malformed program: {e}") from e

    @classmethod
    def from_json(cls, text: str) -> "Program":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as e:
            raise ProgramParseError(f"invalid JSON: {e}") from e
        if not isinstance(d, dict):
            raise ProgramParseError("program document must be a JSON object")
        return cls.from_dict(d)

    def pretty(self) -> str:
        def fmt(o: Operand) -> str:
            name = o.src if isinstance(o.src, str) else f"c{o.src + 1}"
            return f"(rot-ct {name} {o.rot})" if o.rot else name

        lines = []
        for k, ins in enumerate(self.body):
            if ins.op.is_pt:
                args = f"{fmt(ins.lhs)} {ins.rhs}"
            elif ins.op is Op.ROTATE:
                args = f"{fmt(Operand(ins.lhs.src))} {ins.lhs.rot}"
            else:
                args = " ".join(fmt(o) for o in ins.operands())
            lines.append(f"c{k + 1} = ({ins.op.value} {args})")
        return "\n".join(lines)


class ProgramBuilder:
    """Incremental construction of SSA programs; returns operand handles.

    Negative rotation amounts are normalized to left rotations mod N.
    """

    def __init__(self, params: RingParams, ct_inputs: Sequence[str], pt_consts: Mapping[str, PtValue] | None = None):
        self.params = params
        self.ct_inputs = tuple(ct_inputs)
        self.pt_consts = dict(pt_consts or {})
        self.body: list[Instruction] = []

    def ref(self, src: Ref, rot: int = 0) -> Operand:
        return Operand(src, rot % self.params.N)

    def _as_operand(self, x) -> Operand:
        if isinstance(x, Operand):
            return x
        return self.ref(x)

    def emit(self, op: Op, lhs, rhs=None) -> int:
        lhs = self._as_operand(lhs)
        if op.is_pt:
            if rhs not in self.pt_consts:
                raise StructuralError(f"undeclared plaintext {rhs!r}")
        elif rhs is not None:
            rhs = self._as_operand(rhs)
        self.body.append(Instruction(op, lhs, rhs))
        return len(self.body) - 1

    def add(self, a, b): return self.emit(Op.ADD_CT_CT, a, b)
    def sub(self, a, b): return self.emit(Op.SUB_CT_CT, a, b)
    def mul(self, a, b): return self.emit(Op.MUL_CT_CT, a, b)
    def add_pt(self, a, p): return self.emit(Op.ADD_CT_PT, a, p)
    def sub_pt(self, a, p): return self.emit(Op.SUB_CT_PT, a, p)
    def mul_pt(self, a, p): return self.emit(Op.MUL_CT_PT, a, p)

    def rotate(self, a, k: int) -> int:
        return self.emit(Op.ROTATE, self.ref(a, k))

    def build(self, result: Ref = None) -> Program:
        return Program(self.params, self.ct_inputs, tuple(sorted(self.pt_consts.items())),
                       tuple(self.body), result)


def eval_instruction(instr: Instruction, env: Mapping[Ref, object], params: RingParams) -> CtValue:
    """Evaluate one instruction against bound values (CtValue for refs, PtValue for plaintexts)."""

    def fetch(o: Operand) -> CtValue:
        if o.src not in env:
            raise StructuralError(f"unbound reference {o.src!r}")
        v = env[o.src]
        if not isinstance(v, CtValue):
            raise StructuralError(f"reference {o.src!r} is not a ciphertext")
        if v.params != params:
            raise StructuralError("ring parameter mismatch between operands")
        return v

    t = params.t
    a = fetch(instr.lhs)
    a_slots = rotate_slots(a.slots, instr.lhs.rot)
    op = instr.op
    if op is Op.ROTATE or op is Op.RELINEARIZE:
        return CtValue(a_slots, a.depth, params)
    if op.is_pt:
        p = env.get(instr.rhs)
        if not isinstance(p, PtValue):
            raise StructuralError(f"unbound plaintext {instr.rhs!r}")
        if len(p.slots) != params.N:
            raise StructuralError("plaintext slot count mismatch")
        depth = a.depth + 1 if op is Op.MUL_CT_PT else a.depth
        return CtValue(_apply(op.kind, a_slots, p.array(), t), depth, params)
    b = fetch(instr.rhs)
    b_slots = rotate_slots(b.slots, instr.rhs.rot)
    depth = max(a.depth, b.depth) + (1 if op is Op.MUL_CT_CT else 0)
    return CtValue(_apply(op.kind, a_slots, b_slots, t), depth, params)


def eval_program(p: Program, inputs: Mapping[str, object]) -> CtValue:
    """Run ``p`` on named ciphertext inputs (CtValue or raw slot arrays).

    Raw arrays are treated as fresh ciphertexts; a leading batch axis is allowed.
    """
    env: dict = {}
    for name in p.ct_inputs:
        if name not in inputs:
            raise StructuralError(f"missing input {name!r}")
        v = inputs[name]
        if not isinstance(v, CtValue):
            arr = np.asarray(v, dtype=np.int64)
            if arr.ndim == 0 or arr.shape[-1] != p.params.N:
                raise StructuralError(f"input {name!r} must have {p.params.N} slots")
            v = CtValue.fresh(arr, p.params)
        elif v.params != p.params:
            raise StructuralError(f"input {name!r} has mismatched ring parameters")
        env[name] = v
    for name, v in p.pt_consts:
        env[name] = v
    for k, ins in enumerate(p.body):
        env[k] = eval_instruction(ins, env, p.params)
    return env[p.result]


def depths(p: Program) -> list[int]:
    """Multiplicative depth of every instruction result with fresh inputs."""
    d: dict = {name: 0 for name in p.ct_inputs}
    out = []
    for k, ins in enumerate(p.body):
        ds = [d[o.src] for o in ins.operands()]
        if ins.op is Op.MUL_CT_CT:
            v = max(ds) + 1
        elif ins.op is Op.MUL_CT_PT:
            v = ds[0] + 1
        else:
            v = max(ds)
        d[k] = v
        out.append(v)
    return out


def mdepth(p: Program) -> int:
    if isinstance(p.result, str):
        return 0
    return depths(p)[p.result]


def critical_path(p: Program) -> int:
    """Longest dependence chain in instructions, a rotated operand counting as one extra step."""
    d: dict = {name: 0 for name in p.ct_inputs}
    for k, ins in enumerate(p.body):
        if ins.op is Op.ROTATE:
            d[k] = d[ins.lhs.src] + 1
            continue
        step = 0 if ins.op is Op.RELINEARIZE else 1
        d[k] = max(d[o.src] + (1 if o.rot else 0) for o in ins.operands()) + step
    return d[p.result]


def rotation_pairs(p: Program) -> set:
    """Distinct (source, amount) rotations the program needs, after CSE."""
    pairs = set()
    for k, ins in enumerate(p.body):
        if ins.op is Op.ROTATE:
            pairs.add(("explicit", k))
            continue
        for o in ins.operands():
            if o.rot:
                pairs.add((o.src, o.rot))
    return pairs


def instruction_count(p: Program) -> tuple[int, int, int]:
    """(arithmetic, rotations, total); explicit Rotate instructions count as rotations."""
    arith = sum(1 for ins in p.body if ins.op.is_arith)
    rots = len(rotation_pairs(p))
    return arith, rots, arith + rots


@dataclass(frozen=True)
class CostModel:
    """Abstract latency per instruction kind."""

    lat_add_ct: float = 1.0
    lat_sub_ct: float = 1.0
    lat_mul_ct_ct: float = 10.0
    lat_add_pt: float = 1.0
    lat_sub_pt: float = 1.0
    lat_mul_ct_pt: float = 7.0
    lat_rotate: float = 9.0

    def __post_init__(self):
        for name, v in self.__dict__.items():
            if not v > 0:
                raise ValueError(f"{name} must be positive")
        if self.lat_mul_ct_ct < self.lat_mul_ct_pt:
            raise ValueError("ct-ct multiply cannot be cheaper than ct-pt multiply")

    def latency(self, op: Op) -> float:
        return {
            Op.ADD_CT_CT: self.lat_add_ct,
            Op.SUB_CT_CT: self.lat_sub_ct,
            Op.MUL_CT_CT: self.lat_mul_ct_ct,
            Op.ADD_CT_PT: self.lat_add_pt,
            Op.SUB_CT_PT: self.lat_sub_pt,
            Op.MUL_CT_PT: self.lat_mul_ct_pt,
            Op.ROTATE: self.lat_rotate,
            Op.RELINEARIZE: 0.0,
        }[op]

    def to_dict(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_dict(cls, d: Mapping) -> "CostModel":
        return cls(**{k: float(v) for k, v in d.items()})


DEFAULT_COST = CostModel()


def estimated_latency(p: Program, m: CostModel = DEFAULT_COST) -> float:
    arith = sum(m.latency(ins.op) for ins in p.body if ins.op.is_arith)
    return arith + m.lat_rotate * len(rotation_pairs(p))
