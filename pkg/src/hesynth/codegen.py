"""Lowering of local-rotate programs to backend artifacts.

A synthesized program carries rotations as operand modifiers.  Lowering makes
every distinct rotation an explicit ``Rotate`` instruction, marks each
ciphertext-ciphertext product with a ``Relinearize`` instruction, and renders
the result either as JSON IR or as source text for a BFV evaluator API.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Mapping

from hesynth.quill import Instruction, Op, Operand, Program, instruction_count, mdepth

log = logging.getLogger(__name__)


class CodegenError(RuntimeError):
    pass


def _remap(o: Operand, where: Mapping) -> Operand:
    src = where.get(o.src, o.src) if isinstance(o.src, int) else o.src
    return Operand(src, o.rot)


def explicate_rotations(p: Program) -> Program:
    """Rewrite rotated operands into standalone ``Rotate`` instructions.

    Each distinct (source, amount) pair is rotated once, right before its
    first use, and every later use reads that rotated value.
    """
    body: list[Instruction] = []
    where: dict = {}  # old instruction index -> new index
    rotated: dict = {}  # (new source, amount) -> new index

    def lower(o: Operand) -> Operand:
        base = _remap(Operand(o.src), where)
        if not o.rot:
            return base
        key = (base.src, o.rot)
        if key not in rotated:
            body.append(Instruction(Op.ROTATE, Operand(base.src, o.rot)))
            rotated[key] = len(body) - 1
        return Operand(rotated[key])

    for k, ins in enumerate(p.body):
        if ins.op is Op.ROTATE:
            body.append(Instruction(Op.ROTATE, _remap(ins.lhs, where)))
        elif ins.op is Op.RELINEARIZE:
            body.append(Instruction(Op.RELINEARIZE, _remap(ins.lhs, where)))
        else:
            lhs = lower(ins.lhs)
            rhs = lower(ins.rhs) if isinstance(ins.rhs, Operand) else ins.rhs
            body.append(Instruction(ins.op, lhs, rhs))
        where[k] = len(body) - 1
    result = where[p.result] if isinstance(p.result, int) else p.result
    return Program(p.params, p.ct_inputs, p.pt_consts, tuple(body), result)


def insert_relinearization(p: Program) -> Program:
    """Place a ``Relinearize`` directly after every ``MulCtCt``; later uses read the relinearized value."""
    body: list[Instruction] = []
    where: dict = {}
    for k, ins in enumerate(p.body):
        lhs = _remap(ins.lhs, where)
        rhs = _remap(ins.rhs, where) if isinstance(ins.rhs, Operand) else ins.rhs
        body.append(Instruction(ins.op, lhs, rhs))
        if ins.op is Op.MUL_CT_CT:
            body.append(Instruction(Op.RELINEARIZE, Operand(len(body) - 1)))
        where[k] = len(body) - 1
    result = where[p.result] if isinstance(p.result, int) else p.result
    return Program(p.params, p.ct_inputs, p.pt_consts, tuple(body), result)


def lower(p: Program) -> Program:
    """Explicate rotations, then annotate relinearization."""
    return insert_relinearization(explicate_rotations(p))


# ------------------------------------------------------------------ JSON IR


def emit_json_ir(p: Program, name: str | None = None) -> str:
    """Canonical JSON text for ``p`` plus depth and count metadata (ignored when parsing)."""
    arith, rots, total = instruction_count(p)
    meta = {"mdepth": mdepth(p), "arith": arith, "rotations": rots, "total": total,
            "relinearizations": sum(1 for ins in p.body if ins.op is Op.RELINEARIZE)}
    if name is not None:
        meta["kernel"] = name
    return p.to_json(meta=meta)


def parse_json_ir(text: str) -> Program:
    return Program.from_json(text)


# ------------------------------------------------------------ source text


SEAL_TEMPLATE = {
    "preamble": (
        "// generated kernel: {name}\n"
        "// BFV parameters: poly_modulus_degree >= {N2}, plain_modulus = {t}, slots = {N}\n"
        "#include \"seal/seal.h\"\n"
        "\n"
        "void {name}(seal::Evaluator &evaluator, const seal::GaloisKeys &gal_keys,\n"
        "        const seal::RelinKeys &relin_keys,\n"
        "{args}"
        "        seal::Ciphertext &result)\n"
        "{{\n"
    ),
    "ct_arg": "        const seal::Ciphertext &{name},\n",
    "pt_arg": "        const seal::Plaintext &{name},\n",
    "AddCtCt": "    seal::Ciphertext {out};\n    evaluator.add({a}, {b}, {out});\n",
    "SubCtCt": "    seal::Ciphertext {out};\n    evaluator.sub({a}, {b}, {out});\n",
    "MulCtCt": "    seal::Ciphertext {out};\n    evaluator.multiply({a}, {b}, {out});\n",
    "AddCtPt": "    seal::Ciphertext {out};\n    evaluator.add_plain({a}, {b}, {out});\n",
    "SubCtPt": "    seal::Ciphertext {out};\n    evaluator.sub_plain({a}, {b}, {out});\n",
    "MulCtPt": "    seal::Ciphertext {out};\n    evaluator.multiply_plain({a}, {b}, {out});\n",
    "Rotate": "    seal::Ciphertext {out};\n    evaluator.rotate_rows({a}, {rot}, gal_keys, {out});\n",
    "Relinearize": "    seal::Ciphertext {out};\n    evaluator.relinearize({a}, relin_keys, {out});\n",
    "epilogue": "    result = {result};\n}}\n",
}


@dataclass
class Template:
    """Text fragments keyed by opcode plus preamble/argument/epilogue pieces."""

    parts: dict = field(default_factory=lambda: dict(SEAL_TEMPLATE))
    extension: str = "gen.cpp"

    def get(self, key: str) -> str:
        if key not in self.parts:
            raise CodegenError(f"template has no entry for {key!r}")
        return self.parts[key]


def _ident(name: str) -> str:
    out = "".join(c if c.isalnum() else "_" for c in name)
    return out if out and not out[0].isdigit() else "_" + out


def emit_backend_source(p: Program, name: str = "kernel", template: Template | None = None) -> str:
    """Render a lowered program as source text; values are named ``ct<k>`` in SSA order."""
    tpl = template or Template()
    N, t = p.params.N, p.params.t

    def ref(src) -> str:
        return f"ct{src}" if isinstance(src, int) else _ident(src)

    args = "".join(tpl.get("ct_arg").format(name=_ident(n)) for n in p.ct_inputs)
    args += "".join(tpl.get("pt_arg").format(name=_ident(n)) for n, _ in p.pt_consts)
    out = [tpl.get("preamble").format(name=_ident(name), N=N, N2=2 * N, t=t, args=args)]
    for k, ins in enumerate(p.body):
        if any(o.rot for o in ins.operands()) and ins.op is not Op.ROTATE:
            raise CodegenError(f"instruction {k} still has a rotated operand; lower the program first")
        frag = tpl.get(ins.op.value)
        b = ""
        if ins.op.is_pt:
            b = _ident(ins.rhs)
        elif isinstance(ins.rhs, Operand):
            b = ref(ins.rhs.src)
        out.append(frag.format(out=f"ct{k}", a=ref(ins.lhs.src), b=b, rot=ins.lhs.rot))
    out.append(tpl.get("epilogue").format(result=ref(p.result)))
    return "".join(out)


def write_artifacts(p: Program, name: str, out_dir, template: Template | None = None) -> dict:
    """Lower ``p`` and write ``<name>.ir.json`` and the backend source; returns the paths."""
    from pathlib import Path

    tpl = template or Template()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    low = lower(p)
    ir_path = out / f"{name}.ir.json"
    src_path = out / f"{name}.{tpl.extension}"
    ir_path.write_text(emit_json_ir(low, name))
    src_path.write_text(emit_backend_source(low, name, tpl))
    log.info("wrote %s and %s", ir_path, src_path)
    return {"ir": str(ir_path), "source": str(src_path)}


def load_template(path) -> Template:
    """Template from a JSON file of fragments; missing keys fall back to the shipped template."""
    with open(path) as f:
        d = json.load(f)
    parts = dict(SEAL_TEMPLATE)
    parts.update(d.get("parts", {}))
    return Template(parts, d.get("extension", "gen.cpp"))
