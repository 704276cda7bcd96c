"""Equivalence checking of programs against kernel specifications.

Verification is exact: both sides are reduced to canonical polynomials mod t
and compared on the masked output slots.  As long as every polynomial has
total degree below t, formal equality coincides with equality as functions on
the ring, so a difference always has a concrete witness input.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from hesynth.kernels import Example, KernelSpec, example_from_assignment, poly_of_program
from hesynth.poly import Poly
from hesynth.quill import Program, StructuralError, eval_program

log = logging.getLogger(__name__)

PROBES = 64


class VerificationError(RuntimeError):
    """Verifier contract violation (signature mismatch, degree guard, equal polynomials)."""


@dataclass(frozen=True)
class Ok:
    def __bool__(self):
        return True


@dataclass(frozen=True)
class Counterexample:
    inputs: Mapping[str, np.ndarray]
    expected: np.ndarray
    actual: np.ndarray
    slot: int

    def __bool__(self):
        return False

    def example(self) -> Example:
        return Example(self.inputs, self.expected)

    def to_dict(self) -> dict:
        return {"inputs": {k: v.tolist() for k, v in self.inputs.items()},
                "slot": self.slot, "expected": int(self.expected[self.slot]), "actual": int(self.actual[self.slot])}


def check_signature(p: Program, spec: KernelSpec) -> None:
    if p.params != spec.params:
        raise VerificationError(f"ring mismatch: program {p.params}, spec {spec.params}")
    if tuple(p.ct_inputs) != tuple(spec.ct_inputs):
        raise VerificationError(f"input mismatch: program {p.ct_inputs}, spec {spec.ct_inputs}")


def counterexample_from_polys(pa: Poly, pb: Poly, rng: np.random.Generator | None = None,
                              binary_first: bool = True) -> dict:
    """An assignment (variable -> value) on which ``pa`` and ``pb`` differ.

    Random 0/1 points are tried first, then uniform points (Schwartz-Zippel),
    then a deterministic grid search on the variables of a monomial of the
    difference with the fewest variables.
    """
    diff = pa - pb
    if diff.is_zero():
        raise VerificationError("polynomials are identical; no counterexample exists")
    t = diff.t
    if diff.degree() >= t:
        raise VerificationError("degree guard: polynomial degree reaches the plaintext modulus")
    rng = rng or np.random.default_rng(0)
    vars_ = sorted(diff.variables())
    if not vars_:
        return {}
    k = len(vars_)
    tries = [(0, 2)] if binary_first else []
    tries.append((0, t))
    for lo, hi in tries:
        pts = rng.integers(lo, hi, size=(PROBES, k))
        vals = diff.evaluate({v: pts[:, i] for i, v in enumerate(vars_)})
        nz = np.nonzero(np.asarray(vals) % t)[0]
        if len(nz):
            row = pts[nz[0]]
            return {v: int(row[i]) for i, v in enumerate(vars_)}
    # grid fallback: keep one monomial's variables, zero out the rest
    mono = min(diff.terms, key=lambda m: (len(set(m)), m))
    keep = sorted(set(mono))
    restricted = diff.substitute(lambda v: Poly.var(v, t) if v in set(keep) else Poly.zero(t))
    degs = {v: max((m.count(v) for m in restricted.terms), default=0) for v in keep}
    for combo in itertools.product(*(range(degs[v] + 1) for v in keep)):
        point = dict(zip(keep, combo))
        if restricted.evaluate(point) % t:
            return point
    raise VerificationError("no counterexample found for a nonzero polynomial")  # unreachable below the guard


def _counterexample(p: Program, spec: KernelSpec, inputs: Mapping[str, np.ndarray]) -> Counterexample | None:
    actual = np.asarray(eval_program(p, inputs).slots)
    expected = spec.eval_polys(inputs)
    bad = [s for s in spec.mask if actual[s] != expected[s]]
    if not bad:
        return None
    return Counterexample({k: np.asarray(v) for k, v in inputs.items()}, expected, actual, bad[0])


def _batch_probe(p: Program, spec: KernelSpec, rng: np.random.Generator, binary: bool) -> Counterexample | None:
    batch = {}
    for ct in spec.ct_inputs:
        v = np.zeros((PROBES, spec.N), dtype=np.int64)
        data = spec.input_slots(ct)
        v[:, data] = rng.integers(0, 2 if binary else spec.t, size=(PROBES, len(data)))
        if not binary:
            b = spec.binary_slots(ct)
            v[:, b] = rng.integers(0, 2, size=(PROBES, len(b)))
        batch[ct] = v
    actual = np.asarray(eval_program(p, batch).slots)
    expected = spec.eval_polys(batch)
    mask = list(spec.mask)
    diff = np.any(actual[:, mask] != expected[:, mask], axis=1)
    if not diff.any():
        return None
    i = int(np.argmax(diff))
    return _counterexample(p, spec, {ct: batch[ct][i] for ct in spec.ct_inputs})


def verify(p: Program, spec: KernelSpec, seed: int = 0):
    """Return :class:`Ok` if ``p`` implements ``spec`` on every masked slot, else a :class:`Counterexample`."""
    check_signature(p, spec)
    rng = np.random.default_rng(seed)
    # cheap random probes catch most wrong candidates; 0/1 inputs first
    for binary in (True, False):
        cex = _batch_probe(p, spec, rng, binary)
        if cex is not None:
            return cex
    polys = poly_of_program(p, inputs=spec.symbolic_inputs())
    for s in spec.mask:
        pa, pb = polys[s], spec.out_polys[s]
        if max(pa.degree(), pb.degree()) >= spec.t:
            raise VerificationError("degree guard: polynomial degree reaches the plaintext modulus")
        if pa != pb:
            point = counterexample_from_polys(pa, pb, rng)
            cex = _counterexample(p, spec, example_from_assignment(spec, point).inputs)
            if cex is None:
                raise VerificationError("counterexample failed to distinguish the program")
            return cex
    return Ok()


def check_on_examples(p: Program, examples: Sequence[Example], mask: Sequence[int]):
    """``None`` when ``p`` matches every example on ``mask``; otherwise the first failing example."""
    for ex in examples:
        try:
            out = np.asarray(eval_program(p, ex.inputs).slots)
        except StructuralError:
            return ex
        if any(out[s] != ex.expected[s] for s in mask):
            return ex
    return None
