"""Acceptance criteria 1-10, one test each.

Every test records a PASS/FAIL line that is printed in the pytest terminal
summary (and immediately, when run with ``-s``).  Run on its own with::

    pytest tests/test_acceptance.py -v
"""

import contextlib
import json
import re
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE, gx_separable_program
from helpers import differ, mutations, random_inputs, random_program, spec_of_program
from hesynth import bench
from hesynth.cli import main as cli_main
from hesynth.codegen import emit_backend_source, emit_json_ir, explicate_rotations, lower, parse_json_ir
from hesynth.engine import SynthConfig, synthesize, synthesize_multistep
from hesynth.kernels import Read, poly_of_program, random_example, lift_reference, scalar_layout, vector_layout
from hesynth.quill import (
    CtValue,
    Instruction,
    Op,
    Operand,
    ProgramBuilder,
    PtValue,
    RingParams,
    eval_instruction,
    eval_program,
    instruction_count,
    rotate_slots,
)
from hesynth.sketch import make_sketch, pow2_domain
from hesynth.suite import PIPELINES, kernel_and_sketch
from hesynth.verifier import Counterexample, Ok, verify

T = 65537
GOLDEN = Path(__file__).parent / "golden"


@contextlib.contextmanager
def criterion(n: int, desc: str):
    detail: dict = {}
    try:
        yield detail
    except BaseException:
        ACCEPTANCE[n] = (False, desc, detail.get("info", "assertion failed"))
        print(f"criterion {n}: FAIL  {desc}")
        raise
    ACCEPTANCE[n] = (True, desc, detail.get("info", ""))
    print(f"criterion {n}: PASS  {desc}  [{detail.get('info', '')}]")


# ------------------------------------------------------------------ shared runs


@pytest.fixture(scope="module")
def suite_rows():
    """Baseline and synthesized program for every suite kernel at default sizes and seed 0."""
    configs = [bench.RunConfig(k) for k in bench.SUITE]
    t0 = time.perf_counter()
    rows = bench.run_suite(configs, timings=True)
    return {r["kernel"]: r for r in rows}, time.perf_counter() - t0


# ------------------------------------------------------------------ criteria


def test_criterion_01_semantics():
    with criterion(1, "instruction semantics and depth rules, rotation group law") as d:
        t0 = time.perf_counter()
        params = RingParams(4, T)
        a_vals, b_vals = np.array([1, 2, 3, T - 1]), np.array([5, 6, 7, 8])
        pt = PtValue((2, 3, 4, 5))
        cases = {
            Op.ADD_CT_CT: ((a_vals + b_vals) % T, lambda da, db: max(da, db)),
            Op.SUB_CT_CT: ((a_vals - b_vals) % T, lambda da, db: max(da, db)),
            Op.MUL_CT_CT: ((a_vals * b_vals) % T, lambda da, db: max(da, db) + 1),
            Op.ADD_CT_PT: ((a_vals + pt.array()) % T, lambda da, db: da),
            Op.SUB_CT_PT: ((a_vals - pt.array()) % T, lambda da, db: da),
            Op.MUL_CT_PT: ((a_vals * pt.array()) % T, lambda da, db: da + 1),
        }
        for op, (want, depth_rule) in cases.items():
            for da, db in ((0, 0), (2, 1), (1, 3)):
                env = {"a": CtValue(a_vals, da, params), "b": CtValue(b_vals, db, params), "p": pt}
                rhs = "p" if op.is_pt else Operand("b")
                out = eval_instruction(Instruction(op, Operand("a"), rhs), env, params)
                assert np.array_equal(out.slots, want), op
                assert out.depth == depth_rule(da, db), op
        env = {"a": CtValue(a_vals, 2, params)}
        out = eval_instruction(Instruction(Op.ROTATE, Operand("a", 1)), env, params)
        assert out.slots.tolist() == [2, 3, T - 1, 1] and out.depth == 2
        rng = np.random.default_rng(0)
        for _ in range(1000):
            N = int(rng.choice([4, 8, 16]))
            v = rng.integers(0, T, size=N)
            x, y = (int(k) for k in rng.integers(-2 * N, 2 * N, size=2))
            assert np.array_equal(rotate_slots(rotate_slots(v, x), y), rotate_slots(v, x + y))
            assert np.array_equal(rotate_slots(v, x), v[(np.arange(N) + x) % N])
        elapsed = time.perf_counter() - t0
        d["info"] = f"{elapsed:.2f}s"
        assert elapsed < 10


def test_criterion_02_verifier_soundness():
    with criterion(2, "verifier accepts 20 random programs, catches all mutations") as d:
        t0 = time.perf_counter()
        rng = np.random.default_rng(2024)
        caught = 0
        for _ in range(20):
            p = random_program(rng, N=8, max_len=6)
            spec = spec_of_program(p)
            assert isinstance(verify(p, spec), Ok)
            inputs = random_inputs(rng, p, 10_000)
            assert np.array_equal(eval_program(p, inputs).slots, spec.eval_polys(inputs))
            for q in mutations(p):
                if poly_of_program(q) == poly_of_program(p):
                    continue  # the mutation happens to compute the same function
                res = verify(q, spec)
                assert isinstance(res, Counterexample)
                assert differ(p, q, res.inputs)
                caught += 1
        elapsed = time.perf_counter() - t0
        d["info"] = f"{caught} mutations caught, {elapsed:.1f}s"
        assert elapsed < 60


def _brute_force(spec, amounts, max_count, n_examples=2, seed=0):
    """Exhaustive enumeration of add-with-rotation programs of total count <= ``max_count``.

    Independent of the search module: plain recursion over every operand
    choice.  Returns ``{L: minimal total count}`` over programs whose result
    matches the reference on random inputs.
    """
    ins = [random_example(spec, seed + s).inputs for s in range(n_examples + 3)]
    X = {ct: np.stack([e[ct] for e in ins]) for ct in spec.ct_inputs}
    want = spec.eval_polys(X)
    mask = list(spec.mask)
    found: dict = {}

    def rec(vals: list, pairs: frozenset, L: int):
        ops = [(s, r) for s in range(len(vals)) for r in amounts]
        for i, (s1, r1) in enumerate(ops):
            p1 = pairs | {(s1, r1)} if r1 else pairs
            if L + 1 + len(p1) > max_count:
                continue
            a = np.roll(vals[s1], -r1, axis=1)
            for s2, r2 in ops[i:]:  # addition commutes
                new = p1 | {(s2, r2)} if r2 else p1
                count = L + 1 + len(new)
                if count > max_count:
                    continue
                v = (a + np.roll(vals[s2], -r2, axis=1)) % T
                if np.array_equal(v[:, mask], want[:, mask]):
                    found[L + 1] = min(found.get(L + 1, count), count)
                rec(vals + [v], frozenset(new), L + 1)

    rec([X[ct] for ct in spec.ct_inputs], frozenset(), 0)
    return found


def test_criterion_03_minimality_oracle():
    with criterion(3, "brute force confirms minimal L and count for 4-sum and 2x2 box blur") as d:
        t0 = time.perf_counter()
        info = []
        # 4-element sum over the pow2 rotation domain
        params = RingParams(8, T)
        lay = vector_layout("x", 4)
        s4 = lift_reference("sum4", params, ["x"], {"x": lay}, scalar_layout("x"),
                            {(): Read("x", (0,)) + Read("x", (1,)) + Read("x", (2,)) + Read("x", (3,))})
        sk4 = make_sketch([("AddCtCt", "ct-r", "ct-r")], 1, ["x"], params, pow2_domain(8))
        box, skb = kernel_and_sketch("box_blur")
        for spec, sk, amounts in ((s4, sk4, pow2_domain(8).amounts), (box, skb, tuple(range(box.N)))):
            rep = synthesize(spec, sk, SynthConfig())
            found = _brute_force(spec, amounts, max_count=4)
            brute_L = min(found)
            brute_count = min(found.values())
            info.append(f"{spec.name}: engine L={rep.final.L} count={rep.final.counts[2]}, "
                        f"brute L={brute_L} count={brute_count}")
            assert rep.final.L == brute_L
            assert rep.final.counts[2] == brute_count == 4
        elapsed = time.perf_counter() - t0
        d["info"] = "; ".join(info) + f"; {elapsed:.1f}s"
        assert elapsed < 300


@pytest.mark.slow
def test_criterion_04_benchmark_counts(suite_rows):
    rows, elapsed = suite_rows
    with criterion(4, "benchmark instruction counts within targets, all verified") as d:
        gates = {"box_blur": 4, "dot_product": 7, "hamming": 6, "gx": 7, "gy": 7,
                 "polynomial_regression": 7, "roberts_cross": 10}
        got = {k: r["synthesized"]["instructions"] for k, r in rows.items() if r["synthesized"]}
        d["info"] = ", ".join(f"{k}={got.get(k)}" for k in gates) + f"; suite {elapsed:.0f}s"
        for k, r in rows.items():
            assert r["verified"], k
        for k, gate in gates.items():
            assert got[k] <= gate, k
        # the factored polynomial: fewer products than the three-product baseline form
        poly = rows["polynomial_regression"]["report"]["final"]["program"]
        n_mul = sum(ins["op"] in ("MulCtCt", "MulCtPt") for ins in poly["body"])
        assert n_mul < 3
        assert elapsed < 30 * 60


@pytest.mark.slow
def test_criterion_05_improvement(suite_rows):
    rows, _ = suite_rows
    with criterion(5, "synthesized count and cost never worse than the baseline") as d:
        worse = []
        for k, r in rows.items():
            b, s = r["baseline"], r["synthesized"]
            if s["instructions"] > b["instructions"] or s["cost"] > b["cost"]:
                worse.append(k)
        d["info"] = f"{len(rows) - len(worse)}/{len(rows)} kernels"
        assert not worse, worse


@pytest.mark.slow
def test_criterion_06_cost_loop(suite_rows):
    rows, _ = suite_rows
    with criterion(6, "optimization lowers cost where the initial solution is not optimal") as d:
        costs = {k: (r["report"]["initial_cost"], r["report"]["final_cost"]) for k, r in rows.items()}
        d["info"] = ", ".join(f"{k} {a:g}->{b:g}" for k, (a, b) in costs.items()
                              if k in ("box_blur", "hamming", "gx", "gy", "dot_product", "l2_distance"))
        for k in ("box_blur", "hamming", "gx", "gy"):
            assert costs[k][1] < costs[k][0], k
        for k in ("dot_product", "l2_distance"):
            assert costs[k][1] == costs[k][0], k


@pytest.mark.slow
def test_criterion_07_cegis(suite_rows):
    rows, _ = suite_rows
    with criterion(7, "CEGIS needs several examples for hamming") as d:
        n = {k: r["report"]["examples"] for k, r in rows.items()}
        d["info"] = ", ".join(f"{k}={v}" for k, v in n.items())
        assert n["hamming"] >= 2


def test_criterion_08_multistep():
    with criterion(8, "Sobel and Harris compose, verify end to end, beat 31 and 59") as d:
        t0 = time.perf_counter()
        cache: dict = {}
        totals = {}
        for name, limit in (("sobel", 31), ("harris", 59)):
            res = synthesize_multistep(PIPELINES[name](), SynthConfig(), cache)
            assert isinstance(verify(res.program, res.spec, seed=7), Ok)
            totals[name] = instruction_count(res.program)[2]
            assert totals[name] < limit, name
        elapsed = time.perf_counter() - t0
        d["info"] = f"sobel={totals['sobel']}, harris={totals['harris']}, {elapsed:.1f}s"
        assert elapsed < 30 * 60


def test_criterion_09_codegen():
    with criterion(9, "golden codegen files, relinearization placement, lowering preserves values") as d:
        kernels = {}
        spec, _ = kernel_and_sketch("gx")
        kernels["gx"] = gx_separable_program(spec)
        spec, _ = kernel_and_sketch("dot_product")
        b = ProgramBuilder(spec.params, spec.ct_inputs)
        m = b.mul("a", "b")
        s = b.add(m, b.ref(m, 4))
        s = b.add(s, b.ref(s, 2))
        b.add(s, b.ref(s, 1))
        kernels["dot_product"] = b.build()
        spec, _ = kernel_and_sketch("polynomial_regression")
        b = ProgramBuilder(spec.params, spec.ct_inputs, dict(spec.pt_consts))
        b.add_pt(b.mul(b.add_pt(b.mul_pt("x", "a"), "b"), "x"), "c")
        kernels["polynomial_regression"] = b.build()
        rng = np.random.default_rng(9)
        for name, p in kernels.items():
            low = lower(p)
            ir = emit_json_ir(low, name)
            assert ir == (GOLDEN / f"{name}.ir.json").read_text(), name
            assert parse_json_ir(ir) == low
            src = emit_backend_source(low, name)
            assert src == (GOLDEN / f"{name}.gen.cpp").read_text(), name
            ops = [ins.op for ins in low.body]
            for k, op in enumerate(ops):
                if op is Op.MUL_CT_CT:
                    assert ops[k + 1] is Op.RELINEARIZE and low.body[k + 1].lhs.src == k
                if op is Op.RELINEARIZE:
                    assert ops[k - 1] is Op.MUL_CT_CT
            assert ops.count(Op.RELINEARIZE) == ops.count(Op.MUL_CT_CT)
            x = {ct: rng.integers(0, T, size=(1000, p.params.N)) for ct in p.ct_inputs}
            assert np.array_equal(eval_program(p, x).slots, eval_program(explicate_rotations(p), x).slots)
            assert np.array_equal(eval_program(p, x).slots, eval_program(low, x).slots)
        n_calls = len(re.findall(r"evaluator\.\w+\(", (GOLDEN / "gx.gen.cpp").read_text()))
        d["info"] = f"3 kernels, gx emits {n_calls} calls"
        assert n_calls == 7


def test_criterion_10_determinism(tmp_path):
    with criterion(10, "two bench runs with the same config and seed give identical JSON") as d:
        cfg = tmp_path / "suite.json"
        cfg.write_text(json.dumps({"kernels": ["box_blur", "dot_product", "linear_regression",
                                               "polynomial_regression", "gx", "gy"],
                                   "pipelines": ["sobel"], "synth": {"seed": 0}}))
        outs = []
        for run in ("a", "b"):
            assert cli_main(["bench", "--config", str(cfg), "--seed", "0", "--out-dir", str(tmp_path / run)]) == 0
            outs.append((tmp_path / run / "bench.json").read_bytes())
        d["info"] = f"{len(outs[0])} bytes"
        assert outs[0] == outs[1]


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
