"""Counterexample-guided synthesis with iterative deepening and cost minimization.

The initial phase grows the number of components ``L`` until the sketch has a
completion that matches all examples and verifies.  Each failed verification
contributes its counterexample as a new example.  The optimization phase then
re-solves with a cost bound equal to the best verified cost until the search
proves no cheaper completion exists or the no-progress timeout expires.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

from hesynth.kernels import (
    BinOp,
    Const,
    Example,
    Expr,
    KernelSpec,
    Read,
    TensorLayout,
    lift_reference,
    poly_of_program,
    random_example,
)
from hesynth.poly import Poly
from hesynth.quill import (
    DEFAULT_COST,
    CostModel,
    Instruction,
    Op,
    Operand,
    Program,
    PtValue,
    estimated_latency,
    instruction_count,
    mdepth,
)
from hesynth.search import BUDGET, SAT, TIMEOUT, UNSAT, SearchConfig, SearchStats, find_completion
from hesynth.sketch import Sketch, instantiate
from hesynth.verifier import Counterexample, check_on_examples, verify

log = logging.getLogger(__name__)

OPTIMAL, TIMEOUT_BEST, INITIAL_ONLY = "optimal", "timeout-best", "initial-only"


class SynthesisError(RuntimeError):
    """No verified completion within the sketch bounds or the time limit."""

    def __init__(self, message: str, report: "SynthReport | None" = None):
        super().__init__(message)
        self.report = report


class PipelineError(ValueError):
    pass


def cost_fn(p: Program, m: CostModel = DEFAULT_COST) -> float:
    """Estimated latency scaled by ``1 + multiplicative depth``."""
    return estimated_latency(p, m) * (1 + mdepth(p))


@dataclass
class SynthConfig:
    L_min: int = 1
    L_max: int = 12
    timeout: float = 1200.0  # seconds without progress
    optimize: bool = True
    seed: int = 0
    symmetry: bool = True
    observational: bool = True
    node_budget: int | None = None
    shuffle_initial: bool = True
    cost_model: CostModel = DEFAULT_COST
    clock: Callable[[], float] = time.monotonic

    def __post_init__(self):
        if not 1 <= self.L_min <= self.L_max:
            raise ValueError("need 1 <= L_min <= L_max")
        if not self.timeout > 0:
            raise ValueError("timeout must be positive")

    def search(self, **kw) -> SearchConfig:
        return SearchConfig(symmetry=self.symmetry, observational=self.observational, seed=self.seed,
                            node_budget=self.node_budget, clock=self.clock, cost_model=self.cost_model, **kw)


@dataclass
class Solution:
    program: Program
    cost: float
    mdepth: int
    counts: tuple  # (arithmetic, rotations, total)
    examples: int
    status: str

    @classmethod
    def of(cls, p: Program, m: CostModel, examples: int, status: str) -> "Solution":
        return cls(p, cost_fn(p, m), mdepth(p), instruction_count(p), examples, status)

    @property
    def L(self) -> int:
        return len(self.program.body)

    def to_dict(self) -> dict:
        return {"cost": self.cost, "mdepth": self.mdepth, "arith": self.counts[0], "rotations": self.counts[1],
                "instructions": self.counts[2], "L": self.L, "examples": self.examples, "status": self.status,
                "program": self.program.to_dict()}


@dataclass
class SynthReport:
    kernel: str
    initial: Solution
    initial_time: float
    final: Solution
    total_time: float
    examples: int
    trajectory: list
    stats: SearchStats = field(default_factory=SearchStats)

    def to_dict(self, timings: bool = True) -> dict:
        d = {"kernel": self.kernel, "examples": self.examples, "initial_cost": self.initial.cost,
             "final_cost": self.final.cost, "trajectory": list(self.trajectory),
             "initial": self.initial.to_dict(), "final": self.final.to_dict(), "search": self.stats.to_dict()}
        if timings:
            d["initial_time"] = round(self.initial_time, 3)
            d["total_time"] = round(self.total_time, 3)
            d["search"]["elapsed"] = round(self.stats.elapsed, 3)
        return d


def _check_examples(p: Program, spec: KernelSpec, examples: Sequence[Example]) -> None:
    if check_on_examples(p, examples, spec.mask) is not None:  # pragma: no cover - search soundness
        raise AssertionError("search returned a program that violates an example")


def synthesize_initial(spec: KernelSpec, sketch: Sketch, cfg: SynthConfig | None = None,
                       examples: list | None = None, stats: SearchStats | None = None) -> tuple:
    """CEGIS with iterative deepening on ``L``; returns ``(Solution, examples)``.

    ``examples`` (if given) is extended in place with every counterexample.
    """
    cfg = cfg or SynthConfig()
    stats = stats if stats is not None else SearchStats()
    if examples is None:
        examples = []
    if not examples:
        examples.append(random_example(spec, cfg.seed))
    deadline = cfg.clock() + cfg.timeout
    verify_seed = cfg.seed
    for L in range(cfg.L_min, cfg.L_max + 1):
        sk = sketch.with_length(L)
        while True:
            res = find_completion(sk, examples, cfg.search(shuffle=cfg.shuffle_initial, min_length=L,
                                                            deadline=deadline), spec.mask)
            stats.merge(res.stats)
            if res.status == UNSAT:
                log.info("%s: no completion with L=%d on %d examples", spec.name, L, len(examples))
                break
            if res.status in (BUDGET, TIMEOUT):
                raise SynthesisError(f"{spec.name}: search {res.status} at L={L}")
            p = instantiate(sk, res.assignment)
            _check_examples(p, spec, examples)
            verify_seed += 1
            v = verify(p, spec, seed=verify_seed)
            if not isinstance(v, Counterexample):
                log.info("%s: initial solution L=%d cost %.0f after %d examples",
                         spec.name, L, cost_fn(p, cfg.cost_model), len(examples))
                return Solution.of(p, cfg.cost_model, len(examples), INITIAL_ONLY), examples
            examples.append(v.example())
    raise SynthesisError(f"{spec.name}: sketch too restrictive (no solution with L <= {cfg.L_max})")


def optimize(spec: KernelSpec, sketch: Sketch, initial: Solution, cfg: SynthConfig | None = None,
             examples: list | None = None, stats: SearchStats | None = None) -> tuple:
    """Lower the cost below the best verified solution until no cheaper completion exists.

    Returns ``(best Solution, cost trajectory)``.  The clock restarts whenever
    a strictly cheaper verified solution is found.
    """
    cfg = cfg or SynthConfig()
    stats = stats if stats is not None else SearchStats()
    examples = examples if examples is not None else [random_example(spec, cfg.seed)]
    best = initial
    trajectory = [initial.cost]
    L = initial.L
    sk = sketch.with_length(L)
    deadline = cfg.clock() + cfg.timeout
    verify_seed = cfg.seed + 1000
    while True:
        res = find_completion(sk, examples, cfg.search(cost_bound=best.cost, min_length=L, deadline=deadline),
                              spec.mask)
        stats.merge(res.stats)
        if res.status == UNSAT:
            status = OPTIMAL
            break
        if res.status in (TIMEOUT, BUDGET):
            status = TIMEOUT_BEST
            break
        p = instantiate(sk, res.assignment)
        _check_examples(p, spec, examples)
        verify_seed += 1
        v = verify(p, spec, seed=verify_seed)
        if isinstance(v, Counterexample):
            examples.append(v.example())
            continue
        c = cost_fn(p, cfg.cost_model)
        assert c < best.cost
        best = Solution.of(p, cfg.cost_model, len(examples), status="")
        trajectory.append(c)
        deadline = cfg.clock() + cfg.timeout
        log.info("%s: improved cost to %.0f", spec.name, c)
    return replace(best, status=status, examples=len(examples)), trajectory


def synthesize(spec: KernelSpec, sketch: Sketch, cfg: SynthConfig | None = None) -> SynthReport:
    """Initial synthesis followed (unless disabled) by cost optimization."""
    cfg = cfg or SynthConfig()
    stats = SearchStats()
    examples: list = []
    t0 = time.perf_counter()
    initial, examples = synthesize_initial(spec, sketch, cfg, examples, stats)
    t1 = time.perf_counter()
    if cfg.optimize:
        final, traj = optimize(spec, sketch, initial, cfg, examples, stats)
    else:
        final, traj = initial, [initial.cost]
    return SynthReport(spec.name, initial, t1 - t0, final, time.perf_counter() - t0, len(examples), traj, stats)


# ------------------------------------------------------------ pipelines


@dataclass(frozen=True)
class Stage:
    """One independently synthesized segment; ``bind`` maps its inputs to sources."""

    name: str
    spec: KernelSpec
    sketch: Sketch
    bind: Mapping[str, str]


@dataclass(frozen=True)
class Pipeline:
    name: str
    inputs: tuple  # pipeline ciphertext input names
    stages: tuple
    output: str
    glue: str = "auto"  # "auto" masks padding where needed, "none" never does


@dataclass
class PipelineResult:
    name: str
    program: Program
    spec: KernelSpec
    reports: dict
    masks: list
    stage_counts: dict

    def to_dict(self, timings: bool = True) -> dict:
        arith, rots, total = instruction_count(self.program)
        return {"pipeline": self.name, "instructions": total, "arith": arith, "rotations": rots,
                "mdepth": mdepth(self.program), "masks": list(self.masks),
                "stages": {k: list(v) for k, v in self.stage_counts.items()},
                "reports": {k: r.to_dict(timings) for k, r in self.reports.items()},
                "program": self.program.to_dict()}


def _substitute(e: Expr, env: Mapping[str, Callable[[tuple], Expr]], memo: dict) -> Expr:
    key = id(e)
    if key in memo:
        return memo[key][1]
    if isinstance(e, Read):
        out = env[e.tensor](e.index) if e.tensor in env else e
    elif isinstance(e, BinOp):
        out = BinOp(e.op, _substitute(e.a, env, memo), _substitute(e.b, env, memo))
    else:
        out = e
    memo[key] = (e, out)
    return out


def compose_spec(pipe: Pipeline) -> KernelSpec:
    """Spec of the whole pipeline: each stage's reads replaced by its producer's reference."""
    stages = {s.name: s for s in pipe.stages}
    first = pipe.stages[0].spec
    refs: dict = {}  # stage -> {idx: Expr over pipeline inputs}
    input_layouts: dict = {}
    for s in pipe.stages:
        env = {}
        for ct in s.spec.ct_inputs:
            src = s.bind.get(ct)
            if src is None:
                raise PipelineError(f"stage {s.name!r}: input {ct!r} is not bound")
            lay = s.spec.tensors[ct]
            if src in pipe.inputs:
                if src in input_layouts and input_layouts[src][1] != (lay.shape, lay.strides, lay.offset):
                    raise PipelineError(f"stage {s.name!r}: layout of pipeline input {src!r} differs")
                input_layouts[src] = (lay, (lay.shape, lay.strides, lay.offset))
                env[ct] = (lambda src: lambda idx: Read(src, idx))(src)
            elif src in refs:
                out = stages[src].spec.output
                if (out.shape, out.strides, out.offset) != (lay.shape, lay.strides, lay.offset):
                    raise PipelineError(f"stage {s.name!r}: layout of {ct!r} does not match output of {src!r}")
                env[ct] = (lambda r: lambda idx: r.get(tuple(idx), Const(0)))(refs[src])
            else:
                raise PipelineError(f"stage {s.name!r}: unknown or later source {src!r}")
            if s.spec.params != first.params:
                raise PipelineError("all stages must share ring parameters")
        memo: dict = {}
        refs[s.name] = {idx: _substitute(e, env, memo) for idx, e in s.spec.reference.items()}
    if pipe.output not in refs:
        raise PipelineError(f"unknown output stage {pipe.output!r}")
    tensors = {}
    for name in pipe.inputs:
        if name not in input_layouts:
            raise PipelineError(f"pipeline input {name!r} is never read")
        lay = input_layouts[name][0]
        tensors[name] = TensorLayout(name, lay.shape, lay.strides, lay.offset, lay.domain)
    out = stages[pipe.output].spec.output
    out = TensorLayout(pipe.inputs[0], out.shape, out.strides, out.offset)
    return lift_reference(pipe.name, first.params, pipe.inputs, tensors, out, refs[pipe.output],
                          meta={"kind": "pipeline", "stages": [s.name for s in pipe.stages]})


def _reads_padding(p: Program, spec: KernelSpec, ct: str) -> bool:
    """Whether ``p``'s masked outputs depend on padded slots of input ``ct``."""
    N = spec.N
    polys = poly_of_program(p)
    k = p.ct_inputs.index(ct)
    data = set(spec.input_slots(ct))
    for s in spec.mask:
        for v in polys[s].variables():
            if v // N == k and v % N not in data:
                return True
    return False


def compose_programs(pipe: Pipeline, programs: Mapping[str, Program], seed: int = 0) -> tuple:
    """Splice per-stage programs into one program over the pipeline inputs.

    With ``glue == "auto"`` a plaintext 0/1 mask multiply is inserted on a
    producer's result when a consumer reads padding slots the producer
    leaves non-zero.  The composed program is verified against the composed
    specification; returns ``(program, spec, masked sources)``.
    """
    if not pipe.stages:
        raise PipelineError("empty pipeline")
    spec = compose_spec(pipe)
    params = spec.params
    N = params.N
    body: list = []
    pts: dict = {}
    where: dict = {name: name for name in pipe.inputs}  # source -> ref in composed program
    sym: dict = spec.symbolic_inputs()  # source -> N polys
    masked_ref: dict = {}
    masks = []

    def shift(o: Operand, local: Mapping, offset: int) -> Operand:
        if isinstance(o.src, str):
            return Operand(local[o.src], o.rot)
        return Operand(o.src + offset, o.rot)

    for s in pipe.stages:
        prog = programs[s.name]
        local = {}
        local_sym = {}
        for ct in s.spec.ct_inputs:
            src = s.bind[ct]
            ref, vec = where[src], sym[src]
            if pipe.glue == "auto" and src not in pipe.inputs and _reads_padding(prog, s.spec, ct):
                pad = set(range(N)) - set(s.spec.input_slots(ct))
                if any(not vec[x].is_zero() for x in pad):
                    if src not in masked_ref:
                        mname = f"mask_{src}"
                        keep = set(pipe_stage(pipe, src).spec.mask)
                        pts[mname] = PtValue([1 if x in keep else 0 for x in range(N)])
                        body.append(Instruction(Op.MUL_CT_PT, Operand(ref), mname))
                        zero = Poly.zero(params.t)
                        masked_ref[src] = (len(body) - 1, [vec[x] if x in keep else zero for x in range(N)])
                        masks.append(src)
                    ref, vec = masked_ref[src]
            local[ct] = ref
            local_sym[ct] = vec
        offset = len(body)
        for n, v in prog.pt_consts:
            pts[f"{s.name}.{n}"] = v
        for ins in prog.body:
            lhs = shift(ins.lhs, local, offset)
            if isinstance(ins.rhs, Operand):
                rhs = shift(ins.rhs, local, offset)
            elif isinstance(ins.rhs, str):
                rhs = f"{s.name}.{ins.rhs}"
            else:
                rhs = None
            body.append(Instruction(ins.op, lhs, rhs))
        where[s.name] = (prog.result + offset) if isinstance(prog.result, int) else local[prog.result]
        sym[s.name] = poly_of_program(prog, inputs=local_sym)
    composed = Program(params, pipe.inputs, tuple(sorted(pts.items())), tuple(body), where[pipe.output])
    v = verify(composed, spec, seed=seed)
    if isinstance(v, Counterexample):
        raise PipelineError(f"composed {pipe.name} program fails end-to-end verification at slot {v.slot}")
    return composed, spec, masks


def synthesize_multistep(pipe: Pipeline, cfg: SynthConfig | None = None, cache: dict | None = None) -> PipelineResult:
    """Synthesize every stage independently and splice the programs into one.

    Stages with identical spec and sketch are synthesized once.
    """
    cfg = cfg or SynthConfig()
    if not pipe.stages:
        raise PipelineError("empty pipeline")
    cache = {} if cache is None else cache
    reports = {}
    counts = {}
    programs = {}
    for s in pipe.stages:
        key = (s.spec.to_json(), s.sketch.to_json())
        if key not in cache:
            log.info("pipeline %s: synthesizing stage %s", pipe.name, s.name)
            cache[key] = synthesize(s.spec, s.sketch, cfg)
        rep = cache[key]
        reports[s.name] = rep
        programs[s.name] = rep.final.program
        counts[s.name] = instruction_count(rep.final.program)
    composed, spec, masks = compose_programs(pipe, programs, cfg.seed)
    return PipelineResult(pipe.name, composed, spec, reports, masks, counts)


def pipe_stage(pipe: Pipeline, name: str) -> Stage:
    for s in pipe.stages:
        if s.name == name:
            return s
    raise PipelineError(f"unknown stage {name!r}")
