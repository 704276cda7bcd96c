import itertools

import numpy as np
import pytest

from hesynth.engine import (
    INITIAL_ONLY,
    OPTIMAL,
    TIMEOUT_BEST,
    Pipeline,
    PipelineError,
    SynthConfig,
    SynthesisError,
    compose_spec,
    cost_fn,
    optimize,
    synthesize,
    synthesize_initial,
    synthesize_multistep,
)
from hesynth.kernels import random_example
from hesynth.quill import instruction_count
from hesynth.sketch import make_sketch
from hesynth.suite import PIPELINES, harris_pipeline, kernel_and_sketch, sobel_pipeline
from hesynth.verifier import verify


@pytest.fixture(scope="module")
def box():
    return kernel_and_sketch("box_blur")


def test_box_blur_initial_then_optimal(box):
    spec, sk = box
    rep = synthesize(spec, sk, SynthConfig())
    assert rep.final.status == OPTIMAL
    assert rep.final.counts == (2, 2, 4)
    assert rep.final.cost < rep.initial.cost
    assert rep.trajectory[0] == rep.initial.cost and rep.trajectory[-1] == rep.final.cost
    assert all(a > b for a, b in zip(rep.trajectory, rep.trajectory[1:]))
    assert verify(rep.final.program, spec)
    d = rep.to_dict(timings=False)
    assert "total_time" not in d and d["final"]["instructions"] == 4


def test_no_optimize(box):
    spec, sk = box
    rep = synthesize(spec, sk, SynthConfig(optimize=False))
    assert rep.final is rep.initial and rep.final.status == INITIAL_ONLY


def test_linear_regression_minimal_length():
    spec, sk = kernel_and_sketch("linear_regression")
    sol, examples = synthesize_initial(spec, sk, SynthConfig())
    assert sol.L == 3 and len(examples) >= 1
    assert verify(sol.program, spec)


def test_sketch_too_restrictive():
    spec, _ = kernel_and_sketch("box_blur")
    sk = make_sketch([("AddCtCt", "ct", "ct")], 1, spec.ct_inputs, spec.params)
    with pytest.raises(SynthesisError, match="too restrictive"):
        synthesize_initial(spec, sk, SynthConfig(L_max=2))


def test_timeout_returns_best_so_far(box):
    spec, sk = box
    initial, examples = synthesize_initial(spec, sk, SynthConfig())
    ticks = itertools.chain([0.0], itertools.repeat(1e9))
    cfg = SynthConfig(timeout=5, clock=lambda: next(ticks))
    best, traj = optimize(spec, sk, initial, cfg, examples)
    assert best.status == TIMEOUT_BEST
    assert best.cost == initial.cost and traj == [initial.cost]


def test_config_validation():
    with pytest.raises(ValueError):
        SynthConfig(L_min=3, L_max=2)
    with pytest.raises(ValueError):
        SynthConfig(timeout=0)


def test_cost_fn_scales_with_depth():
    spec, _ = kernel_and_sketch("polynomial_regression")
    from hesynth.baselines import baseline
    from hesynth.quill import estimated_latency, mdepth

    p = baseline(spec)
    assert cost_fn(p) == estimated_latency(p) * (1 + mdepth(p))


def test_compose_spec_matches_stagewise_reference(rng):
    pipe = sobel_pipeline()
    spec = compose_spec(pipe)
    gx, gy = pipe.stages[0].spec, pipe.stages[1].spec
    ex = random_example(spec, 3)
    a = gx.eval_polys(ex.inputs)
    b = gy.eval_polys(ex.inputs)
    want = (a * a + b * b) % spec.t
    assert np.array_equal(ex.expected[list(spec.mask)], want[list(spec.mask)])


def test_sobel_pipeline_composes():
    res = synthesize_multistep(sobel_pipeline(), SynthConfig())
    assert verify(res.program, res.spec)
    assert instruction_count(res.program)[2] == sum(c[2] for c in res.stage_counts.values()) + len(res.masks)
    assert res.to_dict(timings=False)["instructions"] < 31


def test_harris_masks_padding_and_shares_stages():
    cache = {}
    res = synthesize_multistep(harris_pipeline(), SynthConfig(), cache)
    assert verify(res.program, res.spec)
    # the blur stages read the padding ring, which the squared gradients leave non-zero
    assert set(res.masks) == {"ixx", "iyy", "ixy"}
    # identical stage problems are solved once
    assert len(cache) < len(res.reports)
    assert instruction_count(res.program)[2] < 59


def test_empty_pipeline():
    with pytest.raises(PipelineError):
        synthesize_multistep(Pipeline("empty", ("img",), (), "img"))


def test_pipelines_registry():
    assert set(PIPELINES) == {"sobel", "harris"}
