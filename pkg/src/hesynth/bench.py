"""Benchmark harness: run configs, baseline comparison rows and pipeline reports."""

from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from hesynth.baselines import BaselineError, baseline, pipeline_baseline
from hesynth.codegen import write_artifacts
from hesynth.engine import PipelineError, SynthConfig, SynthesisError, cost_fn, synthesize, synthesize_multistep
from hesynth.kernels import BENCHMARKS, KernelSpec, SpecError
from hesynth.quill import DEFAULT_COST, CostModel, Program, critical_path, estimated_latency, instruction_count, mdepth
from hesynth.sketch import SketchError
from hesynth.suite import PIPELINES, kernel_and_sketch
from hesynth.verifier import Counterexample, verify

log = logging.getLogger(__name__)

SUITE = ("box_blur", "dot_product", "hamming", "l2_distance", "linear_regression",
         "polynomial_regression", "gx", "gy", "roberts_cross")

# total instruction count each synthesized kernel must not exceed (None: reported only)
TARGETS = {"box_blur": 4, "dot_product": 7, "hamming": 6, "l2_distance": None, "linear_regression": None,
           "polynomial_regression": 7, "gx": 7, "gy": 7, "roberts_cross": 10}
PIPELINE_TARGETS = {"sobel": 31, "harris": 59}

SYNTH_KEYS = {"L_min", "L_max", "timeout", "optimize", "seed", "symmetry", "observational", "node_budget",
              "shuffle_initial"}


class ConfigError(ValueError):
    """Malformed or inconsistent run configuration."""


@dataclass
class RunConfig:
    kernel: str
    sizes: dict = field(default_factory=dict)
    sketch: dict | None = None
    cost_model: CostModel = DEFAULT_COST
    synth: dict = field(default_factory=dict)
    out_dir: str | None = None

    def synth_config(self, **overrides) -> SynthConfig:
        kw = dict(self.synth)
        kw.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return SynthConfig(cost_model=self.cost_model, **kw)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"bad synth settings: {e}") from e

    def build(self) -> tuple:
        try:
            return kernel_and_sketch(self.kernel, self.sizes, self.sketch)
        except (SpecError, SketchError, TypeError, ValueError) as e:
            raise ConfigError(f"cannot build {self.kernel}: {e}") from e


def _synth_settings(d: Mapping) -> dict:
    if not isinstance(d, Mapping):
        raise ConfigError("'synth' must be an object")
    unknown = set(d) - SYNTH_KEYS
    if unknown:
        raise ConfigError(f"unknown synth settings: {sorted(unknown)}")
    return dict(d)


def _cost_model(d) -> CostModel:
    if d is None:
        return DEFAULT_COST
    try:
        return CostModel.from_dict(d)
    except (TypeError, ValueError, KeyError) as e:
        raise ConfigError(f"bad cost model: {e}") from e


def run_config_from_dict(d: Mapping, defaults: Mapping | None = None) -> RunConfig:
    """Validate a kernel run config; ``defaults`` supplies suite-wide synth/cost settings."""
    defaults = defaults or {}
    if isinstance(d, str):
        d = {"kernel": d}
    if not isinstance(d, Mapping):
        raise ConfigError("kernel config must be an object or a kernel name")
    known = {"kernel", "sizes", "ring", "sketch", "cost_model", "synth", "out_dir"}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    kernel = d.get("kernel")
    if kernel not in BENCHMARKS:
        raise ConfigError(f"unknown kernel {kernel!r}; expected one of {sorted(BENCHMARKS)}")
    sizes = d.get("sizes", {})
    if not isinstance(sizes, Mapping):
        raise ConfigError("'sizes' must be an object")
    sizes = dict(sizes)
    ring = d.get("ring", {})
    if not isinstance(ring, Mapping) or set(ring) - {"N", "t"}:
        raise ConfigError("'ring' must be an object with optional N and t")
    sizes.update(ring)
    sketch = d.get("sketch")
    if sketch is not None and not isinstance(sketch, Mapping):
        raise ConfigError("'sketch' must be an object")
    synth = _synth_settings(defaults.get("synth", {}))
    synth.update(_synth_settings(d.get("synth", {})))
    cost = _cost_model(d.get("cost_model", defaults.get("cost_model")))
    return RunConfig(kernel, sizes, dict(sketch) if sketch else None, cost, synth, d.get("out_dir"))


def load_json(path) -> dict:
    try:
        with open(path) as f:
            d = json.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e
    if not isinstance(d, dict):
        raise ConfigError(f"{path} must contain a JSON object")
    return d


# ------------------------------------------------------------------ rows


def program_summary(p: Program, m: CostModel = DEFAULT_COST) -> dict:
    arith, rots, total = instruction_count(p)
    return {"instructions": total, "arith": arith, "rotations": rots, "depth": critical_path(p),
            "mdepth": mdepth(p), "latency": estimated_latency(p, m), "cost": cost_fn(p, m)}


@dataclass
class BenchResult:
    kernel: str
    baseline: dict | None
    synthesized: dict | None
    report: dict | None
    target: int | None
    verified: bool
    error: str | None = None

    @property
    def passed(self) -> bool:
        if self.error or not self.verified or self.synthesized is None:
            return False
        n = self.synthesized["instructions"]
        if self.target is not None and n > self.target:
            return False
        if self.baseline is not None:
            if n > self.baseline["instructions"] or self.synthesized["cost"] > self.baseline["cost"]:
                return False
        return True

    def to_dict(self) -> dict:
        return {"kernel": self.kernel, "baseline": self.baseline, "synthesized": self.synthesized,
                "target": self.target, "verified": self.verified, "passed": self.passed, "error": self.error,
                "report": self.report}


def bench_row(rc: RunConfig, timings: bool = False) -> BenchResult:
    """Baseline and synthesized kernel for one config; failures are recorded on the row."""
    try:
        spec, sketch = rc.build()
        base = baseline(spec)
        rep = synthesize(spec, sketch, rc.synth_config())
    except (ConfigError, BaselineError, SynthesisError) as e:
        log.error("%s: %s", rc.kernel, e)
        return BenchResult(rc.kernel, None, None, None, TARGETS.get(rc.kernel), False, str(e))
    prog = rep.final.program
    ok = not isinstance(verify(prog, spec, seed=rc.synth_config().seed), Counterexample)
    if rc.out_dir:
        write_artifacts(prog, rc.kernel, rc.out_dir)
    return BenchResult(rc.kernel, program_summary(base, rc.cost_model), program_summary(prog, rc.cost_model),
                       rep.to_dict(timings), TARGETS.get(rc.kernel), ok)


def pipeline_row(name: str, cfg: SynthConfig, timings: bool = False, cache: dict | None = None,
                 sizes: Mapping | None = None) -> BenchResult:
    try:
        pipe = PIPELINES[name](**dict(sizes or {}))
        base = pipeline_baseline(pipe, cfg.seed)
        res = synthesize_multistep(pipe, cfg, cache)
    except KeyError:
        return BenchResult(name, None, None, None, None, False, f"unknown pipeline {name!r}")
    except (PipelineError, BaselineError, SynthesisError) as e:
        log.error("%s: %s", name, e)
        return BenchResult(name, None, None, None, PIPELINE_TARGETS.get(name), False, str(e))
    m = cfg.cost_model
    return BenchResult(name, program_summary(base, m), program_summary(res.program, m), res.to_dict(timings),
                       PIPELINE_TARGETS.get(name), True)


def _row_job(args) -> dict:
    rc, timings = args
    return bench_row(rc, timings).to_dict()


def run_suite(configs: Sequence[RunConfig], pipelines: Sequence[str] = (), jobs: int = 1,
              timings: bool = False, pipeline_cfg: SynthConfig | None = None) -> list:
    """Rows for every kernel config (optionally in worker processes) then every pipeline, in order."""
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_row_job, [(rc, timings) for rc in configs]))
    else:
        rows = [_row_job((rc, timings)) for rc in configs]
    cache: dict = {}
    for name in pipelines:
        rows.append(pipeline_row(name, pipeline_cfg or SynthConfig(), timings, cache).to_dict())
    return rows


def suite_from_dict(d: Mapping, seed: int | None = None, timeout: float | None = None,
                    optimize: bool | None = None) -> tuple:
    """``(kernel configs, pipeline names, pipeline SynthConfig)`` from a suite config object."""
    unknown = set(d) - {"kernels", "pipelines", "synth", "cost_model", "jobs"}
    if unknown:
        raise ConfigError(f"unknown suite keys: {sorted(unknown)}")
    defaults = {"synth": _synth_settings(d.get("synth", {})), "cost_model": d.get("cost_model")}
    for key, val in (("seed", seed), ("timeout", timeout), ("optimize", optimize)):
        if val is not None:
            defaults["synth"][key] = val
    kernels = d.get("kernels", list(SUITE))
    if not isinstance(kernels, list):
        raise ConfigError("'kernels' must be a list")
    configs = []
    for k in kernels:
        rc = run_config_from_dict(k, defaults)
        for key, val in (("seed", seed), ("timeout", timeout), ("optimize", optimize)):
            if val is not None:
                rc.synth[key] = val
        configs.append(rc)
    pipes = d.get("pipelines", [])
    if not isinstance(pipes, list) or any(p not in PIPELINES for p in pipes):
        raise ConfigError(f"'pipelines' must list known pipelines {sorted(PIPELINES)}")
    pcfg = RunConfig("box_blur", synth=defaults["synth"], cost_model=_cost_model(defaults["cost_model"]))
    return configs, pipes, pcfg.synth_config()


def report_json(rows: Sequence[Mapping]) -> str:
    return json.dumps({"rows": list(rows)}, indent=2, sort_keys=True) + "\n"


def format_table(rows: Sequence[Mapping]) -> str:
    """Text table: baseline vs synthesized instruction count and depth, plus latency ratio."""
    head = f"{'Kernel':<22}{'Base instr':>11}{'Base depth':>11}{'Synth instr':>12}{'Synth depth':>12}" \
           f"{'Mult depth':>11}{'Latency':>9}{'Target':>8}  Result"
    lines = [head, "-" * len(head)]
    for r in rows:
        b, s = r.get("baseline"), r.get("synthesized")
        if not b or not s:
            lines.append(f"{r['kernel']:<22}{'error: ' + str(r.get('error')):>60}  FAIL")
            continue
        ratio = s["latency"] / b["latency"] if b["latency"] else float("nan")
        target = "-" if r.get("target") is None else str(r["target"])
        lines.append(f"{r['kernel']:<22}{b['instructions']:>11}{b['depth']:>11}{s['instructions']:>12}"
                     f"{s['depth']:>12}{str(b['mdepth']) + '/' + str(s['mdepth']):>11}{ratio:>9.2f}{target:>8}"
                     f"  {'PASS' if r['passed'] else 'FAIL'}")
    return "\n".join(lines) + "\n"


def write_report(rows: Sequence[Mapping], out_dir) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "bench.json").write_text(report_json(rows))
    (out / "bench.txt").write_text(format_table(rows))
    return {"json": str(out / "bench.json"), "table": str(out / "bench.txt")}
