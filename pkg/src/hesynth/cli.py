"""Command-line front end: ``hesynth {synth,verify,run,bench,pipeline,codegen}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from hesynth import bench
from hesynth.bench import ConfigError
from hesynth.codegen import write_artifacts
from hesynth.engine import PipelineError, SynthesisError, synthesize, synthesize_multistep
from hesynth.kernels import random_example
from hesynth.quill import Program, ProgramParseError, StructuralError, eval_program
from hesynth.suite import PIPELINES
from hesynth.verifier import Counterexample, VerificationError, verify

log = logging.getLogger("hesynth")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _out_dir(args, default: str = "out") -> Path:
    p = Path(args.out_dir or default)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    log.info("wrote %s", path)


def _load_program(path) -> Program:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e}") from e
    try:
        return Program.from_json(text)
    except (ProgramParseError, StructuralError) as e:
        raise UsageError(f"{path}: {e}") from e


def _kernel_config(args) -> bench.RunConfig:
    """Kernel config from --config, or from --kernel plus optional --sizes."""
    if args.config:
        return bench.run_config_from_dict(bench.load_json(args.config))
    if not getattr(args, "kernel", None):
        raise UsageError("need --config or --kernel")
    try:
        sizes = json.loads(args.sizes) if args.sizes else {}
    except json.JSONDecodeError as e:
        raise UsageError(f"--sizes is not valid JSON: {e}") from e
    return bench.run_config_from_dict({"kernel": args.kernel, "sizes": sizes})


def cmd_synth(args) -> int:
    rc = bench.run_config_from_dict(bench.load_json(args.config))
    cfg = rc.synth_config(seed=args.seed, timeout=args.timeout_secs, optimize=False if args.no_optimize else None)
    spec, sketch = rc.build()
    out = _out_dir(args, rc.out_dir or "out")
    try:
        rep = synthesize(spec, sketch, cfg)
    except SynthesisError as e:
        log.error("%s", e)
        _write_json(out / f"{rc.kernel}.report.json",
                    {"kernel": rc.kernel, "error": str(e), "report": e.report.to_dict() if e.report else None})
        return EXIT_FAIL
    _write_json(out / f"{rc.kernel}.report.json", rep.to_dict())
    write_artifacts(rep.final.program, rc.kernel, out)
    sol = rep.final
    print(f"{rc.kernel}: {sol.counts[2]} instructions ({sol.counts[0]} arith, {sol.counts[1]} rotations), "
          f"depth {sol.mdepth}, cost {sol.cost:g}, status {sol.status}, examples {rep.examples}")
    print(sol.program.pretty())
    return EXIT_OK


def cmd_verify(args) -> int:
    p = _load_program(args.program)
    spec, _ = _kernel_config(args).build()
    try:
        res = verify(p, spec, seed=args.seed or 0)
    except VerificationError as e:
        raise UsageError(str(e)) from e
    if isinstance(res, Counterexample):
        print("counterexample:")
        print(json.dumps(res.to_dict(), sort_keys=True))
        return EXIT_FAIL
    print("ok")
    return EXIT_OK


def cmd_run(args) -> int:
    """Evaluate a program on JSON inputs, or on a random example of a kernel."""
    p = _load_program(args.program)
    if args.inputs:
        try:
            inputs = {k: np.asarray(v, dtype=np.int64) for k, v in json.loads(Path(args.inputs).read_text()).items()}
        except (OSError, json.JSONDecodeError, AttributeError, TypeError, ValueError) as e:
            raise UsageError(f"bad inputs file: {e}") from e
    else:
        spec, _ = _kernel_config(args).build()
        inputs = random_example(spec, args.seed or 0).inputs
    try:
        out = eval_program(p, inputs)
    except StructuralError as e:
        raise UsageError(str(e)) from e
    print(json.dumps({"inputs": {k: np.asarray(v).tolist() for k, v in inputs.items()},
                      "output": out.slots.tolist(), "depth": out.depth}, sort_keys=True))
    return EXIT_OK


def cmd_bench(args) -> int:
    d = bench.load_json(args.config) if args.config else {}
    configs, pipes, pcfg = bench.suite_from_dict(d, seed=args.seed, timeout=args.timeout_secs,
                                                 optimize=False if args.no_optimize else None)
    jobs = args.jobs or int(d.get("jobs", 1))
    rows = bench.run_suite(configs, pipes, jobs=jobs, timings=args.timings, pipeline_cfg=pcfg)
    paths = bench.write_report(rows, _out_dir(args))
    print(bench.format_table(rows), end="")
    log.info("report: %s", paths["json"])
    return EXIT_OK if all(r["passed"] for r in rows) else EXIT_FAIL


def cmd_pipeline(args) -> int:
    d = bench.load_json(args.config) if args.config else {}
    name = args.name or d.get("pipeline")
    if name not in PIPELINES:
        raise UsageError(f"unknown pipeline {name!r}; expected one of {sorted(PIPELINES)}")
    unknown = set(d) - {"pipeline", "sizes", "synth", "cost_model"}
    if unknown:
        raise ConfigError(f"unknown pipeline config keys: {sorted(unknown)}")
    suite = {"kernels": [], "synth": d.get("synth", {}), "cost_model": d.get("cost_model")}
    _, _, cfg = bench.suite_from_dict(suite, seed=args.seed, timeout=args.timeout_secs,
                                      optimize=False if args.no_optimize else None)
    try:
        pipe = PIPELINES[name](**d.get("sizes", {}))
    except TypeError as e:
        raise ConfigError(f"bad pipeline sizes: {e}") from e
    try:
        res = synthesize_multistep(pipe, cfg)
    except (PipelineError, SynthesisError) as e:
        log.error("%s", e)
        return EXIT_FAIL
    out = _out_dir(args)
    _write_json(out / f"{name}.report.json", res.to_dict())
    write_artifacts(res.program, name, out)
    row = bench.pipeline_row(name, cfg, cache=None, sizes=d.get("sizes")) if args.compare else None
    total = res.to_dict()["instructions"]
    print(f"{name}: {total} instructions, masks {res.masks}")
    for stage, counts in res.stage_counts.items():
        print(f"  {stage:<10} {counts[2]:>3} ({counts[0]} arith, {counts[1]} rotations)")
    if row is not None:
        print(bench.format_table([row.to_dict()]), end="")
    return EXIT_OK


def cmd_codegen(args) -> int:
    p = _load_program(args.program)
    name = args.name or Path(args.program).name.split(".")[0]
    paths = write_artifacts(p, name, _out_dir(args))
    print(paths["ir"])
    print(paths["source"])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hesynth", description=__doc__)
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        p.add_argument("--config", required=config_required, help="JSON config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--timeout-secs", type=float, default=None, help="seconds without progress")
        p.add_argument("--no-optimize", action="store_true", help="stop at the first verified solution")
        p.add_argument("--out-dir", default=None)

    def kernel_opts(p):
        p.add_argument("--kernel", help="benchmark kernel name (when no --config)")
        p.add_argument("--sizes", help="JSON object of kernel size parameters")

    p = sub.add_parser("synth", help="synthesize one kernel from a config")
    common(p, config_required=True)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("verify", help="check a program file against a kernel")
    p.add_argument("program")
    common(p)
    kernel_opts(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("run", help="evaluate a program file")
    p.add_argument("program")
    p.add_argument("--inputs", help="JSON object mapping input names to slot lists")
    common(p)
    kernel_opts(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("bench", help="run the benchmark suite against the baselines")
    common(p)
    p.add_argument("--jobs", type=int, default=None, help="worker processes for kernel rows")
    p.add_argument("--timings", action="store_true", help="include wall-clock times in the JSON report")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("pipeline", help="synthesize a multi-step pipeline")
    p.add_argument("name", nargs="?", help="pipeline name (or 'pipeline' in the config)")
    p.add_argument("--compare", action="store_true", help="also build and report the baseline")
    common(p)
    p.set_defaults(fn=cmd_pipeline)

    p = sub.add_parser("codegen", help="lower a program file to JSON IR and backend source")
    p.add_argument("program")
    p.add_argument("--name", help="kernel name used for output files")
    common(p)
    p.set_defaults(fn=cmd_codegen)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except (ConfigError, UsageError) as e:
        print(f"hesynth {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
