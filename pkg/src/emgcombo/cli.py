"""``emgcombo`` command line.

Exit codes: 0 ok, 1 unexpected failure, 2 usage, 3 invalid config,
4 missing input, 5 bad input data.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
import tempfile
from pathlib import Path

from . import __version__
from .augmentation import AugmentMethod
from .config import RunConfig, dump_config, load_config
from .dataset import SessionFileError, StructureError, features_csv_bytes, load_session, load_sessions, save_session
from .evaluation import Condition, ConditionError, results_csv, run_condition, run_experiment_1, run_experiment_2, run_experiment_3
from .signal import featurize_windows
from .similarity import average_heatmaps, build_heatmap, save_heatmap
from .simgen import ConfigError, generate_cohort, subject_config
from .synthesis import SubsetStrategy

EXIT_OK, EXIT_OTHER, EXIT_USAGE, EXIT_CONFIG, EXIT_MISSING, EXIT_DATA = 0, 1, 2, 3, 4, 5
MANIFEST = "manifest.json"


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _report(EXIT_USAGE, "usage", message)
        raise SystemExit(EXIT_USAGE)


def _report(code: int, kind: str, message: str) -> None:
    print(json.dumps({"error": kind, "exit_code": code, "message": message}), file=sys.stderr)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# ---------------------------------------------------------------- helpers

def _config(args) -> RunConfig:
    if args.config is not None:
        p = Path(args.config)
        if not p.is_file():
            raise CliError(EXIT_MISSING, f"config file not found: {p}")
        cfg = load_config(p)
    else:
        cfg = RunConfig()
    d = cfg.to_dict()
    if getattr(args, "seed", None) is not None:
        d["seed"] = args.seed
        d["simulator"]["seed"] = args.seed
    if getattr(args, "jobs", None) is not None:
        d["jobs"] = args.jobs
    if getattr(args, "out", None) is not None:
        d["out"] = args.out
    return RunConfig.from_dict(d).validate()


def _cohort(cfg: RunConfig, sessions_dir):
    if sessions_dir is None:
        return generate_cohort(cfg.simulator, cfg.grid.n_subjects)
    d = Path(sessions_dir)
    if not d.is_dir():
        raise CliError(EXIT_MISSING, f"session directory not found: {d}")
    sessions = load_sessions(d)
    if not sessions:
        raise CliError(EXIT_MISSING, f"no *.session.json files in {d}")
    return sessions


def _session(path) -> object:
    p = Path(path)
    if not p.exists() and not Path(str(p) + ".session.json").exists():
        raise CliError(EXIT_MISSING, f"session not found: {p}")
    return load_session(p)


def _write(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    return path


def _manifest(out: Path, command: str, argv: list, cfg: RunConfig | None, seeds: dict, artifacts) -> Path:
    arts = {}
    for a in sorted(set(Path(x) for x in artifacts)):
        arts[a.relative_to(out).as_posix() if a.is_relative_to(out) else str(a)] = _sha256(a)
    body = {
        "command": command,
        "argv": argv,
        "config": None if cfg is None else cfg.to_dict(),
        "seeds": seeds,
        "artifacts": arts,
        "version": __version__,
    }
    return _write(out / MANIFEST, json.dumps(body, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- commands

def cmd_init_config(args):
    text = dump_config(RunConfig())
    if args.out is None:
        sys.stdout.write(text)
        return []
    out = Path(args.out)
    path = out if out.suffix in (".yaml", ".yml") else out / "config.yaml"
    return [_write(path, text)]


def cmd_simulate(args):
    cfg = _config(args)
    out = Path(cfg.out)
    arts = []
    for s in _cohort(cfg, None):
        header = save_session(s, out / "sessions" / s.subject_id)
        arts += [p for p in (header, header.with_name(s.subject_id + ".features.csv"), header.with_name(s.subject_id + ".raw.npz")) if p.exists()]
    sim_seeds = {f"S{i:02d}": subject_config(cfg.simulator, i).seed for i in range(cfg.grid.n_subjects)}
    return arts, cfg, {"simulator": cfg.simulator.seed, "subjects": sim_seeds}


def cmd_featurize(args):
    src = Path(args.input)
    paths = sorted(src.glob("*.session.json")) if src.is_dir() else [src]
    if not paths or not all(p.exists() or Path(str(p) + ".session.json").exists() for p in paths):
        raise CliError(EXIT_MISSING, f"no session found at {src}")
    out = Path(args.out)
    arts = []
    for p in paths:
        s = load_session(p)
        for b in s.blocks:
            for t in b.trials:
                if t.raw is None:
                    raise CliError(EXIT_DATA, f"{p}: session has no raw windows to featurize")
                t.features = featurize_windows(t.raw, s.config.sample_rate)
        path = out / f"{s.subject_id}.features.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(features_csv_bytes(s))
        arts.append(path)
    return arts, None, {}


def _cmd_experiment(args, which: str):
    cfg = _config(args)
    cohort = _cohort(cfg, args.sessions)
    g = cfg.grid
    common = dict(master_seed=cfg.seed, n_seeds=g.n_seeds, params=cfg.params, jobs=cfg.jobs)
    if which == "exp1":
        rows = run_experiment_1(cohort, archs=g.archs, algos=g.algos, **common)
    elif which == "exp2":
        rows = run_experiment_2(cohort, fractions=g.fractions, **common)
    else:
        rows = run_experiment_3(cohort, methods=g.augment_methods, fractions=g.fractions, **common)
    out = Path(cfg.out)
    path = _write(out / f"{which}_results.csv", results_csv(rows))
    failed = sum(1 for r in rows if r.error)
    if failed:
        print(f"{failed} of {len(rows)} cells failed; see the error column", file=sys.stderr)
    return [path], cfg, {"master": cfg.seed, "rep_seeds": sorted({r.seed for r in rows})}


def cmd_heatmap(args):
    seed = 0 if args.seed is None else args.seed
    src = Path(args.input)
    if src.is_dir():
        sessions = load_sessions(src)
        if not sessions:
            raise CliError(EXIT_MISSING, f"no sessions in {src}")
    else:
        sessions = [_session(src)]
    cfg = _config(args) if args.config else RunConfig()
    out = Path(args.out)
    arts, maps = [], []
    for s in sessions:
        h = build_heatmap(s, cfg.grid.heatmap_fraction, seed)
        maps.append(h)
        arts += list(save_heatmap(h, out / f"heatmap_{s.subject_id}.csv"))
    if len(maps) > 1:
        arts += list(save_heatmap(average_heatmaps(maps), out / "heatmap_averaged.csv"))
    return arts, cfg, {"seed": seed}


def _condition(args) -> Condition:
    if args.condition != "augmented":
        if args.strategy or args.augment:
            raise CliError(EXIT_USAGE, "--strategy/--augment only apply to --condition augmented")
        return Condition(args.condition)
    strategy = None
    if args.strategy and args.strategy != "all_pairs":
        stage, _, mode = args.strategy.partition("_")
        try:
            strategy = SubsetStrategy(stage, mode, args.fraction)
        except ValueError as exc:
            raise CliError(EXIT_USAGE, f"bad --strategy/--fraction: {exc}") from exc
    aug = None
    if args.augment:
        try:
            aug = AugmentMethod.parse(args.augment)
        except ValueError as exc:
            raise CliError(EXIT_USAGE, str(exc)) from exc
    return Condition("augmented", strategy, aug, args.augment_fraction if aug else None)


def cmd_evaluate(args):
    cfg = _config(args)
    session = _session(args.input)
    cond = _condition(args)
    rep = run_condition(session, cond, args.arch, args.algo, cfg.seed, cfg.params)
    body = {
        "subject": rep.subject_id,
        "seed": rep.seed,
        "condition": rep.condition,
        "arch": args.arch,
        "algo": args.algo,
        "singles_acc": rep.singles_acc,
        "doubles_acc": rep.doubles_acc,
        "overall_acc": rep.overall_acc,
        "per_class": rep.per_class.tolist(),
        "confusion": rep.confusion.tolist(),
    }
    path = _write(Path(cfg.out) / "evaluation.json", json.dumps(body, indent=2, sort_keys=True) + "\n")
    print(f"singles {rep.singles_acc:.4f}  doubles {rep.doubles_acc:.4f}  overall {rep.overall_acc:.4f}")
    return [path], cfg, {"master": cfg.seed}


def cmd_replay(args):
    mpath = Path(args.input)
    if mpath.is_dir():
        mpath = mpath / MANIFEST
    if not mpath.is_file():
        raise CliError(EXIT_MISSING, f"manifest not found: {mpath}")
    try:
        m = json.loads(mpath.read_text())
        argv, expected = list(m["argv"]), m["artifacts"]
    except (ValueError, KeyError) as exc:
        raise CliError(EXIT_DATA, f"unreadable manifest: {exc}") from exc
    with tempfile.TemporaryDirectory() as tmp:
        cfg_path = Path(tmp) / "config.yaml"
        if m.get("config") is not None:
            cfg_path.write_text(dump_config(RunConfig.from_dict(m["config"])))
        argv = _retarget(argv, Path(tmp) / "out", cfg_path if m.get("config") is not None else None)
        code = main(argv)
        if code != EXIT_OK:
            raise CliError(EXIT_OTHER, f"replayed command exited with {code}")
        got = json.loads((Path(tmp) / "out" / MANIFEST).read_text())["artifacts"]
    mismatched = sorted(k for k in set(expected) | set(got) if expected.get(k) != got.get(k))
    if mismatched:
        print("replay differs: " + ", ".join(mismatched))
        raise CliError(EXIT_DATA, f"{len(mismatched)} artifact(s) differ from the manifest")
    print(f"replay ok: {len(expected)} artifact(s) byte-identical")
    return None


def _retarget(argv: list, out: Path, cfg_path) -> list:
    res, skip = [], False
    for i, a in enumerate(argv):
        if skip:
            skip = False
            continue
        if a in ("--out", "--config"):
            skip = True
            continue
        res.append(a)
    res += ["--out", str(out)]
    if cfg_path is not None and res and res[0] not in ("featurize",):
        res += ["--config", str(cfg_path)]
    return res


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="emgcombo", description="Simulated EMG combination-gesture experiments.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, out_required=False):
        sp.add_argument("--config", metavar="PATH")
        sp.add_argument("--seed", type=int, metavar="U64")
        sp.add_argument("--jobs", type=int, metavar="N")
        sp.add_argument("--out", metavar="DIR", required=out_required)

    sp = sub.add_parser("init-config", help="write a config file holding every default")
    sp.add_argument("--out", metavar="PATH")

    common(sub.add_parser("simulate", help="simulate a cohort and save its sessions"))

    sp = sub.add_parser("featurize", help="recompute features from raw windows")
    sp.add_argument("input", metavar="SESSION_OR_DIR")
    sp.add_argument("--out", metavar="DIR", required=True)

    for name, text in (("exp1", "architectures x algorithms x bounds"), ("exp2", "synthetic subset strategies"), ("exp3", "single-gesture augmentation")):
        sp = sub.add_parser(name, help=text)
        common(sp)
        sp.add_argument("--sessions", metavar="DIR", help="saved sessions (default: simulate from config)")

    sp = sub.add_parser("heatmap", help="class-similarity heatmap(s)")
    sp.add_argument("input", metavar="SESSION_OR_DIR")
    common(sp, out_required=True)

    sp = sub.add_parser("evaluate", help="train and score one condition on one session")
    sp.add_argument("input", metavar="SESSION")
    common(sp)
    sp.add_argument("--condition", choices=("lower", "augmented", "upper"), default="augmented")
    sp.add_argument("--strategy", help="all_pairs or <subsetInput|subset>_<uniform|near_mean|spaced_quantiles>")
    sp.add_argument("--fraction", type=float, default=0.1)
    sp.add_argument("--augment", help="e.g. add-gaussian-0.3, fit-gmm-5, fit-kde")
    sp.add_argument("--augment-fraction", type=float, default=0.1)
    sp.add_argument("--arch", choices=("Parallel", "Hierarchical"), default="Parallel")
    sp.add_argument("--algo", choices=("LogR", "MLP", "RF"), default="MLP")

    sp = sub.add_parser("replay", help="rerun a manifest and compare artifact hashes")
    sp.add_argument("input", metavar="MANIFEST_OR_DIR")
    return p


COMMANDS = {
    "init-config": cmd_init_config,
    "simulate": cmd_simulate,
    "featurize": cmd_featurize,
    "exp1": lambda a: _cmd_experiment(a, "exp1"),
    "exp2": lambda a: _cmd_experiment(a, "exp2"),
    "exp3": lambda a: _cmd_experiment(a, "exp3"),
    "heatmap": cmd_heatmap,
    "evaluate": cmd_evaluate,
    "replay": cmd_replay,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        res = COMMANDS[args.command](args)
        if args.command in ("init-config", "replay"):
            return EXIT_OK
        arts, cfg, seeds = res
        out = Path(args.out if args.out is not None else cfg.out)
        _manifest(out, args.command, argv, cfg, seeds, arts)
        return EXIT_OK
    except CliError as exc:
        _report(exc.code, "cli", str(exc))
        return exc.code
    except ConfigError as exc:
        _report(EXIT_CONFIG, "config", str(exc))
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        _report(EXIT_MISSING, "missing-input", str(exc))
        return EXIT_MISSING
    except (SessionFileError, StructureError, ConditionError) as exc:
        _report(EXIT_DATA, "data", str(exc))
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - last resort
        _report(EXIT_OTHER, type(exc).__name__, str(exc))
        return EXIT_OTHER


if __name__ == "__main__":
    raise SystemExit(main())
