"""Command-line front end: ``ecgwave {split,features,train-eval,scalogram}``.

Every command writes into ``--out DIR`` and leaves a ``manifest.json``
there recording the resolved configuration, seeds, input checksums and
output files.

Options can also come from ``--config FILE``, a plain ``key = value`` file
(keys are option names, ``-`` or ``_`` both accepted, ``#`` comments).
Flags given on the command line override the file. Repeatable options
(``model``, ``standardize``) take ``;``-separated lists in the file.

Exit codes
----------
0  success, every requested artifact written
1  unexpected internal error
2  usage or configuration error (bad flag, bad model spec, unreadable config)
3  I/O error (missing input, unwritable output)
4  data error (malformed CSV, invalid values, infeasible depth)
5  partial failure: at least one classifier failed, the others were written
"""

import argparse
import ast
import configparser
import hashlib
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .classifiers import KINDS, SCALE_SENSITIVE, ModelSpec, make_estimator, save_model
from .data import (
    SplitSpec,
    class_histogram,
    load_csv,
    stratified_split,
    stratified_subsample,
    synth_beats,
    write_split,
)
from .evaluation import comparison_table, evaluate, failed_report, report_emit
from .exceptions import EcgWaveError, SpecError, ValidationError
from .features import FeatureConfig, export_features, extract_dataset, standardize_apply, standardize_fit
from .wavelets import cwt, export_scalogram

log = logging.getLogger("ecgwave")

EXIT_OK, EXIT_INTERNAL, EXIT_USAGE, EXIT_IO, EXIT_DATA, EXIT_PARTIAL = 0, 1, 2, 3, 4, 5

DEFAULTS = {
    "fraction": 0.7,
    "seed": 0,
    "wavelet": "sym5",
    "depth": 4,
    "bands": "all",
    "jobs": 1,
    "dt": 1.0,
    "index": 0,
    "scales": "1:64:1",
}


class UsageError(EcgWaveError):
    pass


# --- option parsing -------------------------------------------------------

def _add_input(p, name="--train", help_text="headerless beat CSV (188 fields per line)"):
    src = p.add_mutually_exclusive_group()
    src.add_argument(name, type=Path, default=None, help=help_text)
    src.add_argument("--synthetic", type=int, default=None, metavar="N",
                     help="use N synthetic beats per class instead of a CSV")


def _add_common(p):
    p.add_argument("--config", type=Path, default=None, help="key = value file of option defaults")
    p.add_argument("--out", type=Path, default=None, required=False, help="output run directory")
    p.add_argument("--seed", type=int, default=None, help="seed for subsampling, splits and models [0]")


def _add_features(p):
    p.add_argument("--wavelet", default=None, help="haar, db2 or sym5 [sym5]")
    p.add_argument("--depth", type=int, default=None, help="decomposition depth [4]")
    p.add_argument("--bands", choices=("all", "details"), default=None,
                   help="summarize all bands or detail bands only [all]")


def build_parser():
    parser = argparse.ArgumentParser(prog="ecgwave", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"ecgwave {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("split", help="stratified train/test split of a beat CSV")
    _add_input(p)
    _add_common(p)
    p.add_argument("--fraction", type=float, default=None, help="training fraction [0.7]")
    p.add_argument("--subset", type=int, default=None, metavar="N",
                   help="stratified subsample of about N beats first")

    p = sub.add_parser("features", help="wavelet sub-band feature matrix")
    _add_input(p)
    _add_common(p)
    _add_features(p)
    p.add_argument("--subset", type=int, default=None, metavar="N")
    p.add_argument("--standardize", action="store_true", default=None,
                   help="write standardized columns and record the parameters")

    p = sub.add_parser(
        "train-eval",
        help="train classifiers and evaluate them on a held-out split",
        description=(
            "Train each --model on the training beats and evaluate on --test, or on a "
            "stratified hold-out of --train when no test file is given. gradient_boost "
            "defaults to 300 stages to keep runtime reasonable; pass "
            "--model gradient_boost:n_estimators=10000 for a long run."
        ),
    )
    _add_input(p)
    _add_common(p)
    _add_features(p)
    p.add_argument("--test", type=Path, default=None, help="held-out beat CSV (skips the split)")
    p.add_argument("--fraction", type=float, default=None, help="training fraction [0.7]")
    p.add_argument("--subset", type=int, default=None, metavar="N",
                   help="stratified subsample of about N training-file beats first")
    p.add_argument("--model", action="append", default=None, metavar="SPEC",
                   help="kind[:key=value,...] (repeatable; default: all kinds). "
                        f"kinds: {', '.join(KINDS)}; 'seed' sets the model seed")
    p.add_argument("--standardize", action="append", default=None, metavar="KIND=on|off",
                   help="override per-kind feature standardization "
                        f"(on by default for {', '.join(sorted(SCALE_SENSITIVE))})")
    p.add_argument("--jobs", type=int, default=None, help="classifiers trained concurrently [1]")

    p = sub.add_parser("scalogram", help="Ricker CWT scalogram of one beat")
    _add_input(p, "--input", "beat CSV to read the beat from")
    _add_common(p)
    p.add_argument("--index", type=int, default=None, help="0-based beat row [0]")
    p.add_argument("--scales", default=None,
                   help="comma list '1,2,4' or range 'start:stop:step' (stop inclusive) [1:64:1]")
    p.add_argument("--dt", type=float, default=None, help="sampling interval [1.0]")
    return parser


def _read_config(path, parser_actions):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from None
    cp = configparser.ConfigParser(interpolation=None, comment_prefixes=("#",),
                                   inline_comment_prefixes=("#",))
    try:
        cp.read_string("[run]\n" + text)
    except configparser.Error as exc:
        raise UsageError(f"bad config file {path}: {exc}") from None
    values = {}
    for key, raw in cp["run"].items():
        dest = key.strip().replace("-", "_")
        if dest not in parser_actions or dest in ("config", "help"):
            raise UsageError(f"{path}: unknown option {key!r}")
        action = parser_actions[dest]
        if isinstance(action, argparse._AppendAction):
            values[dest] = [v.strip() for v in raw.replace("\n", ";").split(";") if v.strip()]
        elif isinstance(action, argparse._StoreTrueAction):
            values[dest] = raw.strip().lower() in ("1", "true", "yes", "on")
        else:
            conv = action.type or str
            try:
                values[dest] = conv(raw.strip())
            except ValueError:
                raise UsageError(f"{path}: bad value for {key}: {raw!r}") from None
    return values


def resolve_options(parser, argv):
    """Parse ``argv`` and fill unset options from the config file, then defaults."""
    args = parser.parse_args(argv)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    actions = {a.dest: a for a in sub._actions}
    sources = [d for d in ("train", "input", "synthetic") if d in actions]
    cli_source = any(getattr(args, d) is not None for d in sources)
    if args.config is not None:
        values = _read_config(args.config, actions)
        if sum(d in values for d in sources) > 1:
            raise UsageError(f"{args.config}: give only one of {', '.join(sources)}")
        for dest, value in values.items():
            if dest in sources and cli_source:
                continue  # an input given on the command line replaces the file's
            if getattr(args, dest, None) is None:
                setattr(args, dest, value)
    for dest, value in DEFAULTS.items():
        if dest in actions and getattr(args, dest) is None:
            setattr(args, dest, value)
    _check_options(args)
    return args


def _check_options(args):
    if args.out is None:
        raise UsageError("--out is required (on the command line or in the config file)")
    if getattr(args, "fraction", None) is not None and not 0.0 < args.fraction < 1.0:
        raise UsageError(f"--fraction must lie in (0, 1), got {args.fraction}")
    if args.seed < 0:
        raise UsageError(f"--seed must be >= 0, got {args.seed}")
    for name in ("depth", "jobs", "subset", "synthetic"):
        value = getattr(args, name, None)
        if value is not None and value < 1:
            raise UsageError(f"--{name} must be >= 1, got {value}")
    if getattr(args, "dt", None) is not None and not args.dt > 0:
        raise UsageError(f"--dt must be > 0, got {args.dt}")
    if getattr(args, "wavelet", None) is not None:
        try:
            FeatureConfig(args.wavelet, args.depth, args.bands)
        except ValidationError as exc:
            raise UsageError(str(exc)) from None


# --- helpers --------------------------------------------------------------

def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_input(args, attr="train"):
    path = getattr(args, attr)
    if args.synthetic is not None:
        return synth_beats(args.synthetic, seed=args.seed), {"synthetic_per_class": args.synthetic}
    if path is None:
        raise UsageError(f"one of --{attr} or --synthetic is required")
    if not Path(path).is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    log.info("loading %s", path)
    return load_csv(path), {"path": str(path), "sha256": _sha256(path)}


def _maybe_subset(ds, args):
    if getattr(args, "subset", None):
        before = len(ds)
        ds = stratified_subsample(ds, args.subset, args.seed)
        log.info("subsampled %d -> %d beats", before, len(ds))
    return ds


def _feature_config(args):
    return FeatureConfig(args.wavelet, args.depth, args.bands)


def _jsonable(args):
    out = {}
    for k, v in vars(args).items():
        out[k] = str(v) if isinstance(v, Path) else v
    return out


def _write_manifest(out_dir, args, inputs, outputs, extra=None):
    manifest = {
        "ecgwave_version": __version__,
        "command": args.command,
        "config": _jsonable(args),
        "seed": args.seed,
        "inputs": inputs,
        "outputs": sorted(str(Path(o).relative_to(out_dir)) for o in outputs),
    }
    if extra:
        manifest.update(extra)
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


# --- commands -------------------------------------------------------------

def cmd_split(args):
    ds, source = _load_input(args)
    ds = _maybe_subset(ds, args)
    spec = SplitSpec(args.fraction, args.seed)
    train, test = stratified_split(ds, spec)
    out = args.out
    split_info = write_split(train, test, spec, out)
    outputs = [out / "train.csv", out / "test.csv", out / "split_manifest.json"]
    _write_manifest(out, args, {"train": source}, outputs, {"split": split_info})
    log.info("train %d, test %d", len(train), len(test))
    return EXIT_OK


def cmd_features(args):
    ds, source = _load_input(args)
    ds = _maybe_subset(ds, args)
    cfg = _feature_config(args)
    X, y = extract_dataset(ds, cfg)
    params = None
    if args.standardize:
        params = standardize_fit(X)
        X = standardize_apply(X, params)
    csv_path, manifest_path = export_features(X, y, args.out / "features.csv", cfg, params)
    _write_manifest(
        args.out, args, {"train": source}, [csv_path, manifest_path],
        {"features": asdict(cfg), "class_counts": class_histogram(ds).tolist(),
         "shape": list(X.shape)},
    )
    log.info("wrote %d x %d feature matrix", *X.shape)
    return EXIT_OK


def _split_items(text):
    """Split ``a=1,b=(2,3),c=x`` at top-level commas."""
    items, depth, cur = [], 0, ""
    for ch in text:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            items.append(cur)
            cur = ""
        else:
            cur += ch
    if cur:
        items.append(cur)
    return items


def _parse_value(text):
    text = text.strip()
    try:
        value = json.loads(text.replace("(", "[").replace(")", "]"))
    except json.JSONDecodeError:
        try:
            value = ast.literal_eval(text)  # Python tuple syntax such as (8,)
        except (ValueError, SyntaxError):
            return text
    return tuple(value) if isinstance(value, list) else value


def parse_model_spec(text, default_seed=0):
    """``kind[:key=value,...]`` -> :class:`ModelSpec`; ``seed=`` sets the model seed."""
    kind, _, rest = text.strip().partition(":")
    params, seed = {}, default_seed
    for item in _split_items(rest):
        if not item.strip():
            continue
        key, eq, value = item.partition("=")
        if not eq:
            raise SpecError(f"bad hyperparameter {item!r} in {text!r}; expected key=value")
        key = key.strip()
        if key == "seed":
            seed = int(value)
        else:
            params[key] = _parse_value(value)
    return ModelSpec(kind.strip(), params, seed)


def _standardize_table(overrides):
    table = {kind: kind in SCALE_SENSITIVE for kind in KINDS}
    for item in overrides or []:
        kind, eq, flag = item.partition("=")
        kind, flag = kind.strip(), flag.strip().lower()
        if not eq or kind not in table or flag not in ("on", "off", "true", "false", "1", "0"):
            raise UsageError(f"bad --standardize value {item!r}; expected KIND=on|off")
        table[kind] = flag in ("on", "true", "1")
    return table


def _run_names(specs):
    totals = {}
    for s in specs:
        totals[s.kind] = totals.get(s.kind, 0) + 1
    seen, names = {}, []
    for s in specs:
        seen[s.kind] = seen.get(s.kind, 0) + 1
        names.append(s.kind if totals[s.kind] == 1 else f"{s.kind}-{seen[s.kind]}")
    return names


def _train_one(name, spec, standardize, Xtr, ytr, Xte, yte, out_dir):
    t0 = time.perf_counter()
    scaler = None
    if standardize:
        scaler = standardize_fit(Xtr)
        Xtr, Xte = standardize_apply(Xtr, scaler), standardize_apply(Xte, scaler)
    model = make_estimator(spec).fit(Xtr, ytr)
    t1 = time.perf_counter()
    y_pred = model.predict(Xte)
    t2 = time.perf_counter()
    report = evaluate(
        yte, y_pred, classes=np.union1d(model.classes_, yte),
        name=name, training_accuracy=model.training_accuracy_,
        spec=spec.to_dict(), timing={"fit_seconds": t1 - t0, "predict_seconds": t2 - t1},
    )
    model_path = save_model(model, out_dir / "models" / f"{name}.json", seed=spec.seed)
    json_path = report_emit(report, "json", out_dir / "reports" / f"{name}.json")
    csv_path = report_emit(report, "csv", out_dir / "reports" / f"{name}.csv")
    std_info = None
    if scaler is not None:
        std_info = {"mean": scaler[0].tolist(), "std": scaler[1].tolist()}
    return report, [model_path, json_path, csv_path], std_info


def cmd_train_eval(args):
    try:
        model_texts = args.model or list(KINDS)
        specs = [parse_model_spec(t, args.seed) for t in model_texts]
        standardize = _standardize_table(args.standardize)
    except SpecError as exc:
        raise UsageError(str(exc)) from None
    cfg = _feature_config(args)

    ds, source = _load_input(args)
    ds = _maybe_subset(ds, args)
    inputs = {"train": source}
    if args.test is not None:
        if not args.test.is_file():
            raise FileNotFoundError(f"input file not found: {args.test}")
        train, test = ds, load_csv(args.test)
        inputs["test"] = {"path": str(args.test), "sha256": _sha256(args.test)}
    else:
        train, test = stratified_split(ds, SplitSpec(args.fraction, args.seed))
    log.info("train %d beats, test %d beats", len(train), len(test))

    Xtr, ytr = extract_dataset(train, cfg)
    Xte, yte = extract_dataset(test, cfg)

    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    names = _run_names(specs)

    def run(job):
        name, spec = job
        log.info("training %s", name)
        try:
            return _train_one(name, spec, standardize[spec.kind], Xtr, ytr, Xte, yte, out)
        except (EcgWaveError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
            log.error("%s failed: %s", name, exc)
            return failed_report(name, exc, spec.to_dict()), [], None

    jobs = list(zip(names, specs))
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    reports = [r[0] for r in results]
    outputs = [p for r in results for p in r[1]]
    table_path = report_emit(reports, "text-table", out / "comparison.txt")
    ranked = sorted(reports, key=lambda r: (r.error is not None, -r.accuracy))
    cmp_json = out / "comparison.json"
    cmp_json.write_text(json.dumps([r.to_dict() for r in ranked], indent=2) + "\n")
    outputs += [table_path, cmp_json]
    _write_manifest(
        out, args, inputs, outputs,
        {
            "features": asdict(cfg),
            "train_counts": class_histogram(train).tolist(),
            "test_counts": class_histogram(test).tolist(),
            "models": {
                name: {"spec": spec.to_dict(), "standardized": standardize[spec.kind],
                       "standardization": r[2], "error": r[0].error}
                for name, spec, r in zip(names, specs, results)
            },
        },
    )
    sys.stdout.write(comparison_table(reports))
    return EXIT_PARTIAL if any(r.error for r in reports) else EXIT_OK


def parse_scales(text):
    text = str(text).strip()
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0:
                raise ValidationError("scale step must be > 0")
            scales = np.arange(start, stop + step / 2, step)
        else:
            scales = np.array([float(v) for v in text.split(",") if v.strip()])
    except ValueError:
        raise ValidationError(f"cannot parse scales {text!r}") from None
    if scales.size == 0 or np.any(scales <= 0):
        raise ValidationError(f"scales must all be > 0, got {text!r}")
    return scales


def cmd_scalogram(args):
    scales = parse_scales(args.scales)
    if args.synthetic is not None:
        ds, source = synth_beats(args.synthetic, seed=args.seed), {"synthetic_per_class": args.synthetic}
    else:
        if args.input is None:
            raise UsageError("one of --input or --synthetic is required")
        if not args.input.is_file():
            raise FileNotFoundError(f"input file not found: {args.input}")
        ds, source = load_csv(args.input), {"path": str(args.input), "sha256": _sha256(args.input)}
    if not 0 <= args.index < len(ds):
        raise ValidationError(f"beat index {args.index} out of range (0..{len(ds) - 1})")
    sg = cwt(ds.samples[args.index], scales, args.dt)
    csv_path, meta_path = export_scalogram(sg, args.out / "scalogram.csv")
    energy = sg.energy()
    _write_manifest(
        args.out, args, {"input": source}, [csv_path, meta_path],
        {"beat_label": int(ds.labels[args.index]),
         "peak_energy_scale": float(scales[int(np.argmax(energy))])},
    )
    return EXIT_OK


COMMANDS = {
    "split": cmd_split,
    "features": cmd_features,
    "train-eval": cmd_train_eval,
    "scalogram": cmd_scalogram,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = resolve_options(parser, argv)
    except SystemExit as exc:  # argparse usage errors and --help/--version
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"ecgwave: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ecgwave: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"ecgwave: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"ecgwave: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - last-resort exit code
        log.info("internal error", exc_info=True)
        print(f"ecgwave: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
