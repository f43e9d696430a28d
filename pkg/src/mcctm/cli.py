"""
Command-line entry point.

    mcctm generate {snowman,blobs,sessions} --seed N --out DIR
    mcctm train    --data DIR --out DIR [training flags]
    mcctm eval     --model FILE --data DIR --out DIR [--top-k K] [--threshold-scale S]
    mcctm roc      --model FILE --data DIR --out DIR [--mode template_count|threshold_scale]
    mcctm losocv   --data SESSIONS_DIR --out DIR [training flags]
    mcctm bench    --model FILE --data DIR --out DIR [--repetitions N]

``--data`` is either a sample directory (``samples.csv`` + ``shape.json``) or
a sessions directory (one sub-directory per subject). Every command writes its
resolved configuration to ``config.json`` in its output directory.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 stop criterion
not met (only with ``--strict``).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import datasets
from .baselines import knn_fit, knn_predict
from .distance import DTW, EUCLIDEAN, DistanceSpec
from .evaluation import (TEMPLATE_COUNT, THRESHOLD_SCALE, EvalReport, bench, roc_auc, roc_sweep,
                         time_per_call)
from .mcc import IMPROVED, ORIGINAL, MccModel, TrainConfig, predict_many, rank_templates, train
from .pipeline import (PipelineConfig, condition, evaluate_sessions, losocv_sessions, pooled_roc, read_subjects,
                       train_pooled, write_subjects)
from .preprocess import fingerprint, slide_windows

log = logging.getLogger("mcctm")

EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_CRITERION = 4


class DataError(Exception):
    pass


def _floats(text):
    return tuple(float(v) for v in text.split(","))


def _add_train_flags(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--variant", choices=[IMPROVED, ORIGINAL], default=IMPROVED)
    p.add_argument("--distance", choices=["euclid", "dtw"], default=None,
                   help="default: euclid for sample data, dtw for sessions")
    p.add_argument("--band", type=int, default=None, help="Sakoe-Chiba half-width (frames)")
    stop = p.add_mutually_exclusive_group()
    stop.add_argument("--stop-cost", type=float, default=None, metavar="H")
    stop.add_argument("--stop-precision", type=float, default=None, metavar="P")
    p.add_argument("--max-clusters", type=int, default=50)
    p.add_argument("--strict", action="store_true",
                   help="exit 4 when max-clusters is hit before the stop criterion")


def _add_infer_flags(p):
    p.add_argument("--top-k", type=int, default=None)
    p.add_argument("--threshold-scale", type=float, default=1.0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mcctm", description="Multi-center template classifier")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic dataset")
    g.add_argument("kind", choices=["snowman", "blobs", "sessions"])
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-o", "--out", required=True)
    g.add_argument("--n-pos", type=int, default=889)
    g.add_argument("--n-neg", type=int, default=445)
    g.add_argument("--mu-pos", type=_floats, default=(0.0, 0.0))
    g.add_argument("--mu-neg", type=_floats, default=(0.0, 9.0))
    g.add_argument("--sigma-pos", type=float, default=3.0)
    g.add_argument("--sigma-neg", type=float, default=0.5)
    g.add_argument("--subjects", type=int, default=5)
    g.add_argument("--noise", type=float, default=0.5)
    g.add_argument("--events-per-session", type=int, default=8)

    t = sub.add_parser("train", help="train and rank a model")
    t.add_argument("--data", required=True)
    t.add_argument("--split", choices=["train", "test", "all"], default="train")
    t.add_argument("-o", "--out", required=True)
    _add_train_flags(t)

    for name in ("eval", "roc"):
        e = sub.add_parser(name, help=f"{name} a model")
        e.add_argument("--model", required=True)
        e.add_argument("--data", required=True)
        e.add_argument("--split", choices=["train", "test", "all"], default="test")
        e.add_argument("-o", "--out", required=True)
        e.add_argument("--mode", choices=[TEMPLATE_COUNT, THRESHOLD_SCALE], default=TEMPLATE_COUNT)
        _add_infer_flags(e)

    lo = sub.add_parser("losocv", help="leave-one-subject-out evaluation on sessions")
    lo.add_argument("--data", required=True)
    lo.add_argument("-o", "--out", required=True)
    lo.add_argument("--mode", choices=[TEMPLATE_COUNT, THRESHOLD_SCALE], default=TEMPLATE_COUNT)
    _add_train_flags(lo)
    _add_infer_flags(lo)

    b = sub.add_parser("bench", help="time single-window inference and measure model size")
    b.add_argument("--model", required=True)
    b.add_argument("--data", required=True)
    b.add_argument("--split", choices=["train", "test", "all"], default="test")
    b.add_argument("-o", "--out", required=True)
    b.add_argument("--repetitions", type=int, default=200)
    b.add_argument("--baseline", action="store_true", help="also time 1NN on the training split")
    return ap


# ---------------------------------------------------------------------------
# helpers


def _is_sessions(path: Path) -> bool:
    return not (path / "samples.csv").exists() and path.is_dir()


def _load_samples(path: Path):
    try:
        return datasets.read_samples(path)
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot read samples from {path}: {exc}") from exc


def _load_subjects(path: Path):
    try:
        return read_subjects(path)
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot read sessions from {path}: {exc}") from exc


def _train_config(args, sessions: bool) -> TrainConfig:
    kind = args.distance or ("dtw" if sessions else "euclid")
    spec = DistanceSpec(DTW if kind == "dtw" else EUCLIDEAN, args.band)
    stop_precision = args.stop_precision
    if args.stop_cost is None and stop_precision is None:
        stop_precision = 0.8
    return TrainConfig(stop_cost=args.stop_cost, stop_precision=stop_precision,
                       max_clusters=args.max_clusters, variant=args.variant, distance=spec,
                       rng_seed=args.seed)


def _pipeline_config(args, sessions: bool) -> PipelineConfig:
    return PipelineConfig(train=_train_config(args, sessions), seed=args.seed)


def _sample_fingerprint(variant: str) -> str:
    return fingerprint({"preprocessing": None, "variant": variant})


def _write_config(out: Path, args, **extra):
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    cfg.update(extra)
    (out / "config.json").write_text(json.dumps(cfg, indent=1, sort_keys=True, default=list) + "\n")


def _load_model(path) -> MccModel:
    try:
        return MccModel.load(path)
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot read model {path}: {exc}") from exc


def _model_pipeline(model_path: Path) -> PipelineConfig:
    """Pipeline settings recorded next to a session-trained model."""
    cfg_file = Path(model_path).parent / "config.json"
    if cfg_file.exists():
        rec = json.loads(cfg_file.read_text())
        if rec.get("pipeline"):
            return _pipeline_config(argparse.Namespace(**rec), True)
    return PipelineConfig()


def _check_fingerprint(model: MccModel, expected: str):
    if model.preprocessing_fingerprint and model.preprocessing_fingerprint != expected:
        raise DataError("model was trained with different preprocessing than this data")


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args, out: Path):
    if args.kind == "snowman":
        data = datasets.gen_snowman(args.seed)
        datasets.write_samples(out, data)
    elif args.kind == "blobs":
        data = datasets.gen_blobs(args.n_pos, args.n_neg, args.mu_pos, args.mu_neg,
                                  args.sigma_pos, args.sigma_neg, seed=args.seed)
        datasets.write_samples(out, data)
    else:
        subjects = datasets.gen_imu_subjects(args.subjects, seed=args.seed, noise_sigma=args.noise,
                                             events_per_session=args.events_per_session)
        write_subjects(out, subjects)
    _write_config(out, args)
    return 0


def cmd_train(args, out: Path):
    data_path = Path(args.data)
    sessions = _is_sessions(data_path)
    if sessions:
        cfg = _pipeline_config(args, True)
        model, _ = train_pooled(_load_subjects(data_path), cfg)
        warning = None
    else:
        data = _load_samples(data_path).part(args.split)
        tcfg = _train_config(args, False)
        model, trace = train(data.positives, data.negatives, tcfg, _sample_fingerprint(args.variant))
        model = rank_templates(model, data.positives)
        warning = trace.warning
        (out / "trace.csv").write_text(trace.to_csv())
    model.save(out / "model.json")
    resolved = _pipeline_config(args, True).to_dict() if sessions else _train_config(args, False).to_dict()
    _write_config(out, args, pipeline=sessions, resolved=resolved, warning=warning, n_templates=model.k)
    log.info("trained %d templates", model.k)
    if warning and args.strict:
        log.error(warning)
        return EXIT_CRITERION
    return 0


def _eval_samples(args, model: MccModel):
    fp = model.preprocessing_fingerprint
    if fp and fp not in (_sample_fingerprint(IMPROVED), _sample_fingerprint(ORIGINAL)):
        raise DataError("model was trained on conditioned sessions, not on sample windows")
    return _load_samples(Path(args.data)).part(args.split)


def _session_report(args, model, mode) -> EvalReport:
    cfg = _model_pipeline(Path(args.model))
    _check_fingerprint(model, cfg.fingerprint())
    subjects = _load_subjects(Path(args.data))
    ev = [s for subj in subjects for s in subj.event_sessions]
    nl = [s for subj in subjects for s in subj.null_sessions]
    for subj in subjects:
        for s in subj.event_sessions + subj.null_sessions:
            s.name = f"{subj.name}/{s.name}"
    return evaluate_sessions(model, ev, nl, cfg, mode, args.top_k, args.threshold_scale)


def cmd_eval(args, out: Path, sweep: bool = False):
    model = _load_model(args.model)
    mode = args.mode
    if _is_sessions(Path(args.data)):
        rep = _session_report(args, model, mode)
    else:
        data = _eval_samples(args, model)
        try:
            rep = roc_sweep(model, data.positives, data.negatives, mode,
                            top_k=args.top_k, threshold_scale=args.threshold_scale)
        except ValueError as exc:
            raise DataError(str(exc)) from exc
        rep.extra["accuracy"] = _accuracy(model, data, args.top_k, args.threshold_scale)
    if not sweep:
        rep.roc_points = [(1.0 - rep.specificity, rep.sensitivity, float(args.threshold_scale))]
        rep.auc = roc_auc([(1.0 - rep.specificity, rep.sensitivity)])
    (out / "report.json").write_text(rep.to_json() + "\n")
    (out / "roc.csv").write_text(rep.roc_csv())
    _write_config(out, args)
    return 0


def _accuracy(model, data, top_k, scale) -> float:
    pred = predict_many(model, data.samples, top_k, scale)
    return float(np.mean(pred == data.labels))


def cmd_losocv(args, out: Path):
    cfg = _pipeline_config(args, True)
    rep = losocv_sessions(_load_subjects(Path(args.data)), cfg, args.mode, args.top_k,
                          args.threshold_scale)
    (out / "report.json").write_text(rep.to_json() + "\n")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["param", "fpr", "tpr"])
    for i, (fpr, tpr) in enumerate(pooled_roc(rep)):
        w.writerow([i, repr(fpr), repr(tpr)])
    (out / "roc.csv").write_text(buf.getvalue())
    _write_config(out, args, pipeline=True, resolved=cfg.to_dict())
    return 0


def cmd_bench(args, out: Path):
    model = _load_model(args.model)
    model_bytes = Path(args.model).stat().st_size
    if _is_sessions(Path(args.data)):
        cfg = _model_pipeline(Path(args.model))
        windows = []
        for subj in _load_subjects(Path(args.data)):
            for s in subj.event_sessions + subj.null_sessions:
                windows += [w for _, w in slide_windows(condition(s, cfg), cfg.window_s, cfg.test_stride_s)]
        train_part = None
    else:
        full = _load_samples(Path(args.data))
        windows = full.part(args.split).samples
        train_part = full.part("train") if full.split is not None else None
    if not windows:
        raise DataError("no evaluation windows")
    rows = []
    for k in sorted({1, model.k}):
        ns, _ = bench(model, windows, args.repetitions, top_k=k)
        rows.append(("mcc", k, ns, model_bytes))
    if args.baseline and train_part is not None:
        nn = knn_fit(train_part, 1, model.distance)
        ns = time_per_call(lambda w: knn_predict(nn, w), windows, args.repetitions)
        size = len(json.dumps([s.tolist() for s in train_part.samples]).encode())
        rows.append(("knn1", len(train_part), ns, size))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["model", "top_k", "timing_ns_per_inference", "model_bytes"])
    for r in rows:
        w.writerow([r[0], r[1], repr(r[2]), r[3]])
    (out / "bench.csv").write_text(buf.getvalue())
    mcc_all = [r for r in rows if r[0] == "mcc"][-1]
    rep = {"timing_ns_per_inference": mcc_all[2], "model_bytes": model_bytes,
           "rows": [dict(zip(["model", "top_k", "timing_ns_per_inference", "model_bytes"], r)) for r in rows]}
    (out / "report.json").write_text(json.dumps(rep, indent=1, sort_keys=True) + "\n")
    _write_config(out, args)
    return 0


COMMANDS = {
    "generate": cmd_generate,
    "train": cmd_train,
    "eval": cmd_eval,
    "roc": lambda a, o: cmd_eval(a, o, sweep=True),
    "losocv": cmd_losocv,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](args, out)
    except DataError as exc:
        log.error("%s", exc)
        return EXIT_DATA
    except ValueError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
