"""Command line entry point.

Subcommands: ``gen``, ``train``, ``ecl``, ``partition``, ``gradcheck``.
Exit codes: 0 success, 1 contract/configuration error (including usage
errors), 2 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .bagio import atomic_write_text, load_bag, load_manifest_bags
from .checks import run_gradchecks
from .config import load_config
from .ecl import MIXERS, ecl_sweep, emit_report
from .encoding import ENCODER_KINDS
from .errors import ContractError
from .model import ModelConfig, cross_validate
from .partition import partition_bag
from .synthetic import SyntheticSpec, generate_synthetic

log = logging.getLogger("sacmil")


class UsageError(ContractError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sacmil", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("gen", help="write a synthetic bag dataset and manifest")
    g.add_argument("--out", required=True)
    g.add_argument("--bags", type=int, default=200)
    g.add_argument("--min-n", type=int, default=48)
    g.add_argument("--max-n", type=int, default=96)
    g.add_argument("--dim", type=int, default=32)
    g.add_argument("--cluster-radius", type=float, default=3.0)
    g.add_argument("--positive-fraction", type=float, default=0.5)
    g.add_argument("--shift", type=float, default=2.0)
    g.add_argument("--seed", type=int, default=0)

    t = sub.add_parser("train", help="k-fold cross-validated training")
    t.add_argument("--manifest")
    t.add_argument("--config")
    t.add_argument("--folds", type=int, default=5)
    t.add_argument("--seed", type=int)
    t.add_argument("--out")
    t.add_argument("--epochs", type=int, help="override the config's epoch count")
    t.add_argument("--encoder", choices=ENCODER_KINDS, help="override the config's encoder")
    t.add_argument("--lambda", dest="lam", type=float, help="override the config's lambda")

    e = sub.add_parser("ecl", help="effective context length sweep")
    e.add_argument("--mixer", choices=MIXERS, action="append", required=True)
    e.add_argument("--lengths", type=_int_list, default=[256, 1024, 4096])
    e.add_argument("--layers", type=_int_list, default=[3])
    e.add_argument("--k", type=int, default=16)
    e.add_argument("--stepsize", type=int, default=6)
    e.add_argument("--dim", type=int, default=32)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--tol", type=float, default=1e-12)
    e.add_argument("--out", required=True)

    pa = sub.add_parser("partition", help="export a bag's region partition")
    pa.add_argument("--in", dest="bag", required=True)
    pa.add_argument("--k", type=int, required=True)
    pa.add_argument("--out", required=True)

    gc = sub.add_parser("gradcheck", help="finite-difference check of all gradients")
    gc.add_argument("--seed", type=int, default=0)
    return p


def cmd_gen(args) -> int:
    spec = SyntheticSpec(
        bags=args.bags,
        min_n=args.min_n,
        max_n=args.max_n,
        dim=args.dim,
        cluster_radius=args.cluster_radius,
        positive_fraction=args.positive_fraction,
        shift=args.shift,
    )
    manifest = generate_synthetic(spec, args.out, seed=args.seed)
    print(f"wrote {spec.bags} bags, manifest {manifest}")
    return 0


def _fmt(x) -> str:
    return "" if x is None else f"{x:.6f}"


def cmd_train(args) -> int:
    if args.config:
        run = load_config(args.config)
    else:
        raise UsageError("train needs --config")
    manifest = args.manifest or run.manifest
    out = args.out or run.out
    if not manifest or not out:
        raise UsageError("train needs --manifest and --out (on the command line or in the config)")
    hyper = run.hyper
    if args.seed is not None:
        hyper.seed = args.seed
    if args.epochs is not None:
        hyper.epochs = args.epochs
    model_cfg = run.model
    if args.encoder or args.lam:
        kw = dict(model_cfg.__dict__)
        kw["encoder"] = args.encoder or model_cfg.encoder
        kw["lam"] = args.lam or model_cfg.lam
        model_cfg = ModelConfig(**kw).validate()

    bags = load_manifest_bags(manifest)
    result = cross_validate(bags, model_cfg, hyper, folds=args.folds, seed=hyper.seed)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)

    rep = result.report
    lines = ["fold,acc,auc,f1,acc_std,auc_std,f1_std"]
    for i, f in enumerate(rep.folds):
        lines.append(f"{i},{_fmt(f.accuracy)},{_fmt(f.auc)},{_fmt(f.f1)},,,")
    s = rep.std
    lines.append(
        f"summary,{_fmt(rep.accuracy)},{_fmt(rep.auc)},{_fmt(rep.f1)},"
        f"{_fmt(s['accuracy'])},{_fmt(s['auc'])},{_fmt(s['f1'])}"
    )
    atomic_write_text(out_dir / "metrics.csv", "\n".join(lines) + "\n")

    score_lines = ["bag_id,instance_index,score"]
    for bag in bags:
        for i, v in enumerate(result.instance_scores[bag.bag_id]):
            score_lines.append(f"{bag.bag_id},{i},{float(v)!r}")
    atomic_write_text(out_dir / "instance_scores.csv", "\n".join(score_lines) + "\n")
    print(f"mean acc={rep.accuracy:.4f} auc={_fmt(rep.auc)} f1={rep.f1:.4f} -> {out_dir}")
    return 0


def cmd_ecl(args) -> int:
    records = ecl_sweep(args.mixer, args.lengths, args.layers, args.dim, args.seed, args.k, args.stepsize, args.tol)
    for r in records:
        print(f"{r.mixer:6s} L={r.length:<6d} layers={r.layers} changed={r.changed}")
    emit_report(records, args.out)
    return 0


def cmd_partition(args) -> int:
    bag = load_bag(args.bag)
    part = partition_bag(bag.coords, args.k)
    lines = ["instance_index,region_id,slot,is_pad"]
    for slot, (idx, pad) in enumerate(zip(part.permutation, part.pad_mask)):
        lines.append(f"{idx},{slot // part.k},{slot},{int(pad)}")
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_text(out, "\n".join(lines) + "\n")
    print(f"{bag.n} instances in {part.num_regions} regions of {part.k}")
    return 0


def cmd_gradcheck(args) -> int:
    results = run_gradchecks(args.seed)
    ok = True
    for name, report in results:
        print(f"{name:28s} {report}")
        ok &= report.passed
    print("all gradient checks passed" if ok else "gradient check FAILED")
    return 0 if ok else 1


COMMANDS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "ecl": cmd_ecl,
    "partition": cmd_partition,
    "gradcheck": cmd_gradcheck,
}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise UsageError("no subcommand given")
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
        return COMMANDS[args.command](args)
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
