"""Command-line interface: train, infer, eval, serve."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import TrainConfig
from .exceptions import PyramidInpaintError


def _add_train(sub):
    p = sub.add_parser("train", help="train the pyramid (all levels or one)")
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--level", type=int, default=None,
                   help="train only this level")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="KEY=VALUE", help="override a config key "
                   "(dotted path, YAML-parsed value); repeatable")


def _add_infer(sub):
    p = sub.add_parser("infer", help="inpaint one image")
    p.add_argument("--image", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--checkpoints", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--intermediates-dir", default=None,
                   help="also write each level's composite here")


def _add_eval(sub):
    p = sub.add_parser("eval", help="evaluate checkpoints over a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--checkpoints", required=True)
    p.add_argument("--resolution", type=int, required=True)
    p.add_argument("--mask", default="center",
                   help="'center', 'freeform', or a directory of mask files")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--model-id", default=None)
    p.add_argument("--out", required=True,
                   help="output prefix; writes <out>.txt, <out>.csv, <out>.json")


def _add_serve(sub):
    p = sub.add_parser("serve", help="run the inference HTTP service")
    p.add_argument("--registry", default=None, help="registry YAML path")
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--payload-limit", type=int, default=None)


def _load_config(args) -> TrainConfig:
    config = TrainConfig.from_yaml(args.config) if args.config else TrainConfig()
    if args.overrides:
        config = config.with_overrides(args.overrides)
    return config


def cmd_train(args) -> int:
    from .trainer import train_all, train_level
    config = _load_config(args)
    if args.level is None:
        results = train_all(config)
    else:
        results = [train_level(args.level, config)]
    for res in results:
        if res.get("skipped"):
            print(f"level {res['level']}: already trained, skipped")
        else:
            print(f"level {res['level']}: {res['steps']} steps, masked L1 "
                  f"{res['masked_l1_start']:.4f} -> {res['masked_l1_end']:.4f} "
                  f"({res['seconds']:.0f}s) -> {res['checkpoint_dir']}")
    return 0


def cmd_infer(args) -> int:
    from .data import load_image, tensor_to_image
    from .inference import PyramidGenerators, infer_pyramid
    from .masks import load_mask_file
    from .pyramid import apply_mask

    gens = PyramidGenerators.load(args.checkpoints)
    image = load_image(args.image)
    mask = load_mask_file(args.mask,
                          expected_size=tuple(image.shape[-2:]),
                          allow_resize=True)
    z = apply_mask(image, mask)
    want_inter = args.intermediates_dir is not None
    y, inter = infer_pyramid(z, mask, gens, return_intermediates=want_inter)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    tensor_to_image(y).save(out)
    print(f"wrote {out}")
    if want_inter:
        inter_dir = Path(args.intermediates_dir)
        inter_dir.mkdir(parents=True, exist_ok=True)
        for result in inter:
            path = inter_dir / f"level_{result.level}.png"
            tensor_to_image(result.y).save(path)
            print(f"wrote {path}")
    return 0


def cmd_eval(args) -> int:
    from .evaluation import emit_table, evaluate
    from .inference import PyramidGenerators, make_inpaint_fn
    from .masks import MaskSpec

    gens = PyramidGenerators.load(args.checkpoints)
    if args.mask == "center":
        mask_source = "center"
    elif args.mask == "freeform":
        mask_source = MaskSpec.freeform(seed=args.seed)
    else:
        mask_source = args.mask
    model_id = args.model_id or Path(args.checkpoints).name
    report = evaluate(args.dataset, mask_source, make_inpaint_fn(gens),
                      args.resolution, model_id=model_id, seed=args.seed,
                      limit=args.limit)
    prefix = Path(args.out)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    for fmt, suffix in (("text", ".txt"), ("csv", ".csv"), ("json", ".json")):
        path = prefix.with_suffix(suffix)
        path.write_text(emit_table(report, fmt))
        print(f"wrote {path}")
    print(emit_table(report, "text"))
    return 0


def cmd_serve(args) -> int:
    from .service import serve
    serve(args.registry, port=args.port, payload_limit=args.payload_limit)
    return 0


COMMANDS = {"train": cmd_train, "infer": cmd_infer, "eval": cmd_eval,
            "serve": cmd_serve}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pyramid-inpaint",
        description="Progressive pyramid GAN image inpainting")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_train(sub)
    _add_infer(sub)
    _add_eval(sub)
    _add_serve(sub)
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except PyramidInpaintError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
