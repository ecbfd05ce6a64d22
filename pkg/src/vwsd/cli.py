"""Command-line entry point: evaluate, ablate, tune, predict, dump-views.

The config file is the source of truth; ``--set key=value`` flags override
individual documented keys. Exit codes: 0 success, 2 usage or configuration
error, 3 runtime failure.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import click

from .augment import generate_views, save_views
from .config import PipelineConfig, apply_overrides, load_config
from .dataset import CANDIDATES_PER_SAMPLE, Sample, load_dataset
from .errors import ConfigError, DatasetFormatError, VwsdError
from .evaluation import (
    comparison_table_text,
    comparison_table_tsv,
    evaluate,
    run_ablation,
    tune_hyperparameters,
)
from .pipeline import build_runtime, load_candidate_image, rank_sample

logger = logging.getLogger(__name__)

EXIT_USAGE = 2
EXIT_RUNTIME = 3


def _fail_usage(message: str) -> SystemExit:
    click.echo(f"error: {message}", err=True)
    return SystemExit(EXIT_USAGE)


def _parse_overrides(pairs: tuple[str, ...]) -> dict[str, str]:
    overrides = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise _fail_usage(f"override {pair!r} must look like key=value")
        overrides[key.strip()] = value
    return overrides


def _resolve_config(config_path: str | None, sets: tuple[str, ...],
                    seed: int | None, workers: int | None) -> PipelineConfig:
    try:
        config = load_config(config_path) if config_path else PipelineConfig()
        overrides = _parse_overrides(sets)
        if seed is not None:
            overrides["seed"] = str(seed)
        if workers is not None:
            overrides["workers"] = str(workers)
        if overrides:
            config = apply_overrides(config, overrides)
        return config
    except FileNotFoundError as exc:
        raise _fail_usage(f"config file not found: {exc}")
    except ConfigError as exc:
        raise _fail_usage(str(exc))


def _load_samples(data: str, gold: str | None, images: str, split: str):
    try:
        return load_dataset(data, gold_path=gold, image_root=images, split_name=split)
    except FileNotFoundError as exc:
        raise _fail_usage(f"dataset file not found: {exc}")
    except DatasetFormatError as exc:
        raise _fail_usage(str(exc))


_config_option = click.option("--config", "config_path", type=click.Path(), default=None,
                              help="Flat JSON config file.")
_set_option = click.option("--set", "sets", multiple=True, metavar="KEY=VALUE",
                           help="Override a documented config key.")
_seed_option = click.option("--seed", type=int, default=None, help="Override the config seed.")
_data_options = [
    click.option("--data", required=True, type=click.Path(), help="Tab-separated sample file."),
    click.option("--gold", type=click.Path(), default=None, help="Gold image file."),
    click.option("--images", required=True, type=click.Path(), help="Image root directory."),
    click.option("--split", default="custom", type=click.Choice(["trial", "train", "test", "custom"])),
]


def _add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


@click.group()
@click.option("--verbose", is_flag=True, help="Enable informational logging.")
def main(verbose: bool):
    """Visual word sense disambiguation pipeline."""
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )


@main.command("evaluate")
@_config_option
@_set_option
@_seed_option
@click.option("--workers", type=int, default=None)
@_add_options(_data_options)
@click.option("--output", required=True, type=click.Path(), help="Report JSON path.")
def cmd_evaluate(config_path, sets, seed, workers, data, gold, images, split, output):
    """Evaluate a configuration over a dataset and write an EvalReport."""
    config = _resolve_config(config_path, sets, seed, workers)
    if gold is None:
        raise _fail_usage("evaluate requires --gold")
    samples = _load_samples(data, gold, images, split)
    try:
        report = evaluate(samples, config)
    except VwsdError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(EXIT_RUNTIME)
    report.write_json(output)
    click.echo(
        f"MRR {report.mrr:.4f}  Hit Rate {report.hit_rate:.4f}  "
        f"({len(report.per_sample)} samples, {len(report.skipped)} skipped)"
    )


@main.command("ablate")
@click.option("--config", "configs", multiple=True, required=True, metavar="NAME=PATH",
              help="Named config; may be repeated.")
@_set_option
@_seed_option
@_add_options(_data_options)
@click.option("--output-dir", required=True, type=click.Path())
def cmd_ablate(configs, sets, seed, data, gold, images, split, output_dir):
    """Evaluate several named configs on the identical sample list."""
    named = []
    for item in configs:
        name, sep, path = item.partition("=")
        if not sep or not name or not path:
            raise _fail_usage(f"--config {item!r} must look like NAME=PATH")
        named.append((name, _resolve_config(path, sets, seed, None)))
    if gold is None:
        raise _fail_usage("ablate requires --gold")
    samples = _load_samples(data, gold, images, split)
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        results = run_ablation(samples, named)
    except VwsdError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(EXIT_RUNTIME)
    for name, report in results:
        report.write_json(out / f"{name}.json")
    (out / "comparison.tsv").write_text(comparison_table_tsv(results), encoding="utf-8")
    text = comparison_table_text(results)
    (out / "comparison.txt").write_text(text, encoding="utf-8")
    click.echo(text, nl=False)


@main.command("tune")
@_config_option
@_set_option
@_add_options(_data_options)
@click.option("--trials", type=int, default=16, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--sampler", type=click.Choice(["halton", "random"]), default="halton",
              show_default=True)
@click.option("--space", "space_specs", multiple=True, metavar="KEY=LOW:HIGH",
              help="Search range; may be repeated. Default: beta_p/beta_s/tau in [0,1].")
@click.option("--output", required=True, type=click.Path(), help="Tuning log JSON path.")
def cmd_tune(config_path, sets, data, gold, images, split, trials, seed, sampler,
             space_specs, output):
    """Quasi-random search over fusion weights and temperature."""
    config = _resolve_config(config_path, sets, None, None)
    if gold is None:
        raise _fail_usage("tune requires --gold")
    space: dict[str, tuple[float, float]] = {}
    for spec in space_specs:
        key, sep, bounds = spec.partition("=")
        low, sep2, high = bounds.partition(":")
        if not sep or not sep2:
            raise _fail_usage(f"--space {spec!r} must look like KEY=LOW:HIGH")
        try:
            space[key.strip()] = (float(low), float(high))
        except ValueError:
            raise _fail_usage(f"--space {spec!r} has non-numeric bounds")
    if not space:
        space = {"beta_p": (0.0, 1.0), "beta_s": (0.0, 1.0), "tau": (0.1, 1.0)}
    samples = _load_samples(data, gold, images, split)
    try:
        best, log = tune_hyperparameters(
            samples, config, space, trials=trials, seed=seed, sampler=sampler
        )
    except ConfigError as exc:
        raise _fail_usage(str(exc))
    except VwsdError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(EXIT_RUNTIME)
    payload = {"best_config": best.to_dict(), "trials": log}
    Path(output).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                            encoding="utf-8")
    best_trial = max(log, key=lambda t: t["mrr"])
    click.echo(f"best validation MRR {best_trial['mrr']:.4f} with {best_trial['params']}")


@main.command("predict")
@_config_option
@_set_option
@_seed_option
@click.argument("target")
@click.argument("phrase")
@click.argument("image_paths", nargs=-1, type=click.Path())
def cmd_predict(config_path, sets, seed, target, phrase, image_paths):
    """Rank IMAGE_PATHS (exactly 10) for TARGET as used in PHRASE."""
    config = _resolve_config(config_path, sets, seed, None)
    if len(image_paths) != CANDIDATES_PER_SAMPLE:
        raise _fail_usage(
            f"predict requires exactly {CANDIDATES_PER_SAMPLE} images, got {len(image_paths)}"
        )
    missing = [p for p in image_paths if not Path(p).is_file()]
    if missing:
        raise _fail_usage(f"image file(s) not found: {', '.join(missing)}")
    sample = Sample(
        id="cli-predict",
        target_word=target,
        context_phrase=phrase,
        candidates=tuple(image_paths),
        gold_index=None,
    )
    try:
        runtime = build_runtime(config)
        result = rank_sample(sample, runtime, Path("."))
    except VwsdError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(EXIT_RUNTIME)
    for position, index in enumerate(result.order, start=1):
        click.echo(f"{position:2d}. [{index}] {result.scores[index]:.6f}  {image_paths[index]}")


@main.command("dump-views")
@_config_option
@_set_option
@_seed_option
@click.option("--image", "image_path", required=True, type=click.Path())
@click.option("--output-dir", required=True, type=click.Path())
def cmd_dump_views(config_path, sets, seed, image_path, output_dir):
    """Write every augmented view of one image for visual inspection."""
    config = _resolve_config(config_path, sets, seed, None)
    if not Path(image_path).is_file():
        raise _fail_usage(f"image file not found: {image_path}")
    try:
        runtime = build_runtime(config)
        image = load_candidate_image(Path(image_path), str(image_path))
        views = generate_views(image, runtime.profile, image_ref=str(image_path))
        written = save_views(views, output_dir)
    except VwsdError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(EXIT_RUNTIME)
    click.echo(f"wrote {len(written)} views to {output_dir}")


if __name__ == "__main__":
    main()
