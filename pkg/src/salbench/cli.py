"""Command-line front end for the mosaic-based attribution benchmark."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import SalbenchError, TooFewMethodsError
from .metrics import METRIC_NAMES
from .mosaics import CELL_PIXELS, DatasetBuildConfig, MosaicManifest, build_dataset
from .report import (
    evaluate,
    read_records_csv,
    reliability_report,
    rho_json_doc,
    alpha_json_doc,
    summarize,
    write_errors_json,
    write_json,
    write_records_csv,
    write_summary_csv,
)
from .synthetic import MODES, OracleConfig, gen_oracle_map
from .saliency_io import write_saliency


def _parse_methods(text: str) -> list[OracleConfig]:
    """Tokens are either p=<fidelity in [0,1]> or a generator mode name."""
    configs: list[OracleConfig] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        if token.startswith("p="):
            try:
                p = float(token[2:])
            except ValueError:
                raise click.BadParameter(f"bad fidelity {token!r}")
            configs.append(OracleConfig(mode="fidelity", seed=0, fidelity_p=p))
        elif token in MODES and token != "fidelity":
            configs.append(OracleConfig(mode=token, seed=0))
        else:
            raise click.BadParameter(
                f"{token!r} is neither p=<value> nor one of {MODES[:-1]}"
            )
    if not configs:
        raise click.BadParameter("no methods given")
    return configs


@click.group()
@click.version_option(package_name="salbench")
def main():
    """Score attribution maps on class-mosaic images and measure how
    reliably the induced method rankings agree."""


@main.command("build-mosaics")
@click.option("--classes", "classes_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--target", "targets", required=True, multiple=True,
              help="target class; repeat for several")
@click.option("--count", "counts", required=True, multiple=True, type=int,
              help="mosaics per target; one value, or one per --target")
@click.option("--policy", default="random", show_default=True,
              help="non-target fill: 'random' or 'fixed:<class>'")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--dataset-name", default="mosaics", show_default=True)
@click.option("--cell-pixels", default=CELL_PIXELS, show_default=True, type=int)
def build_mosaics_cmd(classes_dir, out_dir, targets, counts, policy, seed, dataset_name, cell_pixels):
    """Sample and render a mosaic dataset plus its manifest."""
    if len(counts) == 1:
        counts = counts * len(targets)
    if len(counts) != len(targets):
        raise click.BadParameter("--count must appear once, or once per --target")
    if len(set(targets)) != len(targets):
        raise click.BadParameter("duplicate --target values")
    config = DatasetBuildConfig(
        classes_dir=classes_dir,
        out_dir=out_dir,
        targets=dict(zip(targets, counts)),
        other_class_policy=policy,
        seed=seed,
        dataset_name=dataset_name,
        cell_pixels=cell_pixels,
    )
    try:
        manifest = build_dataset(config)
    except SalbenchError as exc:
        raise click.ClickException(str(exc))
    click.echo(f"wrote {len(manifest.mosaics)} mosaics to {out_dir}")


@main.command("validate-saliency")
@click.argument("saliency_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
def validate_saliency_cmd(saliency_dir, manifest_path):
    """Check map files for format, finiteness, and id cross-references."""
    manifest = MosaicManifest.load(manifest_path)
    result = evaluate(manifest, saliency_dir)
    for err in result.errors:
        click.echo(f"{err.path}: {err.reason}: {err.message}")
    click.echo(
        f"checked {len(result.records) + len(result.errors)} files, "
        f"{len(result.errors)} findings"
    )
    if result.errors:
        sys.exit(1)


@main.command("synth")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--methods", required=True, help="p=0.9,p=0.7 or mode names like perfect,inverted")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--amplitude", default=1.0, show_default=True, type=float)
def synth_cmd(manifest_path, methods, seed, out_dir, amplitude):
    """Fabricate one map per (mosaic, simulated method)."""
    manifest = MosaicManifest.load(manifest_path)
    configs = _parse_methods(methods)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n = 0
    for i, base in enumerate(configs):
        cfg = OracleConfig(
            mode=base.mode, seed=seed, amplitude=amplitude, fidelity_p=base.fidelity_p
        )
        if cfg.mode == "fidelity":
            method_id = f"synth{i:02d}-p{cfg.fidelity_p:.2f}"
        else:
            method_id = f"synth{i:02d}-{cfg.mode}"
        for spec in manifest.mosaics:
            smap = gen_oracle_map(
                spec, cfg, method_id=method_id, cell_pixels=manifest.cell_pixels
            )
            write_saliency(smap, out / f"{spec.mosaic_id}__{method_id}.salm")
            n += 1
    click.echo(f"wrote {n} maps to {out_dir}")


@main.command("evaluate")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--saliency", "saliency_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def evaluate_cmd(manifest_path, saliency_dir, out_dir):
    """Score all map files and write records.csv plus errors.json."""
    manifest = MosaicManifest.load(manifest_path)
    result = evaluate(manifest, saliency_dir)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_records_csv(list(result.records), out / "records.csv")
    write_errors_json(result.errors, out / "errors.json")
    click.echo(
        f"scored {len(result.records)} pairs, {len(result.errors)} errors, "
        f"{len(result.absent_pairs)} absent"
    )
    if result.errors:
        sys.exit(1)


@main.command("reliability")
@click.option("--records", "records_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--metrics", default=",".join(METRIC_NAMES), show_default=True)
@click.option("--level", default="ordinal", show_default=True,
              type=click.Choice(["ordinal", "interval"]))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def reliability_cmd(records_path, metrics, level, out_dir):
    """Agreement statistics over the scored records."""
    records = read_records_csv(records_path)
    names = tuple(m.strip() for m in metrics.split(",") if m.strip())
    try:
        report = reliability_report(records, metrics=names, level=level)
    except TooFewMethodsError as exc:
        click.echo(json.dumps({"error": "too-few-methods", "message": str(exc)}))
        sys.exit(2)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(alpha_json_doc(report), out / "alpha.json")
    write_json(rho_json_doc(report), out / "rho.json")
    click.echo(f"wrote alpha.json and rho.json for {len(report.alphas)} metrics")


@main.command("report")
@click.option("--records", "records_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def report_cmd(records_path, out_dir):
    """Distribution summaries (per method and metric) from records.csv."""
    records = read_records_csv(records_path)
    rows = summarize(records)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_summary_csv(rows, out / "summary.csv")
    click.echo(f"wrote {len(rows)} summary rows")


if __name__ == "__main__":
    main()
