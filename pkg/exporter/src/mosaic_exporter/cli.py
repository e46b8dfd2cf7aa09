"""Command-line front end: run a job file, list available methods."""

from __future__ import annotations

import sys

import click

from .errors import ExporterError
from .export import export
from .jobs import ExportJob
from .methods import REGISTRY


@click.group()
@click.version_option(package_name="mosaic-exporter")
def main():
    """Run attribution methods over a mosaic dataset and write
    interchange saliency files."""


@main.command("run")
@click.argument("job_file", type=click.Path(exists=True, dir_okay=False))
def run_cmd(job_file):
    """Execute the export described by JOB_FILE (a JSON object)."""
    try:
        job = ExportJob.from_file(job_file)
        report = export(job)
    except ExporterError as exc:
        raise click.ClickException(str(exc))
    for failure in report.failures:
        click.echo(f"{failure.mosaic_id}: {failure.reason}: {failure.message}")
    click.echo(
        f"wrote {len(report.written)} maps to {job.out_dir}, "
        f"{len(report.failures)} failures"
    )
    if report.failures:
        sys.exit(1)


@main.command("methods")
def methods_cmd():
    """List the registered methods and their sign capabilities."""
    for name in sorted(REGISTRY):
        spec = REGISTRY[name]
        needs = []
        if spec.needs_image:
            needs.append("image")
        if spec.needs_model:
            needs.append("model")
        suffix = f" [needs {', '.join(needs)}]" if needs else ""
        click.echo(f"{name}  ({spec.sign_capability}){suffix}: {spec.summary}")


if __name__ == "__main__":
    main()
