"""
inspect and pca-report commands.
"""
import csv
import io

import click

from hybridgs.routers.output import emit_json, set_report_json
from hybridgs.services.bitstream_service import inspect
from hybridgs.services.latent_service import energy_spectrum
from hybridgs.services.pipeline_service import stage
from hybridgs.services.ply_service import load_ply, read_bytes


@click.command("inspect")
@click.argument("input_path", metavar="INPUT", type=click.Path())
@click.option("--report-json", is_flag=True, help="Print the allocation as flat key-value JSON.")
def inspect_cmd(input_path, report_json):
    """Show the rate allocation of an .hgs stream."""
    set_report_json(report_json)
    with stage("inspect"):
        report = inspect(read_bytes(input_path))
    if report_json:
        emit_json(report.to_flat_dict())
    else:
        click.echo(report.to_text())


@click.command("pca-report")
@click.argument("input_path", metavar="INPUT", type=click.Path())
@click.option("--report-json", is_flag=True, help="Print the spectra as JSON instead of CSV.")
def pca_report(input_path, report_json):
    """Energy spectra of the color, scale and rotation attributes as CSV."""
    set_report_json(report_json)
    with stage("parse"):
        cloud = load_ply(input_path)
    with stage("pca"):
        spectra = {
            "color": energy_spectrum(cloud.color()),
            "scale": energy_spectrum(cloud.scale),
            "rotation": energy_spectrum(cloud.rotation),
        }

    if report_json:
        emit_json({name: values.tolist() for name, values in spectra.items()})
        return
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["attribute", "component", "energy"])
    for name, values in spectra.items():
        for i, value in enumerate(values):
            writer.writerow([name, i, repr(float(value))])
    click.echo(buffer.getvalue(), nl=False)
