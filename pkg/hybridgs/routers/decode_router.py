"""
decode command.
"""
import click

from hybridgs.routers.output import emit_json, set_report_json
from hybridgs.schemas.encode_config import DecodeConfig, build_config
from hybridgs.services.pipeline_service import decode_file, stage


@click.command("decode")
@click.argument("input_path", metavar="INPUT", type=click.Path())
@click.argument("output_path", metavar="OUTPUT", type=click.Path())
@click.option("--denormalize", is_flag=True, help="Map lattice positions back to scene units.")
@click.option("--cameras", type=click.Path(), default=None, help="Camera list in scene units.")
@click.option("--cameras-out", type=click.Path(), default=None, help="Where to write cameras matching the output.")
@click.option("--workers", type=int, default=None, help="Substream worker processes.")
@click.option("--report-json", is_flag=True, help="Print a machine-readable summary.")
def decode(input_path, output_path, denormalize, cameras, cameras_out, workers, report_json):
    """Decode an .hgs stream into a 3DGS PLY file."""
    set_report_json(report_json)
    with stage("config"):
        config = build_config(
            DecodeConfig,
            input=input_path,
            output=output_path,
            denormalize=denormalize,
            cameras=cameras,
            cameras_out=cameras_out,
            workers=workers,
        )
    cloud, stream = decode_file(config)

    header = stream.header
    if report_json:
        emit_json({
            "n": cloud.n,
            "output": output_path,
            "denormalized": bool(denormalize and header.position_mode == "lqm"),
            "attr_mode": header.attr_mode,
            "position_mode": header.position_mode,
            "transform": header.transform.model_dump(mode="json"),
        })
        return
    click.echo(f"Decoded {cloud.n} primitives to {output_path}")
