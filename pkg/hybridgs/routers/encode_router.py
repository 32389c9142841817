"""
encode and verify commands.
"""
import logging

import click

from hybridgs.core.errors import VerificationError
from hybridgs.routers.output import emit_json, set_report_json
from hybridgs.schemas.encode_config import EncodeConfig, LatentConfig, build_config
from hybridgs.services.pipeline_service import cameras_path, encode_file, stage, verify
from hybridgs.services.ply_service import load_ply

logger = logging.getLogger(__name__)


def encode_options(fn):
    """Options shared by encode and verify."""
    options = [
        click.option("--bd", type=int, default=None, help="Position bit depth N (2-18)."),
        click.option("--bd-c", type=int, default=None, help="Color latent bit depth (defaults to --bd)."),
        click.option("--bd-o", type=int, default=None, help="Opacity bit depth (defaults to --bd)."),
        click.option("--bd-s", type=int, default=None, help="Scale bit depth (defaults to --bd)."),
        click.option("--bd-r", type=int, default=None, help="Rotation latent bit depth (defaults to --bd)."),
        click.option("--kc", type=int, default=None, help="Color latent width (1-48)."),
        click.option("--kr", type=int, default=None, help="Rotation latent width (1-4)."),
        click.option("--quantizer", type=click.Choice(["uq", "rq"]), default=None),
        click.option("--lam", type=float, default=None, help="Ridge penalty of the robust quantizer."),
        click.option("--outlier/--no-outlier", default=True, show_default=True, help="Statistical outlier removal."),
        click.option("--nb-neighbors", type=int, default=None),
        click.option("--std-ratio", type=float, default=None),
        click.option("--target-size", type=int, default=None, help="Target coded size in bytes."),
        click.option("--rate-method", type=click.Choice(["1", "2"]), default=None,
                     help="1: prune primitives, 2: lower attribute bit depths."),
        click.option("--lossless-ratio", type=float, default=None, help="Assumed lossless ratio L."),
        click.option("--measure-l", is_flag=True, default=False, help="Measure L with a first pass."),
        click.option("--attr-mode", type=click.Choice(["raht", "bypass"]), default=None),
        click.option("--qs", type=float, default=None, help="RAHT coefficient step."),
        click.option("--dedup-mode", type=click.Choice(["largest", "first"]), default=None),
        click.option("--position-quantizer", type=click.Choice(["lqm", "uq"]), default=None),
        click.option("--latent-epochs", type=int, default=None),
        click.option("--latent-hidden", type=int, default=None),
        click.option("--latent-step", type=float, default=None, help="Latent fit gradient step."),
        click.option("--latent-backtracking", is_flag=True, default=False,
                     help="Halve the latent fit step on a rising loss instead of failing."),
        click.option("--seed", type=int, default=None),
        click.option("--workers", type=int, default=None, help="Substream worker processes."),
        click.option("--report-json", is_flag=True, help="Print a machine-readable summary."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _build_encode_config(input_path, output_path, cameras, opts) -> EncodeConfig:
    latent = build_config(
        LatentConfig,
        epochs=opts.pop("latent_epochs"),
        hidden=opts.pop("latent_hidden"),
        step_size=opts.pop("latent_step"),
        backtracking=opts.pop("latent_backtracking"),
        seed=opts.pop("seed"),
    )
    rate_method = opts.pop("rate_method")
    return build_config(
        EncodeConfig,
        input=input_path,
        output=output_path,
        cameras=cameras,
        latent=latent,
        rate_method=int(rate_method) if rate_method else None,
        **opts,
    )


@click.command("encode")
@click.argument("input_path", metavar="INPUT", type=click.Path())
@click.argument("output_path", metavar="OUTPUT", type=click.Path())
@click.option("--cameras", type=click.Path(), default=None,
              help="Camera list adjusted alongside the scene, written to OUTPUT.cameras.txt.")
@encode_options
def encode(input_path, output_path, cameras, report_json, **opts):
    """Encode a 3DGS PLY file into an .hgs stream."""
    set_report_json(report_json)
    with stage("config"):
        config = _build_encode_config(input_path, output_path, cameras, opts)
    result = encode_file(config)

    if report_json:
        emit_json(result.summary.model_dump(mode="json"))
        return
    click.echo(result.summary.allocation.to_text())
    if result.summary.target_bytes:
        click.echo(
            f"  target              {result.summary.target_bytes} B, "
            f"estimated {result.summary.estimated_bytes:.0f} B"
        )
    if result.cameras is not None:
        click.echo(f"Adjusted cameras written to {cameras_path(output_path)}")


@click.command("verify")
@click.argument("input_path", metavar="INPUT", type=click.Path())
@encode_options
def verify_cmd(input_path, report_json, **opts):
    """Encode in memory, decode, and check geometry and attribute bounds."""
    set_report_json(report_json)
    with stage("config"):
        config = _build_encode_config(input_path, "<memory>", None, opts)
    with stage("parse"):
        cloud = load_ply(config.input)
    report = verify(cloud, config)

    if report_json:
        emit_json(report.model_dump(mode="json"), success=report.ok)
    else:
        click.echo(
            f"{'OK' if report.ok else 'FAILED'}: {report.n} primitives, {report.coded_bytes} B, "
            f"geometry {'exact' if report.geometry_exact else 'MISMATCH'}, "
            f"max code error {report.max_code_error} (bound {report.code_error_bound:.3f})"
        )
        for message in report.messages:
            click.echo(f"  {message}")
    if not report.ok:
        click.get_current_context().exit(VerificationError.exit_code)
