import logging

import click

from hybridgs import __version__
from hybridgs.core.config import settings
from hybridgs.core.errors import HgsError
from hybridgs.core.log import configure_logging
from hybridgs.routers import decode, encode, inspect_cmd, pca_report, verify_cmd
from hybridgs.routers.output import emit_error

logger = logging.getLogger(__name__)


class HgsGroup(click.Group):
    """Command group with one exception handler for every command."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except (click.ClickException, click.exceptions.Exit, click.Abort):
            raise
        except HgsError as e:
            # Codec errors render as structured output with their own exit code
            emit_error(ctx, type(e).__name__, e.message, e.stage)
            ctx.exit(e.exit_code)
        except Exception as e:
            if settings.is_production():
                logger.error(f"Unexpected error: {e!r}")
            else:
                logger.exception("Unexpected error")
            emit_error(ctx, "ServerError", "An unexpected error occurred.")
            ctx.exit(1)


@click.group(cls=HgsGroup)
@click.version_option(__version__, prog_name="hybridgs")
@click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
              default=None, help="Overrides HGS_LOG_LEVEL.")
@click.option("-q", "--quiet", is_flag=True, help="Only log warnings and errors.")
def cli(log_level, quiet):
    """Compress 3D Gaussian Splatting scenes into .hgs streams."""
    configure_logging(log_level, quiet)


# Register commands
cli.add_command(encode)
cli.add_command(decode)
cli.add_command(inspect_cmd)
cli.add_command(pca_report)
cli.add_command(verify_cmd)


def main() -> None:
    cli(prog_name="hybridgs")
