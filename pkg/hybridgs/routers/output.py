"""
Shared rendering of command results and errors.
"""
import json
from typing import Any, Optional

import click

REPORT_JSON_KEY = "report_json"


def set_report_json(enabled: bool) -> None:
    """Remember the output mode so the error handler renders in kind."""
    click.get_current_context().meta[REPORT_JSON_KEY] = bool(enabled)


def report_json_enabled(ctx: click.Context) -> bool:
    return bool(ctx.meta.get(REPORT_JSON_KEY, False))


def emit_json(data: dict[str, Any], success: bool = True) -> None:
    """One JSON object per line on stdout."""
    click.echo(json.dumps({"success": success, "data": data}, sort_keys=True))


def error_payload(error_type: str, message: str, stage: Optional[str] = None) -> dict[str, Any]:
    return {
        "success": False,
        "error": {
            "type": error_type,
            "stage": stage,
            "message": message,
        },
    }


def emit_error(ctx: click.Context, error_type: str, message: str, stage: Optional[str] = None) -> None:
    if report_json_enabled(ctx):
        click.echo(json.dumps(error_payload(error_type, message, stage), sort_keys=True))
    else:
        prefix = f"[{stage}] " if stage else ""
        click.echo(f"Error ({error_type}): {prefix}{message}", err=True)
