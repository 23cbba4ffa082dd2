#!/usr/bin/env python3
"""
MCP server exposing the admwex commands.

Each tool takes a TOML job config as a string and returns the report as a
dictionary, or ``{"error": ...}`` when the job fails.
"""

import sys
import logging
from typing import Any, Callable, Dict, Optional

from mcp.server.fastmcp import FastMCP

from .commands import CommandResult, cmd_em_search, cmd_orthotoric, cmd_solve, cmd_stability, cmd_yamabe
from .jobs import JobConfig, parse_job
from .reports import build_report
from .settings import load_settings

# Configure logging
logging.basicConfig(
    level=load_settings().log_level,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    stream=sys.stderr
)
logger = logging.getLogger(__name__)

# Create MCP server
mcp = FastMCP("Admissible Weighted Extremal Metrics MCP Server")


def run_job(command: Callable[[JobConfig], CommandResult], config: str, mode: Optional[str] = None) -> Dict[str, Any]:
    """Parse the config, run the command and return the report (plus exit code) as a dict."""
    try:
        job = parse_job(config).with_overrides(mode=mode)
        result = command(job)
        report = build_report(result.command, job, result.payload)
        data = report.model_dump(mode="json")
        data["exit_code"] = result.exit_code
        return data
    except Exception as e:
        logger.error(f"Error running {command.__name__}: {str(e)}")
        return {"error": str(e)}


@mcp.tool()
def solve(config: str, mode: Optional[str] = None) -> Dict[str, Any]:
    """
    Build the weighted extremal profile for an admissible setup.

    Args:
        config: TOML job config with [setup] and [weight] tables
        mode: Optional override, "exact" or "float"

    Returns:
        Report with (A1, A2), endpoint residuals, positivity verdict and Θ samples
    """
    return run_job(cmd_solve, config, mode)


@mcp.tool()
def stability(config: str, mode: Optional[str] = None) -> Dict[str, Any]:
    """
    Stability verdict with Donaldson–Futaki samples of admissible test configurations.

    Args:
        config: TOML job config with [setup] and [weight] tables
        mode: Optional override, "exact" or "float"

    Returns:
        Report with the verdict, relative verdict and DF samples
    """
    return run_job(cmd_stability, config, mode)


@mcp.tool()
def em_search(config: str, mode: Optional[str] = None) -> Dict[str, Any]:
    """
    Search for weights a > 1 with A1(a) = 0 at p = 2m (Einstein–Maxwell parameters).

    Args:
        config: TOML job config with a [setup] table and optional [em_search] table
        mode: Optional override, "exact" or "float"

    Returns:
        Report with the roots, their profiles' positivity and any cross-checks
    """
    return run_job(cmd_em_search, config, mode)


@mcp.tool()
def yamabe(config: str, mode: Optional[str] = None) -> Dict[str, Any]:
    """
    Critical points of the Yamabe functional of the conformal metrics (z+t)^{-2} g.

    Args:
        config: TOML job config with a [setup] table and optional [yamabe] table
        mode: Optional override, "exact" or "float"

    Returns:
        Report with classified critical points and their comparison with the roots of A1
    """
    return run_job(cmd_yamabe, config, mode)


@mcp.tool()
def orthotoric(config: str = "schema_version = 1") -> Dict[str, Any]:
    """
    Vandermonde identities and orthotoric extremality checks at random rational points.

    Args:
        config: TOML job config with an optional [orthotoric] table

    Returns:
        Report with per-family and per-spec results
    """
    return run_job(cmd_orthotoric, config)


def main() -> None:
    """Main entry point for the server."""
    try:
        logger.info("Starting admwex MCP Server...")
        logger.info("Running MCP server with stdio transport")
        mcp.run(transport="stdio")
    except Exception as e:
        logger.error(f"Server error: {str(e)}", exc_info=True)
        raise


if __name__ == "__main__":
    main()
