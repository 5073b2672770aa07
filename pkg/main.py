#!/usr/bin/env python3
"""
One-bit ISAC Studies - capacity region, mutual information, CSIT power control and Monte-Carlo checks
"""

import argparse
import asyncio
import logging
import sys
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

from studies.lead_study import LeadStudy
from utils.config import COMMANDS, FORMATS, RunConfig
from utils.errors import OneBitIsacError, classify_error, exit_code_for
from utils.logger import set_console_level, setup_logger
from utils.output import render_json, sidecar_path, write_rows, write_text

# Load environment variables
load_dotenv()

logger = setup_logger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onebit-isac",
        description="Capacity and power control of a 1-bit quantized Gaussian fading ISAC channel",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--snr-min", dest="snr_min", type=float, help="sweep start in dB (default -10)")
    common.add_argument("--snr-max", dest="snr_max", type=float, help="sweep end in dB (default 40)")
    common.add_argument("--snr-step", dest="snr_step", type=float, help="sweep step in dB (default 2)")
    common.add_argument("--power", type=float, help="average power budget P (default 1)")
    common.add_argument("--sigma-c-sq", dest="sigma_c_sq", type=float, help="communication noise power")
    common.add_argument("--sigma-s-sq", dest="sigma_s_sq", type=float, help="sensing noise power")
    common.add_argument("--lambda", dest="lambdas", type=float, action="append", help="weight lambda, repeatable")
    common.add_argument("--n-gamma", dest="n_gamma", type=int, help="Gauss-Laguerre nodes (default 64)")
    common.add_argument("--n-theta", dest="n_theta", type=int, help="Gauss-Legendre nodes (default 64)")
    common.add_argument("--seed", type=int, help="base RNG seed (default 2024)")
    common.add_argument("--out", help="output path; '-' or omitted writes to stdout")
    common.add_argument("--format", dest="fmt", choices=FORMATS, help="output format (default csv)")
    common.add_argument("--constellation", help="constellation JSON file for the mi subcommand")
    common.add_argument("--include-zero-power", dest="include_zero_power", action="store_true", default=None,
                        help="prepend a P = 0 row to the capacity sweep")
    common.add_argument("--samples", type=int, help="Monte-Carlo samples per case (default 1e6)")
    common.add_argument("--alpha", type=float, help="chi-square significance level (default 1e-3)")
    common.add_argument("--z-max", dest="z_max", type=float, help="largest per-letter |z| accepted (default 4)")
    common.add_argument("--verbose", action="store_true", default=None, help="debug logging on the console")

    helps = {
        "capacity": "CSIR capacity region over an SNR sweep",
        "mi": "CMI/SMI of a constellation file against the closed forms",
        "power-control": "optimal CSIT power control policies per lambda",
        "rates": "CSIT rates per (SNR, lambda) next to the CSIR capacities",
        "simulate": "Monte-Carlo check of the channel law",
    }
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common], help=helps[command])
    return parser


class IsacStudySystem:
    def __init__(self, config: RunConfig):
        self.config = config
        self.lead_study = None

    async def initialize(self):
        logger.info("Initializing one-bit ISAC study system")
        self.lead_study = LeadStudy()
        await self.lead_study.initialize()

    async def run_study(self) -> Dict[str, Any]:
        logger.info(f"Starting {self.config.command} with {self.config.to_dict()}")
        result = await self.lead_study.process_request(self.config)

        if "rows" in result:
            self._write_output(result)

        self._print_summary(result)
        return result

    def _write_output(self, result: Dict[str, Any]):
        config = self.config
        report = result.get("report")
        if config.fmt == "json" and report is not None:
            write_text(render_json(report), config.out)
        else:
            write_rows(result["rows"], result["headers"], config.fmt, config.out)

        sidecar = result.get("sidecar")
        if sidecar is not None:
            path = sidecar_path(config.out)
            if path:
                write_text(render_json(sidecar), path)
            else:
                logger.info(f"Policy summary: {render_json(sidecar['policies'])}")

    def _print_summary(self, result: Dict[str, Any]):
        """Summary goes to stderr; stdout may be carrying the data"""
        lines: List[str] = ["", "=" * 60]
        if result.get("success"):
            lines.append(f"{self.config.command.upper()} COMPLETED")
            lines.append("=" * 60)
            lines.append(f"  Rows written: {len(result.get('rows', []))}")
            for record in result.get("sidecar", {}).get("policies", []):
                lines.append(
                    f"  lambda={record['lambda']:g}: mu={record['mu']:.6g}, "
                    f"cut-off gamma_c={record['cutoff_gamma_c']:.4g}, KKT ok={record['kkt_ok']}"
                )
        else:
            lines.append(f"{self.config.command.upper()} FAILED")
            lines.append("=" * 60)
            lines.append(f"  Error: {result.get('error', 'Unknown error')}")
            lines.append(f"  Error Type: {result.get('error_type', 'unknown')}")
            if result.get("diagnostics"):
                lines.append(f"  Diagnostics: {result['diagnostics']}")
        if self.config.out and self.config.out != "-":
            lines.append(f"  Output: {self.config.out}")
        lines.append("=" * 60)
        print("\n".join(lines), file=sys.stderr)

    async def cleanup(self):
        """Cleanup resources"""
        if self.lead_study:
            await self.lead_study.cleanup()


async def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 1

    if args.verbose:
        set_console_level(logging.DEBUG)

    system = None
    try:
        config = RunConfig.from_args(args)
        system = IsacStudySystem(config)
        await system.initialize()
        result = await system.run_study()
        if result.get("success"):
            return 0
        return int(result.get("exit_code", 1))

    except OneBitIsacError as e:
        logger.error(f"{classify_error(e)}: {e}")
        return exit_code_for(e)

    except KeyboardInterrupt:
        logger.info("Run interrupted by user")
        return 130

    except Exception as e:
        logger.error(f"Unexpected {classify_error(e)} error: {e}", exc_info=True)
        return 1

    finally:
        if system:
            await system.cleanup()


def main(argv: Optional[List[str]] = None) -> int:
    return asyncio.run(run(argv))


if __name__ == "__main__":
    sys.exit(main())
