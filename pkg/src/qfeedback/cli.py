"""Command-line entry point: analytic engines, random campaigns, protocol files.

Exit status is 0 iff no inequality was violated and no instance failed.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .campaign import CHANNEL_KINDS, MODES, CampaignConfig, draw_protocol_spec, random_campaign
from .protocol import DEFAULT_TOLERANCE, applicable_verdicts, run
from .report import emit_report, ledger_scalars, load_spec, spec_to_dict
from .scenarios import carnot_feedback_scenario, szilard_scenario
from .thermo import PhysicalConstants


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _int_range(text: str) -> tuple[int, int]:
    """``"3"`` or ``"2-4"`` (inclusive)."""
    try:
        if "-" in text:
            lo, hi = text.split("-", 1)
            return int(lo), int(hi)
        return int(text), int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or LO-HI, got {text!r}") from None


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--out", default=None, help="output file (default: stdout)")
    p.add_argument("--tolerance", type=float, default=DEFAULT_TOLERANCE)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfeedback", description=__doc__.splitlines()[0])
    parser.add_argument("--k-b", type=float, default=1.0, dest="k_b", help="Boltzmann constant")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("szilard", help="one-molecule Szilard engine (quasi-static ledger)")
    p.add_argument("--temp", type=float, default=1.0)
    p.add_argument("--error", type=float, default=0.0, help="measurement flip probability in [0, 0.5]")
    _add_output(p)

    p = sub.add_parser("carnot", help="one-molecule Carnot cycle with a Szilard step")
    p.add_argument("--t-hot", type=float, default=2.0)
    p.add_argument("--t-cold", type=float, default=1.0)
    p.add_argument("--q-hot", type=float, default=10.0)
    _add_output(p)

    p = sub.add_parser("campaign", help="randomized verification campaign")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=1000)
    p.add_argument("--mode", choices=MODES, default="protocol")
    p.add_argument("--channel", choices=CHANNEL_KINDS, default="random")
    p.add_argument("--dims", type=_int_list, default=(2,), help="system dimensions, e.g. 2,3,4")
    p.add_argument("--bath-dims", type=_int_list, default=(4,), help="bath dimensions, e.g. 4,6,8")
    p.add_argument("--outcomes", type=_int_range, default=(2, 2), help="outcome count N or LO-HI")
    p.add_argument("--baths", type=_int_range, default=(1, 1), help="bath count N or LO-HI")
    p.add_argument("--cyclic", action="store_true", help="return the system energy to its start")
    p.add_argument("--records", action="store_true", help="include per-instance records")
    p.add_argument("--timing", action="store_true", help="include wall time (breaks byte-reproducibility)")
    _add_output(p)

    p = sub.add_parser("verify-file", help="run a protocol from a JSON file and check every bound")
    p.add_argument("path")
    _add_output(p)

    p = sub.add_parser("random-spec", help="write a random protocol file for verify-file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dims", type=_int_list, default=(2,))
    p.add_argument("--bath-dims", type=_int_list, default=(4,))
    p.add_argument("--outcomes", type=_int_range, default=(2, 2))
    p.add_argument("--baths", type=_int_range, default=(1, 1))
    p.add_argument("--channel", choices=("random", "trivial", "uninformative"), default="random")
    p.add_argument("--cyclic", action="store_true")
    p.add_argument("--out", default=None)
    return parser


def _exit_code(verdicts) -> int:
    return 0 if all(v.satisfied for v in verdicts) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    constants = PhysicalConstants(k_B=args.k_b)

    if args.command in ("szilard", "carnot"):
        if args.command == "szilard":
            ledger = szilard_scenario(args.temp, args.error, constants)
        else:
            ledger = carnot_feedback_scenario(args.t_hot, args.t_cold, args.q_hot, constants)
        verdicts = applicable_verdicts(ledger, args.tolerance)
        emit_report(ledger, args.out, args.format, verdicts=verdicts)
        return _exit_code(verdicts)

    if args.command == "campaign":
        config = CampaignConfig(
            seed=args.seed,
            n_instances=args.instances,
            system_dims=args.dims,
            bath_dims=args.bath_dims,
            n_outcomes_range=args.outcomes,
            n_baths_range=args.baths,
            tolerance=args.tolerance,
            mode=args.mode,
            channel_kind=args.channel,
            cyclic=args.cyclic,
            record_instances=args.records,
        )
        report = random_campaign(config)
        emit_report(report, args.out, args.format, include_timing=args.timing)
        return 0 if report.ok else 1

    if args.command == "verify-file":
        spec = load_spec(args.path)
        ledger = run(spec)
        verdicts = applicable_verdicts(ledger, args.tolerance)
        emit_report({"kind": "verification", "ledger": ledger_scalars(ledger)}, args.out, args.format, verdicts=verdicts)
        return _exit_code(verdicts)

    if args.command == "random-spec":
        config = CampaignConfig(
            seed=args.seed,
            n_instances=1,
            system_dims=args.dims,
            bath_dims=args.bath_dims,
            n_outcomes_range=args.outcomes,
            n_baths_range=args.baths,
            channel_kind=args.channel,
            cyclic=args.cyclic,
        )
        spec = draw_protocol_spec(np.random.default_rng([args.seed, 0]), config)
        text = json.dumps(spec_to_dict(spec), sort_keys=True) + "\n"
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
