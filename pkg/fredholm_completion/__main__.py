# fredholm_completion/__main__.py
import argparse
import logging
import os
import sys
from importlib.metadata import PackageNotFoundError, version

from .construct import construct
from .decision import Target, Verdict, decide, decision_to_json
from .errors import FredholmError
from .extmath import parse_complex
from .fredholm import classify, deficiency, index, spectra_flags
from .header import LOG_FILE_ENV, logger
from .models import describe_model
from .problem import format_json, format_output, load_certificate, load_problem
from .spectra import COROLLARIES, PAIRED_TARGET, parse_corollary, parse_grid, sandwich_report, sandwich_summary, write_csv
from .verify import DEFAULT_SIZES, DEFAULT_TOL, verify_completion

try:
    __version__ = version("fredholm-completion")
except PackageNotFoundError:
    __version__ = "0.0.0+local"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_EXISTS = 2
EXIT_INDETERMINATE = 3


_VALUE_KINDS = {str: "text", int: "integer", float: "number"}


def _value_kind(action):
    if action.nargs == 0:
        return "flag"
    if action.choices:
        return "choice"
    if action.type is _parse_sizes:
        return "size-list"
    return _VALUE_KINDS.get(action.type, "text")


def _describe_parser(parser, name=None, shared=frozenset()):
    """JSON-ready summary of one subcommand: its purpose and every option it reads.

    Options inherited from the shared problem parser carry ``"shared": true``
    so a caller can list them once.
    """
    entry = {"command": name} if name else {}
    entry["description"] = parser.description or parser.format_usage().strip()
    options = []
    for action in parser._actions:
        if isinstance(action, (argparse._HelpAction, argparse._VersionAction)):
            continue
        option = {
            "name": action.dest,
            "flag": max(action.option_strings, key=len) if action.option_strings else action.dest,
            "value": _value_kind(action),
            "required": bool(action.required),
            "shared": action.dest in shared,
            "help": action.help or "",
        }
        if action.choices:
            option["choices"] = list(action.choices)
        if action.default not in (None, False, argparse.SUPPRESS):
            option["default"] = action.default
        options.append(option)
    entry["arguments"] = options
    return entry


def _configure_logging(verbose=False, quiet=False):
    # The library only creates a NullHandler; the application decides where logs go.
    app_logger = logging.getLogger('fredholm_completion')
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    app_logger.setLevel(level)
    if not app_logger.handlers or isinstance(app_logger.handlers[0], logging.NullHandler):
        app_logger.handlers.clear()
        formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        app_logger.addHandler(console_handler)
        log_file = os.environ.get(LOG_FILE_ENV)
        if log_file:
            file_handler = logging.FileHandler(log_file)
            file_handler.setFormatter(formatter)
            app_logger.addHandler(file_handler)
    for handler in app_logger.handlers:
        handler.setLevel(level)


def _parse_sizes(text):
    try:
        return [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"sizes must be comma-separated integers, got {text!r}")


def _emit(text, out=None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        logger.info(f"Output written to: {out}")
    else:
        sys.stdout.write(text)


def main():
    epilog = """
Examples:
# Decide whether a Fredholm completion exists for a problem file
python -m fredholm_completion decide --problem shifts.json --target fredholm

# Build the completion and check it on finite sections
python -m fredholm_completion construct --problem shifts.json --target upper-weyl --out cert.json
python -m fredholm_completion verify --problem shifts.json --certificate cert.json --sizes 64,128,256

# Scan a grid for the essential-spectrum sandwich
python -m fredholm_completion spectra --problem shifts.json --corollary e2 \\
    --grid=-2:2:-2:2:1/4 --out spectra.csv
"""

    parser = argparse.ArgumentParser(
        description="fredholm-completion: decide, construct and verify Fredholm and Weyl completions "
                    "of partial upper triangular operator matrices.",
        epilog=epilog,
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}', help='Show the version and exit')

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--problem', type=str, required=True, help='Problem file (.json, .yaml or .yml)')
    common.add_argument('--lambda', dest='lam', type=str, default=None,
                        help='Spectral point as "re" or "re,im" (exact decimals or p/q); overrides the problem file')
    common.add_argument('--format', choices=['json', 'yaml'], default='json', dest='output_format',
                        help='Output format (default: json)')
    common.add_argument('--out', type=str, default=None, help='Output file path (default: stdout)')
    common.add_argument('--verbose', action='store_true', help='Log debug messages')
    common.add_argument('--quiet', action='store_true', help='Only log warnings and errors')

    target_choices = [t.value for t in Target]

    subparsers = parser.add_subparsers(dest='command', help='Available commands', required=False)

    classify_parser = subparsers.add_parser(
        'classify', parents=[common],
        help='Pointwise Fredholm data, classes and spectra of every diagonal',
        description='Print FredholmData, class memberships and spectrum flags of each D_s - lambda.'
    )

    decide_parser = subparsers.add_parser(
        'decide', parents=[common],
        help='Three-way existence verdict for a target class',
        description='Evaluate the sufficient and necessary conditions. Exit 0 = exists, 2 = not exists, '
                    '3 = indeterminate, 1 = error.'
    )
    decide_parser.add_argument('--target', choices=target_choices, default=None,
                               help='Target class (default: from the problem file)')

    construct_parser = subparsers.add_parser(
        'construct', parents=[common],
        help='Build a completion certificate',
        description='Construct the explicit completion A as a certificate of basis maps.'
    )
    construct_parser.add_argument('--target', choices=target_choices, default=None,
                                  help='Target class (default: from the problem file)')

    verify_parser = subparsers.add_parser(
        'verify', parents=[common],
        help='Check a certificate on finite sections',
        description='Compare predicted nullity, closedness and cokernel of a certificate with SVDs of '
                    'finite sections. Builds the certificate when none is given.'
    )
    verify_parser.add_argument('--certificate', type=str, default=None, help='Certificate file from construct')
    verify_parser.add_argument('--target', choices=target_choices, default=None,
                               help='Target used when no certificate is given')
    verify_parser.add_argument('--sizes', type=_parse_sizes, default=list(DEFAULT_SIZES),
                               help='Comma-separated section sizes, ascending (default: 64,128,256)')
    verify_parser.add_argument('--tol', type=float, default=DEFAULT_TOL,
                               help='Relative singular value threshold (default: 1e-10)')

    spectra_parser = subparsers.add_parser(
        'spectra', parents=[common],
        help='Scan a grid for a corollary sandwich and write CSV',
        description='Evaluate lower and upper sets of a corollary and the completion conditions at every '
                    'grid point. Writes CSV; the --format flag applies to the summary only.'
    )
    spectra_parser.add_argument('--corollary', choices=list(COROLLARIES), default=None,
                                help='Corollary id (default: from the problem file)')
    spectra_parser.add_argument('--grid', type=str, default=None,
                                help='Grid re0:re1:im0:im1:step (default: from the problem file)')
    spectra_parser.add_argument('--target', choices=target_choices, default=None,
                                help='Paired target; must match the corollary')
    spectra_parser.add_argument('--threads', type=int, default=None,
                                help='Worker threads (default: FREDHOLM_THREADS or CPU count)')
    spectra_parser.add_argument('--summary', action='store_true',
                                help='Print the band summary instead of CSV')

    describe_parser = subparsers.add_parser(
        'describe',
        help='Output machine-readable JSON description of CLI commands and options',
        description='Dump the full CLI surface as JSON for agent/tool integration.'
    )
    describe_parser.add_argument(
        'describe_command',
        nargs='?',
        default=None,
        help='Specific command to describe (default: all commands)'
    )

    _subparser_map = {
        'classify': classify_parser,
        'decide': decide_parser,
        'construct': construct_parser,
        'verify': verify_parser,
        'spectra': spectra_parser,
        'describe': describe_parser,
    }

    args = parser.parse_args()

    if not args.command:
        parser.print_help()
        return

    _configure_logging(getattr(args, 'verbose', False), getattr(args, 'quiet', False))

    # --- Command handler functions ---

    def point(problem):
        if args.lam is not None:
            return parse_complex([p.strip() for p in args.lam.split(",")] if "," in args.lam else args.lam)
        return problem.lam

    def target_of(problem):
        chosen = args.target or problem.target
        if chosen is None:
            raise ValueError("no --target given and none in the problem file")
        return Target.parse(chosen)

    def handle_classify(args):
        problem = load_problem(args.problem)
        lam = point(problem)
        rows = []
        for s, fd in enumerate(problem.point_data(lam), start=1):
            idx = index(fd)
            row = {
                "diagonal": s,
                "data": fd.to_json(),
                "deficiency": deficiency(fd).to_json(),
                "index": None if idx is None else idx.to_json(),
                "classes": classify(fd).to_json(),
                "spectra": spectra_flags(fd).to_json(),
            }
            if problem.has_models:
                row["operator"] = describe_model(problem.models[s - 1])
            rows.append(row)
        payload = {"lambda": None if lam is None else lam.to_json(), "diagonals": rows}
        _emit(format_output(payload, args.output_format), args.out)
        return EXIT_OK

    def handle_decide(args):
        problem = load_problem(args.problem)
        target = target_of(problem)
        data = problem.point_data(point(problem))
        outcome = decide(target, data)
        payload = decision_to_json(outcome, target, data)
        _emit(format_output(payload, args.output_format), args.out)
        logger.info(f"{target.value}: {outcome.verdict.value}")
        return {
            Verdict.EXISTS: EXIT_OK,
            Verdict.NOT_EXISTS: EXIT_NOT_EXISTS,
            Verdict.INDETERMINATE: EXIT_INDETERMINATE,
        }[outcome.verdict]

    def handle_construct(args):
        problem = load_problem(args.problem)
        models = problem.require_models('construct')
        lam = point(problem)
        if lam is None:
            raise ValueError("no --lambda given and none in the problem file")
        cert = construct(target_of(problem), models, lam)
        _emit(format_output(cert.to_json(), args.output_format), args.out)
        return EXIT_OK

    def handle_verify(args):
        problem = load_problem(args.problem)
        models = problem.require_models('verify')
        if args.certificate:
            cert = load_certificate(args.certificate)
            lam = point(problem) if args.lam is not None else None
        else:
            lam = point(problem)
            if lam is None:
                raise ValueError("no --lambda given and none in the problem file")
            cert = construct(target_of(problem), models, lam)
        report = verify_completion(models, cert, lam, sizes=args.sizes, tol=args.tol)
        _emit(format_output(report.to_json(), args.output_format), args.out)
        return EXIT_OK if report.passed else EXIT_ERROR

    def handle_spectra(args):
        problem = load_problem(args.problem)
        models = problem.require_models('spectra')
        corollary = parse_corollary(args.corollary or problem.corollary or "")
        grid_text = args.grid or problem.grid
        if not grid_text:
            raise ValueError("no --grid given and none in the problem file")
        target = args.target or PAIRED_TARGET[corollary]
        reports = sandwich_report(corollary, models, parse_grid(grid_text), target=target,
                                  workers=args.threads)
        summary = sandwich_summary(reports)
        logger.info(f"{corollary}: {summary}")
        if args.summary:
            _emit(format_output(summary, args.output_format), args.out)
        elif args.out:
            write_csv(reports, args.out, __version__)
            logger.info(f"CSV written to: {args.out}")
        else:
            write_csv(reports, sys.stdout, __version__)
        return EXIT_OK

    def handle_describe(args):
        shared = frozenset(a.dest for a in common._actions)
        target_cmd = args.describe_command
        if target_cmd:
            if target_cmd not in _subparser_map:
                print(f"Unknown command: {target_cmd}", file=sys.stderr)
                print(f"Available commands: {', '.join(sorted(_subparser_map.keys()))}", file=sys.stderr)
                return EXIT_ERROR
            schema = _describe_parser(_subparser_map[target_cmd], name=target_cmd, shared=shared)
        else:
            schema = {
                "tool": "fredholm-completion",
                "version": __version__,
                "description": parser.description,
                "exit_codes": {"0": "ok / exists", "1": "error", "2": "not exists", "3": "indeterminate"},
                "commands": {
                    name: _describe_parser(sub_parser, name=name, shared=shared)
                    for name, sub_parser in _subparser_map.items()
                }
            }
        print(format_json(schema))
        return EXIT_OK

    # --- Command dispatch ---
    command_handlers = {
        'classify': handle_classify,
        'decide': handle_decide,
        'construct': handle_construct,
        'verify': handle_verify,
        'spectra': handle_spectra,
        'describe': handle_describe,
    }

    handler = command_handlers.get(args.command)
    try:
        code = handler(args)
    except (FredholmError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        code = EXIT_ERROR
    if code:
        raise SystemExit(code)


if __name__ == "__main__":
    main()
