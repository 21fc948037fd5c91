"""Command-line interface for the Delannoy category toolkit.

Usage:
    python scripts/cli.py homdim --n 2 --m 2
    python scripts/cli.py decompose --object "C(R^2)" [--format table]
    python scripts/cli.py decompose --label ab
    python scripts/cli.py restrict --label ab
    python scripts/cli.py tensor --left a --right b
    python scripts/cli.py eidem --n 3
    python scripts/cli.py subalgebras --n 3
    python scripts/cli.py etale-check --builtin schwartz:2 | subetale
    python scripts/cli.py resideals --n 2
    python scripts/cli.py registry --build 4
    python scripts/cli.py verify --suite fast [--max-n 2] [--threads 4]

Labels are words over a/b: the letter ``a`` stands for a filled (•) node and
``b`` for a hollow (○) one. Which letter is which depends on the tie-break
used when a restriction cut is matched, so only the word structure (length,
letter swap for duals) is convention independent.

Results go to stdout as JSON with sorted keys (the stable contract) or as
markdown tables; logging goes to stderr. Exit codes: 0 success, 1 failed
check, 2 usage error, 3 resource cap exceeded.
"""

import argparse
import json
import logging
import sys
import time
from pathlib import Path

# Ensure project root is in the Python path
sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

import pandas as pd

from delannoy.config import settings
from delannoy.errors import (
    CounterexampleError,
    DelannoyError,
    InvalidInputError,
    LabelingError,
    PreconditionError,
    ResourceCapError,
)
from delannoy.schemas import DecompositionReport, HomDimReport, TensorReport
from delannoy.services import acceptance, algcls
from delannoy.services.karoubi import (
    SimpleLabel,
    decompose,
    karoubi_object,
    length_bounds,
    tensor_decompose,
    verify_restriction_rule,
)
from delannoy.services.ordcomb import GSet, delannoy_number, transitive
from delannoy.services.permcat import hom_dim
from delannoy.services.registry import get_registry
from delannoy.services.scalars import domain_name, get_domain

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_CAP = 3


# ---------------------------------------------------------------------------
# Verbs


def _homdim(args, K):
    X, Y = transitive(args.n), transitive(args.m)
    report = HomDimReport(
        n=args.n, m=args.m, dimension=hom_dim(X, Y), delannoy=delannoy_number(args.n, args.m)
    )
    return report, report.dimension == report.delannoy


def _decompose(args, K):
    if args.label is not None:
        label = SimpleLabel.parse(args.label)
        registry = get_registry(label.length, args.registry, K)
        M = registry.simple(label)
        name = f"L_{label}"
    else:
        M = karoubi_object(GSet.parse(args.object), K=K)
        registry = get_registry(max(length_bounds(M), default=0), args.registry, K)
        name = str(M)
    table = decompose(M, registry).multiplicities()
    report = DecompositionReport(object=name, s=M.s, multiplicities=table, total=sum(table.values()))
    return report, True


def _restrict(args, K):
    label = SimpleLabel.parse(args.label)
    report = verify_restriction_rule(label, get_registry(label.length, args.registry, K))
    return report, report.passed


def _tensor(args, K):
    left, right = SimpleLabel.parse(args.left), SimpleLabel.parse(args.right)
    registry = get_registry(left.length + right.length, args.registry, K)
    report = TensorReport(
        left=str(left), right=str(right), multiplicities=tensor_decompose(left, right, registry)
    )
    return report, True


def _eidem(args, K):
    report = algcls.e_idempotent_report(args.n, K)
    return report, report.bijection


def _subalgebras(args, K):
    return algcls.subalgebra_report(args.n, K), True


def _etale_check(args, K):
    builtin = args.builtin.strip()
    if builtin == "subetale":
        A = algcls.subetale_example(get_registry(1, args.registry, K))
    elif builtin.startswith("schwartz:"):
        try:
            n = int(builtin.split(":", 1)[1])
        except ValueError:
            raise InvalidInputError(f"Invalid arm length in '{builtin}'")
        A = algcls.schwartz_algebra(transitive(n), K)
    else:
        raise InvalidInputError(f"Unknown builtin algebra '{builtin}'")
    # a negative verdict is a result, not a failure
    return algcls.etale_report(A), True


def _resideals(args, K):
    # before the registry build, so an out-of-range n is rejected at once
    algcls.require_restriction_range(args.n)
    registry = get_registry(args.n, args.registry, K)
    return algcls.restriction_ideals(args.n, registry), True


def _registry(args, K):
    path = args.registry or settings.REGISTRY_PATH
    return get_registry(args.build, path, K).report(path), True


def _verify(args, K):
    report = acceptance.run_suite(
        args.suite, args.max_n, registry_path=args.registry, threads=args.threads, K=K
    )
    if not report.complete:
        logger.warning("Suite left out capped work: %s", "; ".join(report.capped))
    return report, report.passed


VERBS = {
    "homdim": _homdim,
    "decompose": _decompose,
    "restrict": _restrict,
    "tensor": _tensor,
    "eidem": _eidem,
    "subalgebras": _subalgebras,
    "etale-check": _etale_check,
    "resideals": _resideals,
    "registry": _registry,
    "verify": _verify,
}


# ---------------------------------------------------------------------------
# Output


def render_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2)


def render_table(payload: dict) -> str:
    """Markdown rendering: scalar fields first, then one table per mapping or list."""
    scalars = {k: v for k, v in sorted(payload.items()) if not isinstance(v, (dict, list))}
    blocks = []
    if scalars:
        frame = pd.DataFrame({"field": list(scalars), "value": [str(v) for v in scalars.values()]})
        blocks.append(frame.to_markdown(index=False))
    for key, value in sorted(payload.items()):
        if isinstance(value, dict):
            frame = pd.DataFrame(
                {"key": list(value), "value": [_cell(v) for v in value.values()]}
            )
        elif isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            frame = pd.DataFrame([{k: _cell(v) for k, v in row.items()} for row in value])
        elif isinstance(value, list):
            frame = pd.DataFrame({key: [_cell(v) for v in value]})
        else:
            continue
        blocks.append(f"**{key}**\n\n" + frame.to_markdown(index=False))
    return "\n\n".join(blocks)


def _cell(value) -> str:
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True, ensure_ascii=False)
    return str(value)


# ---------------------------------------------------------------------------
# Entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Exact computations in the Delannoy category"
    )
    parser.add_argument(
        "--format",
        choices=("json", "table"),
        default="json",
        help="Output format (default: json)",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="Worker threads (default: THREADS env var or 1)",
    )
    parser.add_argument(
        "--registry",
        type=str,
        default=None,
        help="Registry cache file (default: REGISTRY_PATH env var)",
    )
    parser.add_argument(
        "--field",
        type=str,
        default=None,
        help="Scalar field, QQ or GF(p) (default: SCALAR_FIELD env var)",
    )
    verbs = parser.add_subparsers(dest="verb", required=True)

    homdim = verbs.add_parser("homdim", help="Dimension of Hom(C(R^n), C(R^m))")
    homdim.add_argument("--n", type=int, required=True)
    homdim.add_argument("--m", type=int, required=True)

    dec = verbs.add_parser("decompose", help="Multiplicity table of an object")
    target = dec.add_mutually_exclusive_group(required=True)
    target.add_argument("--object", type=str, help='A Schwartz space such as "C(R^2)"')
    target.add_argument("--label", type=str, help="A simple object given by its word")

    res = verbs.add_parser("restrict", help="Check the restriction rule for a simple")
    res.add_argument("--label", type=str, required=True)

    ten = verbs.add_parser("tensor", help="Decompose a tensor product of two simples")
    ten.add_argument("--left", type=str, required=True)
    ten.add_argument("--right", type=str, required=True)

    eidem = verbs.add_parser("eidem", help="E-idempotents of C(R^n)")
    eidem.add_argument("--n", type=int, required=True)

    subs = verbs.add_parser("subalgebras", help="Etale subalgebras of C(R^n)")
    subs.add_argument("--n", type=int, required=True)

    etale = verbs.add_parser("etale-check", help="Trace-form test of a builtin algebra")
    etale.add_argument("--builtin", type=str, required=True, help="schwartz:N or subetale")

    resid = verbs.add_parser("resideals", help="Ideals of the restricted Schwartz algebra")
    resid.add_argument("--n", type=int, required=True)

    reg = verbs.add_parser("registry", help="Build and cache the simple-object registry")
    reg.add_argument("--build", type=int, default=settings.REGISTRY_DEPTH)

    ver = verbs.add_parser("verify", help="Run the acceptance suite")
    ver.add_argument("--suite", choices=sorted(acceptance.SUITES), default="fast")
    ver.add_argument("--max-n", type=int, default=None)
    return parser


def main(args=None):
    """Main entry point for the command-line interface.

    Args:
        args: Command-line arguments (defaults to sys.argv if None).

    Returns:
        Exit code (0 success, 1 failed check, 2 usage error, 3 resource cap).
    """
    parser = build_parser()
    try:
        parsed_args = parser.parse_args(args)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE

    try:
        K = get_domain(parsed_args.field)
        logger.info("Running %s over %s", parsed_args.verb, domain_name(K))
        start_time = time.time()
        report, passed = VERBS[parsed_args.verb](parsed_args, K)
        elapsed = time.time() - start_time
        logger.info("%s finished in %.2f seconds", parsed_args.verb, elapsed)
    except ResourceCapError as e:
        logger.error("Resource cap exceeded: %s", e)
        return EXIT_CAP
    except (InvalidInputError, PreconditionError, ValueError) as e:
        logger.error("Invalid input: %s", e)
        return EXIT_USAGE
    except (CounterexampleError, LabelingError) as e:
        logger.error("Check failed: %s", e)
        return EXIT_FAILED
    except DelannoyError as e:
        logger.error("Unexpected error: %s", e)
        return EXIT_FAILED

    payload = report.model_dump(mode="json")
    output = render_json(payload) if parsed_args.format == "json" else render_table(payload)
    sys.stdout.write(output + "\n")
    if not passed:
        logger.warning("%s reported a failed check", parsed_args.verb)
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
