#!/usr/bin/env python3
"""
ASMa - asymmetric spatio-temporal masking for skeleton action representations
Pretrain, probe, fine-tune and distill skeleton encoders from the command line
"""
import sys
import traceback

from src.cli import build_parser, dispatch
from src.errors import AsmaError
from src.utils import setup_logging


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    try:
        return dispatch(args)
    except AsmaError as e:
        print(f"Error: {e}", file=sys.stderr)
        if args.verbose:
            traceback.print_exc()
        return e.exit_code
    except KeyboardInterrupt:
        print("\nShutdown requested", file=sys.stderr)
        return 1


if __name__ == '__main__':
    sys.exit(main())
