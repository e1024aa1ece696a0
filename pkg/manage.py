#!/usr/bin/env python
"""Command-line entry point for the leelbm tools."""
import sys


def main() -> int:
    """Run the leelbm command group."""
    try:
        from leelbm.cli import main as cli_main
    except ImportError as exc:
        raise ImportError(
            "Couldn't import leelbm. Are numpy, numba and click installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    return cli_main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
