#!/usr/bin/env python
"""Command-line utility for S-transform tail computations."""
import os
import sys


def main():
    """Run a freemult command."""
    os.environ.setdefault('FREEMULT_LOG_LEVEL', 'WARNING')
    try:
        from freemult.cli import main as run
    except ImportError as exc:
        raise ImportError(
            "Couldn't import numpy or scipy. Are they installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    sys.exit(run(sys.argv[1:]))


if __name__ == '__main__':
    main()
