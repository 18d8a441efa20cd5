"""Module entry point: python -m cantorjump."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
