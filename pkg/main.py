#!/usr/bin/env python3
"""
Sign Correlation Lab entry point

    python main.py predict --method theorem2 --ratio 1/5
    python main.py estimate --family hermite --x 0.3 --y 1.5 --n 1000000
"""

import sys

from signcorr.cli import main

if __name__ == "__main__":
    sys.exit(main())
