#!/usr/bin/env python3
"""
Utility script to run the command-line interface.
"""

import sys

from dotenv import load_dotenv

# Load environment variables (SUBMOD_SEED, SUBMOD_MODE, ...)
load_dotenv()

if __name__ == "__main__":
    from src.main import main

    sys.exit(main())
