#!/usr/bin/env python
"""Run the lab commands and test suites from a source checkout."""
import sys

from dslab.__main__ import main

if __name__ == "__main__":
    main(sys.argv)
