#!/usr/bin/env python
"""Full oracle-equivalence verification pass (moments, bijection, covariances).

Equivalent to: shadowlab verify-moments
"""

import sys

from shadowlab.cli import main

if __name__ == "__main__":
    sys.exit(main(["verify-moments", "--seed", "20260825"]))
