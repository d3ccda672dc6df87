#!/usr/bin/env python
"""Joint-measurement sweep at the headline operating point, with CSV output.

Equivalent to: shadowlab jm --d 8 --B 4 --eps 0.2 --delta 0.05 --trials 500
"""

import sys

from shadowlab.cli import main

if __name__ == "__main__":
    sys.exit(
        main(
            [
                "jm",
                "--d", "8",
                "--B", "4",
                "--eps", "0.2",
                "--delta", "0.05",
                "--trials", "500",
                "--seed", "20260825",
                "--out", "jm_sweep.csv",
            ]
        )
    )
