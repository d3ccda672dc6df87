#!/usr/bin/env python
"""Boolean-Hidden-Matching protocol runs at the default operating point.

Equivalent to: shadowlab bhm --n 16 --alpha 0.25 --delta 0.05 --runs 400
"""

import sys

from shadowlab.cli import main

if __name__ == "__main__":
    sys.exit(
        main(
            [
                "bhm",
                "--n", "16",
                "--alpha", "0.25",
                "--delta", "0.05",
                "--runs", "400",
                "--seed", "20260825",
                "--out", "bhm_runs.csv",
            ]
        )
    )
