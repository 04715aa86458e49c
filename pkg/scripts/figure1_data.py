"""Write DE(a, b) density curves to CSV (plot data for the density figure).

Accepts the same flags as ``gfaccess figure1``:

    python scripts/figure1_data.py --grid -10:10:0.05 --out figure1.csv
    python scripts/figure1_data.py --a 1 --b 4
"""

import sys

from gfaccess import cli

if __name__ == "__main__":
    sys.exit(cli.main(["figure1", *sys.argv[1:]]))
