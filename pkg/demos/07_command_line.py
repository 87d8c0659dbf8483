"""The command-line front end.

Every capability is also exposed as a `wellescape` subcommand writing
deterministic CSV/JSON data files plus a JSON metadata sidecar.  This demo
drives the CLI in-process and prints the artifacts it produces.
"""

import json
import pathlib
import tempfile

from wellescape.cli import main

tmp = pathlib.Path(tempfile.mkdtemp(prefix="wellescape_demo_"))

# The critical forcing at the standard reference parameters.
out = tmp / "fhat.csv"
rc = main(["critical-forcing", "--omega", "0.89", "--xi-max", "0.1657",
           "--output", str(out)])
print(f"critical-forcing exit code {rc}")
print(out.read_text(), end="")

# Boundary curves above the saddle connection (kind I: upper/lower branch).
out = tmp / "boundary.csv"
main(["boundary", "--f", "0.016", "--omega", "0.89", "--xi-max", "0.1657",
      "--theta-count", "90", "--output", str(out)])
kinds = {line.rsplit(",", 1)[1] for line in out.read_text().splitlines()[1:]}
print(f"boundary branch kinds: {sorted(kinds)}")

# A small basin raster: text lines of 0/1 cells, metadata in the sidecar.
out = tmp / "basin.txt"
main(["simulate-basin", "--f", "0.012", "--omega", "0.89",
      "--nx", "40", "--ny", "12", "--t-max-periods", "20",
      "--output", str(out)])
print("basin raster (12x40, # = safe):")
for line in out.read_text().splitlines():
    print("  " + line.replace("1", "#").replace("0", "."))
meta = json.loads((tmp / "basin.txt.meta.json").read_text())
print(f"sidecar: command={meta['command']}, safe_cells={meta['safe_cells']}")
print(f"artifacts in {tmp}")
