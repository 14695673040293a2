"""
Running studies from the command line
=====================================

The ``fracstep`` command wraps the same studies and writes report files.
This script drives it in-process and shows what lands on disk.
"""

import tempfile
from pathlib import Path

from fracstep.cli import main

out = Path(tempfile.mkdtemp())
main(["study-time", "--problem", "ex1-smooth", "--alpha", "0.3", "--Kx", "2000",
      "--Kt", "10,20,40", "--out", str(out), "--run-name", "smooth"])
main(["census", "--Kt", "50", "--alpha", "0.5", "--r", "4", "--levels", "10,20,30,40,50",
      "--out", str(out), "--run-name", "census"])

# %%
# Config files hold key = value pairs; flags given on the command line win.
cfg = out / "space.cfg"
cfg.write_text("problem = ex2-singular\nalpha = 0.4\nKt = 200\nKx = 10,20,40\n")
main(["study-space", "--config", str(cfg), "--alpha", "0.6", "--out", str(out), "--run-name", "space"])

for path in sorted(out.rglob("report.csv")):
    print(f"\n{path.relative_to(out)}:")
    print(path.read_text(), end="")
