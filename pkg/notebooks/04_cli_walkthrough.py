# %% [markdown]
# # Command-line walkthrough
#
# The four subcommands run in sequence on a small synthetic dataset. Each call
# is equivalent to `qloss <command> ...` in a shell.

# %%
import csv
import json
import tempfile
from pathlib import Path

from qloss.cli import main

work = Path(tempfile.mkdtemp(prefix="qloss-demo-"))
cfg = work / "run.yaml"
cfg.write_text(
    "simulate:\n"
    "  scenario: tin-like\n"
    "  t_baths: [0.04, 0.2, 0.4, 0.6, 0.8, 1.0]\n"
    "fit:\n"
    "  seed: 0\n"
)

# %%
for argv in (
    ["simulate", "--seed", "7"],
    ["extract", "--jobs", "4"],
    ["fit"],
    ["plotdata"],
):
    rc = main(argv + ["--config", str(cfg), "--out", str(work)])
    print(" ".join(argv), "->", rc)

# %%
bundle = json.loads((work / "bundle.json").read_text())
print("pooled Q_c:", round(bundle["resonator"]["q_c0"]))
print("model TLS:", bundle["model_fit"]["tls"], "R^2:", round(bundle["model_fit"]["goodness_r2"], 5))
print("provenance:", bundle["provenance"])

# %%
with open(work / "panel_f_tqp.csv", newline="") as fh:
    rows = list(csv.DictReader(fh))
print(rows[0], rows[-1], sep="\n")
print(sorted(p.name for p in work.iterdir()))
