"""
The command-line pipeline
=========================

``mqgm synth``, ``fit``, ``sample`` and ``eval`` chain through files in
a working directory. The same calls are available from Python through
``mqgm.cli.main``, which returns the process exit code.
"""

import json
import os
import tempfile

from mqgm.cli import main

work = tempfile.mkdtemp(prefix="mqgm-demo-")
run = lambda *argv: main([str(a) for a in argv])
path = lambda name: os.path.join(work, name)

assert run("synth", "ring", "--n", 300, "--seed", 7, "--out", work) == 0
assert run("fit", "--data", path("data.csv"), "--out", path("model.json"), "--m", 8, "--r", 15,
           "--diagnostics", path("diagnostics.json")) == 0
assert run("sample", "--model", path("model.json"), "--out", path("samples.csv"), "--n", 500,
           "--burn-in", 100, "--thin", 5, "--seed", 3) == 0
assert run("eval", "auc", "--model", path("model.json"), "--truth", path("truth.json"),
           "--out", path("auc.json")) == 0

with open(path("diagnostics.json")) as fh:
    diag = json.load(fh)
print("edges:", diag["edges"])
print("converged:", [f["converged"] for f in diag["fits"]])
with open(path("auc.json")) as fh:
    print("AUC of the fitted strengths:", round(json.load(fh)["methods"]["mqgm"]["auc"], 3))

# Usage errors exit with status 2 and a message on stderr.
print("exit code for an odd autoregressive dimension:",
      run("synth", "autoregressive", "--d", 5, "--out", work))
print("outputs in", work)
