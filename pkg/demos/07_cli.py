"""Driving the package from the command line.

Equivalent shell session::

    cartansplit constants --config run.json
    cartansplit split --config run.json
    cartansplit table --trace out/trace.csv
    cartansplit verify --suite holo
"""
import json
import os
import tempfile

from cartansplit.cli import main

with tempfile.TemporaryDirectory() as tmp:
    cfg = os.path.join(tmp, "run.json")
    out = os.path.join(tmp, "out")
    with open(cfg, "w") as fh:
        json.dump({"domain": {"kind": "ellipse", "a": 2.0, "b": 1.0}, "strip": [-0.3, 0.3],
                   "map": {"zeta0": [[0, 0], [0, 0], [1e-4, 0], [-3e-5, 0]]}, "output_dir": out}, fh)
    print("$ cartansplit split --config run.json")
    main(["split", "--config", cfg])
    print("$ cartansplit table --trace out/trace.csv")
    main(["table", "--trace", os.path.join(out, "trace.csv")])
    print("$ cartansplit verify --suite holo")
    main(["verify", "--suite", "holo"])
    with open(cfg, "w") as fh:
        json.dump({"strip": [0.3, -0.3], "output_dir": out}, fh)
    print("$ cartansplit split --config bad.json")
    print("exit status", main(["split", "--config", cfg]))
