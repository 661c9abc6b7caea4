"""Serve a model spec over the line-delimited JSON subprocess protocol.

Counterpart of blackbox.ExternalProcessModel: reads one JSON document per
stdin line, answers one per stdout line.  The schema arrives in the handshake,
so a spec file is enough to wrap any builtin model as an external process
(`surrobench model-serve --model spec.json`), which is also how the protocol
round-trip is tested.
"""

from __future__ import annotations

import json
import sys

from . import blackbox
from .config import canonical_dumps
from .errors import WorkbenchError


def serve(spec: dict, stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    model = None

    def reply(doc):
        stdout.write(canonical_dumps(doc) + "\n")
        stdout.flush()

    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            message = json.loads(line)
        except json.JSONDecodeError:
            reply({"error": "invalid JSON"})
            continue
        op = message.get("op")
        if op == "handshake":
            try:
                schema = blackbox.schema_from_wire(message["schema"])
                declared = message.get("classes", [])
                if list(spec.get("classes", declared)) != list(declared):
                    reply({"error": "class list disagreement"})
                    continue
                model = blackbox.from_spec(spec, schema)
                reply({"ok": True})
            except (WorkbenchError, KeyError, TypeError, ValueError) as exc:
                reply({"error": str(exc)})
        elif op == "predict":
            if model is None:
                reply({"error": "predict before handshake"})
                continue
            try:
                rows = blackbox.rows_from_wire(model.schema, message["rows"])
                proba = model.predict_proba(rows)
                reply({"probabilities": [list(map(float, row)) for row in proba]})
            except (WorkbenchError, KeyError, TypeError, ValueError) as exc:
                reply({"error": str(exc)})
        elif op == "shutdown":
            return 0
        else:
            reply({"error": f"unknown op {op!r}"})
    return 0
