#!/usr/bin/env python3
"""Protocol fixture: answers every predict with uniform probabilities.

Deliberately standalone (no surrobench import) so it exercises the wire
protocol from the outside.
"""

import json
import sys


def main():
    n_classes = None
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        message = json.loads(line)
        op = message.get("op")
        if op == "handshake":
            n_classes = len(message["classes"])
            reply = {"ok": True}
        elif op == "predict":
            uniform = [1.0 / n_classes] * n_classes
            reply = {"probabilities": [uniform for _ in message["rows"]]}
        elif op == "shutdown":
            return 0
        else:
            reply = {"error": f"unknown op {op!r}"}
        sys.stdout.write(json.dumps(reply) + "\n")
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
