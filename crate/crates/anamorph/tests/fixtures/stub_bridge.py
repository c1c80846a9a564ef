#!/usr/bin/env python3
"""Echo detector bridge for tests: answers every detect request with an empty result.

Options exercise the client's failure handling:
  --no-ready           exit without answering the hello
  --hang-once FILE     ignore the first detect request seen while FILE does not exist
  --stray              send a result for another image id before each real answer
  --error              answer every detect with an error frame
"""

import json
import os
import sys
import time


def send(obj):
    sys.stdout.write(json.dumps(obj, separators=(",", ":")) + "\n")
    sys.stdout.flush()


def main(argv):
    hang_file = None
    if "--hang-once" in argv:
        hang_file = argv[argv.index("--hang-once") + 1]
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        try:
            frame = json.loads(line)
        except ValueError:
            send({"type": "error", "image_id": "", "message": "malformed frame"})
            continue
        kind = frame.get("type")
        if kind == "hello":
            if "--no-ready" in argv:
                return 1
            send({"type": "ready", "model": "stub"})
        elif kind == "detect":
            image_id = frame.get("image_id", "")
            if hang_file and not os.path.exists(hang_file):
                open(hang_file, "w").close()
                time.sleep(60)
                continue
            if "--error" in argv:
                send({"type": "error", "image_id": image_id, "message": "stub error"})
                continue
            if "--stray" in argv:
                send({"type": "result", "image_id": image_id + "-stale", "detections": []})
            send({"type": "result", "image_id": image_id, "detections": []})
        else:
            send({"type": "error", "image_id": frame.get("image_id", ""), "message": "unknown frame type"})
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
