#!/usr/bin/env python3
# Misbehaves in exactly one way, chosen by --fault:
#   bad_dim     reset returns a 3-dim observation for a declared 4-dim env
#   bad_action  (agent) chooseAction answers 7
#   timeout     step never answers
#   garbage     reset answers with a non-JSON line
#   version     hello_ok claims protocol 2
#   early_exit  exits on the Nth step (--after, default 1)
import argparse
import os
import sys
import time

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
from plugin_io import handshake, requests, send  # noqa: E402

p = argparse.ArgumentParser()
p.add_argument("--fault", required=True,
               choices=["bad_dim", "bad_action", "timeout", "garbage", "version", "early_exit"])
p.add_argument("--after", type=int, default=1)
args = p.parse_args()

ENV = {"id": "Faulty-v0", "obsKind": {"type": "continuous", "dim": 4}, "actionCount": 2,
       "maxEpisodeSteps": 200, "partiallyObservable": False, "renderSchema": "raw"}
AGENT = {"id": "faulty-agent", "supportedObsKinds": ["discrete", "continuous"]}

handshake(AGENT if args.fault == "bad_action" else ENV, protocol=2 if args.fault == "version" else 1)
steps = 0
for req in requests():
    kind = req["type"]
    if kind == "reset":
        if args.fault == "garbage":
            sys.stdout.write("this is not json\n")
            sys.stdout.flush()
            continue
        dim = 3 if args.fault == "bad_dim" else 4
        steps = 0
        send({"type": "obs", "observation": [0.0] * dim, "reward": 0, "done": False})
    elif kind == "step":
        steps += 1
        if args.fault == "timeout":
            time.sleep(60)
        if args.fault == "early_exit" and steps >= args.after:
            sys.exit(3)
        send({"type": "obs", "observation": [0.01 * steps] * 4, "reward": 1.0, "done": steps >= 200})
    elif kind == "render":
        send({"type": "frame", "frame": {"steps": steps}})
    elif kind == "chooseAction":
        send({"type": "action", "action": 7})
    elif kind == "observe":
        send({"type": "ok"})
    elif kind == "update":
        send({"type": "updated"})
    elif kind == "save":
        send({"type": "saved", "blob": ""})
    elif kind == "load":
        send({"type": "ok"})
    else:
        send({"type": "error", "message": "unknown request " + kind})
