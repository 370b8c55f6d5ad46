#!/usr/bin/env python3
# Copyright 2026 The Forge Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

# Explorer agent: pipelines the first loop of each non-top function in turn,
# then says done. argv: <seed> [log file]. Every received message is appended
# to the log so tests can inspect the protocol.
import json, sys

seed = sys.argv[1]
log = open(sys.argv[2], "a") if len(sys.argv) > 2 else None
targets = None
for line in sys.stdin:
    msg = json.loads(line)
    if log:
        log.write(json.dumps({"seed": seed, "keys": sorted(msg), "metrics": msg["metrics"],
                              "budget": msg["budget"], "history": len(msg["history"])}) + "\n")
        log.flush()
    d = msg["design"]
    if targets is None:
        targets = []
        for f in d["functions"]:
            if f["name"] == d["top"]:
                continue
            loops = [s["id"] for s in f["body"] if s["kind"] == "Loop"]
            if loops:
                targets.append((f["name"], loops[0]))
    if not targets:
        print(json.dumps({"done": True}), flush=True)
        continue
    fn, loop = targets.pop(0)
    print(json.dumps({"transforms": [{"transform": "ApplyPragmas", "target_function": fn, "replace": False,
                                      "config": {"loops": {loop: {"pipeline_ii": 1}}, "arrays": {}, "calls": {}}}]}),
          flush=True)
