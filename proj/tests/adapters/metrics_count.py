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

# Reports the number of Compute statements as latency and loops as area.
import json, sys

d = json.loads(sys.stdin.readline())
counts = {"Compute": 0, "Loop": 0}

def walk(block):
    for s in block:
        counts[s["kind"]] = counts.get(s["kind"], 0) + 1
        walk(s.get("body", []))
        for b in s.get("branches", []):
            walk(b)

for f in d["functions"]:
    walk(f["body"])
print(json.dumps({"latency": counts["Compute"], "area": counts["Loop"]}))
