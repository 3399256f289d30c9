#!/usr/bin/env python3
# Copyright 2026 The hgp Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Re-derives every golden summary and fails if any committed file drifted."""
import json
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))
from groups_oracle import summarize  # noqa: E402

CASES = [
    ("confusables", "tests/data/unicode/confusables.txt", "confusables_full.json",
     ["0037", "0030", "0031", "0078", "0038", "0036"]),
    ("confusables", "tests/data/confusables_excerpt.txt", "confusables_excerpt.json",
     ["0037", "0030", "0031", "0078", "0038", "0036"]),
    ("group_lines", "tests/data/groups_merging.txt", "groups_merging.json",
     ["0037", "0078", "0038", "0036"]),
    ("group_lines", "data/homoglyphs/digits_and_letters.txt", "digits_and_letters.json",
     ["0030", "0031", "0036", "0037", "0038", "0078"]),
]

root = sys.argv[1]
failed = 0
for fmt, rel, golden, probes in CASES:
    with open(os.path.join(root, rel), encoding="utf-8") as f:
        got = summarize(fmt, f.read(), probes)
    with open(os.path.join(root, "tests/data/golden", golden), encoding="utf-8") as f:
        want = json.load(f)
    status = "ok" if got == want else "MISMATCH"
    failed += got != want
    print(f"{status:8} {golden}")
sys.exit(1 if failed else 0)
