#!/usr/bin/env python3
# Copyright 2026 The CloudSVM Authors. All Rights Reserved.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#     http://www.apache.org/licenses/LICENSE-2.0
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Convert the UCI German/Heart/Ionosphere/Satellite files to libsvm format.

The raw files are taken from the KEEL copies shipped in the `keel-ds` wheel
(pip download --no-deps keel-ds). Usage:

    python3 scripts/prepare_uci.py <dir containing german.dat ...> data/
"""
import argparse
import collections
import pathlib
import sys


def read_keel(path):
    rows = []
    for line in path.read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        rows.append([tok.strip() for tok in line.split(",")])
    return rows


def fmt(value):
    value = float(value)
    if value.is_integer():
        return str(int(value))
    return repr(value)


def libsvm_line(label, features):
    parts = ["+1" if label > 0 else "-1"]
    for index, value in features:
        if float(value) != 0.0:
            parts.append(f"{index}:{fmt(value)}")
    return " ".join(parts)


def code(token, prefix):
    # "A43" with prefix "A4" -> 3, "A410" -> 10
    return int(token[len(prefix):])


def german(rows):
    out = []
    for r in rows:
        (checking, duration, history, purpose, amount, savings, employment,
         installment, personal, debtors, residence, prop, age, plans,
         housing, credits, job, liable, phone, foreign) = r[:20]
        cols = [
            code(checking, "A1"), float(duration), code(history, "A3"),
            code(purpose, "A4"), float(amount), code(savings, "A6"),
            code(employment, "A7"), float(installment), code(personal, "A9"),
            code(debtors, "A10"), float(residence), code(prop, "A12"),
            float(age), code(plans, "A14"), code(housing, "A15"),
            float(credits), code(job, "A17"), float(liable),
            code(phone, "A19") - 1, 2 - code(foreign, "A20"),
            1 if purpose == "A40" else 0, 1 if purpose == "A41" else 0,
            1 if purpose == "A43" else 0, 1 if checking == "A14" else 0,
        ]
        label = 1 if r[20] == "1" else -1
        out.append(libsvm_line(label, enumerate(cols, start=1)))
    return out


def heart(rows):
    return [libsvm_line(1 if r[13] == "2" else -1,
                        enumerate(r[:13], start=1)) for r in rows]


def ionosphere(rows):
    # The KEEL copy drops UCI attribute 2, which is identically zero.
    out = []
    for r in rows:
        indices = [1] + list(range(3, 35))
        out.append(libsvm_line(1 if r[33] == "g" else -1,
                               zip(indices, r[:33])))
    return out


def satellite(rows):
    rows = rows[:4435]
    majority = collections.Counter(r[36] for r in rows).most_common(1)[0][0]
    print(f"satellite: positive class = {majority}", file=sys.stderr)
    return [libsvm_line(1 if r[36] == majority else -1,
                        enumerate(r[:36], start=1)) for r in rows]


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("raw_dir", type=pathlib.Path)
    parser.add_argument("out_dir", type=pathlib.Path)
    args = parser.parse_args()
    jobs = {"german": ("german.dat", german), "heart": ("heart.dat", heart),
            "ionosphere": ("ionosphere.dat", ionosphere),
            "satellite": ("satimage.dat", satellite)}
    args.out_dir.mkdir(parents=True, exist_ok=True)
    for name, (raw, convert) in jobs.items():
        lines = convert(read_keel(args.raw_dir / raw))
        (args.out_dir / f"{name}.libsvm").write_text("\n".join(lines) + "\n")
        print(f"{name}: {len(lines)} samples", file=sys.stderr)


if __name__ == "__main__":
    main()
