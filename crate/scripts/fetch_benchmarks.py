#!/usr/bin/env python3
"""Fetch the EPFL random/control desk-scale circuits and convert them to AIGER.

The circuits are taken from the gate-level netlists shipped in the MIT-licensed
`circuitgraph` wheel (pinned by version and sha256). Each netlist only uses
and/or/nand/nor/not gates plus constant and alias assigns, so it maps onto an
AIG directly. Output is binary AIGER (`<name>.aig`) plus `SHA256SUMS`.

    python3 scripts/fetch_benchmarks.py [--out benchmarks/epfl] [--wheel PATH]
"""

import argparse
import hashlib
import io
import os
import re
import subprocess
import sys
import tempfile
import zipfile

WHEEL_NAME = "circuitgraph-0.2.1-py3-none-any.whl"
WHEEL_SHA256 = "074612bd25a989b678818cff6ba52dc02c5951ef123fdb3fa09edb59af79c040"

# output name -> netlist file inside the wheel
CIRCUITS = {
    "ctrl": "ctrl.v",
    "dec": "dec.v",
    "int2float": "int2float.v",
    "router": "router.v",
    "cavlc": "cavlc.v",
    "priority": "priority_ckt.v",
    "i2c": "i2c.v",
}

GATES = {"and", "or", "nand", "nor", "not", "buf"}


def sha256(data):
    return hashlib.sha256(data).hexdigest()


def fetch_wheel(path):
    if path is None:
        tmp = tempfile.mkdtemp()
        subprocess.check_call(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q",
             "circuitgraph==0.2.1", "-d", tmp])
        path = os.path.join(tmp, WHEEL_NAME)
    data = open(path, "rb").read()
    digest = sha256(data)
    if digest != WHEEL_SHA256:
        sys.exit(f"checksum mismatch for {path}: {digest}")
    return zipfile.ZipFile(io.BytesIO(data))


def tokenize_names(text):
    # escaped identifiers run until whitespace
    return [t for t in re.findall(r"\\\S+|[A-Za-z_][A-Za-z0-9_$]*|1'b[01]", text)]


def parse_netlist(src):
    src = re.sub(r"//.*", "", src)
    src = re.sub(r"/\*.*?\*/", "", src, flags=re.S)
    body = src[src.index(";") + 1:src.index("endmodule")]
    inputs, outputs, defs = [], [], {}
    for stmt in body.split(";"):
        stmt = stmt.strip()
        if not stmt:
            continue
        head = stmt.split(None, 1)[0]
        rest = stmt[len(head):]
        if head == "input":
            inputs += tokenize_names(rest)
        elif head == "output":
            outputs += tokenize_names(rest)
        elif head == "wire":
            continue
        elif head == "assign":
            lhs, rhs = rest.split("=", 1)
            lhs = tokenize_names(lhs)[0]
            rhs = rhs.strip()
            neg = rhs.startswith("~")
            (name,) = tokenize_names(rhs)
            defs[lhs] = ("not" if neg else "buf", [name])
        elif head in GATES:
            args = tokenize_names(rest[rest.index("("):])
            defs[args[0]] = (head, args[1:])
        else:
            raise ValueError(f"unsupported statement: {stmt[:60]}")
    return inputs, outputs, defs


class Aig:
    def __init__(self, num_inputs):
        self.num_inputs = num_inputs
        self.ands = []
        self.strash = {}

    def and2(self, a, b):
        if a > b:
            a, b = b, a
        if a == 0 or a == b ^ 1:
            return 0
        if a == 1:
            return b
        if a == b:
            return a
        key = (a, b)
        if key not in self.strash:
            lit = 2 * (self.num_inputs + len(self.ands) + 1)
            self.ands.append((lit, b, a))
            self.strash[key] = lit
        return self.strash[key]

    def and_n(self, lits):
        while len(lits) > 1:
            nxt = [self.and2(lits[i], lits[i + 1]) for i in range(0, len(lits) - 1, 2)]
            if len(lits) % 2:
                nxt.append(lits[-1])
            lits = nxt
        return lits[0]


def build(inputs, outputs, defs):
    aig = Aig(len(inputs))
    lit = {name: 2 * (i + 1) for i, name in enumerate(inputs)}
    lit["1'b0"], lit["1'b1"] = 0, 1

    def resolve(name):
        stack = [name]
        while stack:
            n = stack[-1]
            if n in lit:
                stack.pop()
                continue
            kind, args = defs[n]
            missing = [a for a in args if a not in lit]
            if missing:
                stack.extend(missing)
                continue
            vals = [lit[a] for a in args]
            if kind == "buf":
                v = vals[0]
            elif kind == "not":
                v = vals[0] ^ 1
            elif kind == "and":
                v = aig.and_n(vals)
            elif kind == "nand":
                v = aig.and_n(vals) ^ 1
            elif kind == "or":
                v = aig.and_n([x ^ 1 for x in vals]) ^ 1
            else:
                v = aig.and_n([x ^ 1 for x in vals])
            lit[n] = v
            stack.pop()
        return lit[name]

    outs = [resolve(o) for o in outputs]
    return aig, outs


def encode_varint(x, buf):
    while x & ~0x7F:
        buf.append((x & 0x7F) | 0x80)
        x >>= 7
    buf.append(x)


def write_binary(aig, outs, inputs, outputs):
    m = aig.num_inputs + len(aig.ands)
    out = bytearray(f"aig {m} {aig.num_inputs} 0 {len(outs)} {len(aig.ands)}\n".encode())
    for o in outs:
        out += f"{o}\n".encode()
    for lhs, r0, r1 in aig.ands:
        encode_varint(lhs - r0, out)
        encode_varint(r0 - r1, out)
    for i, name in enumerate(inputs):
        out += f"i{i} {name.lstrip(chr(92))}\n".encode()
    for i, name in enumerate(outputs):
        out += f"o{i} {name.lstrip(chr(92))}\n".encode()
    return bytes(out)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="benchmarks/epfl")
    ap.add_argument("--wheel", default=None, help="use a local copy of the wheel")
    args = ap.parse_args()
    wheel = fetch_wheel(args.wheel)
    os.makedirs(args.out, exist_ok=True)
    sums = []
    for name, member in CIRCUITS.items():
        src = wheel.read(f"circuitgraph/netlists/{member}").decode()
        inputs, outputs, defs = parse_netlist(src)
        aig, outs = build(inputs, outputs, defs)
        data = write_binary(aig, outs, inputs, outputs)
        with open(os.path.join(args.out, f"{name}.aig"), "wb") as f:
            f.write(data)
        sums.append(f"{sha256(data)}  {name}.aig")
        print(f"{name}: pi={len(inputs)} po={len(outputs)} and={len(aig.ands)}")
    with open(os.path.join(args.out, "SHA256SUMS"), "w") as f:
        f.write("\n".join(sums) + "\n")


if __name__ == "__main__":
    main()
