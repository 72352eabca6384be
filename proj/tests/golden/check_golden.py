"""Run the CLI and compare its output with a golden file.

Numeric tokens match to a relative tolerance; everything else must match exactly.
"""
import argparse
import re
import subprocess
import sys

NUMBER = re.compile(r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")


def tokens(line):
    out, pos = [], 0
    for m in NUMBER.finditer(line):
        out.append(("text", line[pos:m.start()]))
        out.append(("num", m.group()))
        pos = m.end()
    out.append(("text", line[pos:]))
    return out


def same_line(a, b, rtol, atol):
    ta, tb = tokens(a), tokens(b)
    if len(ta) != len(tb):
        return False
    for (ka, va), (kb, vb) in zip(ta, tb):
        if ka != kb:
            return False
        if ka == "text":
            if va != vb:
                return False
        elif va != vb and abs(float(va) - float(vb)) > atol + rtol * abs(float(vb)):
            return False
    return True


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--exe", required=True)
    p.add_argument("--golden", required=True)
    p.add_argument("--exit", type=int, default=0)
    p.add_argument("--update", action="store_true")
    p.add_argument("args", nargs=argparse.REMAINDER)
    a = p.parse_args()
    args = a.args[1:] if a.args and a.args[0] == "--" else a.args
    run = subprocess.run([a.exe] + args, capture_output=True, text=True)
    got = run.stdout + run.stderr
    if a.update:
        with open(a.golden, "w") as f:
            f.write(got)
    if run.returncode != a.exit:
        print(f"exit {run.returncode}, expected {a.exit}\n{got}")
        return 1
    want = open(a.golden).read()
    gl, wl = got.splitlines(), want.splitlines()
    if len(gl) != len(wl):
        print(f"{len(gl)} lines, expected {len(wl)}\n--- got\n{got}--- expected\n{want}")
        return 1
    for i, (g, w) in enumerate(zip(gl, wl)):
        # The digest line hashes file bytes, so it is exact by design.
        if not same_line(g, w, 1e-9, 1e-12):
            print(f"line {i + 1} differs\n  got:      {g}\n  expected: {w}")
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
