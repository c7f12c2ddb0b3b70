#!/usr/bin/env python3
"""End-to-end checks of the dnapriv command line.

usage: cli_checks.py DNAPRIV SOURCE_DIR WORK_DIR
"""
import filecmp
import json
import shutil
import subprocess
import sys
from pathlib import Path

exe, src, work = sys.argv[1], Path(sys.argv[2]), Path(sys.argv[3])
specs = src / "specs"
shutil.rmtree(work, ignore_errors=True)
work.mkdir(parents=True)
failures = []


def run(*args):
    return subprocess.run([exe, *map(str, args)], capture_output=True, text=True)


def check(name, ok, detail=""):
    print(f"{'PASS' if ok else 'FAIL'}  {name}" + (f": {detail}" if detail and not ok else ""))
    if not ok:
        failures.append(name)


def game_json(spec, *extra):
    r = run("game", spec, "--format", "json", *extra)
    if r.returncode != 0:
        raise SystemExit(f"game {spec} failed: {r.stderr}")
    return json.loads(r.stdout)


# panel
r = run("panel", "validate")
check("panel validate default", r.returncode == 0 and r.stdout.startswith("OK"), r.stderr)

bad = work / "bad_panel.csv"
bad.write_text("locus,allele,frequency\nD8S1179,10,0.5\nD8S1179,11,0.4\n")
r = run("panel", "validate", bad)
check("panel validate sum 0.9", r.returncode == 1 and "D8S1179" in r.stderr, r.stderr)

a = run("panel", "generate", "--loci", "15", "--alleles", "8", "--seed", "7")
b = run("panel", "generate", "--loci", "15", "--alleles", "8", "--seed", "7")
c = run("panel", "generate", "--loci", "15", "--alleles", "8", "--seed", "8")
check("panel generate deterministic", a.returncode == 0 and a.stdout == b.stdout and a.stdout != c.stdout)
check("panel generate shape", len(a.stdout.strip().splitlines()) == 1 + 15 * 8)
r = run("panel", "generate", "--seed", "7", "--out", work / "gen")
check("generated panel validates", r.returncode == 0 and run("panel", "validate", work / "gen" / "panel.csv").returncode == 0)

# config errors
unknown = work / "unknown_attacker.json"
unknown.write_text(json.dumps({"name": "x", "attacker": {"name": "psychic"}, "game": {"trials": 10}}))
r = run("game", unknown)
check("unknown attacker exits 1", r.returncode == 1 and "psychic" in r.stderr, r.stderr)
broken = work / "broken.json"
broken.write_text("{ not json")
check("malformed spec exits 1", run("game", broken).returncode == 1)
kit = work / "bad_kit.json"
kit.write_text(json.dumps({"name": "x", "protocol": {"kit": "magic"}}))
check("unknown kit exits 1", run("protocol", kit).returncode == 1)
check("unknown subcommand exits 1", run("frobnicate").returncode == 1)

# games
rep = game_json(specs / "identity_confirm.json")
check("identity confirm adv >= 0.95", rep["adv_hat"] >= 0.95, rep["adv_hat"])
check("report embeds seed and hash", rep["seed"] == 42 and len(rep["config_hash"]) == 16)

rep = game_json(specs / "dnase_confirm.json")
check("dnase verdict at 0.05", rep["verdict"]["result"] in ("secure_at_threshold", "inconclusive"), rep["verdict"])

out = work / "sweep"
summary = game_json(specs / "dilution_sweep.json", "--out", out)
files = sorted(p.name for p in out.glob("dilution-sweep__k-*.json"))
check("sweep writes 4 reports", len(files) == 4, files)
check("sweep summary has trend", summary["trend"]["axis"] == "k" and summary["trend"]["adv_non_increasing"] is True,
      summary.get("trend"))

one = game_json(specs / "randomizing_homer.json", "--seed", "5")
three = game_json(specs / "randomizing_homer.json", "--seed", "5", "--threads", "3")
for r_ in (one, three):
    r_.pop("wall_clock_seconds", None)
check("game independent of thread count", one == three)
other = game_json(specs / "randomizing_homer.json", "--seed", "6")
check("seed changes the run", other["config_hash"] == one["config_hash"] and other["seed"] == 6)

r = run("game", specs / "identity_confirm.json", "--out", work / "trials", "--dump-trials")
rows = (work / "trials" / "identity-confirm__trials.csv").read_text().splitlines()
check("dump-trials writes one row per trial", r.returncode == 0 and len(rows) == 10001, len(rows))

# protocols
def protocol(name):
    r = run("protocol", specs / name, "--format", "json")
    if r.returncode != 0:
        raise SystemExit(f"protocol {name} failed: {r.stderr}")
    return json.loads(r.stdout)


p = protocol("protocol_honest.json")
check("honest kit never aborts", p["abort"]["count"] == 0, p["abort"])
p = protocol("protocol_fake_kit.json")
check("fake kit aborts about half the time", p["abort"]["ci_low"] <= 0.5 <= p["abort"]["ci_high"], p["abort"])
p = protocol("protocol_kill_virus.json")
inv = p["invalid_negative"]
check("kill-virus negatives all invalid", inv["of"] > 0 and inv["count"] == inv["of"], inv)

# repro
r1 = run("repro", "--scale", "0.02", "--only", "1,2,3,5,6", "--threads", "1", "--out", work / "repro1")
r3 = run("repro", "--scale", "0.02", "--only", "1,2,3,5,6", "--threads", "3", "--out", work / "repro3")
check("repro byte-identical across threads",
      r1.returncode == r3.returncode and filecmp.cmp(work / "repro1" / "acceptance.json",
                                                    work / "repro3" / "acceptance.json", shallow=False))

r = run("repro", "--scale", "0.1", "--only", "0,3,5", "--panel", bad, "--out", work / "corrupt")
acc = json.loads((work / "corrupt" / "acceptance.json").read_text())
status = {c["id"]: c["passed"] for c in acc["criteria"]}
check("corrupted panel fails criterion 0 only", r.returncode == 2 and status == {0: False, 3: True, 5: True}, status)

print(f"{len(failures)} failure(s)" if failures else "all CLI checks passed")
sys.exit(1 if failures else 0)
