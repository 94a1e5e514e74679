"""End-to-end checks of the hetflow command-line tool. Usage: cli_test.py <path-to-hetflow>."""
import csv
import io
import json
import math
import os
import subprocess
import sys
import tempfile

EXE = sys.argv[1]
failures = []


def run(*args, env=None):
    e = dict(os.environ)
    if env:
        e.update(env)
    p = subprocess.run([EXE, *args], capture_output=True, text=True, env=e)
    return p.returncode, p.stdout, p.stderr


def check(name, cond, detail=""):
    print(("ok   " if cond else "FAIL ") + name + (f"  ({detail})" if detail and not cond else ""))
    if not cond:
        failures.append(name)


def rows(text):
    lines = [l for l in text.splitlines() if not l.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


tmp = tempfile.mkdtemp()

# soliton-check
rc, out, _ = run("soliton-check", "--algebra", "heisenberg", "--kappa", "1")
rep = json.loads(out)
check("heisenberg soliton passes", rc == 0 and rep["pass"] and rep["schema_version"] == 1)
check("heisenberg f = 1", abs(rep["info"]["f"] - 1.0) < 1e-14)
check("heisenberg case 1", rep["info"]["case"] == 1)
rc, out, _ = run("soliton-check", "--algebra", "hyperbolic", "--kappa", "3")
rep = json.loads(out)
check("hyperbolic soliton passes", rc == 0 and rep["pass"] and abs(3 * rep["info"]["f"] ** 2 - 3) < 1e-12)
rc, out, _ = run("soliton-check", "--algebra", "su2", "--f", "0.7", "--kappa", "1")
check("su2 candidate fails verification", rc == 3 and not json.loads(out)["pass"])

# verify
rc, out, _ = run("verify", "--suite", "identities", "--trials", "100", "--seed", "7")
rep = json.loads(out)
check("identity suite passes", rc == 0 and rep["pass"] and rep["checks"]["identities.chart.torsion_r_circ_r"]["samples"] == 100)
rc, out, _ = run("verify", "--suite", "divergence", "--trials", "10")
check("divergence suite passes", rc == 0 and json.loads(out)["pass"])
rc, out, _ = run("verify", "--suite", "solitons", "--trials", "5")
check("soliton suite passes", rc == 0 and json.loads(out)["pass"])

# config handling
bad = os.path.join(tmp, "bad.json")
with open(bad, "w") as f:
    f.write('{"kappa": 1,')
target = os.path.join(tmp, "never.json")
rc, out, err = run("soliton-check", "--config", bad, "-o", target)
check("malformed config exits 1", rc == 1, err)
check("malformed config writes nothing", not os.path.exists(target) and out == "")
unknown = os.path.join(tmp, "unknown.json")
with open(unknown, "w") as f:
    json.dump({"kappaa": 1}, f)
check("unknown config key exits 1", run("soliton-check", "--config", unknown)[0] == 1)
good = os.path.join(tmp, "good.json")
with open(good, "w") as f:
    json.dump({"algebra": "heisenberg", "kappa": 2.0}, f)
rc, out, _ = run("soliton-check", "--config", good)
check("config values apply", rc == 0 and json.loads(out)["info"]["kappa"] == 2.0)
rc, out, _ = run("soliton-check", "--config", good, "--kappa", "0.5")
check("flags override config", rc == 0 and json.loads(out)["info"]["kappa"] == 0.5)
check("unknown verb exits 1", run("frobnicate")[0] == 1)
check("bad option value exits 1", run("homothety", "--kappa", "abc")[0] == 1)
check("unknown case exits 1", run("homothety", "--case", "round")[0] == 1)

# flow
rc, _, err = run("flow", "--metric", "1,2,0,1,0,1", "--f", "1")
check("non-SPD metric exits 2", rc == 2 and "positive definite" in err, err)
rc, out, _ = run("flow", "--soliton", "heisenberg", "--kappa", "2", "--t1", "1")
r = rows(out)
first = r[0]
const = all(
    abs(float(row[k]) - float(first[k])) <= 1e-10 for row in r for k in ("g11", "g12", "g13", "g22", "g23", "g33", "f")
)
check("soliton start gives constant columns", rc == 0 and const and len(r) > 10)

common = ["--t1", "1", "--stride", "0.05", "--rtol", "1e-12", "--atol", "1e-14"]
for case, algebra, param, model in (("flat", "r3", None, "printed"), ("negative", "hyperbolic", str(1 / math.sqrt(6)), "exact")):
    fargs = ["flow", "--algebra", algebra, "--f", "0.8", "--kappa", "0.5", *common]
    if param:
        fargs += ["--algebra-param", param]
    _, fout, _ = run(*fargs)
    _, hout, _ = run("homothety", "--case", case, "--model", model, "--kappa", "0.5", "--mu", "0.8", *common)
    fr, hr = rows(fout), rows(hout)
    worst = max(abs(float(a["sigma"]) - float(b["sigma"])) for a, b in zip(fr, hr))
    check(f"flow matches homothety ({case})", len(fr) == len(hr) == 21 and worst <= 1e-6, f"{worst}")

rc, out, _ = run("flow", "--algebra", "su2", "--f", "0.8", "--kappa", "0.7", "--t1", "0.2", "--h-coefficient", "0.5")
check("alternative H coefficient runs", rc == 0 and "h_coefficient=0.5" in out)

# homothety
rc, out, _ = run("homothety", "--case", "flat", "--kappa", "4", "--mu", "1", "--t1", "5")
r = rows(out)
check("flat static column", rc == 0 and all(float(x["sigma"]) == 1.0 for x in r))
check("csv header", out.splitlines()[1] == "t,sigma,f,sigma_closed,event")
rc, out, _ = run("homothety", "--case", "positive", "--kappa", "0.1", "--mu", "1", "--t1", "50")
r = rows(out)
s = [float(x["sigma"]) for x in r]
check("positive regular trajectory is monotone and bounded",
      rc == 0 and "behavior=EternalRegular" in out and all(b >= a for a, b in zip(s, s[1:])) and s[-1] < 10)
kappa = 0.8
t_max = kappa / 4 * (math.log(27 / 8) - 1)
rc, out, _ = run("homothety", "--case", "su2", "--kappa", str(kappa), "--t1", "1")
last = rows(out)[-1]
check("su2 collapse row at t_max",
      rc == 0 and last["event"] == "collapse" and abs(float(last["t"]) - t_max) <= 1e-6 * t_max, last["t"])

# sweep
sweep_args = ["sweep", "--case", "negative", "--kappa-min", "4", "--kappa-max", "8", "--n-kappa", "9",
              "--mu-max", "1", "--n-mu", "11"]
a = run(*sweep_args, env={"HETFLOW_THREADS": "1"})
b = run(*sweep_args, env={"HETFLOW_THREADS": "3"})
c = run(*sweep_args, env={"HETFLOW_THREADS": "3"})
check("sweep output independent of threads", a[0] == 0 and a[1] == b[1] == c[1])
r = rows(a[1])
row0 = {float(x["kappa"]): x["tag"] for x in r if float(x["mu"]) == 0.0}
check("negative sweep splits at kappa = 6",
      row0[5.0] == "EternalPastFiniteFutureDivergent" and row0[6.0] == "Static" and row0[7.0] == "FiniteTimeCollapse",
      str(row0))
check("bad HETFLOW_THREADS exits 1", run(*sweep_args, env={"HETFLOW_THREADS": "zero"})[0] == 1)
rc, out, _ = run("sweep", "--case", "positive", "--n-kappa", "6", "--n-mu", "6", "--cross-check")
check("cross-checked sweep agrees", rc == 0 and "integrated_tag" in out)
check("unordered grid exits 1", run("sweep", "--kappa-min", "2", "--kappa-max", "1")[0] == 1)

# atomic file output
path = os.path.join(tmp, "sweep.csv")
rc, out, _ = run(*sweep_args, "-o", path)
with open(path) as f:
    written = f.read()
check("file output", rc == 0 and out == "" and written == a[1])
check("no temporary files left", sorted(os.listdir(tmp)) == ["bad.json", "good.json", "sweep.csv", "unknown.json"])

print(f"{len(failures)} failures")
sys.exit(1 if failures else 0)
