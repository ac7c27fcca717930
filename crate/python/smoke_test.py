import perdyn_py as pd

lines = pd.corpus_list()
assert any(l.startswith("e1") for l in lines), lines

f = pd.System("e1")
g = f.induced()
assert f.period == 2 and g.period == 1, (f, g)
assert f.visit_times("iso:(3,0)", [("iso:(2,0)", 0.1)], 1000) == [1]
assert g.visit_times("iso:(3,0)", [("iso:(2,0)", 0.1)], 1000) == [None]

x = f.sample_points(3, seed=1)[0]
assert f.distance(x, x) == 0.0
assert f.iterate(x, 0) == x

v = pd.System("e2").evaluate("minimal", {"horizon": 2000, "net_radius": 0.05})
assert v["outcome"] == "evidence-for", v["summary"]

c = pd.classify(list(range(0, 100, 3)), 99, "syndetic", 3)
assert isinstance(c, dict)

rep = pd.run_experiment("""
format_version = 1
seed = 1
[system]
example = "e1"
[[detectors]]
kind = "report"
properties = ["minimal"]
[detectors.params]
horizon = 500
""")
assert rep["system"]["period"] == 2 and rep["rows"], rep

try:
    pd.System("nope")
except ValueError:
    pass
else:
    raise AssertionError("bad example id accepted")

print("smoke ok")
