"""Exact rational reference values for improvements and transformation."""
import json
import random
from fractions import Fraction

rng = random.Random(20240611)
cases = []
for i in range(120):
    s_base = round(rng.random(), 6)
    s_rag = round(rng.random(), 6)
    r = [round(rng.uniform(0.05, 20.0), 6) for _ in range(3)]
    w = [round(rng.random(), 6) for _ in range(3)]
    if i % 4 == 0:
        total = sum(w)
        w = [round(x / total, 12) for x in w]
    imp = Fraction(str(s_rag)) - Fraction(str(s_base))
    t = sum(Fraction(str(wi)) / Fraction(str(ri)) for wi, ri in zip(w, r))
    cases.append({
        "s_base": s_base, "s_rag": s_rag,
        "r_time": r[0], "r_gpu": r[1], "r_mem": r[2],
        "w_time": w[0], "w_gpu": w[1], "w_mem": w[2],
        "improvements": float(imp), "transformation": float(t),
    })
print(json.dumps(cases, indent=1))
