import math

import intermittency_py as ip

heat = ip.Kernel.heat(1)
assert abs(heat.density(1.0, [0.0]) - 1 / math.sqrt(2 * math.pi)) < 1e-15
assert abs(heat.ball_mass(0.25, 0.6) - math.erf(0.6 / math.sqrt(0.5))) < 1e-12
assert heat.small_ball_exponents() == (0.0, 2.0)

assert abs(ip.mittag_leffler(0.8, 0.8, -20.0) - 0.000495825209592086766) < 1e-12
assert ip.count_admissible([4, 4]) == 24
assert len(ip.enumerate_admissible([2, 2])) == 2

rows = ip.exponent_table()
assert rows[0]["t_exp_lower"]["exact"] == "5/3" and all(r["matches"] for r in rows)

value, se = ip.phi_n(heat, ip.Noise.white_white(), 1, 1.0, samples=100_000, seed=7)
assert abs(value - 1 / math.sqrt(math.pi)) < 5 * se
assert ip.phi_n(heat, ip.Noise.white_white(), 1, 1.0, samples=1000, seed=7) == \
    ip.phi_n(heat, ip.Noise.white_white(), 1, 1.0, samples=1000, seed=7)

report = ip.verify_small_ball(heat, [10 ** (-k / 5) for k in range(6)])
assert report["passed"]

fit = ip.fit_hbar(ip.Kernel.wave(1), ip.Noise.riesz(0.5, 1))
assert fit["abs_gap"] < 0.01

try:
    ip.Kernel.frac(2, 1.5, 1.2)
except ValueError as e:
    assert "PARAMETER_OUT_OF_POSITIVITY_RANGE" in str(e) or "positivity" in str(e).lower()
else:
    raise AssertionError("expected an error")

print("smoke test ok")
