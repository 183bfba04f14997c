"""
Acceptance checks at desk scale, printed as a pass/fail/skip table.

Any failure, or any skipped check, makes the exit code nonzero.
"""
import math
import sys
import time

import numpy as np

from backend import measurement_oracle, nanopore, x_discord
from backend.cs_x_transform import CSMatrix, conjugate_h2, cs_to_x, hadamard2, x_to_cs
from backend.x_canonical import CanonicalXState, canonicalize, embed, sample_random_xstate
from utils.logger import log_error

PASS, FAIL, SKIP = "✅ PASS", "❌ FAIL", "⏭️ SKIP"

EXPECTED_CROSSINGS = (0.98486, 2.15673)
EXPECTED_PEAK = 0.008342
EXPECTED_LIMIT = 0.0083358


def _random_states(seed, count):
    rng = np.random.default_rng(seed)
    return [canonicalize(sample_random_xstate(rng)) for _ in range(count)]


def _nondegenerate(s):
    radius = x_discord.ConditionalEntropyParams.from_state(s).radius
    return min(s.a, s.b, s.c, s.d) > 0.02 and radius < 0.95


# --- Checks: each returns (passed, detail) ---
def check_crossings(settings):
    roots = nanopore.find_branch_crossings(10, 1.0)
    ok = len(roots) == 2 and all(abs(r - e) <= 1e-4 for r, e in zip(roots, EXPECTED_CROSSINGS))
    return ok, f"roots={[round(r, 6) for r in roots]}"


def check_peak(settings):
    _, peak = nanopore.peak_discord(10, 1.0, 2000)
    return abs(peak - EXPECTED_PEAK) <= 1e-5, f"peak={peak:.7f} bits"


def check_limit(settings):
    limit = nanopore.thermodynamic_limit_discord(1.0)
    large_n = nanopore.discord_at(nanopore.NanoporeParams(1000, 1.0, math.pi / 4)).q_value
    ok = abs(limit - EXPECTED_LIMIT) <= 1e-7 and abs(large_n - limit) <= 1e-4
    return ok, f"limit={limit:.8f} N=1000: {large_n:.8f}"


def check_odd_n(settings):
    base = nanopore.NanoporeParams(11, 1.0, 0.0)
    ts = np.linspace(0.0, math.pi, 1002)[1:-1]
    worst = max(nanopore.q_pi2_bits(base.at(t)) - nanopore.q0_bits(base.at(t)) for t in ts)
    roots = nanopore.find_branch_crossings(11, 1.0)
    return worst <= 1e-15 and not roots, f"max(Qpi/2-Q0)={worst:.3e} roots={roots}"


def check_periodicity(settings):
    base = nanopore.NanoporeParams(10, 1.0, 0.0)
    ts = np.random.default_rng(settings.seed).uniform(0.0, math.pi, 100)
    gap = max(abs(nanopore.discord_at(base.at(t)).q_value
                  - nanopore.discord_at(base.at(t + math.pi)).q_value) for t in ts)
    zeros = max(nanopore.discord_at(base.at(t)).q_value for t in (0.0, math.pi))
    return gap <= 1e-10 and zeros <= 1e-12, f"period gap={gap:.2e} Q(0),Q(pi)<={zeros:.2e}"


def check_chain(settings):
    worst = 0.0
    for n in range(2, 7):
        for beta in (0.2, 1.0, 3.0):
            for t in (0.3, 1.1, 2.5):
                closed = nanopore.pair_state(nanopore.NanoporeParams(n, beta, t)).entries
                chain = measurement_oracle.simulate_chain(measurement_oracle.ChainParams(n, beta, t)).entries
                worst = max(worst, float(np.max(np.abs(closed - chain))))
    return worst <= 1e-12, f"max entry gap={worst:.2e}"


def check_oracle(settings):
    worst = 0.0
    for s in _random_states(settings.seed, 20):
        piecewise = x_discord.discord(s).q_value
        brute = measurement_oracle.discord(embed(s), threads=settings.threads)
        worst = max(worst, abs(piecewise - brute))
    return worst <= 2e-6, f"max |piecewise - oracle|={worst:.2e} nats"


def _split_coherence(a, b, w):
    """b = c, with coherences u + v = w shared in proportion to their bounds."""
    d = 1.0 - a - 2.0 * b
    cap_u, cap_v = math.sqrt(a * d), b
    return CanonicalXState(a, b, b, d, u=w * cap_u / (cap_u + cap_v), v=w * cap_v / (cap_u + cap_v))


def check_interior_branch(settings):
    states = []
    for a in np.linspace(0.05, 0.11, 7):
        for b in (0.115, 0.125, 0.135):
            w_max = math.sqrt(a * (1.0 - a - 2.0 * b)) + b
            for window in x_discord.curvature_windows(lambda w: _split_coherence(a, b, w),
                                                      (1e-3, 0.98 * w_max), 401):
                middle = _split_coherence(a, b, 0.5 * (window.lo + window.hi))
                if not window.degenerate and x_discord.bifurcation_report(middle).interior_minimum_possible:
                    states.append(middle)
    if len(states) < 5:
        return False, f"only {len(states)} state(s) with both endpoint curvatures negative"
    worst_margin, worst_gap = math.inf, 0.0
    for s in states[:5]:
        result = x_discord.discord(s)
        if result.branch is not x_discord.Branch.Q_THETA:
            return False, f"branch {result.branch.value} for {s}"
        worst_margin = min(worst_margin, min(result.q0, result.q_pi2) - result.q_value)
        brute = measurement_oracle.discord(embed(s), threads=settings.threads)
        worst_gap = max(worst_gap, abs(result.q_value - brute))
    ok = worst_margin > 1e-12 and worst_gap <= 2e-6
    return ok, f"{len(states)} states, min margin={worst_margin:.2e} max |Qtheta - oracle|={worst_gap:.2e} nats"


def check_cs_x(settings):
    rng = np.random.default_rng(settings.seed)
    worst = 0.0
    for _ in range(100):
        a = CSMatrix(tuple(rng.normal(size=8) + 1j * rng.normal(size=8)))
        back = x_to_cs(cs_to_x(a))
        worst = max(worst, float(np.max(np.abs(np.array(back.a) - np.array(a.a)))))
    h2 = hadamard2()
    involution = bool(np.array_equal(h2 @ h2, np.eye(4)))
    return worst <= 1e-14 and involution, f"round trip={worst:.2e} involution exact={involution}"


def check_cs_x_discord(settings):
    worst = 0.0
    for s in _random_states(settings.seed + 1, 5):
        # conjugating an X state by H2 gives a CS state with the same discord
        cs_state = conjugate_h2(embed(s).entries)
        worst = max(worst, abs(measurement_oracle.discord(cs_state)
                               - measurement_oracle.discord(embed(s))))
    return worst <= 2e-6, f"max discord change={worst:.2e} nats"


def check_derivatives(settings):
    worst_rel, worst_slope = 0.0, 0.0
    states = [s for s in _random_states(settings.seed + 2, 120) if _nondegenerate(s)][:50]
    for s in states:
        for theta, analytic in ((0.0, x_discord.second_derivative_at_0(s)),
                                (x_discord.HALF_PI, x_discord.second_derivative_at_pi2(s))):
            numeric = x_discord.finite_difference_curvature(s, theta)
            worst_rel = max(worst_rel, abs(analytic - numeric) / max(abs(numeric), 1e-1))
            h = 1e-4
            slope = (x_discord.conditional_entropy(s, theta + h)
                     - x_discord.conditional_entropy(s, theta - h)) / (2 * h)
            worst_slope = max(worst_slope, abs(slope))
    return worst_rel <= 1e-5 and worst_slope <= 1e-6, f"rel={worst_rel:.2e} |S'|={worst_slope:.2e}"


def check_windows(settings):
    windows = nanopore.find_bifurcation_windows(10, 1.0)
    return all(w.degenerate for w in windows), f"{len(windows)} window(s), all degenerate"


CHECKS = [
    ("branch crossings N=10", check_crossings, False),
    ("peak discord N=10", check_peak, False),
    ("thermodynamic limit", check_limit, False),
    ("odd N=11 branch", check_odd_n, False),
    ("periodicity and zeros", check_periodicity, False),
    ("full-chain correlators", check_chain, False),
    ("measurement oracle", check_oracle, True),
    ("interior branch", check_interior_branch, True),
    ("CS<->X machinery", check_cs_x, False),
    ("CS<->X discord invariance", check_cs_x_discord, True),
    ("endpoint derivatives", check_derivatives, False),
    ("degenerate windows N=10", check_windows, False),
]


def run_checks(settings, skip_oracle=False):
    """[(name, status, detail, seconds)] for every check."""
    rows = []
    for name, check, needs_oracle in CHECKS:
        if skip_oracle and needs_oracle:
            rows.append((name, SKIP, "oracle disabled", 0.0))
            continue
        start = time.perf_counter()
        try:
            ok, detail = check(settings)
        except Exception as e:
            log_error(f"selftest check {name!r} raised: {e}")
            ok, detail = False, f"{type(e).__name__}: {e}"
        rows.append((name, PASS if ok else FAIL, detail, time.perf_counter() - start))
    return rows


def run_selftest(settings, skip_oracle=False, stream=None) -> int:
    stream = stream or sys.stdout
    rows = run_checks(settings, skip_oracle)
    print("=" * 100, file=stream)
    print(f"{'check':<28} {'status':<10} {'time':>8}  detail", file=stream)
    print("-" * 100, file=stream)
    for name, status, detail, seconds in rows:
        print(f"{name:<28} {status:<10} {seconds:>7.2f}s  {detail}", file=stream)
    print("=" * 100, file=stream)
    return 0 if all(status == PASS for _, status, _, _ in rows) else 1
