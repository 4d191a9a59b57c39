"""Invariant suite run by ``prbh verify``.

Each check returns a :class:`Check`; the suite is deterministic given
``(z, seed, trials)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from . import channel_model as cm
from . import density_model as dm
from . import fading_model as fm
from . import state_sim as ss

Z_GRID = tuple(i / 20 for i in range(20))


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def check_normalization():
    worst = max(abs(d.total + d.tail_mass - 1.0) for d in (cm.build_distribution(z, 1e-12) for z in Z_GRID))
    return Check("normalization", worst <= 1e-12, f"max |sum p + tail - 1| = {worst:.3e} over z grid")


def check_anchor_and_consistency():
    anchor = all(cm.cloner_probability(z, 1) == (1.0 - z) ** 3 for z in Z_GRID)
    consistent = all(
        d.probs[N - 1] == cm.cloner_probability(d.z, N) for d in (cm.build_distribution(z, 1e-12) for z in Z_GRID) for N in range(1, d.n_max + 1)
    )
    ok = anchor and consistent
    return Check("anchor/consistency", ok, f"p_1 == (1-z)^3: {anchor}; probs == cloner_probability: {consistent}")


def check_capacity():
    qs = [cm.quantum_capacity(z, 1e-12) for z in Z_GRID]
    bounded = all(0.0 < q <= 1.0 for q in qs) and all(q < 1.0 for q in qs[1:])
    monotone = all(a > b for a, b in zip(qs, qs[1:]))
    ok = bounded and monotone and abs(qs[0] - 1.0) <= 1e-12
    return Check("capacity", ok, f"Q(0)={qs[0]!r}, Q(0.95)={qs[-1]:.6f}, bounded={bounded}, decreasing={monotone}")


def check_generators(max_dim=64):
    worst_comm = worst_cas = worst_herm = 0.0
    for dim in range(2, max_dim + 1):
        g = ss.su2_generators(dim)
        j = g.spin
        for a, b, c in ((g.jx, g.jy, g.jz), (g.jy, g.jz, g.jx), (g.jz, g.jx, g.jy)):
            worst_comm = max(worst_comm, np.abs(a @ b - b @ a - 1j * c).max())
        worst_cas = max(worst_cas, np.abs(g.casimir() - j * (j + 1) * np.eye(dim)).max())
        for m in (g.jx, g.jy, g.jz):
            worst_herm = max(worst_herm, np.abs(m - m.conj().T).max())
    ok = worst_comm <= 1e-10 and worst_cas <= 1e-10 and worst_herm <= 1e-12
    return Check("su2 algebra", ok, f"commutator {worst_comm:.2e}, Casimir {worst_cas:.2e}, hermiticity {worst_herm:.2e} (dim <= {max_dim})")


def _random_bloch(gen, count):
    v = gen.normal(size=(count, 3))
    return [ss.BlochVector.normalized(row) for row in v]


def check_channel_action(z, seed, count=50, zs=(0.1, 0.5, 0.9)):
    gen = fm.RngStream(seed, 7).generator()
    worst_tr = worst_w = worst_spec = 0.0
    psd = True
    for zz in sorted(set(zs) | {z}):
        dist = cm.build_distribution(zz, 1e-12)
        for n in _random_bloch(gen, count):
            out = ss.channel_apply(n, zz, 1e-12)
            worst_tr = max(worst_tr, abs(out.total_trace() + out.tail_mass - 1.0))
            psd = psd and out.is_psd(1e-10)
            worst_w = max(worst_w, max(abs(b.weight - dist.probs[b.k]) for b in out))
            for b in out.blocks[:9]:
                k = b.k
                expect = 2.0 * np.arange(k + 2) / ((k + 1) * (k + 2))
                worst_spec = max(worst_spec, np.abs(b.eigenvalues() - expect).max())
    ok = worst_tr <= 1e-10 and psd and worst_w <= 1e-12 and worst_spec <= 1e-10
    return Check(
        "channel action",
        ok,
        f"trace {worst_tr:.2e}, psd={psd}, weight {worst_w:.2e}, spectrum {worst_spec:.2e} ({count} vectors per z)",
    )


def check_identity_limit(seed, count=50):
    gen = fm.RngStream(seed, 8).generator()
    worst = 0.0
    for n in _random_bloch(gen, count):
        out = ss.channel_apply(n, 0.0)
        worst = max(worst, np.abs(out.blocks[0].matrix - ss.qubit_state(n)).max())
        worst = max(worst, abs(out.blocks[0].weight - 1.0), float(len(out) != 1))
    return Check("identity limit", worst <= 1e-12, f"max |block_0 - rho| = {worst:.2e} at z=0")


def check_mixed_outputs(z):
    bob, env = ss.mixed_input_outputs(z, 1e-12)
    via_channel = ss.channel_apply(ss.BlochVector.mixed(), z, 1e-12)
    tr = max(abs(bob.total_trace() + bob.tail_mass - 1), abs(env.total_trace() + env.tail_mass - 1))
    same = max(np.abs(a.matrix - b.matrix).max() for a, b in zip(bob, via_channel))
    dims = all(b.dim == b.k + 2 for b in bob) and all(e.dim == e.k + 1 for e in env)
    ok = tr <= 1e-10 and same <= 1e-12 and dims
    return Check("mixed input", ok, f"trace {tr:.2e}, sigma_B vs channel(0) {same:.2e}, dims ok={dims}")


def check_fading(seed, trials):
    base = fm.RngStream(seed, 11)
    crit = fm.ks_critical_value(trials, 0.01)
    w = fm.sample_complex_gaussian(1.0, base.child(0), trials)
    d_ray = fm.ks_statistic(np.abs(w), fm.model_cdf("rayleigh"))
    d_exp = fm.ks_statistic(np.abs(w) ** 2, fm.model_cdf("exponential"))
    g4 = fm.draw_unscaled_gammas(4, 1.0, base.child(1), trials).sum(axis=1)
    d_gam = fm.ks_statistic(g4, fm.model_cdf("gamma", 1.0, 4))
    ok = max(d_ray, d_exp, d_gam) <= crit
    return Check("fading laws", ok, f"KS rayleigh {d_ray:.4f}, exponential {d_exp:.4f}, gamma(4) {d_gam:.4f} vs crit {crit:.4f}")


def check_clt(seed, trials, runs=11, js=(2, 8, 64)):
    base = fm.RngStream(seed, 12)
    normal = fm.model_cdf("normal", 1.0)
    medians = []
    for j in js:
        ds = [fm.ks_statistic(fm.sample_phasor_sum(j, 1.0, base.child(j).child(r), trials).real, normal) for r in range(runs)]
        medians.append(float(np.median(ds)))
    ok = all(a >= b for a, b in zip(medians, medians[1:]))
    return Check("phasor CLT", ok, "median KS " + ", ".join(f"j={j}: {m:.4f}" for j, m in zip(js, medians)))


def check_decomposition(z, seed):
    dist = cm.build_distribution(z, 1e-9)
    worst = 0.0
    for N, p in dist.rows():
        cv = fm.build_coefficient_vector(p, N, 1.0, fm.RngStream(seed, 13).child(N))
        worst = max(worst, abs(cv.squared_norm - p), abs(cv.tau * math.sqrt(p) - math.fsum(cv.magnitudes)))
    total = fm.total_probability_check(z, 1e-9, 1.0, fm.RngStream(seed, 14))
    gap = abs(total - (1.0 - dist.tail_mass))
    ok = worst <= 1e-12 and gap <= 1e-10
    return Check("coefficient vectors", ok, f"identity residual {worst:.2e}, |p_tot - (1 - tail)| = {gap:.2e}")


def check_density(seed, points=10_000):
    gen = fm.RngStream(seed, 15).generator()
    zs = gen.uniform(0.0, 1.0, points)
    ns = gen.integers(1, 11, points)
    ident = max(abs(dm.f_density(z, int(N)) - 2 * dm.chi_square_pdf(20 * z, 2 * int(N))) for z, N in zip(zs, ns))
    mass = max(abs(integrate.quad(dm.f_density, 0, np.inf, args=(N,), epsabs=1e-13, epsrel=1e-13)[0] - 0.1) for N in range(1, 11))
    modes = [dm.density_curve(N, 1000).argmax() for N in range(2, 6)]
    mode_ok = all(abs(m - (N - 1) / 10) <= 1e-3 for N, m in zip(range(2, 6), modes))
    small = all(dm.cdf_small_y(y, N) == y**N / math.factorial(N) for y in (0.1, 0.5, 1.0, 2.0) for N in range(1, 6))
    ok = ident <= 1e-12 and mass <= 1e-8 and mode_ok and small
    return Check("density identities", ok, f"chi2 identity {ident:.2e}, mass gap {mass:.2e}, modes {modes}, small-y exact={small}")


def check_reproducibility(seed):
    a = fm.sample_complex_gaussian(1.0, fm.RngStream(seed, 16), 1000)
    b = fm.sample_complex_gaussian(1.0, fm.RngStream(seed, 16), 1000)
    c = fm.sample_complex_gaussian(1.0, fm.RngStream(seed, 17), 1000)
    ok = a.tobytes() == b.tobytes() and a.tobytes() != c.tobytes()
    return Check("reproducibility", ok, "same stream bit-identical, distinct stream differs" if ok else "stream mismatch")


def run_suite(z=0.5, seed=42, trials=100_000):
    return [
        check_normalization(),
        check_anchor_and_consistency(),
        check_capacity(),
        check_generators(),
        check_channel_action(z, seed),
        check_identity_limit(seed),
        check_mixed_outputs(z),
        check_fading(seed, trials),
        check_clt(seed, trials),
        check_decomposition(z, seed),
        check_density(seed),
        check_reproducibility(seed),
    ]
