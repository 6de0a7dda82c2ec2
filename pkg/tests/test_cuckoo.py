import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps
from sklearn.base import clone

from heavycs import bench, cuckoo, htdist
from heavycs.cuckoo import (
    CSConfig,
    CuckooSearch,
    FunctionProblem,
    Nest,
    global_walk,
    greedy_select,
    initialize,
    local_walk,
    make_variant,
    run,
)
from heavycs.htdist import DistributionSpec, Kind, RandomStream


def naive_run(problem, config):
    """Plain sequential loop: one candidate, one evaluation, one greedy step at a time.

    Draws are taken in the engine's documented order: the initial box
    uniforms, then per generation the global step matrix, the local ``r`` and
    ``eps``, and the partner indices.
    """
    stream = RandomStream(config.seed)
    n, dim = config.np, problem.dim
    lo, hi = problem.lower, problem.upper
    P = lo + stream.uniform((n, dim)) * (hi - lo)
    f = [problem.evaluate(p) for p in P]
    fes, trace, best_seen = n, [], min(f)
    stride = config.stride
    trace += [(s, min(f[:s])) for s in range(1, n + 1) if s % stride == 0]
    best = P[int(np.argmin(f))].copy()
    best_f = min(f)

    def account(value):
        nonlocal fes, best_seen
        fes += 1
        best_seen = min(best_seen, value)
        if fes % stride == 0:
            trace.append((fes, best_seen))

    while fes < config.max_fes:
        d = htdist.sample(config.dist, stream, size=(n, dim))
        for i in range(n):
            if fes >= config.max_fes:
                break
            u = np.clip(P[i] + config.alpha * d[i] * (P[i] - best), lo, hi)
            fu = problem.evaluate(u)
            if fu < f[i]:
                P[i], f[i] = u, fu
            account(fu)
        if fes >= config.max_fes:
            break
        shape = (n, dim) if config.local_per_dimension else (n,)
        r = stream.uniform(shape)
        eps = stream.uniform(shape)
        step = r * (config.pa - eps >= 0)
        if not config.local_per_dimension:
            step = step[:, None] * np.ones(dim)
        j = stream.integers(n - 1, n)
        k = stream.integers(n - 2, n)
        for i in range(n):
            if fes >= config.max_fes:
                break
            jj = j[i] + (j[i] >= i)
            lo_i, hi_i = min(i, jj), max(i, jj)
            kk = k[i] + (k[i] >= lo_i)
            kk = kk + (kk >= hi_i)
            assert len({i, jj, kk}) == 3
            u = np.clip(P[i] + step[i] * (P[jj] - P[kk]), lo, hi)
            fu = problem.evaluate(u)
            if fu < f[i]:
                P[i], f[i] = u, fu
            account(fu)
        ib = int(np.argmin(f))
        if f[ib] < best_f:
            best, best_f = P[ib].copy(), f[ib]
    if not trace or trace[-1][0] != fes:
        trace.append((fes, best_seen))
    return min(best_f, min(f)), fes, trace


class TestVariants:
    def test_table(self):
        assert make_variant("cs") == DistributionSpec(Kind.LEVY, 1.5, 0.0)
        ml = make_variant("csml")
        assert (ml.kind, ml.p1, ml.p2) == (Kind.MITTAG_LEFFLER, 0.8, 4.5)
        w = make_variant("csw")
        assert (w.kind, w.p1, w.p2) == (Kind.WEIBULL, 0.3, 4.0)
        p = make_variant("csp")
        assert (p.kind, p.p1, p.p2) == (Kind.PARETO, 1.5, 4.5)
        c = make_variant("csc")
        assert (c.kind, c.p1, c.p2) == (Kind.CAUCHY, 0.8, 4.5)

    def test_default_signs(self):
        assert [make_variant(v).symmetrize for v in cuckoo.VARIANTS] == [False, True, True, False, True]
        assert not make_variant("csw", symmetrize=False).symmetrize

    def test_unknown(self):
        with pytest.raises(ValueError):
            make_variant("de")


class TestConfig:
    def test_defaults(self):
        c = CSConfig(np=10, max_fes=100)
        assert (c.pa, c.alpha, c.stride) == (0.25, 0.01, 10)
        assert c.local_per_dimension

    @pytest.mark.parametrize("kw", [dict(np=2), dict(pa=1.5), dict(alpha=-1.0), dict(max_fes=0),
                                    dict(seed=-1), dict(checkpoint_stride=0)])
    def test_invalid(self, kw):
        args = dict(np=10, max_fes=100) | kw
        with pytest.raises((ValueError, TypeError)):
            CSConfig(**args)

    def test_round_trip(self):
        c = CSConfig(np=7, max_fes=99, dist=make_variant("csp"), seed=5, checkpoint_stride=3)
        assert CSConfig.from_dict(c.to_dict()) == c


class TestWalks:
    def _cfg(self, **kw):
        return CSConfig(np=3, max_fes=10, **kw)

    def test_global_hand_value(self, scripted):
        cfg = self._cfg(dist=DistributionSpec(Kind.WEIBULL, 1.0, 0.5))
        u = global_walk(Nest(np.array([2.0]), 4.0), Nest(np.array([1.0]), 1.0), cfg,
                        scripted(uniforms=[math.exp(-1)]))
        assert u[0] == pytest.approx(2.005, abs=1e-15)

    def test_global_at_best_is_identity(self):
        x = np.array([1.0, -2.0, 3.0])
        u = global_walk(Nest(x, 0.0), Nest(x, 0.0), self._cfg(), RandomStream(1))
        assert np.array_equal(u, x)

    def test_global_zero_alpha(self):
        x = np.array([1.0, -2.0])
        u = global_walk(Nest(x, 0.0), Nest(np.zeros(2), 0.0), self._cfg(alpha=0.0), RandomStream(1))
        assert np.array_equal(u, x)

    def test_global_clamps(self):
        cfg = self._cfg(dist=DistributionSpec(Kind.PARETO, 1.0, 1e6))
        u = global_walk(Nest(np.array([1.0]), 0.0), Nest(np.array([0.0]), 0.0), cfg, RandomStream(1),
                        bounds=(np.array([-5.0]), np.array([5.0])))
        assert u[0] == 5.0

    def test_local_hand_value(self, scripted):
        u = local_walk(Nest(np.array([0.0]), 0.0), Nest(np.array([3.0]), 0.0), Nest(np.array([1.0]), 0.0),
                       self._cfg(), scripted(uniforms=[0.5, 0.1]))
        assert u[0] == 1.0

    def test_local_gate_closed(self, scripted):
        u = local_walk(Nest(np.array([0.0]), 0.0), Nest(np.array([3.0]), 0.0), Nest(np.array([1.0]), 0.0),
                       self._cfg(), scripted(uniforms=[0.5, 0.9]))
        assert u[0] == 0.0

    def test_local_gate_at_pa_is_open(self, scripted):
        u = local_walk(Nest(np.array([0.0]), 0.0), Nest(np.array([3.0]), 0.0), Nest(np.array([1.0]), 0.0),
                       self._cfg(), scripted(uniforms=[0.5, 0.25]))
        assert u[0] == 1.0

    def test_local_equal_partners(self):
        x = np.array([1.0, 2.0])
        p = Nest(np.array([5.0, 5.0]), 0.0)
        assert np.array_equal(local_walk(Nest(x, 0.0), p, p, self._cfg(), RandomStream(2)), x)

    def test_local_scalar_mode(self, scripted):
        cfg = self._cfg(local_per_dimension=False)
        u = local_walk(Nest(np.zeros(3), 0.0), Nest(np.full(3, 2.0), 0.0), Nest(np.zeros(3), 0.0),
                       cfg, scripted(uniforms=[0.5, 0.1]))
        assert np.array_equal(u, np.ones(3))

    def test_greedy(self):
        p = bench.get_problem("F_sph", 1)
        cur = Nest(np.array([2.0]), 4.0)
        nxt, inc = greedy_select(cur, np.array([1.0]), p)
        assert (nxt.fitness, nxt.position[0], inc) == (1.0, 1.0, 1)
        same, inc = greedy_select(cur, np.array([-2.0]), p)
        assert same is cur and inc == 1

    @settings(max_examples=50, deadline=None)
    @given(st.integers(3, 40), st.integers(0, 2**32 - 1))
    def test_partners_distinct(self, n, seed):
        j, k = cuckoo._partners(RandomStream(seed), n)
        i = np.arange(n)
        assert np.all((i != j) & (i != k) & (j != k))
        assert np.all((j >= 0) & (j < n) & (k >= 0) & (k < n))


class TestInitialize:
    def test_box(self):
        p = FunctionProblem(lambda x: float(np.sum(x)), [0, 0], [1, 1])
        nests = initialize(p, CSConfig(np=5, max_fes=50), RandomStream(0))
        assert len(nests) == 5
        assert all(np.all((n.position >= 0) & (n.position <= 1)) for n in nests)

    def test_deterministic(self):
        p = bench.get_problem("F_sph", 10)
        a = initialize(p, CSConfig(np=30, max_fes=50, seed=4), RandomStream(4))
        b = initialize(p, CSConfig(np=30, max_fes=50, seed=4), RandomStream(4))
        assert all(np.array_equal(x.position, y.position) and x.fitness == y.fitness for x, y in zip(a, b))
        assert all(n.fitness >= 0 for n in a)


class TestAgainstSequentialOracle:
    @pytest.mark.parametrize("variant", cuckoo.VARIANTS)
    @pytest.mark.parametrize("per_dim", [True, False])
    @pytest.mark.parametrize("name,dim,np_,budget", [("F_sph", 5, 6, 1237), ("F_ras", 3, 4, 801),
                                                     ("F_sch", 4, 5, 555)])
    def test_bit_identical(self, variant, per_dim, name, dim, np_, budget):
        p = bench.get_problem(name, dim)
        cfg = CSConfig(np=np_, max_fes=budget, dist=make_variant(variant), seed=3,
                       local_per_dimension=per_dim)
        rec = run(p, cfg)
        best, fes, trace = naive_run(p, cfg)
        assert rec.final_best.fitness == best
        assert rec.fes_used == fes == budget
        assert rec.trajectory == trace


class TestRun:
    def test_budget_equal_np(self):
        p = bench.get_problem("F_sph", 4)
        cfg = CSConfig(np=8, max_fes=8, seed=2)
        rec = run(p, cfg)
        init = initialize(p, cfg, RandomStream(2))
        assert rec.final_best.fitness == min(n.fitness for n in init)
        assert rec.fes_used == 8
        assert rec.trajectory == [(8, rec.final_best.fitness)]

    def test_deterministic(self):
        p = bench.get_problem("F_ack", 6)
        cfg = CSConfig(np=6, max_fes=2000, dist=make_variant("csml"), seed=9)
        a, b = run(p, cfg), run(p, cfg)
        assert a.to_dict() == b.to_dict() and a.trajectory == b.trajectory

    def test_seed_changes_result(self):
        p = bench.get_problem("F_ack", 6)
        a = run(p, CSConfig(np=6, max_fes=2000, seed=1))
        b = run(p, CSConfig(np=6, max_fes=2000, seed=2))
        assert a.final_best.fitness != b.final_best.fitness
        assert a.config_fingerprint == b.config_fingerprint

    def test_init_hook_elitism(self):
        p = bench.get_problem("F_ros", 5)
        rec = run(p, CSConfig(np=5, max_fes=200, seed=0), init=np.ones((1, 5)))
        assert rec.final_best.fitness == 0.0
        assert np.array_equal(rec.final_best.position, np.ones(5))

    def test_sphere_converges(self):
        p = bench.get_problem("F_sph", 10)
        rec = run(p, CSConfig(np=30, max_fes=100_000, seed=0))
        assert rec.final_error <= 1e-10

    def test_exponential_steps_with_unit_ml(self, monkeypatch):
        seen = []
        real = htdist.sample

        def tap(spec, stream, size=None):
            out = real(spec, stream, size)
            seen.append(np.ravel(out))
            return out

        monkeypatch.setattr(cuckoo.htdist, "sample", tap)
        p = bench.get_problem("F_sph", 5)
        run(p, CSConfig(np=10, max_fes=6000, dist=DistributionSpec(Kind.MITTAG_LEFFLER, 1.0, 4.5), seed=1))
        steps = np.concatenate(seen)
        assert np.all(steps >= 0)
        assert sps.kstest(steps, "expon", args=(0, 4.5)).statistic < 0.03

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(3, 8), st.integers(1, 400),
           st.sampled_from(cuckoo.VARIANTS), st.sampled_from(["F_sph", "F_ras", "F_sch", "F_grw"]))
    def test_invariants(self, seed, np_, extra, variant, name):
        p = bench.get_problem(name, 4)
        evaluated = []
        cfg = CSConfig(np=np_, max_fes=np_ + extra, dist=make_variant(variant), seed=seed, checkpoint_stride=3)
        rec = run(p, cfg, callback=evaluated.append)
        pts = np.vstack(evaluated)
        assert np.all(pts >= p.lower) and np.all(pts <= p.upper)
        assert rec.fes_used == cfg.max_fes
        values = [v for _, v in rec.trajectory]
        assert all(b <= a for a, b in zip(values, values[1:]))
        assert rec.trajectory[-1] == (rec.fes_used, rec.final_best.fitness)
        assert all(f % 3 == 0 for f, _ in rec.trajectory[:-1])
        init_best = min(n.fitness for n in initialize(p, cfg, RandomStream(seed)))
        assert rec.final_best.fitness <= init_best
        assert p.evaluate(rec.final_best.position) == rec.final_best.fitness


class TestEstimator:
    def test_params_and_clone(self):
        est = CuckooSearch(variant="csw", max_fes=500, random_state=3)
        assert clone(est).get_params() == est.get_params()

    def test_fit_callable(self):
        est = CuckooSearch(n_nests=10, max_fes=3000, random_state=1)
        est.fit(lambda x: float(np.sum((x - 0.5) ** 2)), bounds=([-2] * 3, [2] * 3))
        assert est.n_fes_ == 3000
        assert est.best_fitness_ < 1e-3
        curve = est.convergence_curve()
        assert curve.shape[1] == 2 and curve[-1, 0] == 3000

    def test_fit_vectorized(self):
        est = CuckooSearch(n_nests=10, max_fes=1000, random_state=1)
        est.fit(lambda X: np.sum(X * X, axis=1), bounds=([-1] * 2, [1] * 2), vectorized=True)
        assert est.best_fitness_ < 1e-3

    def test_fit_problem_defaults(self):
        est = CuckooSearch(max_fes=400).fit(bench.get_problem("F_sph", 10))
        assert est.record_.fes_used == 400
        assert len(est.record_.trajectory) == 400 // 30 + 1

    def test_callable_needs_bounds(self):
        with pytest.raises(ValueError):
            CuckooSearch().fit(lambda x: 0.0)

    def test_default_np(self):
        assert cuckoo.default_np(10) == 30 and cuckoo.default_np(30) == 30 and cuckoo.default_np(50) == 50
