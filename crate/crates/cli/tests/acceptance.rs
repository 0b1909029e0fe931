//! Acceptance suite. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion does. Run with `--nocapture` to see the lines
//! as they are produced.

use std::collections::HashMap;
use std::time::Instant;

use rand::Rng;
use rwre_cli::run::STATS_FILE;
use rwre_cli::{run, ExperimentConfig, RunOptions, Scenario};
use rwre_core::continuum::{sample_excursion, stick_breaking, CodedTree, GaussianField, GaussianFieldSampler};
use rwre_core::env1d::{self, Environment1D, EnvironmentLaw};
use rwre_core::errw::{self, SinhEnvironment, SinhSampler, SinhStats, SinhTable};
use rwre_core::harness::{line_scaling_replication, localization_stat, LineScalingConfig};
use rwre_core::rng::{seeded, stream};
use rwre_core::rwre_tree::{self as rt, SpeedMotion, TreeConductances, TreeMetricMeasure};
use rwre_core::stats::{chi_square_gof, ks_one_sample_pvalue, ks_two_sample_pvalue, mean_var, median, variance_std_error};
use rwre_core::treecore::{embed_brw, GaussianSteps, sample_gw_conditioned, OffspringDistribution, OrderedTree, DEFAULT_GW_ATTEMPTS};

type Outcome = Result<String, String>;

/// Relative agreement to machine precision.
fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

/// `|x - target| / se`, for reporting.
fn z(x: f64, target: f64, se: f64) -> f64 {
    (x - target).abs() / se
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_conductances<R: Rng>(t: &OrderedTree, rng: &mut R) -> TreeConductances {
    let mut c: Vec<f64> = (0..t.n()).map(|_| (2.0 * rng.random::<f64>() - 1.0).exp()).collect();
    c[t.root()] = 1.0;
    TreeConductances::new(t, c).unwrap()
}

fn gw_tree<R: Rng>(n: usize, planted: bool, rng: &mut R) -> OrderedTree {
    sample_gw_conditioned(&OffspringDistribution::geometric(), n, DEFAULT_GW_ATTEMPTS, rng)
        .unwrap()
        .with_planted(planted)
}

fn exact_algebra() -> Outcome {
    let mut rng = seeded(1001);
    let mut checks = 0usize;

    // line: V(0) = 0, flat environment, detailed balance, additivity
    let flat = Environment1D::from_log_rho(-50, 50, vec![0.0; 101]).unwrap();
    let v = env1d::potential1d(&flat);
    for x in -49..=50 {
        ensure(env1d::invariant1d(&v, x).unwrap() == 2.0, || format!("flat ν({x}) ≠ 2"))?;
        ensure(env1d::resistance1d(&v, 0, x).unwrap() == x.abs() as f64, || format!("flat r(0,{x}) ≠ |x|"))?;
        checks += 2;
    }
    for _ in 0..20 {
        let env = Environment1D::sample(&EnvironmentLaw::LogNormal { sigma: 1.0 }, -100, 100, &mut rng).unwrap();
        let v = env1d::potential1d(&env);
        ensure(v.value(0).unwrap() == 0.0, || "V(0) ≠ 0 on the line".into())?;
        for x in -99..99 {
            let (nx, ny) = (env1d::invariant1d(&v, x).unwrap(), env1d::invariant1d(&v, x + 1).unwrap());
            let right = v.rightward_probability(x).unwrap();
            let left = 1.0 - v.rightward_probability(x + 1).unwrap();
            ensure(close(nx * right, ny * left), || format!("line detailed balance at {x}"))?;
            checks += 1;
        }
        for _ in 0..20 {
            let mut p = [rng.random_range(-100..=100i64), rng.random_range(-100..=100), rng.random_range(-100..=100)];
            p.sort();
            let r = |a, b| env1d::resistance1d(&v, a, b).unwrap();
            ensure(close(r(p[0], p[2]), r(p[0], p[1]) + r(p[1], p[2])), || format!("line additivity at {p:?}"))?;
            checks += 1;
        }
    }

    // trees: detailed balance, four-point condition, unit conductances
    for n in [5usize, 20, 60] {
        let t = gw_tree(n, true, &mut rng);
        let c = random_conductances(&t, &mut rng);
        let v = rt::tree_potential(&c);
        ensure(v.value(t.root()) == 0.0, || "tree V(ρ) ≠ 0".into())?;
        for x in 0..=t.n() {
            let nx = rt::tree_invariant(&v, x).unwrap();
            for (y, cxy) in c.neighbors(x) {
                let ny = rt::tree_invariant(&v, y).unwrap();
                let cyx = c.neighbors(y).into_iter().find(|&(z, _)| z == x).unwrap().1;
                let lhs = nx * cxy / c.vertex_conductance(x);
                let rhs = ny * cyx / c.vertex_conductance(y);
                ensure(close(lhs, rhs), || format!("tree detailed balance on {x}-{y}"))?;
                checks += 1;
            }
        }
        let r = |a, b| rt::tree_resistance(&v, a, b).unwrap();
        for _ in 0..200 {
            let q: Vec<usize> = (0..4).map(|_| rng.random_range(0..=t.n())).collect();
            let lhs = r(q[0], q[1]) + r(q[2], q[3]);
            let rhs = (r(q[0], q[2]) + r(q[1], q[3])).max(r(q[0], q[3]) + r(q[1], q[2]));
            ensure(lhs <= rhs * (1.0 + 1e-12), || format!("four-point condition at {q:?}"))?;
            let b = rt::branch_point(&t, q[0], q[1], q[2]);
            ensure(close(r(q[0], q[1]), r(q[0], b) + r(b, q[1])), || "tree additivity through the branch point".into())?;
            checks += 2;
        }
        let unit = rt::tree_potential(&TreeConductances::unit(&t));
        for u in 0..t.n() {
            let d = t.depth(u) as f64 + if t.is_planted() { 1.0 } else { 0.0 };
            ensure(rt::tree_resistance(&unit, t.n(), u).unwrap() == d, || "unit tree resistance ≠ graph distance".into())?;
            checks += 1;
        }
    }

    // potential identity for biased conductances, and φ path additivity
    for (n, beta) in [(30usize, 1.5), (100, 3.0)] {
        let t = gw_tree(n, true, &mut rng);
        let marks = embed_brw(&t, &GaussianSteps::isotropic(2, 1.0).unwrap(), &mut rng).unwrap();
        let gamma = rt::weak_bias_exponent(n);
        let c = rt::biased_conductances(&t, &marks, beta, gamma, None).unwrap();
        let v = rt::tree_potential(&c);
        for u in 0..t.n() {
            if let Some(p) = t.parent(u) {
                let delta = marks.first(u) - marks.first(p);
                let expect = -beta.ln() * gamma * (marks.first(p) + delta.max(0.0));
                ensure(close(v.value(u), expect), || format!("potential identity at {u}"))?;
            }
            let along: f64 = t.ancestry(u).iter().map(|&a| marks.increment(a)[1]).sum();
            ensure(close(marks.position(u)[1], along), || format!("φ path additivity at {u}"))?;
            checks += 2;
        }
    }

    // ERRW counters and U path additivity
    for n in [3usize, 12, 40] {
        let t = gw_tree(n, false, &mut rng);
        let alpha0 = vec![1.5; t.n()];
        let (path, state) = errw::simulate_errw(&t, &alpha0, t.root(), 500, &mut rng).unwrap();
        let mut crossings = vec![0usize; t.n()];
        for s in path.windows(2) {
            crossings[if t.parent(s[1]) == Some(s[0]) { s[1] } else { s[0] }] += 1;
        }
        for u in (0..t.n()).filter(|&u| u != t.root()) {
            ensure(state.counter(u) == 1.5 + crossings[u] as f64, || format!("ERRW counter at {u}"))?;
            checks += 1;
        }
        let env = SinhEnvironment::sample(&t, &alpha0, &SinhSampler::default(), &mut rng).unwrap();
        for u in 0..t.n() {
            let along: f64 = t.ancestry(u).iter().filter(|&&a| a != t.root()).map(|&a| env.omega(a)).sum();
            ensure(close(env.field(u), along), || format!("U path additivity at {u}"))?;
            checks += 1;
        }
    }
    Ok(format!("{checks} identities"))
}

fn jump_rate_anchor() -> Outcome {
    let mut worst = 0.0f64;
    for n in [16usize, 64, 256] {
        let mut rng = seeded(2000 + n as u64);
        let t = gw_tree(n, true, &mut rng);
        let marks = embed_brw(&t, &GaussianSteps::isotropic(2, 1.0).unwrap(), &mut rng).unwrap();
        let c = rt::biased_conductances(&t, &marks, 3.0, rt::weak_bias_exponent(n), None).unwrap();
        let mm = TreeMetricMeasure::new(rt::tree_potential(&c)).weakly_biased();
        let target = (n as f64).powf(1.5);
        for x in 0..=t.n() {
            let rel = (mm.total_rate(x) - target).abs() / target;
            worst = worst.max(rel);
            ensure(rel <= 1e-12, || format!("n = {n}, vertex {x}: rate {} vs {target}", mm.total_rate(x)))?;
        }
    }
    Ok(format!("max relative error {worst:.1e}"))
}

fn inverse_gamma_moments() -> Outcome {
    let a0 = 50.0;
    let draws = 100_000;
    let t = OrderedTree::path(2, false).unwrap();
    let mut rng = seeded(3001);
    let inv: Vec<f64> = (0..draws)
        .map(|_| 1.0 / errw::sample_gamma_weights(&t, &[1.0, a0], &mut rng).unwrap()[1])
        .collect();
    let (m, v) = mean_var(&inv);
    let em = 1.0 / (a0 - 1.0);
    // inverse gamma with shape a0 and scale 1
    let ev = 1.0 / ((a0 - 1.0) * (a0 - 1.0) * (a0 - 2.0));
    let zm = z(m, em, (v / draws as f64).sqrt());
    let zv = z(v, ev, variance_std_error(&inv));
    let detail = format!("mean {m:.6} vs {em:.6} ({zm:.2} SE), var {v:.3e} vs {ev:.3e} ({zv:.2} SE)");
    if zm <= 3.0 && zv <= 4.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Mean and variance of the sinh density by the composite Simpson rule.
fn sinh_moments(alpha: f64) -> (f64, f64) {
    let half = 40.0 / alpha.sqrt() + 10.0;
    let k = 200_000;
    let h = 2.0 * half / k as f64;
    let mut m = [0.0; 3];
    for i in 0..=k {
        let x = -half + i as f64 * h;
        let w = if i == 0 || i == k { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let d = w * errw::sinh_log_density(alpha, x).exp();
        m[0] += d;
        m[1] += d * x;
        m[2] += d * x * x;
    }
    let mean = m[1] / m[0];
    (mean, m[2] / m[0] - mean * mean)
}

fn sinh_sampler() -> Outcome {
    let mut rng = seeded(4001);
    let sampler = SinhSampler::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for alpha in [10.0, 100.0] {
        let mut st = SinhStats::default();
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sampler.sample_with_stats(alpha, &mut rng, &mut st).unwrap())
            .collect();
        let rate = st.accepted as f64 / st.proposals as f64;
        let bound = (-1.0 / (8.0 * alpha)).exp();
        let zr = z(rate, bound, (bound * (1.0 - bound) / st.proposals as f64).sqrt());
        let (m, v) = mean_var(&xs);
        let (qm, qv) = sinh_moments(alpha);
        let se_m = (v / xs.len() as f64).sqrt();
        let se_v = variance_std_error(&xs);
        // 1/(2α) and 1/α are leading terms; the exact moments differ by
        // O(1/α²), which is added to the tolerance
        let mean_ok = (m - 0.5 / alpha).abs() <= 4.0 * se_m + (qm - 0.5 / alpha).abs();
        let var_ok = (v - 1.0 / alpha).abs() <= 4.0 * se_v + (qv - 1.0 / alpha).abs();
        let table = SinhTable::new(alpha);
        let ks: Vec<f64> = (0..10_000).map(|_| sampler.sample(alpha, &mut rng).unwrap()).collect();
        let (_, p) = ks_one_sample_pvalue(&ks, |x| table.cdf(x)).unwrap();
        ok &= zr <= 3.0 && mean_ok && var_ok && p > 0.01;
        parts.push(format!(
            "α={alpha}: rate {rate:.5} ({zr:.2} SE from {bound:.5}), mean {m:.5} ({:.2} SE from exact), var {v:.5} ({:.2} SE from exact), KS p={p:.3}",
            z(m, qm, se_m),
            z(v, qv, se_v)
        ));
    }
    let detail = parts.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sabot_tarres() -> Outcome {
    let t = OrderedTree::path(3, false).unwrap();
    let alpha0 = vec![2.0; 3];
    let steps = 4;
    let samples = 100_000;
    let exact = errw::exact_law(&t, &alpha0, t.root(), steps).unwrap();
    let index: HashMap<Vec<usize>, usize> = exact.iter().enumerate().map(|(k, (p, _))| (p.clone(), k)).collect();
    let expected: Vec<f64> = exact.iter().map(|(_, p)| p * samples as f64).collect();
    let mut rng = seeded(5001);
    let mut mix = vec![0u64; exact.len()];
    let mut urn = vec![0u64; exact.len()];
    let sampler = SinhSampler::default();
    for _ in 0..samples {
        let env = SinhEnvironment::sample(&t, &alpha0, &sampler, &mut rng).unwrap();
        mix[index[&errw::simulate_mixture(&env, t.root(), steps, &mut rng).unwrap()]] += 1;
        urn[index[&errw::simulate_errw(&t, &alpha0, t.root(), steps, &mut rng).unwrap().0]] += 1;
    }
    let pm = chi_square_gof(&mix, &expected).unwrap().p_value;
    let pu = chi_square_gof(&urn, &expected).unwrap().p_value;
    let detail = format!("{} paths; mixture p={pm:.3}, reinforced walk p={pu:.3}", exact.len());
    if pm > 0.01 && pu > 0.01 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn stationarity() -> Outcome {
    // 1000 independent chains of 999 or 1000 steps (10⁶ steps in all); the
    // endpoint of each is one draw from ν, so the counts are multinomial
    let mut rng = seeded(6001);
    let t = gw_tree(20, true, &mut rng);
    let marks = embed_brw(&t, &GaussianSteps::isotropic(2, 1.0).unwrap(), &mut rng).unwrap();
    let c = rt::biased_conductances(&t, &marks, 4.0, rt::weak_bias_exponent(20), None).unwrap();
    let v = rt::tree_potential(&c);
    let net = t.n() + 1;
    let nu: Vec<f64> = (0..net).map(|x| rt::tree_invariant(&v, x).unwrap()).collect();
    let total: f64 = nu.iter().sum();
    let walk = rt::DiscreteWalk::new(&c);
    let chains = 1000;
    let mut counts = vec![0u64; net];
    for _ in 0..chains {
        let steps = if rng.random::<bool>() { 999 } else { 1000 };
        let mut x = t.root();
        for _ in 0..steps {
            x = walk.step(x, &mut rng);
        }
        counts[x] += 1;
    }
    let expected: Vec<f64> = nu.iter().map(|w| chains as f64 * w / total).collect();
    let test = chi_square_gof(&counts, &expected).unwrap();
    let detail = format!("chi-square {:.2} on {} df, p={:.3}", test.statistic, test.df, test.p_value);
    if test.p_value > 0.01 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn brownian_on_trees() -> Outcome {
    let mut rng = seeded(7001);
    let runs = 100_000;
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [3usize, 6, 10] {
        let t = gw_tree(n, true, &mut rng);
        let c = random_conductances(&t, &mut rng);
        let mm = TreeMetricMeasure::new(rt::tree_potential(&c)).rescaled(0.7, 1.3);
        let motion = SpeedMotion::new(&mm);
        let net = mm.len();

        // hitting: P(hit u1 before u2 from u3) = r(b, u2) / r(u1, u2)
        let (u1, u2, u3) = (t.n(), net - 2, (net - 2) / 2);
        let b = rt::branch_point(&t, u1, u2, u3);
        let p = mm.resistance(b, u2).unwrap() / mm.resistance(u1, u2).unwrap();
        let hits = (0..runs).filter(|_| motion.hits_first(u3, u1, u2, &mut rng)).count();
        let emp = hits as f64 / runs as f64;
        let zh = z(emp, p, (p * (1.0 - p) / runs as f64).sqrt().max(1e-12));

        // occupation of u3 before hitting u2 from u1: 2 r(b, u2) ν(u3)
        let (u1, u2, u3) = (net - 2, t.n(), t.root());
        let b = rt::branch_point(&t, u1, u2, u3);
        let expect = 2.0 * mm.resistance(b, u2).unwrap() * mm.nu(u3);
        let mut occ = vec![0.0; net];
        let times: Vec<f64> = (0..runs)
            .map(|_| {
                occ.iter_mut().for_each(|x| *x = 0.0);
                motion.occupation_before_hit(u1, u2, &mut occ, &mut rng);
                occ[u3]
            })
            .collect();
        let (m, var) = mean_var(&times);
        let zo = z(m, expect, (var / runs as f64).sqrt());
        ok &= zh <= 3.0 && zo <= 4.0;
        parts.push(format!("tree of {n}: hitting {zh:.2} SE, occupation {zo:.2} SE"));
    }
    let detail = parts.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn crt_cross_construction() -> Outcome {
    let mut rng = seeded(8001);
    let draws = 10_000;
    // a stick-breaking leaf is a mass-measure point of the tree coded by 2e
    let a: Vec<f64> = (0..draws)
        .map(|_| {
            let t = stick_breaking(&mut rng, 20).unwrap();
            t.tip_depth(rng.random_range(0..20))
        })
        .collect();
    let n = 10_000;
    let b: Vec<f64> = (0..draws)
        .map(|_| 2.0 * sample_excursion(n, &mut rng).unwrap().value(rng.random_range(0..n)))
        .collect();
    let (d, p) = ks_two_sample_pvalue(&a, &b).unwrap();
    let cuts = 100_000;
    let c1: Vec<f64> = (0..cuts).map(|_| stick_breaking(&mut rng, 1).unwrap().cuts()[0]).collect();
    let mut ok = p > 0.01;
    let mut tails = Vec::new();
    for u in [0.5f64, 1.0, 2.0] {
        let q = (-u * u / 2.0).exp();
        let obs = c1.iter().filter(|&&c| c > u).count() as f64 / cuts as f64;
        let zu = z(obs, q, (q * (1.0 - q) / cuts as f64).sqrt());
        ok &= zu <= 3.0;
        tails.push(format!("u={u}: {zu:.2} SE"));
    }
    let detail = format!("KS D={d:.4} p={p:.3}; first-cut tail {}", tails.join(", "));
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn field_covariance() -> Outcome {
    let mut rng = seeded(9001);
    let n = 1000;
    let t = CodedTree::new(sample_excursion(n, &mut rng).unwrap());
    let mut times = Vec::new();
    while times.len() < 10 {
        let i = rng.random_range(1..n);
        if t.root_distance(i) > 0.05 {
            times.push(i);
        }
    }
    let sampler = GaussianFieldSampler::new(&t, &times).unwrap();
    let draws = 10_000;
    let fields: Vec<GaussianField> = (0..draws).map(|_| sampler.sample(1, None, &mut rng).unwrap()).collect();
    let mut worst = 0.0f64;
    for k in 0..5 {
        let (a, b) = (2 * k, 2 * k + 1);
        let prod: Vec<f64> = fields.iter().map(|f| f.value(a)[0] * f.value(b)[0]).collect();
        let (m, v) = mean_var(&prod);
        let expected = t.excursion().min_between(times[a], times[b]);
        worst = worst.max(z(m, expected, (v / draws as f64).sqrt()));
    }
    let detail = format!("worst pair {worst:.2} SE");
    if worst <= 4.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn line_trend() -> Outcome {
    let cfg = LineScalingConfig::default();
    let reps = 20;
    let mut ks = vec![Vec::new(); cfg.ladder.len()];
    let mut gh = vec![Vec::new(); cfg.ladder.len()];
    for r in 0..reps {
        let records = line_scaling_replication(&cfg, &mut stream(10_001, r as u64)).map_err(|e| e.to_string())?;
        for (k, rec) in records.iter().enumerate() {
            ks[k].push(rec.ks);
            gh[k].push(rec.bound.total);
        }
    }
    let mk: Vec<f64> = ks.iter().map(|x| median(x)).collect();
    let mg: Vec<f64> = gh.iter().map(|x| median(x)).collect();
    let ks_ok = mk.windows(2).all(|w| w[1] <= w[0]);
    let gh_ok = mg.windows(2).all(|w| w[1] < w[0]);
    let fmt = |xs: &[f64]| xs.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" > ");
    let detail = format!("m = {:?}: median KS {}, median bound {}", cfg.ladder, fmt(&mk), fmt(&mg));
    if ks_ok && gh_ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn localization() -> Outcome {
    let envs = 20;
    let walkers = 200;
    let law = EnvironmentLaw::LogNormal { sigma: 1.0 };
    let mut wins = 0;
    for k in 0..envs {
        let env = Environment1D::sample(&law, -20_000, 20_000, &mut stream(11_001, k)).unwrap();
        let mut rng = stream(11_002, k);
        let small = localization_stat(&env, 1_000, walkers, &mut rng).map_err(|e| e.to_string())?;
        let large = localization_stat(&env, 1_000_000, walkers, &mut rng).map_err(|e| e.to_string())?;
        if large < small {
            wins += 1;
        }
    }
    let detail = format!("spread smaller at n = 10⁶ in {wins} of {envs} environments");
    if wins >= 14 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn drifted_potential() -> Outcome {
    let n = 10_000;
    let mut rng = seeded(12_001);
    let t = gw_tree(n, false, &mut rng);
    let a0 = errw::default_weights(n).unwrap();
    let target_depth = (n as f64).sqrt().floor() as usize;
    let u = (0..n)
        .find(|&u| t.depth(u) == target_depth)
        .ok_or_else(|| format!("tree of height {} has no vertex at depth {target_depth}", t.height()))?;
    let alpha0 = vec![a0; n];
    let draws = 10_000;
    let sampler = SinhSampler::default();
    let xs: Vec<f64> = (0..draws)
        .map(|_| errw::sample_field_at(&t, &alpha0, u, &sampler, &mut rng).unwrap())
        .collect();
    let (m, v) = mean_var(&xs);
    let depth = target_depth as f64;
    let em = depth / (n as f64).sqrt();
    let ev = 2.0 * em;
    let zm = z(m, em, (v / draws as f64).sqrt());
    let zv = z(v, ev, variance_std_error(&xs));
    let detail = format!(
        "α₀={a0}, depth {target_depth}: mean {m:.4} vs {em} ({zm:.2} SE), var {v:.4} vs {ev} ({zv:.2} SE); exact finite-α values {:.4} / {:.4}",
        depth * errw::mixed_omega_mean(a0),
        depth * errw::mixed_omega_variance(a0)
    );
    if zm <= 4.0 && zv <= 4.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn cli_determinism() -> Outcome {
    let mut checked = 0;
    for s in Scenario::ALL {
        let ladder = match s {
            Scenario::Sinai | Scenario::Barriers | Scenario::Brox => vec![10, 50],
            _ => vec![16, 128],
        };
        let mut config = ExperimentConfig::new(s, 13, ladder);
        config.replications = 4;
        let mut outputs = Vec::new();
        for workers in [1, 3, 1] {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            run(&config, &RunOptions { out_dir: dir.path().to_path_buf(), workers }).map_err(|e| e.to_string())?;
            outputs.push(std::fs::read(dir.path().join(STATS_FILE)).map_err(|e| e.to_string())?);
        }
        ensure(!outputs[0].is_empty() && outputs.iter().all(|o| o == &outputs[0]), || {
            format!("{} statistics differ between runs", s.name())
        })?;
        checked += 1;
    }
    Ok(format!("{checked} scenarios, 3 runs each, byte-identical"))
}

#[test]
fn acceptance() {
    type Criterion = (u32, &'static str, f64, fn() -> Outcome);
    let criteria: [Criterion; 13] = [
        (1, "exact algebra", 1.0, exact_algebra),
        (2, "jump-rate anchor", 1.0, jump_rate_anchor),
        (3, "inverse-gamma moments", 10.0, inverse_gamma_moments),
        (4, "sinh-density sampler", 30.0, sinh_sampler),
        (5, "mixture vs reinforcement", 60.0, sabot_tarres),
        (6, "stationarity", 60.0, stationarity),
        (7, "Brownian motion on trees", 300.0, brownian_on_trees),
        (8, "CRT cross-construction", 120.0, crt_cross_construction),
        (9, "Gaussian-field covariance", 120.0, field_covariance),
        (10, "Sinai/Brox trend", 1200.0, line_trend),
        (11, "localization", 600.0, localization),
        (12, "ERRW drifted potential", 600.0, drifted_potential),
        (13, "CLI determinism", 60.0, cli_determinism),
    ];
    let mut failed = Vec::new();
    for (id, name, budget, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        let (mut pass, detail) = match outcome {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        let mut timing = format!("{secs:.2} s of {budget} s");
        if secs > budget {
            pass = false;
            timing.push_str(", over budget");
        }
        println!("criterion {id:>2} {name}: {} ({detail}; {timing})", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed.push(id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
