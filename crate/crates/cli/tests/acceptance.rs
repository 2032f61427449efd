//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Reference values come from brute-force sums written
//! here, independent of the library's table code.

use std::collections::HashMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use closure_core::random::{self, ScenarioKind};
use closure_core::report::identity_case;
use closure_core::{
    conditional_mutual_information, empirical_closure_joint, entropy, estimate_measures, measure,
    mutual_information, sample, scenarios, verify_identities, Bits, ClosureAnalysis, ClosureMeasures,
    FunctionTable, JointDistribution, MarkovScenario, StepKind, StochasticMatrix, SystemPartition, Variable,
    VariableGroup,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

type Outcome = Result<String, String>;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Weighted outcome tuples; the reference representation for every oracle.
struct Cells(Vec<(Vec<usize>, f64)>);

impl Cells {
    fn of(dist: &JointDistribution) -> Self {
        let vars = dist.variables().to_vec();
        Cells(
            dist.iter()
                .map(|(labels, p)| {
                    let idx = labels.iter().zip(&vars).map(|(l, v)| v.index_of(l).unwrap()).collect();
                    (idx, p)
                })
                .collect(),
        )
    }

    fn h(&self, axes: &[usize]) -> f64 {
        let mut m: HashMap<Vec<usize>, f64> = HashMap::new();
        for (o, p) in &self.0 {
            *m.entry(axes.iter().map(|&a| o[a]).collect()).or_insert(0.0) += p;
        }
        m.values().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
    }

    fn mi(&self, x: &[usize], y: &[usize]) -> f64 {
        self.h(x) + self.h(y) - self.h(&cat(x, y))
    }

    fn cmi(&self, x: &[usize], y: &[usize], z: &[usize]) -> f64 {
        self.h(&cat(x, z)) + self.h(&cat(y, z)) - self.h(&cat(&cat(x, y), z)) - self.h(z)
    }
}

fn cat(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect()
}

/// Closure joint over (s, e, s') assembled with explicit loops from the raw
/// kernels. Axes: 0 = s, 1 = e, 2 = s'.
fn closure_cells(sc: &MarkovScenario, n: usize) -> Cells {
    let (ns, ne) = (sc.context_size(), sc.env_size());
    let (c, e) = (sc.context_kernel(), sc.env_kernel());
    let mut pi = sc.initial().mass().to_vec();
    for _ in 0..n {
        let mut next = vec![0.0; ns * ne];
        for (r, &w) in pi.iter().enumerate() {
            for s2 in 0..ns {
                for e2 in 0..ne {
                    next[s2 * ne + e2] += w * c.get(r, s2) * e.get(r, e2);
                }
            }
        }
        pi = next;
    }
    let mut cells = Vec::new();
    for s in 0..ns {
        for ev in 0..ne {
            let r = s * ne + ev;
            for s2 in 0..ns {
                cells.push((vec![s, ev, s2], pi[r] * c.get(r, s2)));
            }
        }
    }
    Cells(cells)
}

fn names_of(group: &VariableGroup, dist: &JointDistribution) -> Vec<usize> {
    group.names().iter().map(|n| dist.position(n).unwrap()).collect()
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn identity_battery() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut checked = 0;
    for k in 0..1000 {
        let (d, x, y, z) = identity_case(0, k);
        let report = verify_identities(&d, &x, &y, z.as_ref(), Bits(TOL)).map_err(|e| e.to_string())?;
        for r in &report.residuals {
            check(r.residual.0 < TOL, || format!("case {k}: {} residual {:e}", r.name, r.residual.0))?;
            worst = worst.max(r.residual.0);
            checked += 1;
        }
        // the quantities themselves against the reference sums
        let cells = Cells::of(&d);
        let (xi, yi) = (names_of(&x, &d), names_of(&y, &d));
        let i = mutual_information(&d, &x, &y).unwrap().0;
        check((i - cells.mi(&xi, &yi)).abs() < TOL, || format!("case {k}: MI {i} vs reference"))?;
        if let Some(z) = &z {
            let zi = names_of(z, &d);
            let c = conditional_mutual_information(&d, &x, &y, z).unwrap().0;
            check((c - cells.cmi(&xi, &yi, &zi)).abs() < TOL, || format!("case {k}: CMI {c} vs reference"))?;
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok(format!("{checked} residuals over 1000 distributions, max {worst:.2e}, {elapsed:.2?}"))
}

fn non_negativity_and_bounds() -> Outcome {
    let mut checked = 0;
    for k in 0..1000 {
        let (d, x, y, z) = identity_case(0, k);
        for v in d.variables() {
            let h = entropy(&d, &VariableGroup::single(v.name())).unwrap().0;
            let cap = (v.cardinality() as f64).log2() + TOL;
            check((0.0..=cap).contains(&h), || format!("case {k}: H({}) = {h}", v.name()))?;
            checked += 1;
        }
        let i = mutual_information(&d, &x, &y).unwrap().0;
        check(i >= -TOL, || format!("case {k}: MI {i}"))?;
        if let Some(z) = &z {
            let c = conditional_mutual_information(&d, &x, &y, z).unwrap().0;
            check(c >= -TOL, || format!("case {k}: CMI {c}"))?;
        }
        checked += 2;
    }
    Ok(format!("{checked} bound checks"))
}

const STEPS: [usize; 4] = [0, 1, 2, 5];

/// 250 decoupled and 250 deterministic-context scenarios.
fn closed_suite() -> impl Iterator<Item = (usize, MarkovScenario)> {
    (0..500).map(|k| {
        let kind = if k % 2 == 0 {
            ScenarioKind::Decoupled
        } else {
            ScenarioKind::DeterministicContext
        };
        (k, random::scenario(&mut rng(1000 + k as u64), kind))
    })
}

fn environment_redundant() -> Outcome {
    let mut worst = 0.0f64;
    for (k, sc) in closed_suite() {
        for n in STEPS {
            let cells = closure_cells(&sc, n);
            let residual = (cells.mi(&[2], &[0, 1]) - cells.mi(&[2], &[0])).abs();
            check(residual < TOL, || format!("scenario {k} step {n}: reference residual {residual:e}"))?;
            let a = ClosureAnalysis::new(sc.closure_joint(n).unwrap());
            let got = a.proposition1(Bits(TOL));
            check(got.passed() == Some(true), || format!("scenario {k} step {n}: {got}"))?;
            worst = worst.max(residual).max(got.residual().unwrap().0);
        }
    }
    Ok(format!("500 scenarios x 4 steps, max residual {worst:.2e}"))
}

fn deterministic_self_information() -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..200u64 {
        let sc = random::scenario(&mut rng(5000 + k), ScenarioKind::DeterministicContext);
        for n in STEPS {
            let cells = closure_cells(&sc, n);
            let residual = (cells.mi(&[2], &[0]) - cells.h(&[2])).abs();
            check(residual < TOL, || format!("scenario {k} step {n}: reference residual {residual:e}"))?;
            let got = ClosureAnalysis::new(sc.closure_joint(n).unwrap()).proposition2(Bits(TOL));
            check(got.passed() == Some(true), || format!("scenario {k} step {n}: {got}"))?;
            worst = worst.max(residual).max(got.residual().unwrap().0);
        }
    }
    Ok(format!("200 scenarios x 4 steps, max residual {worst:.2e}"))
}

fn coupling_lower_bound() -> Outcome {
    let mut min_slack = f64::INFINITY;
    for (k, sc) in closed_suite() {
        for n in STEPS {
            let cells = closure_cells(&sc, n);
            // H(S', S) - H(S', S | E)
            let rhs = cells.h(&[2, 0]) - (cells.h(&[2, 0, 1]) - cells.h(&[1]));
            let slack = cells.mi(&[0], &[1]) - rhs;
            check(slack >= -TOL, || format!("scenario {k} step {n}: reference slack {slack:e}"))?;
            let t = ClosureAnalysis::new(sc.closure_joint(n).unwrap()).theorem(Bits(TOL));
            check(t.satisfied && t.conditioned, || format!("scenario {k} step {n}: {t:?}"))?;
            check((t.slack.0 - slack).abs() < TOL, || format!("scenario {k} step {n}: slack {} vs {slack}", t.slack.0))?;
            min_slack = min_slack.min(slack);
        }
    }
    let mut worst_side = 0.0f64;
    for k in 0..100u64 {
        let sc = random::scenario(&mut rng(7000 + k), ScenarioKind::FullyDecoupled);
        for n in STEPS {
            let t = ClosureAnalysis::new(sc.closure_joint(n).unwrap()).theorem(Bits(TOL));
            let side = t.lhs.0.abs().max(t.rhs.0.abs());
            check(side < TOL, || format!("independent scenario {k} step {n}: {t:?}"))?;
            let m = measure(&sc, n).unwrap();
            check(m.func_closure.0 < TOL, || format!("independent scenario {k} step {n}: {m:?}"))?;
            worst_side = worst_side.max(side);
        }
    }
    Ok(format!(
        "min slack {min_slack:.2e} over 2000 closed cases; independent edge case max |side| {worst_side:.2e}"
    ))
}

fn derivation_chain() -> Outcome {
    let mut worst = 0.0f64;
    let mut inequalities = 0;
    let mut run = |label: &str, sc: &MarkovScenario, n: usize| -> Result<(), String> {
        let steps = ClosureAnalysis::new(sc.closure_joint(n).unwrap()).derivation_chain(Bits(TOL));
        for d in steps {
            check(d.pass, || format!("{label} step {n}: {} = {:e}", d.name, d.value.0))?;
            match d.kind {
                StepKind::Identity => worst = worst.max(d.value.0),
                StepKind::Inequality => inequalities += usize::from(d.applicable),
            }
        }
        Ok(())
    };
    for name in ["copy", "decoupled"] {
        let sc = scenarios::bundled(name).unwrap();
        for n in 0..=5 {
            run(name, &sc, n)?;
        }
    }
    for k in 0..100u64 {
        let kind = if k % 2 == 0 {
            ScenarioKind::Decoupled
        } else {
            ScenarioKind::DeterministicContext
        };
        let sc = random::scenario(&mut rng(9000 + k), kind);
        for n in STEPS {
            run(&format!("random {k}"), &sc, n)?;
        }
    }
    Ok(format!("max identity residual {worst:.2e}, {inequalities} inequalities checked under closure"))
}

/// Random table with up to 12 binary or ternary inputs (at most 20,000
/// rows) whose output depends on a random subset of the inputs.
fn bounded_table(r: &mut ChaCha8Rng, max_arity: usize) -> FunctionTable {
    let arity = r.gen_range(0..=max_arity);
    let mut rows = 1usize;
    let inputs: Vec<Variable> = (0..arity)
        .map(|i| {
            let k = if rows * 3 <= 20_000 && r.gen_bool(0.5) { 3 } else { 2 };
            rows *= k;
            Variable::with_cardinality(format!("x{i}"), k).unwrap()
        })
        .collect();
    let out_card = r.gen_range(2..=3);
    let relevant: Vec<bool> = (0..arity).map(|_| r.gen_bool(0.4)).collect();
    let mut lookup: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut draws: Vec<usize> = Vec::new();
    FunctionTable::from_fn(inputs, Variable::with_cardinality("y", out_card).unwrap(), |digits| {
        let key: Vec<usize> = digits.iter().zip(&relevant).filter(|(_, &on)| on).map(|(&d, _)| d).collect();
        *lookup.entry(key).or_insert_with(|| {
            draws.push(r.gen_range(0..out_card));
            *draws.last().unwrap()
        })
    })
    .unwrap()
}

/// Every subset tested by direct projection; minimal = determining with no
/// determining proper subset.
fn exhaustive_minimal_sets(t: &FunctionTable) -> Vec<Vec<String>> {
    let dims: Vec<usize> = t.inputs().iter().map(Variable::cardinality).collect();
    let n = dims.len();
    let rows = t.rows();
    let digits: Vec<Vec<usize>> = (0..rows.len())
        .map(|mut flat| {
            let mut d = vec![0; n];
            for i in (0..n).rev() {
                d[i] = flat % dims[i];
                flat /= dims[i];
            }
            d
        })
        .collect();
    let mut determining: Vec<u32> = Vec::new();
    for mask in 0u32..1 << n {
        let members: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let size: usize = members.iter().map(|&i| dims[i]).product();
        let mut seen = vec![usize::MAX; size];
        let ok = digits.iter().zip(rows).all(|(d, &y)| {
            let key = members.iter().fold(0, |acc, &i| acc * dims[i] + d[i]);
            let slot = &mut seen[key];
            if *slot == usize::MAX {
                *slot = y;
            }
            *slot == y
        });
        if ok {
            determining.push(mask);
        }
    }
    let mut out: Vec<Vec<String>> = determining
        .iter()
        .filter(|&&m| !determining.iter().any(|&o| o != m && o & m == o))
        .map(|&m| (0..n).filter(|i| m >> i & 1 == 1).map(|i| t.inputs()[i].name().to_owned()).collect())
        .collect();
    out.sort();
    out
}

fn fd_oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut r = rng(11);
    let mut max_arity = 0;
    for k in 0..200 {
        let t = bounded_table(&mut r, 12);
        max_arity = max_arity.max(t.inputs().len());
        let mut got: Vec<Vec<String>> = t
            .minimal_input_sets()
            .map_err(|e| e.to_string())?
            .into_iter()
            .map(|s| s.members)
            .collect();
        got.sort();
        let want = exhaustive_minimal_sets(&t);
        check(got == want, || format!("table {k}: {got:?} vs {want:?}"))?;
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(60), || format!("took {elapsed:?}"))?;
    Ok(format!("200 tables up to {max_arity} inputs, {elapsed:.2?}"))
}

/// Embed `t` as the context dynamics: the system of interest is the output,
/// the inner environment holds the non-environment inputs (or a constant
/// placeholder), the outer environment holds the rest.
fn embed(t: &FunctionTable, env_inputs: &[usize], r: &mut ChaCha8Rng) -> MarkovScenario {
    let n = t.inputs().len();
    let inner_idx: Vec<usize> = (0..n).filter(|i| !env_inputs.contains(i)).collect();
    let mut inner: Vec<Variable> = inner_idx.iter().map(|&i| t.inputs()[i].clone()).collect();
    if inner.is_empty() {
        inner.push(Variable::with_cardinality("u", 1).unwrap());
    }
    let outer: Vec<Variable> = env_inputs.iter().map(|&i| t.inputs()[i].clone()).collect();
    let partition = SystemPartition::new(vec![t.output().clone()], inner.clone(), outer.clone()).unwrap();
    let ns = partition.context_size();
    let ne = partition.env_size();
    let ni: usize = inner.iter().map(Variable::cardinality).product();
    let inner_dims: Vec<usize> = inner.iter().map(Variable::cardinality).collect();
    let outer_dims: Vec<usize> = outer.iter().map(Variable::cardinality).collect();
    let decode = |mut flat: usize, dims: &[usize]| {
        let mut d = vec![0; dims.len()];
        for i in (0..dims.len()).rev() {
            d[i] = flat % dims[i];
            flat /= dims[i];
        }
        d
    };
    let inner_rows: Vec<Vec<f64>> = (0..ns).map(|_| random::simplex(r, ni, true)).collect();
    let env_rows: Vec<Vec<f64>> = (0..ne).map(|_| random::simplex(r, ne, true)).collect();
    let context = StochasticMatrix::from_rows(ns * ne, ns, |row| {
        let (s, e) = (row / ne, row % ne);
        let inner_digits = decode(s % ni, &inner_dims);
        let outer_digits = decode(e, &outer_dims);
        let mut x = vec![0; n];
        for (k, &i) in inner_idx.iter().enumerate() {
            x[i] = inner_digits[k];
        }
        for (k, &i) in env_inputs.iter().enumerate() {
            x[i] = outer_digits[k];
        }
        let y = t.eval(&x);
        let mut out = vec![0.0; ns];
        for (j, q) in inner_rows[s].iter().enumerate() {
            out[y * ni + j] = *q;
        }
        out
    })
    .unwrap();
    let env = StochasticMatrix::from_rows(ns * ne, ne, |row| env_rows[row % ne].clone()).unwrap();
    let initial = random::distribution(r, partition.context_vars())
        .product(&random::distribution(r, outer))
        .unwrap();
    MarkovScenario::new("bridge", partition, initial, context, env).unwrap()
}

fn bridge() -> Outcome {
    let mut r = rng(13);
    let mut closed_tables = 0;
    let mut worst = 0.0f64;
    for k in 0..100 {
        let mut t = bounded_table(&mut r, 6);
        while t.inputs().is_empty() {
            t = bounded_table(&mut r, 6);
        }
        let n = t.inputs().len();
        let mut env_inputs: Vec<usize> = (0..n).filter(|_| r.gen_bool(0.5)).collect();
        if env_inputs.is_empty() {
            env_inputs.push(r.gen_range(0..n));
        }
        let names: Vec<&str> = env_inputs.iter().map(|&i| t.inputs()[i].name()).collect();
        if !t.is_functionally_closed(&names).map_err(|e| e.to_string())?.closed {
            continue;
        }
        closed_tables += 1;
        for trial in 0..10 {
            let sc = embed(&t, &env_inputs, &mut r);
            for step in [0, 1] {
                let fc = measure(&sc, step).unwrap().func_closure.0;
                let reference = closure_cells(&sc, step).mi(&[2], &[1]);
                check(fc < TOL && reference < TOL, || {
                    format!("table {k} trial {trial} step {step}: func_closure {fc:e}, reference {reference:e}")
                })?;
                worst = worst.max(fc);
            }
        }
    }
    check(closed_tables > 0, || "no functionally closed tables drawn".into())?;
    Ok(format!(
        "{closed_tables}/100 tables functionally closed, 10 initial distributions each, max func_closure {worst:.2e}"
    ))
}

fn max_error(a: &ClosureMeasures, b: &ClosureMeasures) -> f64 {
    a.named()
        .iter()
        .zip(b.named().iter())
        .map(|((_, x), (_, y))| (x.0 - y.0).abs())
        .fold(0.0, f64::max)
}

fn estimation_convergence() -> Outcome {
    let sc = scenarios::copy();
    let exact = measure(&sc, 1).unwrap();
    let cells = closure_cells(&sc, 1);
    check((exact.env_coupling.0 - cells.mi(&[0], &[1])).abs() < TOL, || "exact pipeline disagrees with reference".into())?;
    let err = |count: usize, seed: u64| {
        let t = sample(&sc, count, 2, seed).unwrap();
        let est = estimate_measures(&empirical_closure_joint(&t, 1).unwrap()).unwrap();
        max_error(&est.measures, &exact)
    };
    let fixed = err(100_000, 0);
    check(fixed < 0.02, || format!("N=1e5 seed 0: max error {fixed}"))?;
    let mut improved = 0;
    let mut misses = Vec::new();
    for seed in 0..50u64 {
        let (small, large) = (err(1_000, seed), err(100_000, seed));
        if large < small {
            improved += 1;
        } else {
            misses.push(format!("seed {seed}: {large:.2e} >= {small:.2e}"));
        }
    }
    let detail = format!("N=1e5 seed 0 error {fixed:.2e}; smaller error at 1e5 for {improved}/50 seeds");
    check(improved * 100 >= 95 * 50, || format!("{detail} ({})", misses.join("; ")))?;
    Ok(detail)
}

fn run_cli(args: &[&str]) -> Result<(Vec<u8>, i32), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_closure"))
        .args(args)
        .env_remove("CLOSURE_FORMAT")
        .output()
        .map_err(|e| e.to_string())?;
    Ok((out.stdout, out.status.code().unwrap_or(-1)))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let scenario = path("copy.json");
    std::fs::write(&scenario, scenarios::copy().to_json().unwrap()).map_err(|e| e.to_string())?;
    let table = path("table.csv");
    let t = bounded_table(&mut rng(17), 6);
    std::fs::write(&table, t.to_csv().unwrap()).map_err(|e| e.to_string())?;
    let traj = path("traj.csv");
    let (csv, _) = run_cli(&["sample", "--scenario", &scenario, "--count", "2000", "--horizon", "4", "--seed", "9"])?;
    std::fs::write(&traj, csv).map_err(|e| e.to_string())?;
    let env_input = t.inputs().first().map(|v| v.name().to_owned()).unwrap_or_default();

    let commands: Vec<Vec<&str>> = vec![
        vec!["analyze", "--scenario", &scenario, "--step", "1", "--delta", "0.5"],
        vec!["analyze", "--scenario", "builtin:driven", "--step", "1"],
        vec!["analyze", "--scenario", &scenario, "--trajectories", &traj, "--step", "2"],
        vec!["sweep", "--scenario", "builtin:decoupled", "--steps", "0..=10"],
        vec!["sweep", "--scenario", &scenario, "--trajectories", &traj, "--steps", "0..3", "--estimator", "miller-madow"],
        vec!["sample", "--scenario", "builtin:decoupled", "--count", "500", "--horizon", "5", "--seed", "3"],
        vec!["fd", "--table", &table],
        vec!["fd", "--table", &table, "--environment", &env_input],
        vec!["verify"],
        vec!["verify", "--seed", "7"],
    ];
    let mut runs = 0;
    for cmd in &commands {
        for format in ["text", "json"] {
            let mut args = cmd.clone();
            args.extend(["--format", format]);
            let (a, code_a) = run_cli(&args)?;
            let (b, code_b) = run_cli(&args)?;
            check(code_a != 1, || format!("{args:?} exited with an error"))?;
            check(!a.is_empty(), || format!("{args:?} produced no output"))?;
            check(a == b && code_a == code_b, || format!("{args:?} differs between runs"))?;
            runs += 1;
        }
    }
    // --output writes the same bytes
    let out_file = path("report.json");
    let args = ["analyze", "--scenario", &scenario, "--step", "1", "--format", "json"];
    let (stdout, _) = run_cli(&args)?;
    let mut with_output = args.to_vec();
    with_output.extend(["--output", &out_file]);
    run_cli(&with_output)?;
    let written = std::fs::read(Path::new(&out_file)).map_err(|e| e.to_string())?;
    check(written == stdout, || "--output bytes differ from stdout".into())?;
    Ok(format!("{runs} command/format pairs byte-identical across repeated runs"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("identity battery", identity_battery),
        ("non-negativity and bounds", non_negativity_and_bounds),
        ("environment redundant under closure", environment_redundant),
        ("deterministic self-dynamics", deterministic_self_information),
        ("coupling lower bound", coupling_lower_bound),
        ("derivation chain", derivation_chain),
        ("fd oracle equivalence", fd_oracle_equivalence),
        ("fd to information bridge", bridge),
        ("estimation convergence", estimation_convergence),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
