mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::Rng;
use rfselect::classifier::{predict, NnBackend};
use rfselect::objective::{h_closed, h_direct};
use rfselect::optimizer::{greedy_lazy, greedy_naive, SelectionResult};
use rfselect::ped::{ped, set_distance, DescriptorSet, ReceptiveField, NUM_CELLS};
use rfselect::pipeline::{classify_queries, pools_from_selections, select_category, SelectionFile};
use rfselect::synth::{self, run_demo, DemoParams};
use rfselect::{CenterBias, ImageDescriptors, Objective, ObjectiveParams, Rect, RunConfig};

use common::{random_bias, random_graph, random_groups, random_subset, rng, toy_image, write_toy_dataset};

type Outcome = std::result::Result<String, String>;
type Check = fn() -> Outcome;

fn random_params(rng: &mut impl Rng) -> ObjectiveParams {
    let tau = 5.0 - 4.0 * rng.random::<f64>();
    ObjectiveParams::new(tau, rng.random_range(0.0..=100.0), rng.random_range(0.0..=10.0)).unwrap()
}

fn closed_form_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(1);
    let mut worst = 0.0f64;
    let mut checked = 0;
    for _ in 0..500 {
        let m = rng.random_range(1..=12);
        let g = random_graph(&mut rng, m);
        let params = ObjectiveParams::new(5.0 - 4.0 * rng.random::<f64>(), 0.0, 0.0).unwrap();
        let mut sets = vec![Vec::new(), (0..m).collect::<Vec<_>>()];
        for _ in 0..30 {
            let p = rng.random();
            sets.push(random_subset(&mut rng, m, p));
        }
        for set in sets {
            let mass: f64 = set.iter().map(|&i| g.row_sum(i)).sum();
            let diff = (h_direct(&g, &params, &set).unwrap() - h_closed(&params, mass)).abs();
            worst = worst.max(diff);
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    let detail = format!("{checked} subsets on 500 graphs, max |direct - closed| = {worst:.2e}, {elapsed:.2?}");
    if worst <= 1e-9 && elapsed < Duration::from_secs(5) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn diminishing_returns() -> Outcome {
    let mut rng = rng(2);
    let mut violations = 0;
    let mut triples = 0;
    while triples < 10_000 {
        let m = rng.random_range(2..=12);
        let g = random_graph(&mut rng, m);
        let groups = random_groups(&mut rng, m);
        let bias = random_bias(&mut rng, m);
        let obj = Objective::new(&g, &groups, &bias, random_params(&mut rng)).unwrap();
        let p = rng.random();
        let b = random_subset(&mut rng, m, p);
        let outside: Vec<usize> = (0..m).filter(|i| !b.contains(i)).collect();
        if outside.is_empty() {
            continue;
        }
        let a: Vec<usize> = b.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        let x = outside[rng.random_range(0..outside.len())];
        let ga = obj.marginal_gain(&obj.state_for(&a).unwrap(), x).unwrap();
        let gb = obj.marginal_gain(&obj.state_for(&b).unwrap(), x).unwrap();
        if ga < gb - 1e-12 || gb < -1e-12 {
            violations += 1;
        }
        triples += 1;
    }
    let detail = format!("{triples} triples, {violations} violations");
    if violations == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn best_of_size(obj: &Objective<'_>, k: usize) -> f64 {
    let m = obj.size();
    (0u32..1 << m)
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| {
            let set: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            obj.evaluate(&set).unwrap()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn greedy_guarantee() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(3);
    let bound = 1.0 - (-1.0f64).exp();
    let mut violations = 0;
    let mut worst_ratio = f64::INFINITY;
    for _ in 0..200 {
        let m = rng.random_range(1..=12);
        let k = rng.random_range(1..=4.min(m));
        let g = random_graph(&mut rng, m);
        let groups = random_groups(&mut rng, m);
        let bias = random_bias(&mut rng, m);
        let obj = Objective::new(&g, &groups, &bias, random_params(&mut rng)).unwrap();
        let greedy = *greedy_lazy(&obj, k).unwrap().objective_trace.last().unwrap();
        let opt = best_of_size(&obj, k);
        if greedy < bound * opt {
            violations += 1;
        }
        if opt > 0.0 {
            worst_ratio = worst_ratio.min(greedy / opt);
        }
    }
    let elapsed = start.elapsed();
    let detail = format!("200 instances, {violations} violations, worst greedy/opt = {worst_ratio:.4}, {elapsed:.2?}");
    if violations == 0 && elapsed < Duration::from_secs(30) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn same_selection(a: &SelectionResult, b: &SelectionResult) -> bool {
    a.chosen == b.chosen && a.gains == b.gains && a.objective_trace == b.objective_trace
}

fn lazy_matches_naive() -> Outcome {
    let mut rng = rng(4);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let m = rng.random_range(1..=40);
        let k = rng.random_range(1..=m);
        let g = random_graph(&mut rng, m);
        let groups = random_groups(&mut rng, m);
        let bias = random_bias(&mut rng, m);
        let obj = Objective::new(&g, &groups, &bias, random_params(&mut rng)).unwrap();
        if !same_selection(&greedy_lazy(&obj, k).unwrap(), &greedy_naive(&obj, k).unwrap()) {
            mismatches += 1;
        }
    }

    let inst = synth::generate(synth::DEFAULT_SEED, synth::DEFAULT_PER_CLUSTER, synth::DEFAULT_STD).unwrap();
    let d = DemoParams::default();
    let g = inst.similarity_graph(d.sigma).unwrap();
    let bias = CenterBias::zeros(inst.len());
    let obj = Objective::new(&g, &inst.clusters, &bias, ObjectiveParams::new(d.tau, d.lambda1, 0.0).unwrap()).unwrap();
    let lazy = greedy_lazy(&obj, d.k).unwrap();
    let naive = greedy_naive(&obj, d.k).unwrap();
    let ratio = lazy.evaluations as f64 / naive.evaluations as f64;
    let detail = format!(
        "1000 instances, {mismatches} mismatches; synthetic evaluations lazy {} / naive {} = {ratio:.3} (needs < 0.5)",
        lazy.evaluations, naive.evaluations
    );
    if mismatches == 0 && same_selection(&lazy, &naive) && ratio < 0.5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn per_group(chosen: &[usize], group_of: impl Fn(usize) -> usize, n: usize) -> Vec<usize> {
    let mut counts = vec![0; n];
    for &c in chosen {
        counts[group_of(c)] += 1;
    }
    counts
}

fn balance() -> Outcome {
    let mut failures = Vec::new();
    let mut report = Vec::new();

    let inst = synth::generate(synth::DEFAULT_SEED, synth::DEFAULT_PER_CLUSTER, synth::DEFAULT_STD).unwrap();
    let g = inst.similarity_graph(rfselect::ped::DEFAULT_SIGMA).unwrap();
    let bias = CenterBias::zeros(inst.len());
    let obj = Objective::new(&g, &inst.clusters, &bias, ObjectiveParams::new(2.0, 100.0, 0.0).unwrap()).unwrap();
    let n = inst.clusters.num_groups();
    for (k, want) in [(n, None), (2 * n, Some(2))] {
        let counts = per_group(&greedy_lazy(&obj, k).unwrap().chosen, |c| inst.clusters.group_of(c), n);
        let ok = counts.iter().all(|&c| c >= 1 && want.is_none_or(|w| c == w));
        report.push(format!("synthetic K={k} {counts:?}"));
        if !ok {
            failures.push(format!("synthetic K={k}"));
        }
    }

    for (n, seed) in [(3usize, 10u64), (5, 20), (8, 30)] {
        let images: Vec<ImageDescriptors> =
            (0..n).map(|i| toy_image(&format!("img{i}"), 0, seed + i as u64, 12, 6, 48)).collect();
        for (k, want) in [(n, None), (2 * n, Some(2))] {
            let cfg = RunConfig {
                lambda1: Some(100.0),
                k: Some(k),
                scales: vec![0.5, 0.8],
                anchors: 3,
                ..RunConfig::default()
            };
            let run = select_category("toy", &images, &cfg).unwrap();
            let counts = per_group(&run.result.chosen, |c| run.pool.groups.group_of(c), n);
            let ok = counts.iter().all(|&c| c >= 1 && want.is_none_or(|w| c == w));
            report.push(format!("toy N={n} K={k} {counts:?}"));
            if !ok {
                failures.push(format!("toy N={n} K={k}"));
            }
        }
    }
    let detail = report.join("; ");
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("unbalanced: {}; {detail}", failures.join(", ")))
    }
}

fn synthetic_demo() -> Outcome {
    let inst = synth::generate(synth::DEFAULT_SEED, synth::DEFAULT_PER_CLUSTER, synth::DEFAULT_STD).unwrap();
    let out = run_demo(&inst, &DemoParams { gain_field: true, ..DemoParams::default() }).unwrap();
    let radius = |p: usize| inst.points[p].0.hypot(inst.points[p].1);
    let population = (0..inst.len()).map(radius).sum::<f64>() / inst.len() as f64;
    let chosen = &out.selection.chosen;
    let selected = chosen.iter().map(|&p| radius(p)).sum::<f64>() / chosen.len() as f64;

    let mut traces: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for row in out.gain_field.unwrap() {
        if let Some(g) = row.gain {
            traces.entry(row.point).or_default().push(g);
        }
    }
    let increasing = traces.values().filter(|t| t.windows(2).any(|w| w[1] > w[0])).count();
    let detail = format!(
        "selected {chosen:?}, mean radius selected {selected:.4} vs population {population:.4}; {increasing} of {} gain traces increase",
        traces.len()
    );
    if selected < population && increasing == 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_field(rng: &mut impl Rng, dim: usize) -> ReceptiveField {
    let cells = (0..NUM_CELLS)
        .map(|_| {
            let n = rng.random_range(0..=4);
            let vs: Vec<Vec<f64>> = (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let mut set = DescriptorSet::empty(dim);
            for v in &vs {
                set.push(v).unwrap();
            }
            set
        })
        .collect();
    ReceptiveField::new(Rect { x0: 0, y0: 0, w: 16, h: 16 }, cells).unwrap()
}

fn ped_axioms() -> Outcome {
    let mut rng = rng(7);
    let mut asymmetric = 0;
    let mut nonzero_self = 0;
    for _ in 0..1000 {
        let a = random_field(&mut rng, 4);
        let b = random_field(&mut rng, 4);
        if ped(&a, &b, 1.0).unwrap() != ped(&b, &a, 1.0).unwrap() {
            asymmetric += 1;
        }
        if ped(&a, &a, 1.0).unwrap() != 0.0 || ped(&b, &b, 1.0).unwrap() != 0.0 {
            nonzero_self += 1;
        }
    }

    let set = |vs: &[[f64; 2]]| DescriptorSet::from_vectors(vs).unwrap();
    let mut worked = vec![
        set_distance(&set(&[[0.0, 0.0]]), &set(&[[1.0, 0.0]]), 1.0).unwrap(),
        set_distance(&set(&[[0.0, 0.0], [2.0, 0.0]]), &set(&[[1.0, 0.0]]), 1.0).unwrap(),
        set_distance(&set(&[[1.0, 0.0]]), &set(&[[0.0, 0.0], [2.0, 0.0]]), 1.0).unwrap(),
        set_distance(&DescriptorSet::empty(2), &set(&[[3.0, 4.0]]), 1.0).unwrap(),
    ];
    let unit = |x: f64| {
        let cells = (0..NUM_CELLS).map(|_| set(&[[x, 0.0]])).collect();
        ReceptiveField::new(Rect { x0: 0, y0: 0, w: 16, h: 16 }, cells).unwrap()
    };
    let total = ped(&unit(0.0), &unit(1.0), 1.0).unwrap();
    let worked_err = worked.iter().map(|d| (d - 1.0).abs()).fold((total - 29.0).abs(), f64::max);
    let identical = set_distance(&set(&[[0.3, 0.1], [0.2, 0.9]]), &set(&[[0.2, 0.9], [0.3, 0.1]]), 1.0).unwrap();
    let both_empty = set_distance(&DescriptorSet::empty(2), &DescriptorSet::empty(2), 1.0).unwrap();
    worked.push(total);

    let detail = format!(
        "1000 pairs: {asymmetric} asymmetric, {nonzero_self} nonzero self-distances; worked examples {worked:?}, max error {worked_err:.1e}"
    );
    if asymmetric == 0 && nonzero_self == 0 && worked_err <= 1e-12 && identical == 0.0 && both_empty == 0.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn classifier_oracle() -> Outcome {
    let cfg = RunConfig { scales: vec![0.5, 0.8], anchors: 2, k: Some(30), ..RunConfig::default() };
    let mut categories = Vec::new();
    let mut selections = SelectionFile::default();
    for c in 0..2 {
        let name = format!("class{c}");
        let images: Vec<ImageDescriptors> =
            (0..30).map(|i| toy_image(&format!("c{c}_train{i}"), c, (c * 1000 + i) as u64, 12, 6, 48)).collect();
        selections.categories.push(select_category(&name, &images, &cfg).unwrap().selection);
        categories.push((name, images));
    }
    let pools = pools_from_selections(&categories, &selections).unwrap();

    let mut queries = Vec::new();
    let mut labels = Vec::new();
    for c in 0..2 {
        for i in 0..20 {
            queries.push(toy_image(&format!("c{c}_query{i}"), c, (c * 1000 + 500 + i) as u64, 12, 6, 48));
            labels.push(Some(format!("class{c}")));
        }
    }
    let brute = classify_queries(&pools, &queries, &labels, &cfg).unwrap();
    let kd = classify_queries(&pools, &queries, &labels, &RunConfig { kd_tree: true, ..cfg.clone() }).unwrap();
    let direct_kd =
        predict(&queries[0], &pools.clone().with_backend(NnBackend::KdTree), &rfselect::pipeline::predict_params(&cfg))
            .unwrap();
    let identical = brute.predictions == kd.predictions && direct_kd == brute.predictions[0];
    let accuracy = brute.accuracy.unwrap_or(0.0);
    let detail = format!(
        "{} queries, accuracy {:.1}%, brute force and KD-tree identical: {identical}",
        queries.len(),
        accuracy * 100.0
    );
    if accuracy == 1.0 && identical {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn run_pipeline(dir: &Path) -> std::result::Result<(), String> {
    let bin = env!("CARGO_BIN_EXE_rfselect");
    write_toy_dataset(dir, 2, 4, 3, true);
    fs::write(dir.join("run.toml"), "scales = [0.5, 0.8]\nanchors = 3\nseed = 42\n").unwrap();
    let steps: [&[&str]; 3] = [
        &["synth", "--out", "synth"],
        &["select", "--manifest", "manifest.toml", "--out", "sel"],
        &["classify", "--manifest", "manifest.toml", "--selections", "sel/selection.json", "--out", "cls"],
    ];
    for args in steps {
        let out = Command::new(bin).current_dir(dir).arg("--config").arg("run.toml").args(args).output().unwrap();
        if !out.status.success() {
            return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
        }
    }
    Ok(())
}

fn outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for sub in ["synth", "sel", "cls"] {
        for entry in fs::read_dir(dir.join(sub)).unwrap() {
            let path = entry.unwrap().path();
            files.insert(format!("{sub}/{}", path.file_name().unwrap().to_string_lossy()), fs::read(&path).unwrap());
        }
    }
    files
}

fn determinism() -> Outcome {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_pipeline(a.path())?;
    run_pipeline(b.path())?;
    let (fa, fb) = (outputs(a.path()), outputs(b.path()));
    let differing: Vec<&String> = fa.keys().filter(|k| fa.get(*k) != fb.get(*k)).collect();
    let detail = format!("{} output files, {} differ {differing:?}", fa.len(), differing.len());
    if differing.is_empty() && fa.len() == fb.len() && fa.len() >= 9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, Check); 9] = [
        ("AC1", "closed-form equivalence", closed_form_equivalence),
        ("AC2", "monotone diminishing returns", diminishing_returns),
        ("AC3", "greedy approximation bound", greedy_guarantee),
        ("AC4", "lazy greedy equals naive greedy", lazy_matches_naive),
        ("AC5", "balance across images", balance),
        ("AC6", "synthetic demo", synthetic_demo),
        ("AC7", "PED metric axioms", ped_axioms),
        ("AC8", "classifier toy oracle", classifier_oracle),
        ("AC9", "determinism", determinism),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        match check() {
            Ok(detail) => println!("[PASS] {id} {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {id} {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
