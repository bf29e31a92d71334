//! Generated SQL, the executor and the reference interpreter agree on random plans.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vca_core::eval_plan;
use vca_core::sqlgen::{compile_with, SqlOptions};
use vca_testkit::gen::{random_catalog, random_plan, Bounds};
use vca_testkit::{bag_diff, reference_eval, sqlite, Table};

const TOL: f64 = 1e-9;

fn check(seed: u64, opts: SqlOptions) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cat = random_catalog(&mut rng, Bounds::default());
    let plan = random_plan(&mut rng, &cat, Bounds::default());
    let ours = Table::from(&eval_plan(&plan, &cat).unwrap());
    let reference = reference_eval(&plan, &cat).unwrap();
    if let Some(d) = bag_diff(&reference, &ours, TOL) {
        panic!("seed {seed}: executor vs reference\n{plan}\n{d}");
    }
    let sql = compile_with(&plan, &cat, opts).unwrap();
    let got = sqlite::run(&cat, &sql.text).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", sql.text));
    if let Some(d) = bag_diff(&ours, &got, TOL) {
        panic!("seed {seed}: executor vs sqlite\n{plan}\n{}\n{d}", sql.text);
    }
}

#[test]
fn sql_matches_executor_full_outer() {
    for seed in 0..300 {
        check(seed, SqlOptions::default());
    }
}

#[test]
fn sql_matches_executor_without_full_outer() {
    for seed in 1000..1300 {
        check(seed, SqlOptions { full_outer_join: false });
    }
}
