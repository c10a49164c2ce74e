// Degrees of freedom from published (mean, std) summaries.
//
// `cargo run --example table1_dof`

use iris_dof::pipeline::{check_moments, reference_table};
use iris_dof::estimate_dof;

pub fn run_example() -> Result<Vec<u64>, Box<dyn std::error::Error>> {
    let rows = check_moments(&reference_table())?;
    println!("{:>6}  {:>11}  {:>11}  {:>9}  {:>4}", "scale", "mean", "std", "N real", "N");
    for (m, real, dof) in &rows {
        println!(
            "{:>6}  {:>11.9}  {:>11.9}  {real:>9.3}  {dof:>4}",
            m.scale.unwrap_or(f64::NAN),
            m.mean,
            m.std
        );
    }

    // The fit is just N = p(1 - p) / sigma^2, rounded half away from zero.
    let (real, dof) = estimate_dof(0.4 + 0.1, 0.02f64.sqrt())?;
    println!("p = 0.5, sigma^2 = 0.02 -> {real} -> {dof}");
    Ok(rows.iter().map(|r| r.2).collect())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("table example");
}
