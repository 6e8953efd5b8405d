use dcone::solver::{solve, GridSpec, SolveConfig};
use dcone::solutions::{build_mu, Arrangement};
fn main() {
    let pair = dcone::NormalizedPair::canonical().as_pair();
    let mu = build_mu(0.9, 1.8, Arrangement::IDENTITY).unwrap();
    for omega in [1.5, 1.8, 1.9] {
        let field = solve(&pair, GridSpec::new(65, 1.0).unwrap(), &|x, y| mu.value([x, y]),
            &SolveConfig { omega, ..Default::default() }).unwrap();
        let h = &field.meta.residual_history;
        let mut worst: f64 = 0.0;
        let mut worst_at = 0;
        for (i, w) in h.windows(2).enumerate() {
            if w[1] - w[0] > worst { worst = w[1] - w[0]; worst_at = i; }
        }
        println!("omega={omega}: sweeps={} final={:.2e} worst increase={:.3e} at sweep {} (res there {:.3e})",
            h.len(), h.last().unwrap(), worst, worst_at, h[worst_at]);
    }
}
