fn main() {
    let pair = dcone::NormalizedPair::canonical();
    let sols = dcone::enumerate_double_cones(&pair, -0.6, 0.3).unwrap();
    println!("count = {}", sols.len());
    for (i, s) in sols.iter().enumerate() {
        let desc: Vec<String> = s.pieces.iter().map(|p| format!("[{:.3}+{:.3} {:?} a={:.3} b={:.3}]", p.start, p.width, p.kind, p.form.a, p.form.b)).collect();
        println!("{i}: {}", desc.join(" "));
        let rep = dcone::verify_solution(s, &pair, &Default::default());
        println!("   pass={} c1={:.2e}", rep.pass, rep.max_c1_mismatch);
    }
}
