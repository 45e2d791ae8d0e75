use mddn_core::numerics::Tensor;
fn main() {
    // f32 GEMM through the public matmul
    for &(m, k, n) in &[(64usize, 288usize, 1024usize), (32, 32, 4096), (156, 1404, 4096)] {
        let a = Tensor::<f32>::full(&[m, k], 0.5);
        let b = Tensor::<f32>::full(&[k, n], 0.25);
        let t0 = std::time::Instant::now();
        let mut reps = 0u32;
        while t0.elapsed().as_secs_f64() < 0.5 {
            let c = mddn_core::numerics::matmul(&a, &b).unwrap();
            std::hint::black_box(c);
            reps += 1;
        }
        let secs = t0.elapsed().as_secs_f64();
        let gflops = (2.0 * m as f64 * k as f64 * n as f64 * reps as f64) / secs / 1e9;
        println!("f32 {m}x{k}x{n}: {gflops:.2} GFLOP/s ({reps} reps)");
    }
    let (m, k, n) = (64usize, 288usize, 1024usize);
    let a = Tensor::<f64>::full(&[m, k], 0.5);
    let b = Tensor::<f64>::full(&[k, n], 0.25);
    let t0 = std::time::Instant::now();
    let mut reps = 0u32;
    while t0.elapsed().as_secs_f64() < 0.5 {
        let c = mddn_core::numerics::matmul(&a, &b).unwrap();
        std::hint::black_box(c);
        reps += 1;
    }
    let secs = t0.elapsed().as_secs_f64();
    let gflops = (2.0 * m as f64 * k as f64 * n as f64 * reps as f64) / secs / 1e9;
    println!("f64 {m}x{k}x{n}: {gflops:.2} GFLOP/s");
}
