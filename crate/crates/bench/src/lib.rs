//! Criterion benchmarks for sumsetlab; run with `cargo bench -p sumsetlab-bench`.
