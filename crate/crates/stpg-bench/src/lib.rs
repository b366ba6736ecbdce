//! Nothing lives here: this crate only exists to host the criterion
//! benchmarks under `benches/`.
