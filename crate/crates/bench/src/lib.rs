//! Criterion benchmarks for `sharpineq-core`: closed-form constants in
//! `benches/constants.rs`, quotient evaluation, transport and Monte Carlo in
//! `benches/quotients.rs`.
