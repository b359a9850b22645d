use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::ComplexMatrix;

/// Counter-based random stream keyed by `(master_seed, stream_index)`.
///
/// The ChaCha20 key is built from the master seed and a domain word; the
/// stream index selects the ChaCha stream. Two values with the same key and
/// index produce the same sequence on every platform, independent of how trials
/// are scheduled across workers.
#[derive(Debug, Clone)]
pub struct SeededRng {
    master_seed: u64,
    stream_index: u64,
    inner: ChaCha20Rng,
}

impl SeededRng {
    /// Primary stream for trial `stream_index`.
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self::with_domain(master_seed, stream_index, 0)
    }

    /// Reserved stream used when the primary draw of a trial had to be
    /// discarded. `attempt` starts at 1; every attempt gets its own key so it
    /// never overlaps a primary stream.
    pub fn reserved(master_seed: u64, stream_index: u64, attempt: u32) -> Self {
        Self::with_domain(master_seed, stream_index, u64::from(attempt))
    }

    fn with_domain(master_seed: u64, stream_index: u64, domain: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&domain.to_le_bytes());
        let mut inner = ChaCha20Rng::from_seed(key);
        inner.set_stream(stream_index);
        Self { master_seed, stream_index, inner }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Uniform on `[0, 1)`, one 64-bit word per call.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// CN(0, 1) sample via Box–Muller: two uniforms per draw, no rejection.
    pub fn complex_gaussian(&mut self) -> Complex64 {
        let u1 = 1.0 - self.uniform(); // (0, 1]
        let u2 = self.uniform();
        let r = (-u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        Complex64::new(r * c, r * s)
    }
}

/// Draws a `rows x cols` matrix with i.i.d. CN(0, 1) entries, filled row by row.
pub fn sample_channel(rows: usize, cols: usize, rng: &mut SeededRng) -> ComplexMatrix {
    let entries: Vec<Complex64> = (0..rows * cols).map(|_| rng.complex_gaussian()).collect();
    ComplexMatrix::from_row_slice(rows, cols, &entries)
}
