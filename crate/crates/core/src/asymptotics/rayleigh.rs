use crate::error::{RelayError, Result};
use crate::transceiver::SystemDims;

/// Exponential orders `γ_1 <= … <= γ_p` of the nonzero eigenvalues of
/// `(GH)ᴴGH` for the product of `G: n x l` and `H: l x m`, where an eigenvalue
/// behaves like `ρ^{−γ_k}`. `p = min(l, m, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentVector {
    c: Vec<f64>,
    l: usize,
    m: usize,
    n: usize,
}

impl ExponentVector {
    pub fn new(c: Vec<f64>, (l, m, n): (usize, usize, usize)) -> Result<Self> {
        if l == 0 || m == 0 || n == 0 {
            return Err(RelayError::InvalidDims(format!("product channel dims must be positive, got ({l},{m},{n})")));
        }
        let p = l.min(m).min(n);
        if c.len() != p {
            return Err(RelayError::InvalidDims(format!("expected {p} exponents, got {}", c.len())));
        }
        if c.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || c.windows(2).any(|w| w[0] > w[1]) {
            return Err(RelayError::OutOfRange(format!("exponents must be nonnegative and nondecreasing: {c:?}")));
        }
        Ok(Self { c, l, m, n })
    }

    /// Exponents of the end-to-end channel `G H` of a relay system:
    /// `l = N_R`, `m = N_S`, `n = N_D`.
    pub fn for_relay(c: Vec<f64>, dims: SystemDims) -> Result<Self> {
        Self::new(c, (dims.n_r(), dims.n_s(), dims.n_d()))
    }

    pub fn values(&self) -> &[f64] {
        &self.c
    }

    pub fn triplet(&self) -> (usize, usize, usize) {
        (self.l, self.m, self.n)
    }
}

/// `θ(c)`: the exponent of the joint eigenvalue density, a linear form in `c`.
pub fn rayleigh_exponent(ev: &ExponentVector) -> f64 {
    coefficients(ev.l, ev.m, ev.n).iter().zip(&ev.c).map(|(a, g)| a * g).sum()
}

/// Coefficients of `θ` for `(l, m, n)`, one per exponent.
///
/// Three regimes: `l < min(m, n)`, `min(m, n) <= l <= max(m, n)` and
/// `l > max(m, n)`.
pub(crate) fn coefficients(l: usize, m: usize, n: usize) -> Vec<f64> {
    let (l, m, n) = (l as i64, m as i64, n as i64);
    let p_bar = m.min(n);
    let q_bar = m.max(n);
    let gap = (m - n).abs();
    let p = l.min(p_bar);
    let mut out = vec![0i64; p as usize];
    let mut set = |k: i64, v: i64| out[(k - 1) as usize] = v;

    if l <= q_bar {
        let head = l - gap;
        for k in 1..=head {
            set(k, p_bar + 1 - 2 * k + (l + k + gap).div_euclid(2));
        }
        for k in (head + 1).max(1)..=p {
            set(k, p_bar + l + 1 - 2 * k);
        }
    } else {
        let head = q_bar - (l - p_bar);
        for k in 1..=head {
            set(k, p_bar + 1 - 2 * k + (q_bar + k + l - p_bar).div_euclid(2));
        }
        for k in (head + 1).max(1)..=p_bar {
            set(k, m + n + 1 - 2 * k);
        }
    }
    out.into_iter().map(|v| v as f64).collect()
}

/// Step of the local refinement around the best candidate.
const REFINE_STEP: f64 = 1e-3;

/// Brute-force infimum of `θ` over the outage event where the `i` largest
/// exponents are at least one and the rest lie in `[0, 1]`.
///
/// Searches every monotone `{0, 1}` vertex, a coarse monotone grid over
/// `{0, ½, 1, 3/2, 2}`, then walks coordinate-wise in steps of `1e-3` from the
/// best point until nothing improves.
pub fn drt_infimum_oracle(dims: SystemDims, i: usize) -> Result<f64> {
    let p = dims.n();
    if i == 0 || i > p {
        return Err(RelayError::OutOfRange(format!("outage index must be in 1..={p}, got {i}")));
    }
    let coef = coefficients(dims.n_r(), dims.n_s(), dims.n_d());
    let theta = |c: &[f64]| coef.iter().zip(c).map(|(a, g)| a * g).sum::<f64>();
    let feasible = |c: &[f64]| {
        c.windows(2).all(|w| w[0] <= w[1])
            && c.iter().enumerate().all(|(k, &g)| if k >= p - i { g >= 1.0 } else { (0.0..=1.0).contains(&g) })
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |c: Vec<f64>| {
        if feasible(&c) {
            let v = theta(&c);
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, c));
            }
        }
    };
    for levels in [&[0.0, 1.0][..], &[0.0, 0.5, 1.0, 1.5, 2.0][..]] {
        let mut idx = vec![0usize; p];
        loop {
            consider(idx.iter().map(|&j| levels[j]).collect());
            if !advance(&mut idx, levels.len()) {
                break;
            }
        }
    }
    let (mut value, mut point) = best.expect("the all-ones vector is always feasible");

    loop {
        let mut improved = false;
        for k in 0..p {
            for step in [-REFINE_STEP, REFINE_STEP] {
                let mut trial = point.clone();
                trial[k] += step;
                if feasible(&trial) {
                    let v = theta(&trial);
                    if v < value - 1e-12 {
                        value = v;
                        point = trial;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok(value)
}

fn advance(idx: &mut [usize], base: usize) -> bool {
    for d in idx.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}
