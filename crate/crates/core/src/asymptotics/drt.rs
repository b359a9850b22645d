use serde::Serialize;

use super::check_rate;
use crate::error::Result;
use crate::transceiver::SystemDims;

/// Snapping distance for treating `N_S 2^{−2R/N_S}` as an integer.
const INTEGER_SNAP: f64 = 1e-9;

/// Lower and upper bounds on the diversity at a fixed rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DrtBounds {
    pub lower: f64,
    pub upper: f64,
    /// `m` (MMSE transceiver) or `n` (naive relaying).
    pub index_arg: f64,
    pub lower_index: usize,
    pub upper_index: usize,
    /// The rate sits on a jump of the staircase, where the bounds differ.
    pub discontinuity: bool,
}

impl DrtBounds {
    pub fn is_tight(&self) -> bool {
        self.lower == self.upper
    }
}

/// `D_ME(i) = min(i(N_R + N_S − 2M + i), (N_R − M + i)(N_D − M + i)⁺)`, `D_ME(0) = 0`.
pub fn d_me(dims: SystemDims, i: usize) -> f64 {
    if i == 0 {
        return 0.0;
    }
    let (ns, nr, nd) = (dims.n_s() as i64, dims.n_r() as i64, dims.n_d() as i64);
    let (m, i) = (dims.m() as i64, i as i64);
    let first = i * (nr + ns - 2 * m + i);
    let second = (nr - m + i) * (nd - m + i).max(0);
    first.min(second) as f64
}

/// `D_N-ME(i) = i(Y − N + i) − ⌊((i − (Z − Y))⁺)² / 4⌋` over the sorted triple
/// `N <= Y <= Z`, with `D_N-ME(0) = 0`.
pub fn d_n_me(dims: SystemDims, i: usize) -> f64 {
    if i == 0 {
        return 0.0;
    }
    let mut t = [dims.n_s(), dims.n_r(), dims.n_d()].map(|v| v as i64);
    t.sort_unstable();
    let [n, y, z] = t;
    let i = i as i64;
    let excess = (i - (z - y)).max(0);
    (i * (y - n + i) - excess * excess / 4) as f64
}

/// DRT bounds of the MMSE transceiver at rate `R` (b/s/Hz, joint encoding).
pub fn drt_mmse_tx(dims: SystemDims, rate: f64) -> Result<DrtBounds> {
    check_rate(rate)?;
    let (shift, jump) = staircase_shift(dims, rate);
    let m = shift + dims.m() as f64 - dims.n_s() as f64;
    Ok(bounds(m, jump, |i| d_me(dims, i)))
}

/// DRT bounds of naive relaying with an MMSE receiver at rate `R`.
pub fn drt_naive(dims: SystemDims, rate: f64) -> Result<DrtBounds> {
    check_rate(rate)?;
    let (shift, jump) = staircase_shift(dims, rate);
    let n = shift + dims.n() as f64 - dims.n_s() as f64;
    Ok(bounds(n, jump, |i| d_n_me(dims, i)))
}

/// `N_S 2^{−2R/N_S}`, snapped to an integer when within [`INTEGER_SNAP`].
fn staircase_shift(dims: SystemDims, rate: f64) -> (f64, bool) {
    let ns = dims.n_s() as f64;
    let s = ns * (-2.0 * rate / ns).exp2();
    let nearest = s.round();
    if (s - nearest).abs() <= INTEGER_SNAP {
        (nearest, true)
    } else {
        (s, false)
    }
}

fn bounds(arg: f64, discontinuity: bool, d: impl Fn(usize) -> f64) -> DrtBounds {
    let lower_index = arg.max(0.0).ceil() as usize;
    let upper_index = (arg + 1.0).max(0.0).floor() as usize;
    DrtBounds {
        lower: d(lower_index),
        upper: d(upper_index),
        index_arg: arg,
        lower_index,
        upper_index,
        discontinuity,
    }
}
