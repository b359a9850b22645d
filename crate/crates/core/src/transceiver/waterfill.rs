//! Relay power allocation for the MMSE transceiver.
//!
//! Minimises `Σ_k 1 / (p_k λ_{g,k} + 1/λ_{y,k})` subject to
//! `Σ_k p_k λ_{y,k} = P_R`, `p_k >= 0`. The KKT conditions give
//! `p_k = (ν √a_k − 1)⁺ / a_k` with `a_k = λ_{y,k} λ_{g,k}`.

/// Active-set handling of the allocation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WaterfillRule {
    /// Exact KKT solution.
    #[default]
    Clamped,
    /// Solves for `ν` over every stream with `a_k > 0` and skips the `(·)⁺`
    /// clamp. Wrong by construction; kept to check that the invariant battery
    /// catches a broken allocation.
    #[doc(hidden)]
    Unclamped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waterfill {
    /// `|φ̂_k|²`, in the input order.
    pub phi_sq: Vec<f64>,
    /// Water level `ν`.
    pub nu: f64,
    /// Number of streams receiving power.
    pub active: usize,
}

/// Exact waterfilling over `min(len)` streams.
///
/// Streams are ranked by `a_k` and each prefix is tried as the active set with
/// its closed-form level `ν_j = (P + Σ 1/λ_g) / Σ √(λ_y/λ_g)`; the largest
/// prefix whose weakest member stays above water is the KKT solution.
pub fn mmse_waterfill(lambda_y: &[f64], lambda_g: &[f64], p_r: f64, rule: WaterfillRule) -> Waterfill {
    let k = lambda_y.len().min(lambda_g.len());
    let a: Vec<f64> = (0..k).map(|i| lambda_y[i] * lambda_g[i]).collect();
    let mut order: Vec<usize> = (0..k).filter(|&i| a[i] > 0.0).collect();
    order.sort_by(|&i, &j| a[j].total_cmp(&a[i]));

    let level = |set: &[usize]| {
        let inv_g: f64 = set.iter().map(|&i| 1.0 / lambda_g[i]).sum();
        let root: f64 = set.iter().map(|&i| (lambda_y[i] / lambda_g[i]).sqrt()).sum();
        (p_r + inv_g) / root
    };

    let mut phi_sq = vec![0.0; k];
    if order.is_empty() {
        return Waterfill { phi_sq, nu: 0.0, active: 0 };
    }

    let nu = match rule {
        WaterfillRule::Unclamped => {
            let nu = level(&order);
            for &i in &order {
                phi_sq[i] = (nu * a[i].sqrt() - 1.0) / a[i];
            }
            return Waterfill { phi_sq, nu, active: order.len() };
        }
        WaterfillRule::Clamped => (1..=order.len())
            .rev()
            .map(|j| (j, level(&order[..j])))
            .find(|&(j, nu)| nu * a[order[j - 1]].sqrt() > 1.0)
            .map(|(_, nu)| nu)
            .unwrap_or_else(|| bisect_level(lambda_y, &a, &order, p_r)),
    };

    let mut active = 0;
    for &i in &order {
        let p = (nu * a[i].sqrt() - 1.0).max(0.0) / a[i];
        if p > 0.0 {
            active += 1;
        }
        phi_sq[i] = p;
    }
    Waterfill { phi_sq, nu, active }
}

fn allocated(lambda_y: &[f64], a: &[f64], order: &[usize], nu: f64) -> f64 {
    order.iter().map(|&i| lambda_y[i] * (nu * a[i].sqrt() - 1.0).max(0.0) / a[i]).sum()
}

// Only reached if round-off makes every prefix test fail at a tie.
fn bisect_level(lambda_y: &[f64], a: &[f64], order: &[usize], p_r: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0 / a[order[0]].sqrt();
    while allocated(lambda_y, a, order, hi) < p_r {
        hi *= 2.0;
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if allocated(lambda_y, a, order, mid) < p_r {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
