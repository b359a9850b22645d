//! Invariant battery behind `afrelay verify`.

use afrelay::asymptotics::{
    d_n_me, dmt_linear_tx, dmt_naive, dmt_optimal, drt_infimum_oracle, drt_mmse_tx, drt_naive,
};
use afrelay::matcore::{
    frobenius, gram, hermitian_part, hpd_inverse, identity, leading_columns, min_eigenvalue, ComplexMatrix,
    SeededRng,
};
use afrelay::montecarlo::{estimate_outage_with, EngineOptions, Encoding, ExperimentConfig, RatePolicy};
use afrelay::transceiver::{
    design_mmse_relay_with, design_zf_relay, mmse_ecd_covariance, relay_power, ChannelRealization, MmseOptions,
    NaiveGain, PowerBudget, RelayDesign, Scheme, SystemDims, WaterfillRule,
};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use crate::args::{Fault, Level};

pub const DEFAULT_VERIFY_SEED: u64 = 2024;

/// Configurations swept by the matrix checks.
pub const BATTERY_DIMS: [(usize, usize, usize); 5] = [(2, 2, 2), (2, 4, 2), (3, 3, 2), (4, 3, 3), (3, 2, 3)];
pub const BATTERY_RHO: [f64; 3] = [1.0, 1e2, 1e4];

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub cases: u64,
    /// Largest observed violation metric (normalized so that `<= limit` passes).
    pub worst: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &'static str, limit: f64) -> Self {
        Self { name, cases: 0, worst: 0.0, limit, passed: true }
    }

    fn record(&mut self, metric: f64) {
        self.cases += 1;
        if metric.is_nan() || metric > self.limit {
            self.passed = false;
        }
        if metric.is_nan() || metric > self.worst {
            self.worst = metric;
        }
    }

    pub fn line(&self) -> String {
        format!(
            "{}  {:<34} cases={:<8} worst={:<10.3e} limit={:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.cases,
            self.worst,
            self.limit
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BatteryOptions {
    pub level: Level,
    pub fault: Option<Fault>,
    pub seed: u64,
    pub workers: Option<usize>,
}

impl BatteryOptions {
    fn draws(&self) -> u64 {
        match self.level {
            Level::Fast => 50,
            Level::Full => 200,
        }
    }

    fn oracle_max_dim(&self) -> usize {
        match self.level {
            Level::Fast => 4,
            Level::Full => 5,
        }
    }

    fn scalar_trials(&self) -> u64 {
        match self.level {
            Level::Fast => 100_000,
            Level::Full => 1_000_000,
        }
    }
}

pub fn run_battery(opts: BatteryOptions) -> Vec<Check> {
    let mut checks = vec![golden_values()];
    checks.extend(matrix_checks(&opts));
    checks.push(oracle_check(opts.oracle_max_dim()));
    checks.push(scalar_chain_check(opts.scalar_trials(), opts.seed, opts.workers));
    checks
}

fn golden_values() -> Check {
    let d = |a, b, c| SystemDims::new(a, b, c).unwrap();
    let mut c = Check::new("analytic golden values", 0.0);
    let mut expect = |got: f64, want: f64| c.record((got - want).abs());
    expect(dmt_optimal(d(2, 2, 2), 0.0).unwrap(), 4.0);
    expect(dmt_linear_tx(d(2, 4, 2), 0.0).unwrap(), 3.0);
    for r in [0.0, 0.25, 1.0] {
        expect(dmt_linear_tx(d(3, 2, 3), r).unwrap(), 0.0);
    }
    expect(dmt_naive(d(2, 4, 2), 0.0).unwrap(), 1.0);
    let b = drt_mmse_tx(d(3, 3, 2), 0.39).unwrap();
    expect(b.lower, 6.0);
    expect(b.upper, 6.0);
    let b = drt_naive(d(3, 3, 2), 0.39).unwrap();
    expect(b.lower, 5.0);
    expect(b.upper, 5.0);
    for rate in [0.1, 0.4, 0.82] {
        let b = drt_mmse_tx(d(4, 4, 3), rate).unwrap();
        expect(b.lower, 12.0);
        expect(b.upper, 12.0);
    }
    c
}

fn mmse(ch: &ChannelRealization, pw: PowerBudget, dims: SystemDims, fault: Option<Fault>) -> RelayDesign {
    let waterfill = match fault {
        Some(Fault::SkipWaterfillClamp) => WaterfillRule::Unclamped,
        None => WaterfillRule::Clamped,
    };
    design_mmse_relay_with(ch, pw, dims, MmseOptions { waterfill }).expect("MMSE design")
}

fn matrix_checks(opts: &BatteryOptions) -> Vec<Check> {
    let mut ecd = Check::new("MMSE error decomposition", 1e-8);
    let mut first_hop = Check::new("first-hop estimate rho I - R_y >= 0", 1e-10);
    let mut zf_hop = Check::new("ZF relay estimate R_z - rho I >= 0", 1e-10);
    let mut alloc = Check::new("relay allocation nonnegative", 0.0);
    let mut power = Check::new("relay power equals budget", 1e-6);
    let mut zf = Check::new("ZF interference-free", 1e-8);

    let mut stream = 0u64;
    for (ns, nr, nd) in BATTERY_DIMS {
        let dims = SystemDims::new(ns, nr, nd).unwrap();
        for rho in BATTERY_RHO {
            let pw = PowerBudget::standard(rho, dims).unwrap();
            for _ in 0..opts.draws() {
                stream += 1;
                let ch = ChannelRealization::sample(dims, &mut SeededRng::new(opts.seed, stream)).unwrap();
                let d = mmse(&ch, pw, dims, opts.fault);

                let m = dims.m();
                let phi: Vec<f64> = d.params.phi_sq.iter().map(|p| p.max(0.0).sqrt()).collect();
                let b = leading_columns(&ch.eig_g.vectors, m)
                    * afrelay::matcore::diag(&phi)
                    * leading_columns(&ch.eig_h.vectors, m).adjoint();
                let direct = d.r_e.as_ref().unwrap();
                let split = mmse_ecd_covariance(&ch, pw, dims, &b).unwrap();
                ecd.record(frobenius(&(direct - &split)) / frobenius(direct));

                alloc.record(d.params.phi_sq.iter().map(|p| (-p).max(0.0)).fold(0.0, f64::max));
                power.record((relay_power(&ch.h, &d.q, rho) - pw.p_r).abs() / pw.p_r);

                let received = &ch.h * ch.h.adjoint() * Complex64::new(rho, 0.0) + identity(nr);
                let reg = gram(&ch.h) + identity(ns) * Complex64::new(1.0 / rho, 0.0);
                let l = hpd_inverse(&reg, "first-hop Wiener").unwrap() * ch.h.adjoint();
                let r_y = hermitian_part(&(&l * &received * l.adjoint()));
                first_hop.record(-min_eigenvalue(&(scaled_identity(ns, rho) - r_y)).unwrap() / rho);

                if dims.supports_zf() {
                    let l_z = hpd_inverse(&gram(&ch.h), "first-hop Gram").unwrap() * ch.h.adjoint();
                    let r_z = hermitian_part(&(&l_z * &received * l_z.adjoint()));
                    zf_hop.record(-min_eigenvalue(&(r_z - scaled_identity(ns, rho))).unwrap() / rho);

                    let z = design_zf_relay(&ch, pw, dims).unwrap();
                    power.record((relay_power(&ch.h, &z.q, rho) - pw.p_r).abs() / pw.p_r);
                    let composite = z.receive_filter().unwrap().unwrap() * &ch.g * &z.q * &ch.h;
                    zf.record(frobenius(&(composite - identity(ns))));
                }
            }
        }
    }
    vec![ecd, first_hop, zf_hop, alloc, power, zf]
}

fn scaled_identity(n: usize, v: f64) -> ComplexMatrix {
    identity(n) * Complex64::new(v, 0.0)
}

fn oracle_check(max_dim: usize) -> Check {
    let mut c = Check::new("exponent infimum vs closed form", 0.0);
    for ns in 1..=max_dim {
        for nr in 1..=max_dim {
            for nd in 1..=max_dim {
                let dims = SystemDims::new(ns, nr, nd).unwrap();
                for i in 1..=dims.n() {
                    let oracle = drt_infimum_oracle(dims, i).unwrap_or(f64::NAN);
                    c.record((oracle - d_n_me(dims, i)).abs());
                }
            }
        }
    }
    c
}

/// Grid of the scalar-chain comparison, in dB of `ρ`.
pub const SCALAR_GRID_DB: [f64; 3] = [10.0, 20.0, 30.0];

/// Outage probability of `y = g q (h x + n₁) + n₂` at rate `R`, with
/// `|q|² (ρ|h|² + 1) = ρ` and unit-variance complex Gaussian `h`, `g`,
/// simulated on its own generator.
pub fn scalar_chain_outage(rho: f64, rate: f64, trials: u64, seed: u64) -> (u64, u64) {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut gain = || {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        0.5 * (re * re + im * im)
    };
    let mut outages = 0;
    for _ in 0..trials {
        let a = gain();
        let b = gain();
        let q2 = rho / (rho * a + 1.0);
        let sinr = rho * a * b * q2 / (b * q2 + 1.0);
        if 0.5 * (1.0 + sinr).log2() < rate {
            outages += 1;
        }
    }
    (outages, trials)
}

/// Engine estimate for the 1x1x1 MMSE transceiver against the scalar
/// simulator; the metric is the gap in joint standard errors.
pub fn scalar_chain_check(trials: u64, seed: u64, workers: Option<usize>) -> Check {
    let mut c = Check::new("scalar chain vs engine (std errors)", 3.0);
    let cfg = ExperimentConfig {
        dims: SystemDims::new(1, 1, 1).unwrap(),
        scheme: Scheme::MmseTx,
        encoding: Encoding::Joint,
        rate_policy: RatePolicy::FixedRate(1.0),
        snr_grid_db: SCALAR_GRID_DB.to_vec(),
        trials_per_point: trials,
        master_seed: seed,
        naive_gain: NaiveGain::Variable,
    };
    let curve = match estimate_outage_with(&cfg, EngineOptions { workers, ..Default::default() }) {
        Ok(curve) => curve,
        Err(_) => {
            c.record(f64::NAN);
            return c;
        }
    };
    for (k, p) in curve.points.iter().enumerate() {
        let (hits, n) = scalar_chain_outage(p.rho, 1.0, trials, seed ^ (0x5ca1a2 + k as u64));
        let q = hits as f64 / n as f64;
        let se = (p.p_hat * (1.0 - p.p_hat) / p.trials as f64 + q * (1.0 - q) / n as f64).sqrt();
        let gap = (p.p_hat - q).abs();
        c.record(if se > 0.0 { gap / se } else if gap == 0.0 { 0.0 } else { f64::INFINITY });
    }
    c
}
