//! Authentication success rate of the two protocols under load.
//!
//! One authenticator serves requests first-come first-served with a
//! constant service time `T_s`; requests arrive as a Poisson stream of
//! rate `lambda_t`. A pair of devices stays in D2D range for an
//! exponential time of rate `lambda_rd` and (network-covered only) in
//! the eNB's coverage for an exponential time of rate `lambda_r`. An
//! authentication succeeds when the residence time covers the queue wait
//! plus two service times:
//!
//! ```text
//! R_NA = e^{-2 l_rd T} (1 - rho) l_rd / (l_rd - l_t (1 - e^{-l_rd T}))
//! R_CN = R_NA(l_rd) * R_NA(l_r)
//! ```
//!
//! The second factor of that expression is the M/D/1 waiting-time
//! transform evaluated at the residence rate. [`simulate_asr`] runs the
//! queue directly and is the independent check on both forms.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsrError {
    #[error("{0} must be positive and finite")]
    NonPositive(&'static str),
    #[error("unstable queue: rho = {0} >= 1")]
    Unstable(f64),
    #[error("the network-covered model needs an eNB residence rate")]
    MissingEnbRate,
    #[error("at least one arrival is required")]
    ZeroArrivals,
    #[error("bad grid line {line}: {reason}")]
    Grid { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Na,
    Cn,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Na => "na",
            Mode::Cn => "cn",
        })
    }
}

impl FromStr for Mode {
    type Err = AsrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "na" => Ok(Mode::Na),
            "cn" => Ok(Mode::Cn),
            other => Err(AsrError::Grid {
                line: 0,
                reason: format!("unknown mode {other:?}"),
            }),
        }
    }
}

/// Rates are per unit time; `lambda_r` is only used by the
/// network-covered model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueModel {
    pub lambda_t: f64,
    pub lambda_rd: f64,
    pub lambda_r: Option<f64>,
    pub t_s: f64,
}

impl QueueModel {
    /// From the normalised ratios `c_x = E[t_x] / T_s` (mean
    /// inter-arrival and residence times in units of the service time).
    pub fn from_ratios(c_t: f64, c_rd: f64, c_r: Option<f64>, t_s: f64) -> Self {
        Self {
            lambda_t: 1.0 / (c_t * t_s),
            lambda_rd: 1.0 / (c_rd * t_s),
            lambda_r: c_r.map(|c| 1.0 / (c * t_s)),
            t_s,
        }
    }

    pub fn rho(&self) -> f64 {
        self.lambda_t * self.t_s
    }

    /// Requests per unit time the authenticator can finish back to back.
    pub fn service_capacity(&self) -> f64 {
        1.0 / self.t_s
    }

    fn check_positive(&self) -> Result<(), AsrError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        for (name, v) in [
            ("lambda_t", self.lambda_t),
            ("lambda_rd", self.lambda_rd),
            ("t_s", self.t_s),
        ] {
            if !ok(v) {
                return Err(AsrError::NonPositive(name));
            }
        }
        if self.lambda_r.is_some_and(|v| !ok(v)) {
            return Err(AsrError::NonPositive("lambda_r"));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), AsrError> {
        self.check_positive()?;
        if self.rho() >= 1.0 {
            return Err(AsrError::Unstable(self.rho()));
        }
        Ok(())
    }
}

/// `Pr[t >= W + 2T]` for an exponential residence time of rate `rate`.
fn residence_factor(m: &QueueModel, rate: f64) -> f64 {
    let t = m.t_s;
    // 1 - e^{-x} without cancellation for tiny x.
    let idle = -(-rate * t).exp_m1();
    (-2.0 * rate * t).exp() * (1.0 - m.rho()) * rate / (rate - m.lambda_t * idle)
}

pub fn asr_na_analytic(m: &QueueModel) -> Result<f64, AsrError> {
    m.validate()?;
    Ok(residence_factor(m, m.lambda_rd))
}

pub fn asr_cn_analytic(m: &QueueModel) -> Result<f64, AsrError> {
    m.validate()?;
    let r = m.lambda_r.ok_or(AsrError::MissingEnbRate)?;
    Ok(residence_factor(m, m.lambda_rd) * residence_factor(m, r))
}

pub fn asr_analytic(mode: Mode, m: &QueueModel) -> Result<f64, AsrError> {
    match mode {
        Mode::Na => asr_na_analytic(m),
        Mode::Cn => asr_cn_analytic(m),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub model: QueueModel,
    pub mode: Mode,
    pub arrivals: u64,
    pub seed: u64,
    /// Queued requests leave once a residence clock runs out instead of
    /// still occupying the server. Not the analytic model's assumption.
    pub reneging: bool,
    /// Stream offset so several runs can share one seed.
    pub stream: u64,
}

impl SimConfig {
    pub fn new(model: QueueModel, mode: Mode, arrivals: u64, seed: u64) -> Self {
        Self {
            model,
            mode,
            arrivals,
            seed,
            reneging: false,
            stream: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimResult {
    pub asr: f64,
    /// 95% normal-approximation half-width.
    pub ci_half: f64,
    pub arrivals: u64,
    pub successes: u64,
    pub d2d_expired: u64,
    pub enb_expired: u64,
    /// Mean time from arrival to start of service (served requests only
    /// when reneging).
    pub mean_wait: f64,
}

/// One independent ChaCha stream per clock.
fn stream(seed: u64, base: u64, k: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(base * 4 + k);
    r
}

fn exp(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    e / rate
}

/// Discrete-event run of the single-server FCFS queue.
pub fn simulate_asr(cfg: &SimConfig) -> Result<SimResult, AsrError> {
    let m = &cfg.model;
    if cfg.arrivals == 0 {
        return Err(AsrError::ZeroArrivals);
    }
    m.check_positive()?;
    if m.rho() >= 1.0 {
        log::warn!("simulating an unstable queue (rho = {})", m.rho());
    }
    let lambda_r = match cfg.mode {
        Mode::Na => None,
        Mode::Cn => Some(m.lambda_r.ok_or(AsrError::MissingEnbRate)?),
    };
    let mut arrivals_rng = stream(cfg.seed, cfg.stream, 0);
    let mut rd_rng = stream(cfg.seed, cfg.stream, 1);
    let mut r_rng = stream(cfg.seed, cfg.stream, 2);

    let mut now = 0.0f64;
    let mut free_at = 0.0f64;
    let (mut ok, mut d2d, mut enb) = (0u64, 0u64, 0u64);
    let (mut wait_sum, mut served) = (0.0f64, 0u64);
    for _ in 0..cfg.arrivals {
        now += exp(&mut arrivals_rng, m.lambda_t);
        let t_rd = exp(&mut rd_rng, m.lambda_rd);
        let t_r = lambda_r.map_or(f64::INFINITY, |l| exp(&mut r_rng, l));
        let wait = (free_at - now).max(0.0);
        if cfg.reneging && wait > t_rd.min(t_r) {
            if t_rd <= t_r {
                d2d += 1;
            } else {
                enb += 1;
            }
            continue;
        }
        free_at = now + wait + m.t_s;
        wait_sum += wait;
        served += 1;
        let need = wait + 2.0 * m.t_s;
        if t_rd < need {
            d2d += 1;
        } else if t_r < need {
            enb += 1;
        } else {
            ok += 1;
        }
    }
    let n = cfg.arrivals as f64;
    let asr = ok as f64 / n;
    Ok(SimResult {
        asr,
        ci_half: 1.96 * (asr * (1.0 - asr) / n).sqrt(),
        arrivals: cfg.arrivals,
        successes: ok,
        d2d_expired: d2d,
        enb_expired: enb,
        mean_wait: if served == 0 { 0.0 } else { wait_sum / served as f64 },
    })
}

/// One sweep grid point in normalised units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub mode: Mode,
    pub c_t: f64,
    pub c_rd: f64,
    pub c_r: Option<f64>,
}

impl GridPoint {
    pub fn na(c_t: f64, c_rd: f64) -> Self {
        Self {
            mode: Mode::Na,
            c_t,
            c_rd,
            c_r: None,
        }
    }

    pub fn cn(c_t: f64, c_rd: f64, c_r: f64) -> Self {
        Self {
            mode: Mode::Cn,
            c_t,
            c_rd,
            c_r: Some(c_r),
        }
    }

    /// With `T_s = 1`; the success rate only depends on the ratios.
    pub fn model(&self) -> QueueModel {
        QueueModel::from_ratios(self.c_t, self.c_rd, self.c_r, 1.0)
    }
}

/// Reads `mode,c_t,c_rd[,c_r]` lines; blank lines, `#` comments and a
/// leading header are skipped.
pub fn parse_grid(text: &str) -> Result<Vec<GridPoint>, AsrError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (out.is_empty() && line.starts_with("mode")) {
            continue;
        }
        let bad = |reason: String| AsrError::Grid { line: i + 1, reason };
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if !(3..=4).contains(&cols.len()) {
            return Err(bad("expected mode,c_t,c_rd[,c_r]".into()));
        }
        let mode: Mode = cols[0].parse().map_err(|_| bad(format!("unknown mode {:?}", cols[0])))?;
        let num = |s: &str| s.parse::<f64>().map_err(|_| bad(format!("not a number: {s:?}")));
        let c_r = match cols.get(3) {
            Some(s) if !s.is_empty() && *s != "-" => Some(num(s)?),
            _ => None,
        };
        let p = GridPoint {
            mode,
            c_t: num(cols[1])?,
            c_rd: num(cols[2])?,
            c_r,
        };
        if mode == Mode::Cn && c_r.is_none() {
            return Err(bad("cn rows need c_r".into()));
        }
        p.model().validate().map_err(|e| bad(e.to_string()))?;
        out.push(p);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub point: GridPoint,
    pub analytic: f64,
    pub sim: Option<SimResult>,
    pub seed: u64,
}

pub const SWEEP_HEADER: &str = "mode,c_t,c_rd,c_r,analytic,sim,ci_half,arrivals,seed";

impl SweepRow {
    pub fn to_csv(&self) -> String {
        let p = &self.point;
        let (sim, ci, n) = match &self.sim {
            Some(s) => (fmt_g6(s.asr), fmt_g6(s.ci_half), s.arrivals.to_string()),
            None => (String::new(), String::new(), "0".into()),
        };
        format!(
            "{},{},{},{},{},{},{},{},{}",
            p.mode,
            fmt_g6(p.c_t),
            fmt_g6(p.c_rd),
            p.c_r.map(fmt_g6).unwrap_or_default(),
            fmt_g6(self.analytic),
            sim,
            ci,
            n,
            self.seed
        )
    }
}

/// Evaluates every point and, when `arrivals > 0`, simulates it on its
/// own stream `(seed, index)`. Points run on separate threads; the output
/// does not depend on scheduling.
pub fn asr_sweep(
    points: &[GridPoint],
    arrivals: u64,
    seed: u64,
    reneging: bool,
) -> Result<Vec<SweepRow>, AsrError> {
    let run = |i: usize, p: &GridPoint| -> Result<SweepRow, AsrError> {
        let model = p.model();
        let analytic = asr_analytic(p.mode, &model)?;
        let sim = if arrivals == 0 {
            None
        } else {
            let cfg = SimConfig {
                reneging,
                stream: i as u64,
                ..SimConfig::new(model, p.mode, arrivals, seed)
            };
            Some(simulate_asr(&cfg)?)
        };
        Ok(SweepRow {
            point: *p,
            analytic,
            sim,
            seed,
        })
    };
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(points.len().max(1));
    let mut slots: Vec<Option<Result<SweepRow, AsrError>>> = vec![None; points.len()];
    std::thread::scope(|s| {
        for (t, chunk) in slots.chunks_mut(points.len().div_ceil(threads).max(1)).enumerate() {
            let base = t * points.len().div_ceil(threads).max(1);
            let run = &run;
            s.spawn(move || {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    *slot = Some(run(base + k, &points[base + k]));
                }
            });
        }
    });
    slots.into_iter().map(|r| r.expect("every point ran")).collect()
}

/// Pairs of rows of the same mode that differ in exactly one ratio must
/// have the analytic rate non-decreasing in that ratio. Returns the
/// offending row pairs.
pub fn monotonicity_audit(rows: &[SweepRow]) -> Vec<(usize, usize)> {
    let key = |p: &GridPoint| [p.c_t, p.c_rd, p.c_r.unwrap_or(f64::NAN)];
    let mut bad = Vec::new();
    for (i, a) in rows.iter().enumerate() {
        for (j, b) in rows.iter().enumerate() {
            if a.point.mode != b.point.mode {
                continue;
            }
            let (ka, kb) = (key(&a.point), key(&b.point));
            let diff: Vec<usize> = (0..3)
                .filter(|&d| ka[d] != kb[d] && !(ka[d].is_nan() && kb[d].is_nan()))
                .collect();
            if let [d] = diff[..] {
                if ka[d] < kb[d] && a.analytic > b.analytic {
                    bad.push((i, j));
                }
            }
        }
    }
    bad
}

/// `%.6g`-style formatting, independent of locale.
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if !(-4..6).contains(&exp) {
        let mant = trim_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mant}e{sign}{:02}", exp.abs());
    }
    trim_zeros(&format!("{x:.*}", (5 - exp) as usize)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// M/D/1 mean wait, `lambda_t T^2 / (2 (1 - rho))`.
pub fn md1_mean_wait(m: &QueueModel) -> f64 {
    m.lambda_t * m.t_s * m.t_s / (2.0 * (1.0 - m.rho()))
}
