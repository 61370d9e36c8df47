//! Euler-Maruyama ensembles.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{SimConfig, BLOWUP_THRESHOLD};
use super::rng::NoisePath;
use crate::error::{Error, EvalError, Result};
use crate::model::ProblemSpec;
use crate::stats::fmt17;
use crate::transport::PointCloud;

/// Marginal law of the ensemble at one time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSnapshot {
    pub time: f64,
    pub samples: PointCloud,
    /// Stream id of each surviving path.
    pub path_ids: Vec<u64>,
    pub problem: String,
    pub epsilon: f64,
    /// Paths excluded because they left the ball of radius 1e8 or produced non-finite values.
    pub blown_up: usize,
}

impl EnsembleSnapshot {
    pub fn n(&self) -> usize {
        self.samples.n()
    }

    pub fn d(&self) -> usize {
        self.samples.d()
    }
}

/// `x - F(x) dt + sqrt(eps) sigma(x) dW`.
pub fn em_step(spec: &ProblemSpec, x: &[f64], dw: &[f64], dt: f64, epsilon: f64) -> std::result::Result<Vec<f64>, EvalError> {
    let mut s = Stepper::new(spec, epsilon, dt);
    let mut y = x.to_vec();
    s.step(&mut y, dw)?;
    Ok(y)
}

/// Reusable scratch space for stepping one trajectory.
pub(crate) struct Stepper<'a> {
    spec: &'a ProblemSpec,
    sqrt_eps: f64,
    dt: f64,
    f: Vec<f64>,
    noise: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub(crate) fn new(spec: &'a ProblemSpec, epsilon: f64, dt: f64) -> Self {
        let d = spec.d();
        Stepper {
            spec,
            sqrt_eps: epsilon.sqrt(),
            dt,
            f: vec![0.0; d],
            noise: vec![0.0; d],
            scratch: vec![0.0; d * d],
        }
    }

    pub(crate) fn step(&mut self, x: &mut [f64], dw: &[f64]) -> std::result::Result<(), EvalError> {
        self.spec.drift_into(x, &mut self.f)?;
        if self.sqrt_eps > 0.0 {
            self.spec.noise_into(x, dw, &mut self.scratch, &mut self.noise)?;
        } else {
            self.noise.fill(0.0);
        }
        for ((xi, fi), ni) in x.iter_mut().zip(&self.f).zip(&self.noise) {
            *xi += -fi * self.dt + self.sqrt_eps * ni;
        }
        Ok(())
    }
}

pub(crate) fn escaped(x: &[f64]) -> bool {
    let n2: f64 = x.iter().map(|v| v * v).sum();
    !(n2 <= BLOWUP_THRESHOLD * BLOWUP_THRESHOLD)
}

/// Runs `f` over path indices in parallel and returns results in index order.
pub(crate) fn map_paths<T: Send>(n: usize, f: impl Fn(u64) -> T + Sync + Send) -> Vec<T> {
    (0..n as u64).into_par_iter().map(f).collect()
}

/// Handles excluded paths: an error in acceptance mode or when fewer than two remain.
pub(crate) fn account_blowups(cfg: &SimConfig, blown: usize, total: usize) -> Result<()> {
    if blown == 0 {
        return Ok(());
    }
    if cfg.acceptance || total - blown < 2 {
        return Err(Error::BlowUp { count: blown, total });
    }
    log::warn!("{blown} of {total} trajectories blew up and were excluded");
    Ok(())
}

fn run_path(spec: &ProblemSpec, cfg: &SimConfig, dt: f64, n_steps: u64, record_steps: &[u64], id: u64) -> Option<Vec<f64>> {
    let d = spec.d();
    let mut x = cfg.x0_or_origin(d);
    let mut noise = NoisePath::new(cfg.seed, id, d, dt);
    let mut stepper = Stepper::new(spec, cfg.epsilon, dt);
    let mut dw = vec![0.0; d];
    let mut out = Vec::with_capacity(record_steps.len() * d);
    let mut next = 0;
    for k in 0..=n_steps {
        while next < record_steps.len() && record_steps[next] == k {
            out.extend_from_slice(&x);
            next += 1;
        }
        if k == n_steps {
            break;
        }
        noise.next_into(&mut dw);
        if stepper.step(&mut x, &dw).is_err() || escaped(&x) {
            return None;
        }
    }
    Some(out)
}

/// Simulates `n_paths` independent trajectories. Path `i` always uses noise stream `i`,
/// so the output does not depend on the number of worker threads.
pub fn simulate_ensemble(spec: &ProblemSpec, cfg: &SimConfig) -> Result<Vec<EnsembleSnapshot>> {
    let d = spec.d();
    let plan = cfg.validate(d)?;
    let paths = map_paths(cfg.n_paths, |id| run_path(spec, cfg, plan.dt_eff, plan.n_steps, &plan.record_steps, id));
    let blown = paths.iter().filter(|p| p.is_none()).count();
    account_blowups(cfg, blown, cfg.n_paths)?;

    let mut snaps = Vec::with_capacity(cfg.record_times.len());
    for (r, &t) in cfg.record_times.iter().enumerate() {
        let mut data = Vec::with_capacity((cfg.n_paths - blown) * d);
        let mut ids = Vec::with_capacity(cfg.n_paths - blown);
        for (id, p) in paths.iter().enumerate() {
            if let Some(v) = p {
                data.extend_from_slice(&v[r * d..(r + 1) * d]);
                ids.push(id as u64);
            }
        }
        snaps.push(EnsembleSnapshot {
            time: t,
            samples: PointCloud::new(d, data)?,
            path_ids: ids,
            problem: spec.name().to_string(),
            epsilon: cfg.epsilon,
            blown_up: blown,
        });
    }
    Ok(snaps)
}

/// CSV with columns `t, path_id, x1..xd`, one row per path per snapshot.
pub fn write_snapshots_csv<W: Write>(snaps: &[EnsembleSnapshot], mut w: W) -> std::io::Result<()> {
    let d = snaps.first().map_or(1, |s| s.d());
    let mut header = vec!["t".to_string(), "path_id".to_string()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    writeln!(w, "{}", header.join(","))?;
    for s in snaps {
        for (p, id) in s.samples.points().zip(&s.path_ids) {
            let mut row = vec![fmt17(s.time), id.to_string()];
            row.extend(p.iter().map(|v| fmt17(*v)));
            writeln!(w, "{}", row.join(","))?;
        }
    }
    Ok(())
}

/// Reads the CSV written by [`write_snapshots_csv`] back into snapshots (one per distinct
/// time, in file order). Problem tag and epsilon are not stored in the CSV.
pub fn read_snapshots_csv<R: BufRead>(r: R, problem: &str, epsilon: f64) -> Result<Vec<EnsembleSnapshot>> {
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| Error::InvalidInput("empty snapshot csv".into()))??;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "t" || cols[1] != "path_id" {
        return Err(Error::InvalidInput(format!("unexpected snapshot csv header `{header}`")));
    }
    let d = cols.len() - 2;
    let mut snaps: Vec<EnsembleSnapshot> = Vec::new();
    let mut data: Vec<f64> = Vec::new();
    let mut ids: Vec<u64> = Vec::new();
    let mut current: Option<f64> = None;
    let flush = |t: f64, data: &mut Vec<f64>, ids: &mut Vec<u64>, snaps: &mut Vec<EnsembleSnapshot>| -> Result<()> {
        snaps.push(EnsembleSnapshot {
            time: t,
            samples: PointCloud::new(d, std::mem::take(data))?,
            path_ids: std::mem::take(ids),
            problem: problem.to_string(),
            epsilon,
            blown_up: 0,
        });
        Ok(())
    };
    for (ln, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = || Error::InvalidInput(format!("snapshot csv line {}: malformed row", ln + 2));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != d + 2 {
            return Err(bad());
        }
        let t: f64 = f[0].parse().map_err(|_| bad())?;
        if current.is_some_and(|c| c != t) {
            flush(current.unwrap(), &mut data, &mut ids, &mut snaps)?;
        }
        current = Some(t);
        ids.push(f[1].parse().map_err(|_| bad())?);
        for v in &f[2..] {
            data.push(v.parse().map_err(|_| bad())?);
        }
    }
    if let Some(t) = current {
        flush(t, &mut data, &mut ids, &mut snaps)?;
    }
    Ok(snaps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin;
    use crate::stats::mean_se;

    #[test]
    fn deterministic_euler_steps() {
        let lin = builtin("linear1d", &[("a", 1.0)]).unwrap();
        assert!((em_step(&lin, &[1.0], &[0.3], 0.1, 0.0).unwrap()[0] - 0.9).abs() < 1e-15);
        assert_eq!(em_step(&lin, &[0.0], &[0.0], 0.1, 0.5).unwrap(), vec![0.0]);
        let q = builtin("quartic1d", &[]).unwrap();
        assert!((em_step(&q, &[1.0], &[0.0], 0.1, 0.0).unwrap()[0] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn stationary_variance_of_linear1d() {
        let p = builtin("linear1d", &[("a", 1.0), ("s", 1.0)]).unwrap();
        let cfg = SimConfig::new(0.1, 1e-3, 20.0, 4000, 11);
        let snap = &simulate_ensemble(&p, &cfg).unwrap()[0];
        let sq: Vec<f64> = snap.samples.as_slice().iter().map(|x| x * x).collect();
        let (v, se) = mean_se(&sq);
        assert!((v - 0.05).abs() < 3.0 * se, "variance {v} +- {se}");
    }

    #[test]
    fn zero_noise_follows_the_flow() {
        let p = builtin("linear1d", &[("a", 1.0)]).unwrap();
        let cfg = SimConfig::new(0.0, 1e-3, 2.0, 4, 1).with_x0(vec![1.0]);
        let snap = &simulate_ensemble(&p, &cfg).unwrap()[0];
        for x in snap.samples.as_slice() {
            assert!((x - (-2f64).exp()).abs() < 2e-3);
        }
    }

    #[test]
    fn worker_count_does_not_matter() {
        let p = builtin("quartic1d", &[]).unwrap();
        let cfg = SimConfig::new(0.2, 1e-3, 1.0, 64, 5).with_record_times(vec![0.5, 1.0]);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_ensemble(&p, &cfg).unwrap())
        };
        assert_eq!(run(1), run(8));
    }

    #[test]
    fn blow_up_counted_and_fatal_in_acceptance() {
        let text = r#"{"d":1,"field":{"expr":"x1 - 10*x1^2"},"sigma":{"scalar":1.0},
            "constants":{"delta":1,"ell":0,"c0":10,"c1":0.3,"kappa":1}}"#;
        let p = ProblemSpec::from_json(text).unwrap();
        // unstable equilibrium at 0.1: paths pushed above it escape
        let cfg = SimConfig::new(1e-3, 0.01, 5.0, 50, 2).with_x0(vec![0.1]);
        let snaps = simulate_ensemble(&p, &cfg).unwrap();
        assert!(snaps[0].blown_up > 0);
        assert_eq!(snaps[0].n() + snaps[0].blown_up, 50);
        assert!(matches!(simulate_ensemble(&p, &cfg.acceptance()), Err(Error::BlowUp { .. })));
    }

    #[test]
    fn csv_round_trip() {
        let p = builtin("rotational2d", &[]).unwrap();
        let cfg = SimConfig::new(0.1, 1e-2, 0.5, 5, 3).with_record_times(vec![0.2, 0.5]);
        let snaps = simulate_ensemble(&p, &cfg).unwrap();
        let mut buf = Vec::new();
        write_snapshots_csv(&snaps, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("t,path_id,x1,x2\n"));
        let back = read_snapshots_csv(&buf[..], "rotational2d", 0.1).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].samples, snaps[1].samples);
        assert_eq!(back[1].path_ids, snaps[1].path_ids);
    }
}
