//! Content catalog, Mandelbrot-Zipf popularity and request generation.

use rand::Rng;
use rand_distr::{Distribution, Exp};
use thiserror::Error;

use crate::topology::NodeId;

#[derive(Debug, Error, PartialEq)]
pub enum WorkloadError {
    #[error("invalid popularity parameters: {0}")]
    InvalidDistribution(String),
    #[error("rank {rank} outside 1..={n}")]
    RankOutOfRange { rank: u64, n: u64 },
    #[error("{what} must be positive")]
    NonPositive { what: &'static str },
    #[error("request rate must be finite and non-negative, got {0}")]
    InvalidRate(f64),
    #[error("workload needs at least one client")]
    NoClients,
}

/// Mandelbrot-Zipf law: `p(i) ∝ (i + beta)^(-alpha)` over ranks `1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub struct MZipf {
    alpha: f64,
    beta: f64,
    n: u64,
    norm: f64,
}

impl MZipf {
    pub fn new(alpha: f64, beta: f64, n: u64) -> Result<Self, WorkloadError> {
        if n == 0 {
            return Err(WorkloadError::InvalidDistribution(
                "catalog is empty".into(),
            ));
        }
        if !alpha.is_finite() || alpha < 0.0 {
            return Err(WorkloadError::InvalidDistribution(format!(
                "alpha = {alpha}"
            )));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(WorkloadError::InvalidDistribution(format!("beta = {beta}")));
        }
        // smallest terms first keeps the sum accurate for large n
        let norm = (1..=n).rev().map(|i| weight(i, alpha, beta)).sum();
        Ok(MZipf {
            alpha,
            beta,
            n,
            norm,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn pmf(&self, rank: u64) -> Result<f64, WorkloadError> {
        if rank == 0 || rank > self.n {
            return Err(WorkloadError::RankOutOfRange { rank, n: self.n });
        }
        Ok(weight(rank, self.alpha, self.beta) / self.norm)
    }

    /// Precomputes the cumulative table used for inverse-CDF sampling.
    pub fn sampler(&self) -> MZipfSampler {
        let mut cdf = Vec::with_capacity(self.n as usize);
        let mut acc = 0.0;
        for i in 1..=self.n {
            acc += weight(i, self.alpha, self.beta) / self.norm;
            cdf.push(acc);
        }
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        MZipfSampler { cdf }
    }
}

#[inline]
fn weight(rank: u64, alpha: f64, beta: f64) -> f64 {
    (rank as f64 + beta).powf(-alpha)
}

#[derive(Debug, Clone)]
pub struct MZipfSampler {
    cdf: Vec<f64>,
}

impl MZipfSampler {
    /// Draws a 1-based rank using exactly one uniform variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|&c| c <= u);
        idx.min(self.cdf.len() - 1) as u64 + 1
    }

    pub fn n(&self) -> u64 {
        self.cdf.len() as u64
    }
}

/// `ceil(filesize / chunk_size)`.
pub fn chunk_count(filesize: u64, chunk_size: u64) -> Result<u64, WorkloadError> {
    if filesize == 0 {
        return Err(WorkloadError::NonPositive { what: "filesize" });
    }
    if chunk_size == 0 {
        return Err(WorkloadError::NonPositive { what: "chunk size" });
    }
    Ok(filesize.div_ceil(chunk_size))
}

/// Object population; every object has the average filesize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Catalog {
    pub n_objects: u64,
    pub avg_filesize: u64,
    pub chunk_size: u64,
    pub chunks_per_object: u64,
}

impl Catalog {
    pub fn new(n_objects: u64, avg_filesize: u64, chunk_size: u64) -> Result<Self, WorkloadError> {
        if n_objects == 0 {
            return Err(WorkloadError::NonPositive {
                what: "catalog size",
            });
        }
        Ok(Catalog {
            n_objects,
            avg_filesize,
            chunk_size,
            chunks_per_object: chunk_count(avg_filesize, chunk_size)?,
        })
    }
}

/// One object request entering the network at a client's attachment router.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RequestEvent {
    /// Simulated seconds.
    pub time: f64,
    pub client: NodeId,
    /// 1-based popularity rank.
    pub object: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrivalProcess {
    /// Poisson rate per client, requests per second.
    pub rate_per_client: f64,
    pub duration_s: f64,
}

/// Independent Poisson arrivals per client, merged in time order.
///
/// Clients are generated one after another from the same generator, so the
/// stream is a pure function of the inputs and the generator's seed.
pub fn generate_workload<R: Rng + ?Sized>(
    arrivals: &ArrivalProcess,
    popularity: &MZipfSampler,
    clients: &[NodeId],
    rng: &mut R,
) -> Result<Vec<RequestEvent>, WorkloadError> {
    if clients.is_empty() {
        return Err(WorkloadError::NoClients);
    }
    let rate = arrivals.rate_per_client;
    if !rate.is_finite() || rate < 0.0 {
        return Err(WorkloadError::InvalidRate(rate));
    }
    if arrivals.duration_s.is_nan() || arrivals.duration_s <= 0.0 {
        return Err(WorkloadError::NonPositive { what: "duration" });
    }
    if rate == 0.0 {
        return Ok(Vec::new());
    }
    let gap = Exp::new(rate).map_err(|_| WorkloadError::InvalidRate(rate))?;
    let expected = (rate * arrivals.duration_s * clients.len() as f64) as usize;
    let mut events = Vec::with_capacity(expected + expected / 8 + 16);
    for &client in clients {
        let mut t = 0.0;
        loop {
            t += gap.sample(rng);
            if t >= arrivals.duration_s {
                break;
            }
            let object = popularity.sample(rng);
            events.push(RequestEvent {
                time: t,
                client,
                object,
            });
        }
    }
    // stable: simultaneous arrivals keep client order
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pmf_examples() {
        let d = MZipf::new(1.0, 0.0, 3).unwrap();
        let expected = [6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0];
        for (i, e) in expected.iter().enumerate() {
            assert!((d.pmf(i as u64 + 1).unwrap() - e).abs() < 1e-15);
        }
        let flat = MZipf::new(0.0, 3.5, 7).unwrap();
        for r in 1..=7 {
            assert!((flat.pmf(r).unwrap() - 1.0 / 7.0).abs() < 1e-15);
        }
        let two = MZipf::new(0.65, 0.0, 2).unwrap();
        let p1 = 1.0 / (1.0 + 2f64.powf(-0.65));
        assert!((two.pmf(1).unwrap() - p1).abs() < 1e-15);
    }

    #[test]
    fn pmf_rejects_bad_rank() {
        let d = MZipf::new(1.0, 0.0, 3).unwrap();
        assert_eq!(
            d.pmf(0),
            Err(WorkloadError::RankOutOfRange { rank: 0, n: 3 })
        );
        assert_eq!(
            d.pmf(4),
            Err(WorkloadError::RankOutOfRange { rank: 4, n: 3 })
        );
        assert!(MZipf::new(1.0, -1.0, 3).is_err());
        assert!(MZipf::new(f64::NAN, 0.0, 3).is_err());
        assert!(MZipf::new(1.0, 0.0, 0).is_err());
    }

    #[test]
    fn steep_law_concentrates_on_rank_one() {
        let d = MZipf::new(20.0, 0.0, 10).unwrap();
        assert!(d.pmf(1).unwrap() > 0.99);
        let s = d.sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ones = (0..10_000).filter(|_| s.sample(&mut rng) == 1).count();
        assert!(ones >= 9_900, "{ones}");
    }

    #[test]
    fn uniform_law_frequencies_within_three_sigma() {
        let s = MZipf::new(0.0, 0.0, 4).unwrap().sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0u32; 4];
        let draws = 100_000;
        for _ in 0..draws {
            counts[s.sample(&mut rng) as usize - 1] += 1;
        }
        let sigma = (draws as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!(
                (c as f64 - draws as f64 * 0.25).abs() < 3.0 * sigma,
                "{counts:?}"
            );
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let s = MZipf::new(0.75, 0.0, 1000).unwrap().sampler();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..100).map(|_| s.sample(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(42), draw(42));
        assert_ne!(draw(42), draw(43));
    }

    #[test]
    fn chunk_count_examples() {
        assert_eq!(chunk_count(10 * 1024, 4 * 1024), Ok(3));
        assert_eq!(chunk_count(100 * 1024 * 1024, 4 * 1024), Ok(25_600));
        assert_eq!(chunk_count(4096, 4096), Ok(1));
        assert!(chunk_count(0, 4096).is_err());
        assert!(chunk_count(4096, 0).is_err());
        assert_eq!(
            Catalog::new(10, 10 * 1024, 4096).unwrap().chunks_per_object,
            3
        );
    }

    #[test]
    fn zero_rate_gives_empty_stream() {
        let s = MZipf::new(1.0, 0.0, 10).unwrap().sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let arrivals = ArrivalProcess {
            rate_per_client: 0.0,
            duration_s: 100.0,
        };
        assert!(generate_workload(&arrivals, &s, &[NodeId(0)], &mut rng)
            .unwrap()
            .is_empty());
        assert_eq!(
            generate_workload(&arrivals, &s, &[], &mut rng),
            Err(WorkloadError::NoClients)
        );
        let bad = ArrivalProcess {
            rate_per_client: -1.0,
            duration_s: 100.0,
        };
        assert!(generate_workload(&bad, &s, &[NodeId(0)], &mut rng).is_err());
    }

    #[test]
    fn one_day_at_unit_rate_is_poisson() {
        let s = MZipf::new(0.65, 0.0, 100).unwrap().sampler();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let arrivals = ArrivalProcess {
            rate_per_client: 1.0,
            duration_s: 86_400.0,
        };
        let ev = generate_workload(&arrivals, &s, &[NodeId(3)], &mut rng).unwrap();
        let sigma = 86_400f64.sqrt();
        assert!(
            (ev.len() as f64 - 86_400.0).abs() < 4.0 * sigma,
            "{}",
            ev.len()
        );
        assert!(ev.windows(2).all(|w| w[0].time <= w[1].time));
        assert!(ev
            .iter()
            .all(|e| e.time < 86_400.0 && (1..=100).contains(&e.object)));
    }

    #[test]
    fn streams_are_reproducible_and_merged() {
        let s = MZipf::new(0.65, 0.0, 100).unwrap().sampler();
        let arrivals = ArrivalProcess {
            rate_per_client: 0.5,
            duration_s: 1000.0,
        };
        let clients = [NodeId(0), NodeId(4), NodeId(7)];
        let run = || {
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            generate_workload(&arrivals, &s, &clients, &mut rng).unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a, b);
        for c in clients {
            assert!(a.iter().any(|e| e.client == c));
        }
        assert!(a.windows(2).all(|w| w[0].time <= w[1].time));
    }
}
