//! Seeded random instances.

use rand::Rng;

use super::format::OmpcInstance;
use crate::ccfl::CcflInstance;
use crate::penalty::{CoveringRow, PackingSystem};
use crate::rng::stream_rng;
use crate::{Error, Result};

fn check_range(name: &str, (lo, hi): (f64, f64), positive: bool) -> Result<()> {
    let ok = lo.is_finite() && hi.is_finite() && lo <= hi && if positive { lo > 0.0 } else { lo >= 0.0 };
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} range [{lo}, {hi}] is not valid")))
    }
}

fn draw<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

/// Random packing matrix and covering stream. Entries are present with
/// probability `density`; empty packing columns and empty covering rows get
/// one entry at a uniformly chosen position.
pub fn gen_random_ompc(
    m: usize,
    n: usize,
    rows: usize,
    density: f64,
    coeff_range: (f64, f64),
    seed: u64,
) -> Result<OmpcInstance> {
    if m == 0 || n == 0 || rows == 0 {
        return Err(Error::Config(format!("need m, n, rows >= 1, got {m}, {n}, {rows}")));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Config(format!("density {density} outside (0, 1]")));
    }
    check_range("coefficient", coeff_range, true)?;
    let mut rng = stream_rng(seed, 0);
    let mut coeffs = vec![0.0; m * n];
    for c in coeffs.iter_mut() {
        if rng.gen::<f64>() < density {
            *c = draw(&mut rng, coeff_range);
        }
    }
    for j in 0..n {
        if (0..m).all(|k| coeffs[k * n + j] == 0.0) {
            let k = rng.gen_range(0..m);
            coeffs[k * n + j] = draw(&mut rng, coeff_range);
        }
    }
    let packing = PackingSystem::new(m, n, coeffs)?;
    let mut stream = Vec::with_capacity(rows);
    for _ in 0..rows {
        let mut entries: Vec<(usize, f64)> = (0..n)
            .filter(|_| rng.gen::<f64>() < density)
            .map(|j| (j, 0.0))
            .collect();
        if entries.is_empty() {
            entries.push((rng.gen_range(0..n), 0.0));
        }
        for e in entries.iter_mut() {
            e.1 = draw(&mut rng, coeff_range);
        }
        stream.push(CoveringRow::new(entries)?);
    }
    Ok(OmpcInstance { packing, rows: stream })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CcflGenConfig {
    pub m: usize,
    pub n: usize,
    pub charge: (f64, f64),
    pub capacity: (f64, f64),
    /// Probability that a facility can serve a given client.
    pub availability: f64,
    pub demand: (f64, f64),
    pub cost: (f64, f64),
}

impl CcflGenConfig {
    pub fn new(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            charge: (0.5, 3.0),
            capacity: (1.0, 2.0),
            availability: 0.8,
            demand: (0.1, 1.5),
            cost: (0.0, 1.0),
        }
    }
}

/// Random facility-location instance; every client can use at least one facility.
pub fn gen_random_ccfl(config: &CcflGenConfig, seed: u64) -> Result<CcflInstance> {
    let c = config;
    if c.m < 2 || c.n < 2 {
        return Err(Error::Config(format!("need m, n >= 2, got {}, {}", c.m, c.n)));
    }
    if !(c.availability > 0.0 && c.availability <= 1.0) {
        return Err(Error::Config(format!("availability {} outside (0, 1]", c.availability)));
    }
    check_range("charge", c.charge, false)?;
    check_range("capacity", c.capacity, true)?;
    check_range("demand", c.demand, false)?;
    check_range("cost", c.cost, false)?;
    if c.demand.1 + c.cost.1 <= 0.0 && c.charge.0 <= 0.0 {
        return Err(Error::Config("every total cost would be zero".into()));
    }
    let mut rng = stream_rng(seed, 0);
    let fixed: Vec<f64> = (0..c.m).map(|_| draw(&mut rng, c.charge)).collect();
    let capacity: Vec<f64> = (0..c.m).map(|_| draw(&mut rng, c.capacity)).collect();
    let mut clients = Vec::with_capacity(c.n);
    for _ in 0..c.n {
        let mut avail: Vec<usize> = (0..c.m).filter(|_| rng.gen::<f64>() < c.availability).collect();
        if avail.is_empty() {
            avail.push(rng.gen_range(0..c.m));
        }
        let mut list = Vec::with_capacity(avail.len());
        for i in avail {
            let (p, a) = (draw(&mut rng, c.demand), draw(&mut rng, c.cost));
            // an all-zero total falls back to the top of both ranges
            let (p, a) = if fixed[i] + p + a > 0.0 { (p, a) } else { (c.demand.1, c.cost.1) };
            list.push((i, p, a));
        }
        clients.push(list);
    }
    CcflInstance::new(fixed, capacity, clients)
}
