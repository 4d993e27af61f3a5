//! Online facility location with congestion and fixed charges.
//!
//! Facilities have a fixed charge `c_i` and a capacity `u_i`; each client
//! arrives with a demand and an assignment cost for the facilities that can
//! serve it. Demands are divided by capacity when the instance is built, so
//! every facility has unit capacity afterwards. The total cost of an
//! integral assignment is its maximum congestion plus the fixed charges of
//! the open facilities plus the assignment costs.

mod fractional;
mod rounding;

pub use fractional::{
    ccfl_cost, ccfl_rates, gamma_trials, CcflCertificate, CcflPhaseRecord, CcflTrial, CostEval, D2Check,
    FractionalCcfl, TrialReport,
};
pub use rounding::{
    round_fixed, rounding_monte_carlo, rounding_repetitions, z_epochs, ClientDecision, DecisionRecord, EpochConfig,
    EpochReport, IntegralRun, RoundStep, Rounder, RoundingSample, RoundingStats,
};

use crate::{Error, Result};

/// Demand (already divided by capacity) and assignment cost of one
/// facility/client pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Entry {
    pub p: f64,
    pub a: f64,
    /// Demand before dividing by the facility capacity.
    pub raw: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CcflInstance {
    fixed: Vec<f64>,
    capacity: Vec<f64>,
    /// Client-major, `entries[j * m + i]`.
    entries: Vec<Option<Entry>>,
    n: usize,
}

impl CcflInstance {
    /// Builds an instance; `clients[j]` lists `(facility, raw demand, assignment cost)`.
    pub fn new(fixed: Vec<f64>, capacity: Vec<f64>, clients: Vec<Vec<(usize, f64, f64)>>) -> Result<Self> {
        let m = fixed.len();
        let n = clients.len();
        if m < 2 || n < 2 {
            return Err(Error::Structural(format!("need at least 2 facilities and 2 clients, got {m} and {n}")));
        }
        if capacity.len() != m {
            return Err(Error::Structural(format!("{} capacities for {m} facilities", capacity.len())));
        }
        for (i, (&c, &u)) in fixed.iter().zip(&capacity).enumerate() {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::Domain(format!("fixed charge {c} of facility {i}")));
            }
            if !(u.is_finite() && u > 0.0) {
                return Err(Error::Domain(format!("capacity {u} of facility {i}")));
            }
        }
        let mut entries = vec![None; m * n];
        for (j, list) in clients.iter().enumerate() {
            if list.is_empty() {
                return Err(Error::Structural(format!("client {j} has no facilities")));
            }
            for &(i, raw, a) in list {
                if i >= m {
                    return Err(Error::Structural(format!("client {j} names facility {i} of {m}")));
                }
                if !(raw.is_finite() && raw >= 0.0 && a.is_finite() && a >= 0.0) {
                    return Err(Error::Domain(format!("client {j} facility {i}: demand {raw}, cost {a}")));
                }
                let slot = &mut entries[j * m + i];
                if slot.is_some() {
                    return Err(Error::Structural(format!("client {j} lists facility {i} twice")));
                }
                let e = Entry { p: raw / capacity[i], a, raw };
                if fixed[i] + e.p + e.a <= 0.0 {
                    return Err(Error::Domain(format!("client {j} facility {i} has zero total cost")));
                }
                *slot = Some(e);
            }
        }
        Ok(Self { fixed, capacity, entries, n })
    }

    pub fn m(&self) -> usize {
        self.fixed.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn fixed(&self) -> &[f64] {
        &self.fixed
    }

    pub fn capacity(&self) -> &[f64] {
        &self.capacity
    }

    pub fn entry(&self, i: usize, j: usize) -> Option<Entry> {
        self.entries[j * self.m() + i]
    }

    /// Facilities that can serve client `j`, with their entries.
    pub fn client(&self, j: usize) -> impl Iterator<Item = (usize, Entry)> + '_ {
        let m = self.m();
        self.entries[j * m..(j + 1) * m]
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.map(|e| (i, e)))
    }

    /// `c_i + p_ij + a_ij`, or `None` when `i` cannot serve `j`.
    pub fn total(&self, i: usize, j: usize) -> Option<f64> {
        self.entry(i, j).map(|e| self.fixed[i] + e.p + e.a)
    }

    pub fn min_total(&self, j: usize) -> f64 {
        self.client(j)
            .map(|(i, e)| self.fixed[i] + e.p + e.a)
            .fold(f64::INFINITY, f64::min)
    }

    /// `max_j max_i total / min_i total` over clients `0..k`.
    pub fn rho_prefix(&self, k: usize) -> f64 {
        (0..k.min(self.n))
            .map(|j| {
                let (lo, hi) = self.client(j).fold((f64::INFINITY, 0.0f64), |(lo, hi), (i, e)| {
                    let t = self.fixed[i] + e.p + e.a;
                    (lo.min(t), hi.max(t))
                });
                hi / lo
            })
            .fold(1.0, f64::max)
    }

    pub fn rho(&self) -> f64 {
        self.rho_prefix(self.n)
    }

    /// Evaluates an integral assignment, `assign[j]` being client `j`'s
    /// facility. Only facilities receiving a client pay their charge.
    pub fn assignment_cost(&self, assign: &[usize]) -> Result<AssignmentCost> {
        let open: Vec<usize> = {
            let mut v = assign.to_vec();
            v.sort_unstable();
            v.dedup();
            v
        };
        self.cost_with_open(assign, &open)
    }

    /// As [`assignment_cost`](Self::assignment_cost) for a prefix of the
    /// clients, charging every facility in `open` as well.
    pub fn cost_with_open(&self, assign: &[usize], open: &[usize]) -> Result<AssignmentCost> {
        let m = self.m();
        let mut load = vec![0.0; m];
        let mut assignment = 0.0;
        for (j, &i) in assign.iter().enumerate() {
            let e = self
                .entry(i, j)
                .ok_or_else(|| Error::Structural(format!("client {j} cannot use facility {i}")))?;
            load[i] += e.p;
            assignment += e.a;
        }
        let fixed = open.iter().map(|&i| self.fixed[i]).fold(0.0, |s, c| s + c);
        let congestion = load.iter().copied().fold(0.0, f64::max);
        Ok(AssignmentCost {
            congestion,
            fixed,
            assignment,
            total: congestion + fixed + assignment,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssignmentCost {
    pub congestion: f64,
    pub fixed: f64,
    pub assignment: f64,
    pub total: f64,
}

/// `F_j(Z) = {i : c_i + p_ij + a_ij <= Z}`.
pub fn candidate_facilities(inst: &CcflInstance, j: usize, z: f64) -> Vec<usize> {
    inst.client(j)
        .filter(|&(i, e)| inst.fixed()[i] + e.p + e.a <= z)
        .map(|(i, _)| i)
        .collect()
}

/// Unrelated machines with start-up costs; absent entries mean the job
/// cannot run on that machine.
#[derive(Clone, Debug, PartialEq)]
pub struct UmscInstance {
    costs: Vec<f64>,
    jobs: Vec<Vec<(usize, f64)>>,
}

impl UmscInstance {
    pub fn new(costs: Vec<f64>, jobs: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        for job in &jobs {
            if job.is_empty() {
                return Err(Error::Structural("job without machines".into()));
            }
            if let Some(&(i, _)) = job.iter().find(|(i, _)| *i >= costs.len()) {
                return Err(Error::Structural(format!("machine {i} of {}", costs.len())));
            }
        }
        Ok(Self { costs, jobs })
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn jobs(&self) -> &[Vec<(usize, f64)>] {
        &self.jobs
    }

    pub fn machines(&self) -> usize {
        self.costs.len()
    }

    /// Maximum machine load of `assign` (job `j` on machine `assign[j]`).
    pub fn makespan(&self, assign: &[usize]) -> Result<f64> {
        let mut load = vec![0.0; self.costs.len()];
        for (j, &i) in assign.iter().enumerate() {
            let p = self.jobs[j]
                .iter()
                .find(|(k, _)| *k == i)
                .map(|(_, p)| *p)
                .ok_or_else(|| Error::Structural(format!("job {j} cannot run on machine {i}")))?;
            load[i] += p;
        }
        Ok(load.into_iter().fold(0.0, f64::max))
    }

    /// Start-up cost of the machines used by `assign`.
    pub fn startup_cost(&self, assign: &[usize]) -> f64 {
        let mut used: Vec<usize> = assign.to_vec();
        used.sort_unstable();
        used.dedup();
        used.iter().map(|&i| self.costs[i]).fold(0.0, |s, c| s + c)
    }
}

/// Machines become unit-capacity facilities and jobs become clients with
/// zero assignment cost.
pub fn umsc_to_ccfl(u: &UmscInstance) -> Result<CcflInstance> {
    let clients = u
        .jobs
        .iter()
        .map(|job| job.iter().map(|&(i, p)| (i, p, 0.0)).collect())
        .collect();
    CcflInstance::new(u.costs.clone(), vec![1.0; u.costs.len()], clients)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> CcflInstance {
        CcflInstance::new(
            vec![1.0, 2.0],
            vec![1.0, 2.0],
            vec![vec![(0, 1.0, 0.5), (1, 2.0, 0.0)], vec![(1, 4.0, 1.0)]],
        )
        .unwrap()
    }

    #[test]
    fn demands_are_normalised() {
        let inst = small();
        assert_eq!(inst.entry(1, 0).unwrap().p, 1.0);
        assert_eq!(inst.entry(1, 0).unwrap().raw, 2.0);
        assert_eq!(inst.entry(0, 1), None);
        assert_eq!(inst.total(0, 0), Some(2.5));
        assert_eq!(inst.total(1, 0), Some(3.0));
    }

    #[test]
    fn rho_and_candidates() {
        let inst = small();
        assert!((inst.rho() - 1.2).abs() < 1e-15);
        assert_eq!(candidate_facilities(&inst, 0, 2.5), vec![0]);
        assert_eq!(candidate_facilities(&inst, 0, 3.0), vec![0, 1]);
        assert!(candidate_facilities(&inst, 1, 4.9).is_empty());
    }

    #[test]
    fn assignment_cost_parts() {
        let inst = small();
        let c = inst.assignment_cost(&[1, 1]).unwrap();
        assert_eq!(c.congestion, 3.0);
        assert_eq!(c.fixed, 2.0);
        assert_eq!(c.assignment, 1.0);
        assert!(inst.assignment_cost(&[1, 0]).is_err());
    }

    #[test]
    fn rejects_degenerate_instances() {
        assert!(CcflInstance::new(vec![1.0], vec![1.0], vec![vec![(0, 1.0, 0.0)]; 2]).is_err());
        assert!(CcflInstance::new(vec![1.0, 1.0], vec![1.0, 0.0], vec![vec![(0, 1.0, 0.0)]; 2]).is_err());
        assert!(CcflInstance::new(vec![0.0, 1.0], vec![1.0, 1.0], vec![vec![(0, 0.0, 0.0)]; 2]).is_err());
        assert!(CcflInstance::new(vec![1.0, 1.0], vec![1.0, 1.0], vec![vec![], vec![(0, 1.0, 0.0)]]).is_err());
    }

    #[test]
    fn umsc_round_trip() {
        let u = UmscInstance::new(vec![1.0, 3.0], vec![vec![(0, 2.0), (1, 1.0)], vec![(1, 4.0)]]).unwrap();
        let c = umsc_to_ccfl(&u).unwrap();
        assert_eq!(c.entry(0, 1), None);
        let assign = [1, 1];
        assert_eq!(u.makespan(&assign).unwrap(), 5.0);
        let cost = c.assignment_cost(&assign).unwrap();
        assert_eq!(cost.total, u.makespan(&assign).unwrap() + u.startup_cost(&assign));
    }
}
