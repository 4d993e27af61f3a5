//! Adversarial lower-bound constructions.
//!
//! The two-block game and the binary-tree adversary play against any
//! monotone online algorithm exposed through [`OnlineResponder`]. The tree
//! is heap-indexed: the root is node 1, node `v` has children `2v` and
//! `2v + 1`, and the leaves are `m..2m`. Every non-root node owns a block of
//! `d` variables and each leaf owns one packing row covering the blocks on
//! its root path.

use crate::ccfl::UmscInstance;
use crate::mpc::OnlineMpc;
use crate::penalty::{violation, CoveringRow, PackingSystem};
use crate::{Error, Result, SATISFACTION_SLACK};

/// An online algorithm as seen by the adversary.
pub trait OnlineResponder {
    /// Announces the packing system before any covering row is issued.
    fn begin(&mut self, packing: &PackingSystem) -> Result<()>;

    /// Accepts the next covering row and returns the full primal vector.
    fn respond(&mut self, row: &CoveringRow) -> Result<Vec<f64>>;
}

impl OnlineResponder for OnlineMpc {
    fn begin(&mut self, packing: &PackingSystem) -> Result<()> {
        *self = OnlineMpc::new(packing.clone());
        Ok(())
    }

    fn respond(&mut self, row: &CoveringRow) -> Result<Vec<f64>> {
        self.submit(row)?;
        Ok(self.x_total())
    }
}

/// Covers each deficient row by adding the same amount to every variable in
/// it. Used as a simple reference opponent.
#[derive(Clone, Debug, Default)]
pub struct UniformSplit {
    x: Vec<f64>,
}

impl OnlineResponder for UniformSplit {
    fn begin(&mut self, packing: &PackingSystem) -> Result<()> {
        self.x = vec![0.0; packing.cols()];
        Ok(())
    }

    fn respond(&mut self, row: &CoveringRow) -> Result<Vec<f64>> {
        let deficit = 1.0 - row.dot(&self.x);
        if deficit > 0.0 {
            let total: f64 = row.entries().iter().map(|(_, c)| c).sum();
            for &(j, _) in row.entries() {
                self.x[j] += deficit / total;
            }
        }
        Ok(self.x.clone())
    }
}

/// `H_d = 1 + 1/2 + ... + 1/d`.
pub fn harmonic(d: usize) -> f64 {
    (1..=d).map(|k| 1.0 / k as f64).sum()
}

/// Issues rows to a responder and validates its answers.
struct Session<'a, R: OnlineResponder + ?Sized> {
    responder: &'a mut R,
    x: Vec<f64>,
    transcript: Vec<CoveringRow>,
}

impl<'a, R: OnlineResponder + ?Sized> Session<'a, R> {
    fn start(responder: &'a mut R, packing: &PackingSystem) -> Result<Self> {
        responder.begin(packing)?;
        Ok(Self {
            responder,
            x: vec![0.0; packing.cols()],
            transcript: Vec::new(),
        })
    }

    fn issue(&mut self, row: CoveringRow) -> Result<()> {
        let next = self.responder.respond(&row)?;
        if next.len() != self.x.len() {
            return Err(Error::Protocol(format!(
                "response has {} entries, expected {}",
                next.len(),
                self.x.len()
            )));
        }
        for (j, (&new, &old)) in next.iter().zip(&self.x).enumerate() {
            if !new.is_finite() || new < old - SATISFACTION_SLACK * old.max(1.0) {
                return Err(Error::Protocol(format!(
                    "variable {j} moved from {old} to {new}"
                )));
            }
        }
        let coverage = row.dot(&next);
        if coverage < 1.0 - SATISFACTION_SLACK {
            return Err(Error::Protocol(format!(
                "row {} left at coverage {coverage}",
                self.transcript.len()
            )));
        }
        self.x = next;
        self.transcript.push(row);
        Ok(())
    }

    fn weight(&self, block: &[usize]) -> f64 {
        block.iter().map(|&j| self.x[j]).sum()
    }
}

/// Record of one two-block game.
#[derive(Clone, Debug)]
pub struct GameRecord {
    /// Stream indices of the `d` rows.
    pub rows: Vec<usize>,
    /// Combined value of the two variables removed after each round, read at
    /// removal time; the last entry is the surviving pair after the final
    /// round.
    pub removed_pair_values: Vec<f64>,
    /// `w(B1) + w(B2)` after each round.
    pub weight_after_round: Vec<f64>,
    pub w1: f64,
    pub w2: f64,
    /// The variables never removed from each block.
    pub survivors: (usize, usize),
}

fn argmax_lowest(x: &[f64], active: &[usize]) -> usize {
    let mut best = 0;
    for (pos, &j) in active.iter().enumerate() {
        if x[j] > x[active[best]] {
            best = pos;
        }
    }
    best
}

fn play_game<R: OnlineResponder + ?Sized>(
    session: &mut Session<'_, R>,
    b1: &[usize],
    b2: &[usize],
) -> Result<GameRecord> {
    let d = b1.len();
    if d == 0 || b2.len() != d {
        return Err(Error::Structural(format!(
            "blocks must have equal positive size, got {} and {}",
            b1.len(),
            b2.len()
        )));
    }
    let (mut a1, mut a2) = (b1.to_vec(), b2.to_vec());
    let mut record = GameRecord {
        rows: Vec::with_capacity(d),
        removed_pair_values: Vec::with_capacity(d),
        weight_after_round: Vec::with_capacity(d),
        w1: 0.0,
        w2: 0.0,
        survivors: (0, 0),
    };
    for round in 0..d {
        let mut cols: Vec<usize> = a1.iter().chain(&a2).copied().collect();
        cols.sort_unstable();
        record.rows.push(session.transcript.len());
        session.issue(CoveringRow::unit(cols)?)?;
        record
            .weight_after_round
            .push(session.weight(b1) + session.weight(b2));
        if round + 1 < d {
            let i1 = argmax_lowest(&session.x, &a1);
            let i2 = argmax_lowest(&session.x, &a2);
            record
                .removed_pair_values
                .push(session.x[a1[i1]] + session.x[a2[i2]]);
            a1.remove(i1);
            a2.remove(i2);
        } else {
            record
                .removed_pair_values
                .push(session.x[a1[0]] + session.x[a2[0]]);
        }
    }
    record.w1 = session.weight(b1);
    record.w2 = session.weight(b2);
    record.survivors = (a1[0], a2[0]);
    Ok(record)
}

/// Outcome of a standalone two-block game.
#[derive(Clone, Debug)]
pub struct TwoBlockOutcome {
    pub packing: PackingSystem,
    pub transcript: Vec<CoveringRow>,
    pub game: GameRecord,
    pub x: Vec<f64>,
}

/// Plays the two-block game on blocks `0..d` and `d..2d`. The responder is
/// told about two packing rows, one per block.
pub fn two_block_game<R: OnlineResponder + ?Sized>(d: usize, responder: &mut R) -> Result<TwoBlockOutcome> {
    if d == 0 {
        return Err(Error::Structural("block size must be positive".into()));
    }
    let triplets: Vec<_> = (0..2 * d).map(|j| (j / d, j, 1.0)).collect();
    let packing = PackingSystem::from_triplets(2, 2 * d, &triplets)?;
    let b1: Vec<usize> = (0..d).collect();
    let b2: Vec<usize> = (d..2 * d).collect();
    let mut session = Session::start(responder, &packing)?;
    let game = play_game(&mut session, &b1, &b2)?;
    Ok(TwoBlockOutcome {
        packing,
        transcript: session.transcript,
        game,
        x: session.x,
    })
}

/// A completed run of the tree adversary.
#[derive(Clone, Debug)]
pub struct TreeAdversaryRun {
    pub m: usize,
    pub d: usize,
    pub packing: PackingSystem,
    pub transcript: Vec<CoveringRow>,
    /// Nodes visited by the descent, root first, ending at a leaf.
    pub path: Vec<usize>,
    pub marked: Vec<usize>,
    /// One game per internal node on the path, in descent order.
    pub games: Vec<GameRecord>,
    /// The algorithm's final primal vector.
    pub x: Vec<f64>,
}

impl TreeAdversaryRun {
    pub fn leaf(&self) -> usize {
        *self.path.last().expect("path is never empty")
    }

    /// Packing row owned by the leaf the descent reached.
    pub fn leaf_row(&self) -> usize {
        self.leaf() - self.m
    }

    /// `λ(x)` of the algorithm's final vector.
    pub fn lambda(&self) -> f64 {
        violation(&self.packing, &self.x).expect("x matches packing width")
    }

    /// The guaranteed value `log₂m · H_d / 2`.
    pub fn target(&self) -> f64 {
        self.m.trailing_zeros() as f64 * harmonic(self.d) / 2.0
    }

    /// Survivor of the block of `node` in the game where that block was played.
    fn survivor(&self, node: usize) -> Option<usize> {
        let parent = node / 2;
        let pos = self.path.iter().position(|&v| v == parent)?;
        let game = self.games.get(pos)?;
        Some(if node % 2 == 0 { game.survivors.0 } else { game.survivors.1 })
    }
}

/// Variables of the block owned by `node`.
pub fn block(node: usize, d: usize) -> std::ops::Range<usize> {
    (node - 2) * d..(node - 1) * d
}

/// Packing rows of the tree: leaf `m + k` owns row `k`, which has unit
/// coefficients on every block along its root path.
pub fn tree_packing(m: usize, d: usize) -> Result<PackingSystem> {
    check_tree_sizes(m, d)?;
    let mut triplets = Vec::new();
    for k in 0..m {
        let mut v = m + k;
        while v >= 2 {
            triplets.extend(block(v, d).map(|j| (k, j, 1.0)));
            v /= 2;
        }
    }
    PackingSystem::from_triplets(m, 2 * (m - 1) * d, &triplets)
}

fn check_tree_sizes(m: usize, d: usize) -> Result<()> {
    if m < 2 || !m.is_power_of_two() || d == 0 || !d.is_power_of_two() {
        return Err(Error::Structural(format!(
            "tree adversary needs powers of two with m >= 2, got m={m} d={d}"
        )));
    }
    Ok(())
}

/// Runs the descent: at each internal node play the two-block game on the
/// children's blocks, step to the heavier child (left on ties) and mark the
/// other one.
pub fn tree_adversary<R: OnlineResponder + ?Sized>(m: usize, d: usize, responder: &mut R) -> Result<TreeAdversaryRun> {
    let packing = tree_packing(m, d)?;
    let mut session = Session::start(responder, &packing)?;
    let (mut path, mut marked, mut games) = (vec![1usize], Vec::new(), Vec::new());
    let mut v = 1;
    while v < m {
        let left: Vec<usize> = block(2 * v, d).collect();
        let right: Vec<usize> = block(2 * v + 1, d).collect();
        let game = play_game(&mut session, &left, &right)?;
        if game.w1 >= game.w2 {
            marked.push(2 * v + 1);
            v *= 2;
        } else {
            marked.push(2 * v);
            v = 2 * v + 1;
        }
        games.push(game);
        path.push(v);
    }
    Ok(TreeAdversaryRun {
        m,
        d,
        packing,
        transcript: session.transcript,
        path,
        marked,
        games,
        x: session.x,
    })
}

/// Integral solution setting the surviving variable of every marked block to
/// one.
pub fn optimal_witness(run: &TreeAdversaryRun) -> Result<Vec<f64>> {
    if run.path.len() != run.m.trailing_zeros() as usize + 1 || run.leaf() < run.m {
        return Err(Error::Structural("adversary run is incomplete".into()));
    }
    let mut x = vec![0.0; run.packing.cols()];
    for &node in &run.marked {
        let j = run
            .survivor(node)
            .ok_or_else(|| Error::Structural(format!("marked node {node} has no game")))?;
        x[j] = 1.0;
    }
    Ok(x)
}

/// The job sequence on `m` machines where machine `i` (1-based) costs
/// `e^{m(i-1)}`. Odd job `j` runs on machine 1 in `T*` or on machine
/// `(j+3)/2` in `eps`; even job `j` runs only on machine `(j+2)/2` in
/// `T* - eps`. `eps` defaults to `T*/(4m)`.
pub fn umsc_lower_bound(m: usize, t_star: f64, eps: Option<f64>) -> Result<UmscInstance> {
    if m < 2 {
        return Err(Error::Structural(format!("need at least two machines, got {m}")));
    }
    let eps = eps.unwrap_or(t_star / (4.0 * m as f64));
    if !(t_star.is_finite() && eps > 0.0 && eps < t_star) {
        return Err(Error::Domain(format!("need 0 < eps < T*, got eps={eps} T*={t_star}")));
    }
    let costs = (1..=m).map(|i| (m as f64 * (i - 1) as f64).exp()).collect();
    let jobs = (1..=2 * (m - 1))
        .map(|j| {
            if j % 2 == 1 {
                vec![(0, t_star), ((j + 3) / 2 - 1, eps)]
            } else {
                vec![((j + 2) / 2 - 1, t_star - eps)]
            }
        })
        .collect();
    UmscInstance::new(costs, jobs)
}

/// Assignment of the first `k` jobs (`k` even) that leaves machine 1 idle:
/// odd job `j` to machine `(j+3)/2`, even job `j` to machine `(j+2)/2`.
/// Returns 0-based machine ids.
pub fn umsc_offline_assignment(k: usize) -> Result<Vec<usize>> {
    if k % 2 != 0 {
        return Err(Error::Domain(format!("prefix length must be even, got {k}")));
    }
    Ok((1..=k)
        .map(|j| if j % 2 == 1 { (j + 3) / 2 - 1 } else { (j + 2) / 2 - 1 })
        .collect())
}
