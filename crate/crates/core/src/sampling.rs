//! Randomness as an explicit choice interface.
//!
//! Every probabilistic procedure in the lab (party tapes, channel draws,
//! ideal-functionality sampling, the simulator's own coins) asks a
//! [`Chooser`] for an index into a list of weighted options. The same
//! procedure can then be enumerated exactly (by replaying every choice path)
//! or sampled with a seeded RNG.

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::prob::{one, to_f64, Prob};

pub trait Chooser {
    /// Picks an option index. `weights` are non-negative and need not be
    /// normalised; zero-weight options are never returned by samplers.
    fn choose(&mut self, weights: &[Prob]) -> usize;
}

/// Uniform choice among `n` options.
pub fn choose_uniform(ch: &mut dyn Chooser, n: usize) -> usize {
    let w = vec![one(); n];
    ch.choose(&w)
}

/// Picks one of `options` by weight and returns a clone of it.
pub fn pick<T: Clone>(ch: &mut dyn Chooser, options: &[(T, Prob)]) -> T {
    let w: Vec<Prob> = options.iter().map(|(_, p)| p.clone()).collect();
    options[ch.choose(&w)].0.clone()
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("enumeration needs more than {bound} branches")]
pub struct BoundExceeded {
    pub bound: u64,
}

struct Replay<'a> {
    path: &'a mut Vec<(usize, usize)>,
    pos: usize,
    weight: Prob,
}

impl Chooser for Replay<'_> {
    fn choose(&mut self, weights: &[Prob]) -> usize {
        assert!(!weights.is_empty(), "choice over zero options");
        if self.pos == self.path.len() {
            self.path.push((0, weights.len()));
        }
        let (idx, fanout) = self.path[self.pos];
        assert_eq!(fanout, weights.len(), "procedure is not deterministic under replay");
        self.pos += 1;
        let total: Prob = weights.iter().sum();
        if total.is_zero() {
            self.weight = Prob::zero();
        } else {
            self.weight = &self.weight * &weights[idx] / total;
        }
        idx
    }
}

/// Runs `f` once for every choice path and returns each result with the
/// exact probability of its path. Zero-probability paths are dropped.
///
/// `f` must be deterministic apart from its calls to the chooser.
pub fn enumerate<T>(bound: u64, mut f: impl FnMut(&mut dyn Chooser) -> T) -> Result<Vec<(T, Prob)>, BoundExceeded> {
    let mut path: Vec<(usize, usize)> = Vec::new();
    let mut out = Vec::new();
    let mut leaves: u64 = 0;
    loop {
        leaves += 1;
        if leaves > bound {
            return Err(BoundExceeded { bound });
        }
        let mut replay = Replay {
            path: &mut path,
            pos: 0,
            weight: one(),
        };
        let value = f(&mut replay);
        let (used, weight) = (replay.pos, replay.weight);
        path.truncate(used);
        if !weight.is_zero() {
            out.push((value, weight));
        }
        // odometer step
        loop {
            match path.last_mut() {
                None => return Ok(out),
                Some((idx, fanout)) if *idx + 1 < *fanout => {
                    *idx += 1;
                    break;
                }
                Some(_) => {
                    path.pop();
                }
            }
        }
    }
}

/// Seeded pseudo-random chooser for sampling mode.
pub struct SampleChooser {
    rng: ChaCha20Rng,
}

impl SampleChooser {
    pub fn new(seed: u64) -> Self {
        SampleChooser {
            rng: ChaCha20Rng::seed_from_u64(seed),
        }
    }
}

impl SampleChooser {
    /// Index drawn proportionally to non-negative float weights.
    pub fn choose_f64(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let mut u = self.rng.random::<f64>() * total;
        let mut last_positive = 0;
        for (i, wi) in weights.iter().enumerate() {
            if *wi <= 0.0 {
                continue;
            }
            last_positive = i;
            if u < *wi {
                return i;
            }
            u -= wi;
        }
        last_positive
    }
}

impl Chooser for SampleChooser {
    fn choose(&mut self, weights: &[Prob]) -> usize {
        let w: Vec<f64> = weights.iter().map(to_f64).collect();
        self.choose_f64(&w)
    }
}
